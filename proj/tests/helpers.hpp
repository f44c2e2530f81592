#ifndef NBCODED_TEST_HELPERS_HPP
#define NBCODED_TEST_HELPERS_HPP

#include <sstream>
#include <string>
#include <vector>

#include "nbcoded/data.hpp"
#include "nbcoded/preprocess.hpp"
#include "nbcoded/random.hpp"

namespace testing {

// One UNSW-NB15 style CSV row. Numeric cells get `base + column`, unless
// overridden by name in `numeric`.
inline std::string unsw_row(const nbcoded::data::Schema &schema, int label,
                            const std::string &service = "dns",
                            const std::vector<std::pair<std::string, std::string>> &numeric = {},
                            double base = 0.0) {
    std::ostringstream row;
    for (const auto &c : schema.columns()) {
        if (c.index > 0) row << ',';
        if (c.type == nbcoded::data::ColumnType::kLabel) {
            row << label;
            continue;
        }
        if (c.name == "service") {
            row << service;
            continue;
        }
        if (c.name == "attack_cat") {
            row << (label == 1 ? "Generic" : "");
            continue;
        }
        bool written = false;
        for (const auto &[name, value] : numeric) {
            if (name == c.name) {
                row << value;
                written = true;
            }
        }
        if (written) continue;
        if (c.type == nbcoded::data::ColumnType::kToken) {
            row << (c.name == "srcip" ? "10.0.0.1" : "0");
        } else {
            row << base + static_cast<double>(c.index);
        }
    }
    return row.str();
}

// Two blobs of non-negative rows with `n0` / `n1` members.
inline nbcoded::preprocess::FeatureMatrix blobs(std::size_t n0, std::size_t n1, std::size_t d,
                                                std::uint64_t seed, double gap = 1.5) {
    nbcoded::Rng rng{seed};
    nbcoded::preprocess::FeatureMatrix m;
    m.values.resize(static_cast<Eigen::Index>(n0 + n1), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) m.column_names.push_back("f" + std::to_string(j));
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        const int y = i < n0 ? 0 : 1;
        for (std::size_t j = 0; j < d; ++j) {
            const double centre = 2.0 + (y == 1 ? gap * (j % 2 == 0 ? 1.0 : -0.5) : 0.0);
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::max(0.0, centre + 0.5 * rng.normal());
        }
        m.labels.push_back(y);
        m.row_ids.push_back(i + 1);
    }
    return m;
}

} // namespace testing

#endif
