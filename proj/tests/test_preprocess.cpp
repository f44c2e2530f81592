#include <doctest.h>

#include <limits>

#include "helpers.hpp"
#include "nbcoded/errors.hpp"
#include "nbcoded/preprocess.hpp"
#include "nbcoded/random.hpp"
#include "nbcoded/synthetic.hpp"

using namespace nbcoded;

namespace {

data::Dataset tiny_dataset() {
    auto names = std::make_shared<const std::vector<std::string>>(
        std::vector<std::string>{"sload", "sttl", "dload"});
    std::vector<data::FlowRecord> records;
    const std::vector<std::string> services = {"dns", "http", "-", "ftp", "smtp"};
    for (std::size_t i = 0; i < services.size(); ++i) {
        data::FlowRecord r;
        r.values = {double(i), 10.0 * double(i), 100.0};
        r.service = services[i];
        r.label = i % 2 == 0 ? 0 : 1;
        r.id = i + 1;
        records.push_back(r);
    }
    return data::Dataset{names, records, "tiny"};
}

} // namespace

TEST_CASE("service filter keeps allowed services in order") {
    const auto ds = tiny_dataset();
    const auto kept = preprocess::filter_services(ds, preprocess::kDefaultServices);
    REQUIRE(kept.size() == 3);
    CHECK(kept.records()[0].service == "dns");
    CHECK(kept.records()[1].service == "-");
    CHECK(kept.records()[2].service == "ftp");

    std::set<std::string> everything = {"dns", "http", "-", "ftp", "smtp"};
    const auto same = preprocess::filter_services(ds, everything);
    REQUIRE(same.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(same.records()[i].id == ds.records()[i].id);
}

TEST_CASE("a filter that removes everything warns instead of failing") {
    std::vector<std::string> warnings;
    const auto none = preprocess::filter_services(tiny_dataset(), {"ssh"}, &warnings);
    CHECK(none.empty());
    CHECK(warnings.size() == 1);
}

TEST_CASE("feature selection and unknown names") {
    const auto ds = tiny_dataset();
    const auto m = preprocess::select_features(ds, {"dload", "sload"});
    CHECK(m.cols() == 2);
    CHECK(m.rows() == 5);
    CHECK(m.values(3, 0) == 100.0);
    CHECK(m.values(3, 1) == 3.0);
    CHECK(m.labels[3] == 1);
    CHECK(m.row_ids[3] == 4);

    try {
        preprocess::select_features(ds, {"sload", "sloadd", "ttl"});
        FAIL("expected a DataError");
    } catch (const DataError &e) {
        const std::string what = e.what();
        CHECK(what.find("sloadd") != std::string::npos);
        CHECK(what.find("ttl") != std::string::npos);
    }
}

TEST_CASE("default features come from the synthetic generator") {
    synthetic::FlowGeneratorConfig g;
    g.rows = 200;
    const auto m = preprocess::select_features(synthetic::generate_flows(g));
    CHECK(m.cols() == 9);
    CHECK(m.column_names == preprocess::kDefaultFeatures);
}

TEST_CASE("min-max scaling examples") {
    preprocess::FeatureMatrix m;
    m.values.resize(3, 2);
    m.values << 0, 5, 5, 5, 10, 5;
    m.column_names = {"a", "const"};
    m.labels = {0, 1, 0};
    const auto norm = preprocess::fit_normalizer(m);
    CHECK(norm.min[0] == 0.0);
    CHECK(norm.max[0] == 10.0);
    const auto scaled = preprocess::apply_normalizer(norm, m);
    CHECK(scaled.values(0, 0) == 0.0);
    CHECK(scaled.values(1, 0) == 0.5);
    CHECK(scaled.values(2, 0) == 1.0);
    for (int i = 0; i < 3; ++i) CHECK(scaled.values(i, 1) == 0.0);

    // Unseen values clamp.
    std::vector<double> row = {-5.0, 7.0};
    preprocess::apply_normalizer(norm, row);
    CHECK(row[0] == 0.0);
    CHECK(row[1] == 0.0);
    row = {25.0, 5.0};
    preprocess::apply_normalizer(norm, row);
    CHECK(row[0] == 1.0);

    std::vector<double> wrong = {1.0};
    CHECK_THROWS_AS(preprocess::apply_normalizer(norm, wrong), ModelError);
    preprocess::FeatureMatrix empty;
    CHECK_THROWS_AS(preprocess::fit_normalizer(empty), ModelError);
}

TEST_CASE("normalizer matches a brute-force min/max and stays in [0, 1]") {
    Rng rng{11};
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(200), d = 1 + rng.below(9);
        preprocess::FeatureMatrix m;
        m.values.resize(long(n), long(d));
        for (std::size_t j = 0; j < d; ++j) m.column_names.push_back("c" + std::to_string(j));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) m.values(long(i), long(j)) = std::exp(3 * rng.normal());
            m.labels.push_back(int(i % 2));
        }
        const auto norm = preprocess::fit_normalizer(m);
        for (std::size_t j = 0; j < d; ++j) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (std::size_t i = 0; i < n; ++i) {
                lo = std::min(lo, m.values(long(i), long(j)));
                hi = std::max(hi, m.values(long(i), long(j)));
            }
            CHECK(norm.min[long(j)] == lo);
            CHECK(norm.max[long(j)] == hi);
        }
        const auto scaled = preprocess::apply_normalizer(norm, m);
        CHECK(scaled.values.minCoeff() >= 0.0);
        CHECK(scaled.values.maxCoeff() <= 1.0);
        // Random out-of-range probes also land in [0, 1].
        for (int probe = 0; probe < 50; ++probe) {
            std::vector<double> row(d);
            for (auto &v : row) v = 1e6 * rng.normal();
            preprocess::apply_normalizer(norm, row);
            for (double v : row) CHECK((v >= 0.0 && v <= 1.0));
        }
    }
}

TEST_CASE("feature matrix validation and subsets") {
    auto m = testing::blobs(5, 5, 3, 1);
    CHECK_NOTHROW(m.validate());
    const std::vector<std::size_t> pick = {7, 2};
    const auto sub = m.subset(pick);
    CHECK(sub.rows() == 2);
    CHECK(sub.labels == std::vector<int>{1, 0});
    CHECK(sub.row_ids == std::vector<std::uint64_t>{8, 3});
    CHECK(sub.values.row(0) == m.values.row(7));
    m.labels.pop_back();
    CHECK_THROWS_AS(m.validate(), ModelError);
}
