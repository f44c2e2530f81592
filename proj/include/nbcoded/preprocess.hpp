#ifndef NBCODED_PREPROCESS_HPP
#define NBCODED_PREPROCESS_HPP

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nbcoded/data.hpp"

namespace nbcoded {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace nbcoded

namespace nbcoded::preprocess {

/// The selected flow features, in the column order models are trained on.
inline const std::vector<std::string> kDefaultFeatures = {
    "sload", "dload", "dmeansz", "smeansz", "stcpb", "dtcpb", "sttl", "djit", "trans_depth"};

/// Services kept by the default filter. UNSW-NB15 writes the unknown service as "-".
inline const std::set<std::string> kDefaultServices = {"-", "ftp", "dns"};

/// Dense row-major observations with per-row binary labels.
struct FeatureMatrix {
    RowMatrix values;
    std::vector<std::string> column_names;
    std::vector<int> labels;
    /// FlowRecord::id of each row, when the matrix came from a dataset.
    std::vector<std::uint64_t> row_ids;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }

    /// Throws ModelError unless labels (and row ids, when present) match the row count.
    void validate() const;

    /// Rows picked by index, in the given order.
    FeatureMatrix subset(std::span<const std::size_t> rows) const;
};

/// Keeps rows whose service is in `allowed`, in order. An empty result adds
/// a message to `warnings` (when given) instead of failing.
data::Dataset filter_services(const data::Dataset &dataset, const std::set<std::string> &allowed,
                              std::vector<std::string> *warnings = nullptr);

/// Builds a matrix of the named features in the given order.
/// Throws DataError listing every unknown name.
FeatureMatrix select_features(const data::Dataset &dataset,
                              const std::vector<std::string> &names = kDefaultFeatures);

/// Per-column min-max scaler fitted on training rows.
struct Normalizer {
    std::vector<std::string> column_names;
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    std::size_t cols() const noexcept { return column_names.size(); }

    /// (x - min) / (max - min) clamped to [0, 1]; constant columns map to 0.
    double scale(std::size_t column, double x) const noexcept;

    bool operator==(const Normalizer &other) const;
};

/// Throws ModelError for an empty matrix.
Normalizer fit_normalizer(const FeatureMatrix &train);

/// Throws ModelError when the matrix columns differ from the fitted ones.
FeatureMatrix apply_normalizer(const Normalizer &norm, const FeatureMatrix &matrix);

/// Normalizes one raw feature vector in place.
void apply_normalizer(const Normalizer &norm, std::span<double> row);

} // namespace nbcoded::preprocess

#endif
