#include "nbcoded/preprocess.hpp"

#include <algorithm>

#include "nbcoded/errors.hpp"

namespace nbcoded::preprocess {

void FeatureMatrix::validate() const {
    if (labels.size() != rows()) {
        throw ModelError("feature matrix has " + std::to_string(rows()) + " rows but " +
                         std::to_string(labels.size()) + " labels");
    }
    if (!row_ids.empty() && row_ids.size() != rows()) {
        throw ModelError("feature matrix row ids do not match the row count");
    }
    if (column_names.size() != cols()) {
        throw ModelError("feature matrix column names do not match the column count");
    }
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> rows) const {
    FeatureMatrix out;
    out.column_names = column_names;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    out.labels.reserve(rows.size());
    if (!row_ids.empty()) {
        out.row_ids.reserve(rows.size());
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(rows[i]));
        out.labels.push_back(labels.at(rows[i]));
        if (!row_ids.empty()) {
            out.row_ids.push_back(row_ids[rows[i]]);
        }
    }
    return out;
}

data::Dataset filter_services(const data::Dataset &dataset, const std::set<std::string> &allowed,
                              std::vector<std::string> *warnings) {
    std::vector<data::FlowRecord> kept;
    for (const auto &r : dataset.records()) {
        if (allowed.contains(r.service)) {
            kept.push_back(r);
        }
    }
    if (kept.empty() && warnings != nullptr) {
        warnings->push_back("service filter removed every record of '" + dataset.source_id() +
                            "'");
    }
    return dataset.with_records(std::move(kept), dataset.source_id());
}

FeatureMatrix select_features(const data::Dataset &dataset, const std::vector<std::string> &names) {
    std::vector<std::size_t> columns;
    std::string unknown;
    for (const auto &name : names) {
        if (const auto index = dataset.feature_index(name)) {
            columns.push_back(*index);
        } else {
            unknown += (unknown.empty() ? "" : ", ") + name;
        }
    }
    if (!unknown.empty()) {
        throw DataError("unknown feature name(s): " + unknown);
    }

    FeatureMatrix out;
    for (auto c : columns) {
        out.column_names.push_back((*dataset.feature_names())[c]);
    }
    const auto n = static_cast<Eigen::Index>(dataset.size());
    out.values.resize(n, static_cast<Eigen::Index>(columns.size()));
    out.labels.reserve(dataset.size());
    out.row_ids.reserve(dataset.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &record = dataset.records()[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < columns.size(); ++j) {
            out.values(i, static_cast<Eigen::Index>(j)) = record.values[columns[j]];
        }
        out.labels.push_back(record.label);
        out.row_ids.push_back(record.id);
    }
    return out;
}

double Normalizer::scale(std::size_t column, double x) const noexcept {
    const auto c = static_cast<Eigen::Index>(column);
    const double range = max[c] - min[c];
    if (!(range > 0.0)) {
        return 0.0;
    }
    return std::clamp((x - min[c]) / range, 0.0, 1.0);
}

bool Normalizer::operator==(const Normalizer &other) const {
    return column_names == other.column_names && min == other.min && max == other.max;
}

Normalizer fit_normalizer(const FeatureMatrix &train) {
    if (train.rows() == 0) {
        throw ModelError("cannot fit a normalizer on an empty matrix");
    }
    Normalizer norm;
    norm.column_names = train.column_names;
    norm.min = train.values.colwise().minCoeff().transpose();
    norm.max = train.values.colwise().maxCoeff().transpose();
    return norm;
}

FeatureMatrix apply_normalizer(const Normalizer &norm, const FeatureMatrix &matrix) {
    if (matrix.column_names != norm.column_names) {
        throw ModelError("normalizer was fitted on different columns");
    }
    FeatureMatrix out = matrix;
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
            out.values(i, j) = norm.scale(static_cast<std::size_t>(j), out.values(i, j));
        }
    }
    return out;
}

void apply_normalizer(const Normalizer &norm, std::span<double> row) {
    if (row.size() != norm.cols()) {
        throw ModelError("expected " + std::to_string(norm.cols()) + " features, got " +
                         std::to_string(row.size()));
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = norm.scale(j, row[j]);
    }
}

} // namespace nbcoded::preprocess
