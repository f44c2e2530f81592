#ifndef NBCODED_DATA_HPP
#define NBCODED_DATA_HPP

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nbcoded::data {

enum class ColumnType { kNumeric, kToken, kLabel };

struct Column {
    std::size_t index = 0;
    std::string name;
    ColumnType type = ColumnType::kNumeric;
};

/// Column layout of a headerless flow CSV, keyed by column index.
///
/// Text form, one column per line, `#` starts a comment:
///
///     <index> = <name>, <numeric|token|label>
///
/// Names are folded to lower case. Exactly one `label` column is required;
/// token columns named `service` and `attack_cat` feed FlowRecord::service
/// and FlowRecord::attack_family.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<Column> columns);

    static Schema parse(std::istream &in);
    static Schema load(const std::string &path);

    std::size_t column_count() const noexcept { return columns_.size(); }
    const std::vector<Column> &columns() const noexcept { return columns_; }
    const Column &label_column() const { return columns_[label_index_]; }
    std::optional<std::size_t> find(std::string_view name) const;

private:
    std::vector<Column> columns_;
    std::size_t label_index_ = 0;
};

/// The 49-column UNSW-NB15 layout bundled with the project.
Schema unsw_nb15_schema();

/// Ordered names of the numeric features carried by every record of a dataset.
using FeatureNames = std::shared_ptr<const std::vector<std::string>>;

/// One flow row. `values` is aligned with the owning dataset's feature names.
struct FlowRecord {
    std::vector<double> values;
    std::string service;
    int label = 0;
    std::optional<std::string> attack_family;
    /// Stable identity, the 1-based source line for parsed records.
    std::uint64_t id = 0;
};

class Dataset {
public:
    Dataset() : features_{std::make_shared<const std::vector<std::string>>()} {}
    Dataset(FeatureNames features, std::vector<FlowRecord> records, std::string source_id);

    const std::vector<FlowRecord> &records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::string &source_id() const noexcept { return source_id_; }

    const FeatureNames &feature_names() const noexcept { return features_; }
    std::optional<std::size_t> feature_index(std::string_view name) const;
    /// Value of a named feature for one record; throws DataError for unknown names.
    double feature(std::size_t row, std::string_view name) const;

    /// Same feature layout, different rows.
    Dataset with_records(std::vector<FlowRecord> records, std::string source_id) const;

private:
    FeatureNames features_;
    std::vector<FlowRecord> records_;
    std::string source_id_;
};

struct ParseOptions {
    /// Keep only these numeric columns (all numeric columns when empty).
    std::vector<std::string> keep_features;
    std::string source_id = "stream";
};

/// Parses a headerless comma-separated flow capture.
///
/// Every data row must have exactly `schema.column_count()` cells. Empty or
/// unparsable numeric cells and a missing or non-binary label throw DataError
/// carrying the line number; an input without data rows is a dataset-level
/// DataError.
Dataset parse_flow_csv(std::istream &in, const Schema &schema, const ParseOptions &options = {});

/// Parses and concatenates several capture files in order.
Dataset load_flow_csv(std::span<const std::string> paths, const Schema &schema,
                      const ParseOptions &options = {});

/// Concatenates datasets sharing one feature layout.
Dataset concatenate(std::span<const Dataset> parts, std::string source_id);

struct ClassCounts {
    std::size_t normal = 0;
    std::size_t attack = 0;

    std::size_t total() const noexcept { return normal + attack; }
    bool operator==(const ClassCounts &) const = default;
};

ClassCounts class_counts(const Dataset &dataset);
ClassCounts class_counts(std::span<const int> labels);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified partition of row indices.
///
/// The train part receives round(n * train_fraction) rows, allocated to
/// classes by largest remainder so each class share is within one record of
/// the exact fraction; each class keeps at least one row on each side.
/// Index order inside each part is ascending. Throws DataError when a class
/// has fewer than two rows or the fraction is outside (0, 1).
SplitIndices stratified_indices(std::span<const int> labels, double train_fraction,
                                std::uint64_t seed);

std::pair<Dataset, Dataset> stratified_split(const Dataset &dataset, double train_fraction,
                                             std::uint64_t seed);

/// One JSON object per record: {"id", "label", "service", "attack_cat", "features": {...}}.
void write_ndjson(const Dataset &dataset, std::ostream &out);

} // namespace nbcoded::data

#endif
