#include "nbcoded/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "nbcoded/errors.hpp"
#include "nbcoded/random.hpp"
#include "unsw_schema_text.hpp"

namespace nbcoded::data {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
    std::string out{s};
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void split_cells(std::string_view line, std::vector<std::string_view> &cells) {
    cells.clear();
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::optional<double> parse_number(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) {
        return std::nullopt;
    }
    if (cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || end != cell.data() + cell.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

ColumnType parse_type(std::string_view token, std::size_t line) {
    const auto t = lower(trim(token));
    if (t == "numeric") return ColumnType::kNumeric;
    if (t == "token") return ColumnType::kToken;
    if (t == "label") return ColumnType::kLabel;
    throw DataError("schema: unknown column type '" + t + "'", line);
}

} // namespace

Schema::Schema(std::vector<Column> columns) : columns_{std::move(columns)} {
    std::sort(columns_.begin(), columns_.end(),
              [](const Column &a, const Column &b) { return a.index < b.index; });
    std::optional<std::size_t> label;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].index != i) {
            throw DataError("schema: column indices must be contiguous from 0 (missing " +
                            std::to_string(i) + ")");
        }
        columns_[i].name = lower(columns_[i].name);
        for (std::size_t j = 0; j < i; ++j) {
            if (columns_[j].name == columns_[i].name) {
                throw DataError("schema: duplicate column name '" + columns_[i].name + "'");
            }
        }
        if (columns_[i].type == ColumnType::kLabel) {
            if (label) {
                throw DataError("schema: more than one label column");
            }
            label = i;
        }
    }
    if (!label) {
        throw DataError("schema: no label column");
    }
    label_index_ = *label;
}

Schema Schema::parse(std::istream &in) {
    std::vector<Column> columns;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const auto comma = line.find(',', eq == std::string_view::npos ? 0 : eq);
        if (eq == std::string_view::npos || comma == std::string_view::npos) {
            throw DataError("schema: expected '<index> = <name>, <type>'", line_no);
        }
        const auto index_text = trim(line.substr(0, eq));
        std::size_t index = 0;
        const auto [end, ec] =
            std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
        if (ec != std::errc{} || end != index_text.data() + index_text.size()) {
            throw DataError("schema: bad column index '" + std::string{index_text} + "'", line_no);
        }
        const auto name = trim(line.substr(eq + 1, comma - eq - 1));
        if (name.empty()) {
            throw DataError("schema: empty column name", line_no);
        }
        columns.push_back({index, std::string{name}, parse_type(line.substr(comma + 1), line_no)});
    }
    return Schema{std::move(columns)};
}

Schema Schema::load(const std::string &path) {
    std::ifstream in{path};
    if (!in) {
        throw DataError("cannot open schema file '" + path + "'");
    }
    return parse(in);
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
    const auto key = lower(name);
    for (const auto &c : columns_) {
        if (c.name == key) {
            return c.index;
        }
    }
    return std::nullopt;
}

Schema unsw_nb15_schema() {
    std::istringstream in{std::string{kUnswSchemaText}};
    return Schema::parse(in);
}

Dataset::Dataset(FeatureNames features, std::vector<FlowRecord> records, std::string source_id)
    : features_{std::move(features)}, records_{std::move(records)},
      source_id_{std::move(source_id)} {
    for (const auto &r : records_) {
        if (r.label != 0 && r.label != 1) {
            throw DataError("record " + std::to_string(r.id) + " has non-binary label");
        }
        if (r.values.size() != features_->size()) {
            throw DataError("record " + std::to_string(r.id) + " does not match feature layout");
        }
    }
}

std::optional<std::size_t> Dataset::feature_index(std::string_view name) const {
    const auto key = lower(name);
    const auto &names = *features_;
    const auto it = std::find(names.begin(), names.end(), key);
    if (it == names.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - names.begin());
}

double Dataset::feature(std::size_t row, std::string_view name) const {
    const auto index = feature_index(name);
    if (!index) {
        throw DataError("unknown feature '" + std::string{name} + "'");
    }
    return records_.at(row).values[*index];
}

Dataset Dataset::with_records(std::vector<FlowRecord> records, std::string source_id) const {
    return Dataset{features_, std::move(records), std::move(source_id)};
}

Dataset parse_flow_csv(std::istream &in, const Schema &schema, const ParseOptions &options) {
    struct Target {
        std::size_t column;
        std::size_t slot;
    };
    std::vector<std::string> names;
    std::vector<Target> numeric;
    if (options.keep_features.empty()) {
        for (const auto &c : schema.columns()) {
            if (c.type == ColumnType::kNumeric) {
                numeric.push_back({c.index, names.size()});
                names.push_back(c.name);
            }
        }
    } else {
        for (const auto &wanted : options.keep_features) {
            const auto index = schema.find(wanted);
            if (!index || schema.columns()[*index].type != ColumnType::kNumeric) {
                throw DataError("'" + wanted + "' is not a numeric column of the schema");
            }
            numeric.push_back({*index, names.size()});
            names.push_back(schema.columns()[*index].name);
        }
    }
    const auto service_col = schema.find("service");
    const auto family_col = schema.find("attack_cat");
    const auto label_col = schema.label_column().index;
    const auto expected = schema.column_count();

    std::vector<FlowRecord> records;
    std::vector<std::string_view> cells;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (trim(raw).empty()) {
            continue;
        }
        split_cells(raw, cells);
        if (cells.size() != expected) {
            throw DataError("expected " + std::to_string(expected) + " columns, found " +
                                std::to_string(cells.size()),
                            line_no);
        }
        FlowRecord record;
        record.id = line_no;
        record.values.resize(numeric.size());
        for (const auto &t : numeric) {
            const auto value = parse_number(cells[t.column]);
            if (!value) {
                throw DataError("column " + std::to_string(t.column) + " (" + names[t.slot] +
                                    "): not a finite number: '" +
                                    std::string{trim(cells[t.column])} + "'",
                                line_no);
            }
            record.values[t.slot] = *value;
        }
        const auto label_cell = trim(cells[label_col]);
        if (label_cell.empty()) {
            throw DataError("missing label", line_no);
        }
        const auto label = parse_number(label_cell);
        if (!label || (*label != 0.0 && *label != 1.0)) {
            throw DataError("label must be 0 or 1, found '" + std::string{label_cell} + "'",
                            line_no);
        }
        record.label = static_cast<int>(*label);
        if (service_col) {
            record.service = trim(cells[*service_col]);
        }
        if (family_col) {
            const auto family = trim(cells[*family_col]);
            if (!family.empty()) {
                record.attack_family = std::string{family};
            }
        }
        records.push_back(std::move(record));
    }
    if (records.empty()) {
        throw DataError("input '" + options.source_id + "' contains no data rows");
    }
    return Dataset{std::make_shared<const std::vector<std::string>>(std::move(names)),
                   std::move(records), options.source_id};
}

Dataset load_flow_csv(std::span<const std::string> paths, const Schema &schema,
                      const ParseOptions &options) {
    if (paths.empty()) {
        throw DataError("no input files given");
    }
    std::vector<Dataset> parts;
    for (const auto &path : paths) {
        std::ifstream in{path};
        if (!in) {
            throw DataError("cannot open '" + path + "'");
        }
        auto opts = options;
        opts.source_id = path;
        try {
            parts.push_back(parse_flow_csv(in, schema, opts));
        } catch (const DataError &e) {
            throw DataError(path + ": " + e.what(), 0);
        }
    }
    if (parts.size() == 1) {
        return std::move(parts.front());
    }
    std::string id;
    for (const auto &path : paths) {
        id += (id.empty() ? "" : "+") + path;
    }
    return concatenate(parts, id);
}

Dataset concatenate(std::span<const Dataset> parts, std::string source_id) {
    if (parts.empty()) {
        return Dataset{};
    }
    std::vector<FlowRecord> records;
    std::size_t total = 0;
    for (const auto &p : parts) {
        if (*p.feature_names() != *parts.front().feature_names()) {
            throw DataError("cannot concatenate datasets with different feature layouts");
        }
        total += p.size();
    }
    records.reserve(total);
    for (const auto &p : parts) {
        records.insert(records.end(), p.records().begin(), p.records().end());
    }
    return parts.front().with_records(std::move(records), std::move(source_id));
}

ClassCounts class_counts(const Dataset &dataset) {
    ClassCounts counts;
    for (const auto &r : dataset.records()) {
        (r.label == 1 ? counts.attack : counts.normal) += 1;
    }
    return counts;
}

ClassCounts class_counts(std::span<const int> labels) {
    ClassCounts counts;
    for (int label : labels) {
        (label == 1 ? counts.attack : counts.normal) += 1;
    }
    return counts;
}

SplitIndices stratified_indices(std::span<const int> labels, double train_fraction,
                                std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw DataError("train fraction must lie in (0, 1)");
    }
    std::array<std::vector<std::size_t>, 2> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw DataError("labels must be binary");
        }
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        if (members[c].size() < 2) {
            throw DataError("cannot stratify: class " + std::to_string(c) + " has " +
                            std::to_string(members[c].size()) + " record(s)");
        }
    }

    // Largest-remainder allocation of round(n * fraction) train slots.
    const auto n = static_cast<double>(labels.size());
    const auto target = static_cast<std::size_t>(std::llround(n * train_fraction));
    std::array<std::size_t, 2> quota{};
    std::array<double, 2> remainder{};
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
        const double exact = static_cast<double>(members[c].size()) * train_fraction;
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - std::floor(exact);
        assigned += quota[c];
    }
    const std::array<int, 2> by_remainder =
        remainder[1] > remainder[0] ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
    for (int c : by_remainder) {
        if (assigned < target && remainder[c] > 0.0) {
            ++quota[c];
            ++assigned;
        }
    }
    for (int c = 0; c < 2; ++c) {
        quota[c] = std::clamp<std::size_t>(quota[c], 1, members[c].size() - 1);
    }

    Rng rng{seed};
    SplitIndices split;
    for (int c = 0; c < 2; ++c) {
        auto &m = members[c];
        rng.shuffle(std::span{m});
        split.train.insert(split.train.end(), m.begin(), m.begin() + quota[c]);
        split.test.insert(split.test.end(), m.begin() + quota[c], m.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset &dataset, double train_fraction,
                                             std::uint64_t seed) {
    std::vector<int> labels;
    labels.reserve(dataset.size());
    for (const auto &r : dataset.records()) {
        labels.push_back(r.label);
    }
    const auto split = stratified_indices(labels, train_fraction, seed);
    auto gather = [&](const std::vector<std::size_t> &rows) {
        std::vector<FlowRecord> out;
        out.reserve(rows.size());
        for (auto i : rows) {
            out.push_back(dataset.records()[i]);
        }
        return out;
    };
    return {dataset.with_records(gather(split.train), dataset.source_id() + "#train"),
            dataset.with_records(gather(split.test), dataset.source_id() + "#test")};
}

void write_ndjson(const Dataset &dataset, std::ostream &out) {
    const auto &names = *dataset.feature_names();
    for (const auto &r : dataset.records()) {
        nlohmann::ordered_json row;
        row["id"] = r.id;
        row["label"] = r.label;
        row["service"] = r.service;
        row["attack_cat"] = r.attack_family ? nlohmann::ordered_json(*r.attack_family) : nullptr;
        auto &features = row["features"];
        features = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < names.size(); ++i) {
            features[names[i]] = r.values[i];
        }
        out << row.dump() << '\n';
    }
}

} // namespace nbcoded::data
