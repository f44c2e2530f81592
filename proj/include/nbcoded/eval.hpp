#ifndef NBCODED_EVAL_HPP
#define NBCODED_EVAL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nbcoded/model_io.hpp"
#include "nbcoded/preprocess.hpp"

namespace nbcoded::eval {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const ConfusionMatrix &) const = default;
};

/// Class 1 (attack) is the positive class. Throws ModelError on length
/// mismatch or non-binary values.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);

/// `kPaper` uses precision = tp / (tp + fn) and recall = tp / (tp + fp);
/// `kStandard` swaps the two.
enum class Convention { kPaper, kStandard };

std::string_view to_string(Convention c);
Convention parse_convention(std::string_view token);

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
    double f1 = 0.0;
    Convention convention = Convention::kPaper;
    // Set when the ratio had a zero denominator; the value is then 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool accuracy_undefined = false;
    bool f1_undefined = false;
};

MetricsReport metrics(const ConfusionMatrix &cm, Convention convention = Convention::kPaper);

/// A trained model as seen by the harness.
struct FittedModel {
    std::function<std::vector<int>(const Eigen::Ref<const RowMatrix> &)> predict;
    /// Training seconds as defined by the model (stage sum for NBcoded).
    double train_seconds = 0.0;
    std::size_t disk_bytes = 0;
};

using ModelBuilder =
    std::function<FittedModel(const preprocess::FeatureMatrix &train, std::uint64_t seed)>;

struct FoldResult {
    std::size_t fold = 0;
    std::uint64_t seed = 0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    ConfusionMatrix cm;
    MetricsReport paper;
    MetricsReport standard;
    /// Reported by the builder.
    double train_seconds = 0.0;
    /// Wall clock around the whole builder call.
    double build_seconds = 0.0;
    double disk_kb = 0.0;

    const MetricsReport &report(Convention c) const {
        return c == Convention::kPaper ? paper : standard;
    }
};

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Population mean / standard deviation in fold order.
Summary summarize(std::span<const double> values);

struct CVResult {
    std::vector<FoldResult> folds;
    Convention convention = Convention::kPaper;
    Summary precision, recall, accuracy, f1, train_seconds, disk_kb;
};

struct CVOptions {
    std::size_t k = 10;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    Convention convention = Convention::kPaper;
};

/// k independent stratified shuffle-splits (not disjoint folds).
///
/// Fold i splits with a seed derived from (seed, i) and hands the builder a
/// second derived seed. Folds may run on up to `jobs` threads; results are
/// always aggregated in fold order. Builder errors are rethrown as
/// TrainingError naming the fold.
CVResult cross_validate(const preprocess::FeatureMatrix &data, const ModelBuilder &builder,
                        const CVOptions &options);

/// Serialized size in kilobytes (bytes / 1024). An NBcoded file carries the
/// encoder and the classifier, so its size is the sum of both plus the
/// normalizer and a fixed 15-byte frame.
double measure_model_disk(const model_io::Model &model);

/// One JSON object per fold, then one summary object. Timing fields are
/// included only when `with_timing` is set, which keeps the default output
/// reproducible byte for byte.
void write_ndjson(const CVResult &result, std::string_view model_name, std::ostream &out,
                  bool with_timing = false);

void write_table(const CVResult &result, std::string_view model_name, std::ostream &out);

} // namespace nbcoded::eval

#endif
