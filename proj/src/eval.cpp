#include "nbcoded/eval.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nbcoded/data.hpp"
#include "nbcoded/errors.hpp"
#include "nbcoded/random.hpp"

namespace nbcoded::eval {

namespace {

double ratio(std::size_t num, std::size_t den, bool &undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Seed streams per fold.
constexpr std::uint64_t kSplitStream = 0;
constexpr std::uint64_t kBuildStream = 1;

} // namespace

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw ModelError("got " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int p = predictions[i];
        const int y = labels[i];
        if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
            throw ModelError("predictions and labels must be 0 or 1");
        }
        if (p == 1) {
            (y == 1 ? cm.tp : cm.fp) += 1;
        } else {
            (y == 1 ? cm.fn : cm.tn) += 1;
        }
    }
    return cm;
}

std::string_view to_string(Convention c) {
    return c == Convention::kPaper ? "paper" : "standard";
}

Convention parse_convention(std::string_view token) {
    if (token == "paper") return Convention::kPaper;
    if (token == "standard") return Convention::kStandard;
    throw ModelError("unknown metric convention '" + std::string{token} + "'");
}

MetricsReport metrics(const ConfusionMatrix &cm, Convention convention) {
    MetricsReport r;
    r.convention = convention;
    bool over_real = false;
    bool over_predicted = false;
    const double real_positive_rate = ratio(cm.tp, cm.tp + cm.fn, over_real);
    const double predicted_positive_rate = ratio(cm.tp, cm.tp + cm.fp, over_predicted);
    if (convention == Convention::kPaper) {
        r.precision = real_positive_rate;
        r.precision_undefined = over_real;
        r.recall = predicted_positive_rate;
        r.recall_undefined = over_predicted;
    } else {
        r.precision = predicted_positive_rate;
        r.precision_undefined = over_predicted;
        r.recall = real_positive_rate;
        r.recall_undefined = over_real;
    }
    r.accuracy = ratio(cm.tp + cm.tn, cm.total(), r.accuracy_undefined);
    const double sum = r.precision + r.recall;
    r.f1_undefined = !(sum > 0.0);
    r.f1 = r.f1_undefined ? 0.0 : 2.0 * r.precision * r.recall / sum;
    return r;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    if (values.empty()) {
        return s;
    }
    for (double v : values) {
        s.mean += v;
    }
    s.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

CVResult cross_validate(const preprocess::FeatureMatrix &data, const ModelBuilder &builder,
                        const CVOptions &options) {
    if (options.k < 2) {
        throw ModelError("cross-validation needs k >= 2");
    }
    data.validate();

    CVResult result;
    result.convention = options.convention;
    result.folds.resize(options.k);

    auto run_fold = [&](std::size_t fold) {
        FoldResult &out = result.folds[fold];
        out.fold = fold;
        out.seed = derive_seed(options.seed, fold);
        const auto split = data::stratified_indices(data.labels, options.train_fraction,
                                                    derive_seed(out.seed, kSplitStream));
        const auto train = data.subset(split.train);
        const auto test = data.subset(split.test);
        out.train_rows = train.rows();
        out.test_rows = test.rows();

        const auto start = std::chrono::steady_clock::now();
        FittedModel fitted;
        try {
            fitted = builder(train, derive_seed(out.seed, kBuildStream));
        } catch (const std::exception &e) {
            throw TrainingError("fold " + std::to_string(fold) + ": " + e.what());
        }
        out.build_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.train_seconds = fitted.train_seconds;
        out.disk_kb = static_cast<double>(fitted.disk_bytes) / 1024.0;

        const auto predictions = fitted.predict(test.values);
        out.cm = confusion(predictions, test.labels);
        out.paper = metrics(out.cm, Convention::kPaper);
        out.standard = metrics(out.cm, Convention::kStandard);
    };

    const auto jobs = std::max<std::size_t>(1, std::min(options.jobs, options.k));
    if (jobs == 1) {
        for (std::size_t fold = 0; fold < options.k; ++fold) {
            run_fold(fold);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::size_t failed_fold = options.k;
        std::mutex failure_mutex;
        std::vector<std::thread> workers;
        for (std::size_t t = 0; t < jobs; ++t) {
            workers.emplace_back([&] {
                for (std::size_t fold = next++; fold < options.k; fold = next++) {
                    try {
                        run_fold(fold);
                    } catch (...) {
                        std::lock_guard lock{failure_mutex};
                        if (fold < failed_fold) {
                            failed_fold = fold;
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto &w : workers) {
            w.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    auto collect = [&](auto field) {
        std::vector<double> values;
        for (const auto &f : result.folds) {
            values.push_back(field(f));
        }
        return summarize(values);
    };
    const auto c = options.convention;
    result.precision = collect([c](const FoldResult &f) { return f.report(c).precision; });
    result.recall = collect([c](const FoldResult &f) { return f.report(c).recall; });
    result.accuracy = collect([c](const FoldResult &f) { return f.report(c).accuracy; });
    result.f1 = collect([c](const FoldResult &f) { return f.report(c).f1; });
    result.train_seconds = collect([](const FoldResult &f) { return f.train_seconds; });
    result.disk_kb = collect([](const FoldResult &f) { return f.disk_kb; });
    return result;
}

double measure_model_disk(const model_io::Model &model) {
    return static_cast<double>(model_io::serialize(model).size()) / 1024.0;
}

void write_ndjson(const CVResult &result, std::string_view model_name, std::ostream &out,
                  bool with_timing) {
    auto report_json = [](const MetricsReport &r) {
        nlohmann::ordered_json j;
        j["precision"] = r.precision;
        j["recall"] = r.recall;
        j["accuracy"] = r.accuracy;
        j["f1"] = r.f1;
        nlohmann::ordered_json undefined = nlohmann::ordered_json::array();
        if (r.precision_undefined) undefined.push_back("precision");
        if (r.recall_undefined) undefined.push_back("recall");
        if (r.accuracy_undefined) undefined.push_back("accuracy");
        if (r.f1_undefined) undefined.push_back("f1");
        j["undefined"] = undefined;
        return j;
    };
    for (const auto &f : result.folds) {
        nlohmann::ordered_json j;
        j["model"] = model_name;
        j["fold"] = f.fold;
        j["seed"] = f.seed;
        j["train_rows"] = f.train_rows;
        j["test_rows"] = f.test_rows;
        j["tp"] = f.cm.tp;
        j["fp"] = f.cm.fp;
        j["tn"] = f.cm.tn;
        j["fn"] = f.cm.fn;
        j["paper"] = report_json(f.paper);
        j["standard"] = report_json(f.standard);
        j["disk_kb"] = f.disk_kb;
        if (with_timing) {
            j["train_seconds"] = f.train_seconds;
            j["build_seconds"] = f.build_seconds;
        }
        out << j.dump() << '\n';
    }
    auto summary = [](const Summary &s) {
        return nlohmann::ordered_json{{"mean", s.mean}, {"stddev", s.stddev}};
    };
    nlohmann::ordered_json j;
    j["model"] = model_name;
    j["summary"] = true;
    j["k"] = result.folds.size();
    j["convention"] = to_string(result.convention);
    j["precision"] = summary(result.precision);
    j["recall"] = summary(result.recall);
    j["accuracy"] = summary(result.accuracy);
    j["f1"] = summary(result.f1);
    j["disk_kb"] = summary(result.disk_kb);
    if (with_timing) {
        j["train_seconds"] = summary(result.train_seconds);
    }
    out << j.dump() << '\n';
}

void write_table(const CVResult &result, std::string_view model_name, std::ostream &out) {
    const auto flags = out.flags();
    const auto other = result.convention == Convention::kPaper ? Convention::kStandard
                                                               : Convention::kPaper;
    std::vector<double> other_p, other_r;
    for (const auto &f : result.folds) {
        other_p.push_back(f.report(other).precision);
        other_r.push_back(f.report(other).recall);
    }
    const auto op = summarize(other_p);
    const auto orr = summarize(other_r);
    auto cell = [&](const Summary &s, int precision) {
        std::ostringstream c;
        c << std::fixed << std::setprecision(precision) << s.mean << " +- " << s.stddev;
        return c.str();
    };
    out << model_name << " (" << result.folds.size() << " stratified splits, "
        << to_string(result.convention) << " convention)\n";
    out << std::left << std::setw(26) << "  metric" << "mean +- stddev\n";
    out << std::setw(26) << "  precision" << cell(result.precision, 4) << '\n';
    out << std::setw(26) << "  recall" << cell(result.recall, 4) << '\n';
    out << std::setw(26) << "  accuracy" << cell(result.accuracy, 4) << '\n';
    out << std::setw(26) << "  f1" << cell(result.f1, 4) << '\n';
    out << std::setw(26) << ("  precision (" + std::string{to_string(other)} + ")") << cell(op, 4)
        << '\n';
    out << std::setw(26) << ("  recall (" + std::string{to_string(other)} + ")") << cell(orr, 4)
        << '\n';
    out << std::setw(26) << "  training seconds" << cell(result.train_seconds, 3) << '\n';
    out << std::setw(26) << "  disk kilobytes" << cell(result.disk_kb, 3) << '\n';
    out.flags(flags);
}

} // namespace nbcoded::eval
