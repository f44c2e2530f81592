#include "nbcoded/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nbcoded/builders.hpp"
#include "nbcoded/data.hpp"
#include "nbcoded/errors.hpp"
#include "nbcoded/eval.hpp"
#include "nbcoded/model_io.hpp"
#include "nbcoded/pipeline.hpp"
#include "nbcoded/preprocess.hpp"
#include "nbcoded/random.hpp"
#include "nbcoded/synthetic.hpp"

namespace nbcoded::cli {

namespace {

const std::vector<std::string> kCommands = {"ingest", "train", "evaluate", "predict", "benchmark"};

struct RunConfig {
    std::string command;
    std::vector<std::string> data;
    std::string schema;
    std::size_t synthetic_rows = 0;
    std::vector<std::string> features = preprocess::kDefaultFeatures;
    std::vector<std::string> services{preprocess::kDefaultServices.begin(),
                                      preprocess::kDefaultServices.end()};
    std::string family = "gaussian";
    std::string model = "nbcoded";
    std::size_t k = 10;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::size_t epochs = 100;
    std::size_t batch_size = 250;
    std::size_t patience = 5;
    double l2 = 0.001;
    double alpha = 1.0;
    std::string convention = "paper";
    std::string model_out = "model.nbc";
    std::string model_in;
    std::string out;
    std::string ndjson_out;
    bool with_timing = false;
    std::size_t rows = 0;
    std::size_t jobs = 1;
};

std::string usage_text() {
    return "usage: nbcoded <ingest|train|evaluate|predict|benchmark> [options]\n"
           "       nbcoded --help for the option list\n";
}

void build_parser(CLI::App &app, RunConfig &cfg) {
    app.set_config("--config", "", "Key-value configuration file; flags take precedence");
    app.add_option("command", cfg.command, "ingest | train | evaluate | predict | benchmark")
        ->required();
    app.add_option("--data", cfg.data,
                   "Headerless UNSW-NB15 CSV capture(s), concatenated in order; for predict, "
                   "a CSV of raw feature rows");
    app.add_option("--schema", cfg.schema, "Column schema file (default: bundled UNSW-NB15)");
    app.add_option("--synthetic-rows", cfg.synthetic_rows,
                   "Use N generated flow records instead of --data");
    app.add_option("--features", cfg.features, "Selected features, in model order")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--services", cfg.services, "Services kept before training ('unknown' = '-')")
        ->delimiter(',');
    app.add_option("--family", cfg.family, "Naive Bayes family")
        ->check(CLI::IsMember({"gaussian", "complement", "bernoulli"}))
        ->capture_default_str();
    app.add_option("--model", cfg.model, "Model evaluated by 'evaluate'")
        ->check(CLI::IsMember({"nbcoded", "nb", "mlp"}))
        ->capture_default_str();
    app.add_option("--k", cfg.k, "Number of stratified splits")->check(CLI::Range(2, 1000))
        ->capture_default_str();
    app.add_option("--train-fraction", cfg.train_fraction, "Training share of each split")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Top-level seed")->envname("NBCODED_SEED")
        ->capture_default_str();
    app.add_option("--epochs", cfg.epochs)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--batch-size", cfg.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--patience", cfg.patience)->capture_default_str();
    app.add_option("--l2", cfg.l2, "Autoencoder weight decay")->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--alpha", cfg.alpha, "Bernoulli / Complement smoothing")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--convention", cfg.convention, "Precision/recall convention")
        ->check(CLI::IsMember({"paper", "standard"}))
        ->capture_default_str();
    app.add_option("--model-out", cfg.model_out, "Where 'train' writes the .nbc file")
        ->capture_default_str();
    app.add_option("--model-in", cfg.model_in, "Model read by 'predict'");
    app.add_option("--out", cfg.out, "Output file for 'predict' (default: stdout)");
    app.add_option("--ndjson-out", cfg.ndjson_out, "NDJSON output file");
    app.add_flag("--with-timing", cfg.with_timing, "Include timings in evaluate NDJSON");
    app.add_option("--rows", cfg.rows, "Stratified subset size for 'benchmark' (0 = all)");
    app.add_option("--jobs", cfg.jobs, "Parallel folds")->check(CLI::PositiveNumber)
        ->capture_default_str();
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::set<std::string> allowed_services(const RunConfig &cfg) {
    std::set<std::string> allowed;
    for (const auto &s : cfg.services) {
        allowed.insert(s == "unknown" ? "-" : s);
    }
    return allowed;
}

data::Dataset load_dataset(const RunConfig &cfg) {
    if (cfg.synthetic_rows > 0) {
        synthetic::FlowGeneratorConfig gen;
        gen.rows = cfg.synthetic_rows;
        gen.seed = cfg.seed;
        return synthetic::generate_flows(gen);
    }
    if (cfg.data.empty()) {
        throw UsageError("--data or --synthetic-rows is required");
    }
    const auto schema = cfg.schema.empty() ? data::unsw_nb15_schema() : data::Schema::load(cfg.schema);
    return data::load_flow_csv(cfg.data, schema);
}

/// Filtered, feature-selected training matrix.
preprocess::FeatureMatrix training_matrix(const RunConfig &cfg, std::ostream &err) {
    const auto dataset = load_dataset(cfg);
    std::vector<std::string> warnings;
    const auto filtered = preprocess::filter_services(dataset, allowed_services(cfg), &warnings);
    for (const auto &w : warnings) {
        err << "warning: " << w << '\n';
    }
    if (filtered.empty()) {
        throw DataError("no records left after the service filter");
    }
    return preprocess::select_features(filtered, cfg.features);
}

neuralnet::TrainConfig train_config(const RunConfig &cfg) {
    neuralnet::TrainConfig t;
    t.epochs = cfg.epochs;
    t.batch_size = cfg.batch_size;
    t.patience = cfg.patience;
    t.l2_factor = cfg.l2;
    t.seed = cfg.seed;
    return t;
}

pipeline::NBcodedConfig nbcoded_config(const RunConfig &cfg) {
    pipeline::NBcodedConfig c;
    c.features = cfg.features;
    c.autoencoder.sizes.front() = cfg.features.size();
    c.autoencoder.sizes.back() = cfg.features.size();
    c.training = train_config(cfg);
    c.alpha = cfg.alpha;
    c.seed = cfg.seed;
    return c;
}

neuralnet::TrainConfig mlp_config(const RunConfig &cfg) {
    auto t = pipeline::default_mlp_config();
    t.epochs = cfg.epochs;
    t.batch_size = cfg.batch_size;
    t.patience = cfg.patience;
    t.seed = cfg.seed;
    return t;
}

std::ofstream open_output(const std::string &path) {
    std::ofstream out{path, std::ios::trunc};
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    return out;
}

int cmd_ingest(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
    const auto dataset = load_dataset(cfg);
    std::vector<std::string> warnings;
    const auto filtered = preprocess::filter_services(dataset, allowed_services(cfg), &warnings);
    for (const auto &w : warnings) {
        err << "warning: " << w << '\n';
    }
    const auto all = data::class_counts(dataset);
    const auto kept = data::class_counts(filtered);
    out << "source: " << dataset.source_id() << '\n'
        << "records: " << all.total() << " (normal " << all.normal << ", attack " << all.attack
        << ")\n"
        << "after service filter: " << kept.total() << " (normal " << kept.normal << ", attack "
        << kept.attack << ")\n";
    const auto matrix = preprocess::select_features(filtered, cfg.features);
    out << "selected features: " << matrix.cols() << '\n';
    if (!cfg.ndjson_out.empty()) {
        auto file = open_output(cfg.ndjson_out);
        data::write_ndjson(filtered, file);
    }
    return kOk;
}

int cmd_train(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
    const auto matrix = training_matrix(cfg, err);
    const auto model = pipeline::train_nbcoded(matrix, naive_bayes::parse_family(cfg.family),
                                               nbcoded_config(cfg));
    model_io::save(cfg.model_out, model);
    const auto bytes = model_io::serialize(model).size();
    out << "trained " << cfg.family << " NBcoded on " << matrix.rows() << " rows\n"
        << "model: " << cfg.model_out << " (" << bytes << " bytes)\n"
        << std::fixed << std::setprecision(3) << "training seconds: " << model.timings.total()
        << " (autoencoder " << model.timings.autoencoder << ", encode " << model.timings.encode
        << ", naive bayes " << model.timings.naive_bayes << ")\n";
    return kOk;
}

eval::ModelBuilder builder_for(const RunConfig &cfg, const std::string &model) {
    const auto family = naive_bayes::parse_family(cfg.family);
    if (model == "nbcoded") {
        return builders::nbcoded(family, nbcoded_config(cfg));
    }
    if (model == "nb") {
        return builders::naive_bayes(family, cfg.alpha);
    }
    return builders::mlp(mlp_config(cfg));
}

std::string model_label(const RunConfig &cfg, const std::string &model) {
    if (model == "mlp") {
        return "mlp";
    }
    return cfg.family + (model == "nbcoded" ? "-nbcoded" : "-nb");
}

eval::CVOptions cv_options(const RunConfig &cfg) {
    eval::CVOptions o;
    o.k = cfg.k;
    o.train_fraction = cfg.train_fraction;
    o.seed = cfg.seed;
    o.jobs = cfg.jobs;
    o.convention = eval::parse_convention(cfg.convention);
    return o;
}

int cmd_evaluate(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
    const auto matrix = training_matrix(cfg, err);
    const auto name = model_label(cfg, cfg.model);
    const auto result = eval::cross_validate(matrix, builder_for(cfg, cfg.model), cv_options(cfg));
    eval::write_table(result, name, out);
    const auto path = cfg.ndjson_out.empty() ? std::string{"cv_results.ndjson"} : cfg.ndjson_out;
    auto file = open_output(path);
    eval::write_ndjson(result, name, file, cfg.with_timing);
    return kOk;
}

std::vector<std::vector<double>> read_feature_rows(std::istream &in, std::size_t width) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> row;
        std::stringstream cells{line};
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            const auto first = cell.find_first_not_of(" \t\r");
            const auto last = cell.find_last_not_of(" \t\r");
            const std::string_view v = first == std::string::npos
                                           ? std::string_view{}
                                           : std::string_view{cell}.substr(first, last - first + 1);
            double x = 0.0;
            const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (v.empty() || ec != std::errc{} || end != v.data() + v.size() || !std::isfinite(x)) {
                throw DataError("not a finite number: '" + std::string{v} + "'", line_no);
            }
            row.push_back(x);
        }
        if (row.size() != width) {
            throw DataError("expected " + std::to_string(width) + " values, found " +
                                std::to_string(row.size()),
                            line_no);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_predict(const RunConfig &cfg, std::ostream &out, std::ostream &) {
    if (cfg.model_in.empty() || cfg.data.size() != 1) {
        throw UsageError("predict needs --model-in and exactly one --data file");
    }
    const auto loaded = model_io::load(cfg.model_in);
    const auto *nbcoded = std::get_if<pipeline::NBcodedModel>(&loaded);
    if (nbcoded == nullptr) {
        throw DataError("'" + cfg.model_in + "' does not hold an NBcoded model");
    }
    const auto &model = *nbcoded;
    std::ifstream in{cfg.data.front()};
    if (!in) {
        throw DataError("cannot open '" + cfg.data.front() + "'");
    }
    const auto rows = read_feature_rows(in, model.normalizer.cols());
    RowMatrix raw(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(model.normalizer.cols()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    const auto labels = pipeline::classify_batch(model, raw);
    std::ofstream file;
    if (!cfg.out.empty()) {
        file = open_output(cfg.out);
    }
    std::ostream &sink = cfg.out.empty() ? out : file;
    for (int label : labels) {
        sink << label << '\n';
    }
    return kOk;
}

int cmd_benchmark(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
    auto matrix = training_matrix(cfg, err);
    if (cfg.rows > 0 && cfg.rows < matrix.rows()) {
        const double share = static_cast<double>(cfg.rows) / static_cast<double>(matrix.rows());
        const auto subset =
            data::stratified_indices(matrix.labels, share, derive_seed(cfg.seed, 99));
        matrix = matrix.subset(subset.train);
    }
    const auto options = cv_options(cfg);
    const std::vector<std::string> models = {"nbcoded", "mlp"};
    std::vector<std::pair<std::string, eval::CVResult>> results;
    for (const auto &m : models) {
        const auto name = model_label(cfg, m);
        results.emplace_back(name, eval::cross_validate(matrix, builder_for(cfg, m), options));
        eval::write_table(results.back().second, name, out);
        out << '\n';
    }
    out << std::left << std::setw(20) << "model" << std::setw(18) << "f1" << std::setw(18)
        << "accuracy" << std::setw(22) << "training seconds" << "disk kB\n";
    for (const auto &[name, r] : results) {
        auto cell = [](const eval::Summary &s, int p) {
            std::ostringstream c;
            c << std::fixed << std::setprecision(p) << s.mean << " +- " << s.stddev;
            return c.str();
        };
        out << std::setw(20) << name << std::setw(18) << cell(r.f1, 4) << std::setw(18)
            << cell(r.accuracy, 4) << std::setw(22) << cell(r.train_seconds, 2)
            << cell(r.disk_kb, 2) << '\n';
    }
    const auto path = cfg.ndjson_out.empty() ? std::string{"benchmark.ndjson"} : cfg.ndjson_out;
    auto file = open_output(path);
    for (const auto &[name, r] : results) {
        eval::write_ndjson(r, name, file, true);
    }
    return kOk;
}

} // namespace

int run(std::span<const std::string> args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Encoder + Naive Bayes network attack classifier", "nbcoded"};
    RunConfig cfg;
    build_parser(app, cfg);

    std::vector<const char *> argv{"nbcoded"};
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n' << usage_text();
        return kUsage;
    }
    if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
        err << "error: unknown command '" << cfg.command << "'\n" << usage_text();
        return kUsage;
    }

    try {
        if (cfg.command == "ingest") return cmd_ingest(cfg, out, err);
        if (cfg.command == "train") return cmd_train(cfg, out, err);
        if (cfg.command == "evaluate") return cmd_evaluate(cfg, out, err);
        if (cfg.command == "predict") return cmd_predict(cfg, out, err);
        return cmd_benchmark(cfg, out, err);
    } catch (const UsageError &e) {
        err << "error: " << e.what() << '\n' << usage_text();
        return kUsage;
    } catch (const TrainingError &e) {
        err << "training error: " << e.what() << '\n';
        return kTrainingError;
    } catch (const Error &e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

} // namespace nbcoded::cli
