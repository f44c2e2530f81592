// Acceptance suite: one PASS / FAIL / SKIP line per criterion, exit 1 on any FAIL.
//
// Set NBCODED_UNSW_DIR to a directory holding UNSW-NB15_1.csv .. UNSW-NB15_4.csv
// to run the full-dataset criterion.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "nbcoded/builders.hpp"
#include "nbcoded/eval.hpp"
#include "nbcoded/model_io.hpp"
#include "nbcoded/pipeline.hpp"
#include "nbcoded/random.hpp"
#include "nbcoded/synthetic.hpp"

using namespace nbcoded;
using naive_bayes::Family;
using Clock = std::chrono::steady_clock;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
    Outcome outcome = Outcome::kFail;
    std::string detail;
};

Verdict verdict(bool ok, std::string detail) {
    return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)};
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

constexpr std::array<Family, 3> kFamilies = {Family::kGaussian, Family::kBernoulli,
                                             Family::kComplement};

preprocess::FeatureMatrix synthetic_flows(std::size_t rows, std::uint64_t seed) {
    synthetic::FlowGeneratorConfig g;
    g.rows = rows;
    g.seed = seed;
    return preprocess::select_features(
        preprocess::filter_services(synthetic::generate_flows(g), preprocess::kDefaultServices));
}

preprocess::FeatureMatrix stratified_subset(const preprocess::FeatureMatrix &m, std::size_t rows,
                                            std::uint64_t seed) {
    if (rows >= m.rows()) return m;
    const auto split =
        data::stratified_indices(m.labels, double(rows) / double(m.rows()), seed);
    return m.subset(split.train);
}

// 1. Metrics against direct arithmetic on random confusion matrices.
Verdict metric_formulas() {
    const auto start = Clock::now();
    Rng rng{1};
    double worst = 0.0;
    std::size_t flag_errors = 0;
    for (int i = 0; i < 1000; ++i) {
        eval::ConfusionMatrix cm{rng.below(1000), rng.below(1000), rng.below(100000),
                                 rng.below(1000)};
        if (i % 50 == 0) cm.tp = 0;
        if (i % 77 == 0) cm.fp = 0;
        const auto r = eval::metrics(cm, eval::Convention::kPaper);
        const double tp = double(cm.tp), fp = double(cm.fp), tn = double(cm.tn),
                     fn = double(cm.fn);
        const double p = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double rc = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double acc = (tp + tn) / (tp + tn + fp + fn);
        const double f1 = p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0;
        worst = std::max({worst, std::abs(r.precision - p), std::abs(r.recall - rc),
                          std::abs(r.accuracy - acc), std::abs(r.f1 - f1)});
        flag_errors += r.precision_undefined != (tp + fn == 0);
        flag_errors += r.recall_undefined != (tp + fp == 0);
    }
    const double elapsed = seconds_since(start);
    return verdict(worst <= 1e-15 && flag_errors == 0 && elapsed < 1.0,
                   "max abs error " + fmt(worst) + ", flag mismatches " +
                       std::to_string(flag_errors) + ", " + fmt(elapsed, 3) + " s");
}

// Posterior from the product form P(c) * prod_i P(x_i | c), in long double.
std::array<long double, 2> product_posterior(Family family, const RowMatrix &x,
                                             const std::vector<int> &y,
                                             const std::vector<double> &probe, double alpha) {
    const auto d = std::size_t(x.cols());
    long double n[2] = {0, 0};
    std::vector<long double> sum[2] = {std::vector<long double>(d), std::vector<long double>(d)};
    std::vector<long double> on[2] = {std::vector<long double>(d), std::vector<long double>(d)};
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int c = y[std::size_t(i)];
        n[c] += 1;
        for (std::size_t j = 0; j < d; ++j) {
            sum[c][j] += x(i, long(j));
            on[c][j] += x(i, long(j)) > 0.0;
        }
    }
    std::array<long double, 2> joint{};
    if (family == Family::kGaussian) {
        std::vector<long double> var[2] = {std::vector<long double>(d), std::vector<long double>(d)};
        long double largest = 0;
        for (int c = 0; c < 2; ++c) {
            for (std::size_t j = 0; j < d; ++j) {
                long double ss = 0;
                for (Eigen::Index i = 0; i < x.rows(); ++i) {
                    if (y[std::size_t(i)] != c) continue;
                    const long double dev = x(i, long(j)) - sum[c][j] / n[c];
                    ss += dev * dev;
                }
                var[c][j] = ss / n[c];
                largest = std::max(largest, var[c][j]);
            }
        }
        const long double eps = 1e-9L * std::max(largest, 1e-12L);
        for (int c = 0; c < 2; ++c) {
            long double p = n[c] / (n[0] + n[1]);
            for (std::size_t j = 0; j < d; ++j) {
                const long double v = var[c][j] + eps;
                const long double diff = probe[j] - sum[c][j] / n[c];
                p *= std::exp(-diff * diff / (2 * v)) /
                     std::sqrt(2 * std::numbers::pi_v<long double> * v);
            }
            joint[std::size_t(c)] = p;
        }
    } else if (family == Family::kBernoulli) {
        for (int c = 0; c < 2; ++c) {
            long double p = n[c] / (n[0] + n[1]);
            for (std::size_t j = 0; j < d; ++j) {
                const long double theta = (on[c][j] + alpha) / (n[c] + 2 * alpha);
                p *= probe[j] > 0.0 ? theta : 1 - theta;
            }
            joint[std::size_t(c)] = p;
        }
    } else {
        // Complement: prod_i theta(not c, i) ^ (-x_i).
        for (int c = 0; c < 2; ++c) {
            const int other = 1 - c;
            long double total = (long double)d * alpha;
            for (std::size_t j = 0; j < d; ++j) total += sum[other][j];
            long double p = 1;
            for (std::size_t j = 0; j < d; ++j) {
                p *= std::pow((alpha + sum[other][j]) / total, -(long double)probe[j]);
            }
            joint[std::size_t(c)] = p;
        }
    }
    const long double z = joint[0] + joint[1];
    return {joint[0] / z, joint[1] / z};
}

// 2. NB posteriors against the product form on small random instances.
Verdict naive_bayes_oracle() {
    const auto start = Clock::now();
    Rng rng{2};
    double worst = 0.0;
    std::size_t mismatches = 0, decided = 0;
    for (auto family : kFamilies) {
        for (int instance = 0; instance < 100; ++instance) {
            const std::size_t n0 = 2 + rng.below(9), n1 = 2 + rng.below(9);
            const std::size_t d = 1 + rng.below(4);
            RowMatrix x(long(n0 + n1), long(d));
            std::vector<int> y;
            const double shift = rng.uniform(0.0, 2.0);
            for (std::size_t i = 0; i < n0 + n1; ++i) {
                const int c = i < n0 ? 0 : 1;
                for (std::size_t j = 0; j < d; ++j) {
                    double v = (c == 1 ? shift : 0.0) + rng.normal();
                    if (family != Family::kGaussian) v = std::max(0.0, v);
                    x(long(i), long(j)) = v;
                }
                y.push_back(c);
            }
            const double alpha = family == Family::kGaussian ? 1.0 : rng.uniform(0.1, 2.0);
            const auto model = naive_bayes::fit(family, x, y, alpha);
            for (int probe = 0; probe < 10; ++probe) {
                std::vector<double> v(d);
                for (auto &value : v) {
                    value = shift / 2 + 1.5 * rng.normal();
                    if (family != Family::kGaussian) value = std::max(0.0, value);
                }
                const auto scores = naive_bayes::log_posterior(model, v);
                const double top = std::max(scores[0], scores[1]);
                const double z = std::exp(scores[0] - top) + std::exp(scores[1] - top);
                const auto want = product_posterior(family, x, y, v, alpha);
                for (int c = 0; c < 2; ++c) {
                    const double got = std::exp(scores[std::size_t(c)] - top) / z;
                    worst = std::max(worst, double(std::abs(got - want[std::size_t(c)])));
                }
                if (std::abs(want[0] - want[1]) > 1e-12L) {
                    ++decided;
                    mismatches += naive_bayes::predict(model, v) != (want[1] > want[0] ? 1 : 0);
                }
            }
        }
    }
    const double elapsed = seconds_since(start);
    return verdict(worst <= 1e-9 && mismatches == 0 && elapsed < 10.0,
                   "max posterior error " + fmt(worst) + ", argmax mismatches " +
                       std::to_string(mismatches) + "/" + std::to_string(decided) + ", " +
                       fmt(elapsed, 3) + " s");
}

// 3. Finite-difference gradient checks.
Verdict gradient_checks() {
    const auto start = Clock::now();
    const std::vector<std::vector<std::size_t>> shapes = {{9, 8, 6, 8, 9}, {9, 4, 9}, {5, 3, 2, 3, 5}};
    Rng rng{3};
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        const auto &sizes = shapes[rng.below(shapes.size())];
        auto net = neuralnet::init_network({sizes, neuralnet::Activation::kTanh,
                                            neuralnet::Activation::kTanh},
                                           rng.next());
        for (auto &b : net.biases) {
            for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.1, 0.1);
        }
        RowMatrix in(16, long(sizes.front())), target(16, long(sizes.back()));
        for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = rng.uniform();
        for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = rng.uniform(-0.9, 0.9);
        worst = std::max(worst, testing::max_gradient_error(net, in, target,
                                                            neuralnet::Loss::kMae, 0.001, 1e-5));
    }
    const double elapsed = seconds_since(start);
    return verdict(worst < 1e-4 && elapsed < 30.0,
                   "max relative error " + fmt(worst) + ", " + fmt(elapsed, 3) + " s");
}

// 4. Same seed, same bytes; serialized model predicts bit-identically.
Verdict determinism() {
    const auto data = synthetic_flows(12000, 4);
    pipeline::NBcodedConfig config;
    config.seed = 44;
    const auto model = pipeline::train_nbcoded(data, Family::kGaussian, config);
    const auto first = model_io::serialize(model);
    const auto second = model_io::serialize(pipeline::train_nbcoded(data, Family::kGaussian, config));

    const auto path = (std::filesystem::temp_directory_path() / "nbcoded_acceptance.nbc").string();
    model_io::save(path, model);
    const auto restored = std::get<pipeline::NBcodedModel>(model_io::load(path));
    std::filesystem::remove(path);

    Rng rng{4};
    RowMatrix probes(1000, long(data.cols()));
    for (Eigen::Index i = 0; i < probes.rows(); ++i) {
        const auto src = data.values.row(long(rng.below(data.rows())));
        for (Eigen::Index j = 0; j < probes.cols(); ++j) probes(i, j) = src(j) * rng.uniform(0.0, 2.0);
    }
    std::size_t differing = 0;
    const auto a = pipeline::nb_inputs(model, probes);
    const auto b = pipeline::nb_inputs(restored, probes);
    for (Eigen::Index i = 0; i < probes.rows(); ++i) {
        std::vector<double> ra(a.row(i).begin(), a.row(i).end()), rb(b.row(i).begin(), b.row(i).end());
        const auto sa = naive_bayes::log_posterior(model.nb, ra);
        const auto sb = naive_bayes::log_posterior(restored.nb, rb);
        differing += std::memcmp(sa.data(), sb.data(), sizeof sa) != 0 ||
                     naive_bayes::argmax(sa) != naive_bayes::argmax(sb);
    }
    return verdict(first == second && differing == 0,
                   std::string{first == second ? "identical" : "different"} + " files (" +
                       std::to_string(first.size()) + " bytes), " + std::to_string(differing) +
                       "/1000 predictions differ after reload");
}

// 5. Gaussian NBcoded file size, and its independence from training size.
Verdict footprint() {
    const auto big = synthetic_flows(125000, 5);
    const auto large = stratified_subset(big, 100000, 50);
    const auto small = stratified_subset(big, 1000, 51);
    pipeline::NBcodedConfig config;
    const auto s = model_io::serialize(pipeline::train_nbcoded(small, Family::kGaussian, config));
    const auto l = model_io::serialize(pipeline::train_nbcoded(large, Family::kGaussian, config));
    const double kb = double(l.size()) / 1024.0;
    return verdict(kb <= 16.0 && s.size() == l.size(),
                   fmt(kb) + " kB at " + std::to_string(large.rows()) + " rows, " +
                       std::to_string(s.size()) + " vs " + std::to_string(l.size()) +
                       " bytes for 1k vs 100k rows");
}

// 6. NBcoded trains faster than the MLP baseline on the same 100k rows.
Verdict relative_speed() {
    const auto rows = stratified_subset(synthetic_flows(125000, 6), 100000, 60);
    pipeline::NBcodedConfig config;
    config.seed = 6;
    auto start = Clock::now();
    pipeline::train_nbcoded(rows, Family::kGaussian, config);
    const double nbcoded_s = seconds_since(start);

    auto mlp_config = pipeline::default_mlp_config();
    mlp_config.seed = 6;
    start = Clock::now();
    pipeline::train_mlp(rows, mlp_config);
    const double mlp_s = seconds_since(start);
    return verdict(nbcoded_s < mlp_s, "NBcoded " + fmt(nbcoded_s) + " s vs MLP " + fmt(mlp_s) +
                                          " s on " + std::to_string(rows.rows()) + " rows");
}

// 7. Full UNSW-NB15 reproduction.
Verdict full_reproduction() {
    const char *dir = std::getenv("NBCODED_UNSW_DIR");
    if (dir == nullptr || *dir == '\0') {
        return {Outcome::kSkip, "NBCODED_UNSW_DIR is not set; the UNSW-NB15 captures are not bundled"};
    }
    std::vector<std::string> paths;
    for (int i = 1; i <= 4; ++i) {
        paths.push_back((std::filesystem::path{dir} / ("UNSW-NB15_" + std::to_string(i) + ".csv")).string());
        if (!std::filesystem::exists(paths.back())) {
            return {Outcome::kSkip, paths.back() + " not found"};
        }
    }
    const auto raw = data::load_flow_csv(paths, data::unsw_nb15_schema());
    const auto filtered = preprocess::filter_services(raw, preprocess::kDefaultServices);
    const auto matrix = preprocess::select_features(filtered);

    eval::CVOptions options;
    options.k = 10;
    options.seed = 7;
    const auto gnb = eval::cross_validate(matrix, builders::naive_bayes(Family::kGaussian), options);
    const auto bnb = eval::cross_validate(matrix, builders::naive_bayes(Family::kBernoulli), options);
    const auto cnb = eval::cross_validate(matrix, builders::naive_bayes(Family::kComplement), options);
    const auto coded = eval::cross_validate(matrix, builders::nbcoded(Family::kGaussian), options);

    const bool rows_ok = matrix.rows() == 2045019;
    const bool gnb_ok = std::abs(gnb.f1.mean - 0.928) <= 0.03;
    const bool coded_ok = std::abs(coded.f1.mean - 0.943) <= 0.03 && coded.accuracy.mean >= 0.95;
    const bool order_ok = coded.f1.mean > gnb.f1.mean;
    const bool weak_ok = std::abs(bnb.f1.mean - 0.614) <= 0.05 && std::abs(cnb.f1.mean - 0.642) <= 0.05;
    return verdict(rows_ok && gnb_ok && coded_ok && order_ok && weak_ok,
                   std::to_string(matrix.rows()) + " rows; F1 GNB " + fmt(gnb.f1.mean) +
                       ", NBcoded " + fmt(coded.f1.mean) + " (accuracy " +
                       fmt(coded.accuracy.mean) + "), BNB " + fmt(bnb.f1.mean) + ", CNB " +
                       fmt(cnb.f1.mean));
}

// 8. Encoder ordering on the synthetic flow generator, per family.
Verdict synthetic_ordering() {
    std::array<int, 3> wins{};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = synthetic_flows(10000, 800 + seed);
        eval::CVOptions options;
        options.k = 3;
        options.seed = seed;
        for (std::size_t f = 0; f < kFamilies.size(); ++f) {
            const auto bare = eval::cross_validate(data, builders::naive_bayes(kFamilies[f]), options);
            const auto coded = eval::cross_validate(data, builders::nbcoded(kFamilies[f]), options);
            wins[f] += coded.f1.mean >= bare.f1.mean;
        }
    }
    std::string detail = "seeds with NBcoded F1 >= bare F1:";
    bool ok = true;
    for (std::size_t f = 0; f < kFamilies.size(); ++f) {
        detail += std::string{" "} + std::string{naive_bayes::to_string(kFamilies[f])} + " " +
                  std::to_string(wins[f]) + "/10";
        ok = ok && wins[f] >= 8;
    }
    return verdict(ok, detail);
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"metric formulas", metric_formulas},
        {"naive bayes oracle", naive_bayes_oracle},
        {"gradient checks", gradient_checks},
        {"pipeline determinism", determinism},
        {"model footprint", footprint},
        {"relative training speed", relative_speed},
        {"full UNSW-NB15 reproduction", full_reproduction},
        {"synthetic encoder ordering", synthetic_ordering},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception &e) {
            v = {Outcome::kFail, std::string{"threw: "} + e.what()};
        }
        const char *tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kSkip ? "SKIP" : "FAIL";
        failed += v.outcome == Outcome::kFail;
        std::cout << "[" << tag << "] " << i + 1 << ". " << criteria[i].first << ": " << v.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
