#include "nbcoded/builders.hpp"

#include <chrono>
#include <memory>

namespace nbcoded::builders {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

eval::ModelBuilder nbcoded(naive_bayes::Family family, pipeline::NBcodedConfig config) {
    return [family, config](const preprocess::FeatureMatrix &train, std::uint64_t seed) {
        auto cfg = config;
        cfg.seed = seed;
        auto model = std::make_shared<const pipeline::NBcodedModel>(
            pipeline::train_nbcoded(train, family, cfg));
        eval::FittedModel fitted;
        fitted.train_seconds = model->timings.total();
        fitted.disk_bytes = model_io::serialize(*model).size();
        fitted.predict = [model](const Eigen::Ref<const RowMatrix> &x) {
            return pipeline::classify_batch(*model, x);
        };
        return fitted;
    };
}

eval::ModelBuilder naive_bayes(naive_bayes::Family family, double alpha,
                               double bernoulli_threshold) {
    return [=](const preprocess::FeatureMatrix &train, std::uint64_t) {
        const auto start = std::chrono::steady_clock::now();
        auto model = std::make_shared<const pipeline::NaiveBayesModel>(
            pipeline::train_naive_bayes(train, family, alpha, bernoulli_threshold));
        eval::FittedModel fitted;
        fitted.train_seconds = seconds_since(start);
        fitted.disk_bytes = model_io::serialize(*model).size();
        fitted.predict = [model](const Eigen::Ref<const RowMatrix> &x) {
            return pipeline::classify_batch(*model, x);
        };
        return fitted;
    };
}

eval::ModelBuilder mlp(neuralnet::TrainConfig config) {
    return [config](const preprocess::FeatureMatrix &train, std::uint64_t seed) {
        auto cfg = config;
        cfg.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        auto model = std::make_shared<const pipeline::MlpModel>(pipeline::train_mlp(train, cfg));
        eval::FittedModel fitted;
        fitted.train_seconds = seconds_since(start);
        fitted.disk_bytes = model_io::serialize(*model).size();
        fitted.predict = [model](const Eigen::Ref<const RowMatrix> &x) {
            return pipeline::classify_batch(*model, x);
        };
        return fitted;
    };
}

} // namespace nbcoded::builders
