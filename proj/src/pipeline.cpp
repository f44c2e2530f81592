#include "nbcoded/pipeline.hpp"

#include <chrono>
#include <utility>

#include "nbcoded/errors.hpp"
#include "nbcoded/random.hpp"

namespace nbcoded::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
auto stage(const char *name, F &&body) -> decltype(body()) {
    try {
        return body();
    } catch (const Error &e) {
        throw TrainingError(std::string{name} + ": " + e.what());
    }
}

// Seed streams derived from NBcodedConfig::seed.
enum Stream : std::uint64_t { kHalving = 1, kInit = 2, kShuffle = 3 };

RowMatrix normalized(const preprocess::Normalizer &norm, const Eigen::Ref<const RowMatrix> &raw) {
    if (static_cast<std::size_t>(raw.cols()) != norm.cols()) {
        throw ModelError("expected " + std::to_string(norm.cols()) + " features, got " +
                         std::to_string(raw.cols()));
    }
    RowMatrix out(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        for (Eigen::Index j = 0; j < raw.cols(); ++j) {
            out(i, j) = norm.scale(static_cast<std::size_t>(j), raw(i, j));
        }
    }
    return out;
}

void translate(RowMatrix &encoded, const Eigen::VectorXd &offsets) {
    for (Eigen::Index i = 0; i < encoded.rows(); ++i) {
        for (Eigen::Index j = 0; j < encoded.cols(); ++j) {
            encoded(i, j) = std::max(encoded(i, j) + offsets[j], 0.0);
        }
    }
}

} // namespace

NBcodedTraining train_nbcoded_traced(const preprocess::FeatureMatrix &raw,
                                     naive_bayes::Family family, const NBcodedConfig &config) {
    NBcodedTraining out;
    auto &model = out.model;
    model.seed = config.seed;

    const auto scaled = stage("preprocess", [&] {
        raw.validate();
        model.normalizer = preprocess::fit_normalizer(raw);
        return preprocess::apply_normalizer(model.normalizer, raw);
    });

    const auto halves = stage("split", [&] {
        return data::stratified_indices(scaled.labels, 0.5, derive_seed(config.seed, kHalving));
    });
    const auto ae_half = scaled.subset(halves.train);
    const auto nb_half = scaled.subset(halves.test);
    out.trace.autoencoder_rows = ae_half.row_ids;
    out.trace.naive_bayes_rows = nb_half.row_ids;

    auto start = Clock::now();
    auto trained = stage("autoencoder", [&] {
        if (config.autoencoder.sizes.front() != scaled.cols()) {
            throw ModelError("autoencoder input width " +
                             std::to_string(config.autoencoder.sizes.front()) + " != " +
                             std::to_string(scaled.cols()) + " features");
        }
        auto training = config.training;
        training.seed = derive_seed(config.seed, kShuffle);
        training.loss = neuralnet::Loss::kMae;
        auto net = neuralnet::init_network(config.autoencoder, derive_seed(config.seed, kInit));
        return neuralnet::train(std::move(net), ae_half.values, ae_half.values, training);
    });
    model.encoder = stage("encoder", [&] { return neuralnet::extract_encoder(trained.network); });
    out.trace.autoencoder_history = std::move(trained.history);
    model.timings.autoencoder = seconds_since(start);

    start = Clock::now();
    RowMatrix encoded = neuralnet::encode(model.encoder, nb_half.values);
    if (family == naive_bayes::Family::kComplement) {
        model.cnb_offsets = -encoded.colwise().minCoeff().transpose();
        translate(encoded, *model.cnb_offsets);
    }
    model.timings.encode = seconds_since(start);

    start = Clock::now();
    model.nb = stage("naive_bayes", [&] {
        return naive_bayes::fit(family, encoded, nb_half.labels, config.alpha,
                                config.bernoulli_threshold);
    });
    model.timings.naive_bayes = seconds_since(start);
    return out;
}

NBcodedModel train_nbcoded(const preprocess::FeatureMatrix &raw, naive_bayes::Family family,
                           const NBcodedConfig &config) {
    return train_nbcoded_traced(raw, family, config).model;
}

NBcodedModel train_nbcoded(const data::Dataset &train_set, naive_bayes::Family family,
                           const NBcodedConfig &config) {
    const auto raw = stage("preprocess", [&] {
        return preprocess::select_features(train_set, config.features);
    });
    return train_nbcoded(raw, family, config);
}

RowMatrix nb_inputs(const NBcodedModel &model, const Eigen::Ref<const RowMatrix> &raw) {
    RowMatrix encoded = neuralnet::encode(model.encoder, normalized(model.normalizer, raw));
    if (model.cnb_offsets) {
        translate(encoded, *model.cnb_offsets);
    }
    return encoded;
}

int classify(const NBcodedModel &model, std::span<const double> flow_features) {
    const Eigen::Map<const RowMatrix> row(flow_features.data(), 1,
                                          static_cast<Eigen::Index>(flow_features.size()));
    return classify_batch(model, row).front();
}

std::vector<int> classify_batch(const NBcodedModel &model, const Eigen::Ref<const RowMatrix> &raw) {
    return naive_bayes::predict(model.nb, nb_inputs(model, raw));
}

NaiveBayesModel train_naive_bayes(const preprocess::FeatureMatrix &raw, naive_bayes::Family family,
                                  double alpha, double bernoulli_threshold) {
    raw.validate();
    NaiveBayesModel model;
    model.normalizer = preprocess::fit_normalizer(raw);
    const auto scaled = preprocess::apply_normalizer(model.normalizer, raw);
    model.nb = naive_bayes::fit(family, scaled.values, scaled.labels, alpha, bernoulli_threshold);
    return model;
}

std::vector<int> classify_batch(const NaiveBayesModel &model, const Eigen::Ref<const RowMatrix> &raw) {
    return naive_bayes::predict(model.nb, normalized(model.normalizer, raw));
}

MlpModel train_mlp(const preprocess::FeatureMatrix &raw, const neuralnet::TrainConfig &config,
                   const std::vector<std::size_t> &hidden) {
    raw.validate();
    MlpModel model;
    model.normalizer = preprocess::fit_normalizer(raw);
    const auto scaled = preprocess::apply_normalizer(model.normalizer, raw);
    model.mlp = neuralnet::train_mlp_classifier(scaled.values, scaled.labels, config, hidden);
    return model;
}

std::vector<int> classify_batch(const MlpModel &model, const Eigen::Ref<const RowMatrix> &raw) {
    return model.mlp.predict(normalized(model.normalizer, raw));
}

neuralnet::TrainConfig default_mlp_config() {
    neuralnet::TrainConfig config;
    config.l2_factor = 0.0;
    config.loss = neuralnet::Loss::kCrossEntropy;
    return config;
}

} // namespace nbcoded::pipeline
