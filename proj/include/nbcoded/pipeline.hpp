#ifndef NBCODED_PIPELINE_HPP
#define NBCODED_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nbcoded/data.hpp"
#include "nbcoded/naive_bayes.hpp"
#include "nbcoded/neuralnet.hpp"
#include "nbcoded/preprocess.hpp"

namespace nbcoded::pipeline {

struct NBcodedConfig {
    std::vector<std::string> features = preprocess::kDefaultFeatures;
    neuralnet::LayerSpec autoencoder = neuralnet::autoencoder_spec();
    /// Training schedule of the autoencoder. Its seed is ignored: every random
    /// choice is derived from `seed` below.
    neuralnet::TrainConfig training;
    double alpha = 1.0;
    double bernoulli_threshold = 0.0;
    std::uint64_t seed = 0;
};

/// Wall-clock seconds spent in each training stage.
struct StageTimings {
    double autoencoder = 0.0;
    double encode = 0.0;
    double naive_bayes = 0.0;

    double total() const noexcept { return autoencoder + encode + naive_bayes; }
};

/// Min-max scaling, then the encoder, then (Complement only) a per-feature
/// translation, then a Naive Bayes classifier.
struct NBcodedModel {
    preprocess::Normalizer normalizer;
    neuralnet::Encoder encoder;
    naive_bayes::NBModel nb;
    /// Complement only: added to encoded features, negatives then clamp to 0.
    std::optional<Eigen::VectorXd> cnb_offsets;
    std::uint64_t seed = 0;
    /// Not persisted.
    StageTimings timings;

    naive_bayes::Family family() const { return naive_bayes::family_of(nb); }
};

/// Which rows fed which stage, and the autoencoder's loss history.
struct TrainingTrace {
    std::vector<std::uint64_t> autoencoder_rows;
    std::vector<std::uint64_t> naive_bayes_rows;
    std::vector<double> autoencoder_history;
};

struct NBcodedTraining {
    NBcodedModel model;
    TrainingTrace trace;
};

/// Trains the NBcoded model on raw (un-normalized) selected features.
///
/// The normalizer is fitted on all rows. A seeded stratified split then
/// halves the rows: the first half trains the autoencoder (inputs as
/// targets), the second half is encoded and fits the Naive Bayes model.
/// Stage failures are rethrown as TrainingError prefixed with the stage.
NBcodedTraining train_nbcoded_traced(const preprocess::FeatureMatrix &raw,
                                     naive_bayes::Family family, const NBcodedConfig &config);

NBcodedModel train_nbcoded(const preprocess::FeatureMatrix &raw, naive_bayes::Family family,
                           const NBcodedConfig &config);

/// Selects `config.features` from an already service-filtered dataset first.
NBcodedModel train_nbcoded(const data::Dataset &train_set, naive_bayes::Family family,
                           const NBcodedConfig &config);

/// Encoded (and for Complement, translated) features fed to the classifier.
RowMatrix nb_inputs(const NBcodedModel &model, const Eigen::Ref<const RowMatrix> &raw);

int classify(const NBcodedModel &model, std::span<const double> flow_features);
std::vector<int> classify_batch(const NBcodedModel &model, const Eigen::Ref<const RowMatrix> &raw);

/// Naive Bayes on min-max scaled features, without an encoder.
struct NaiveBayesModel {
    preprocess::Normalizer normalizer;
    naive_bayes::NBModel nb;
};

NaiveBayesModel train_naive_bayes(const preprocess::FeatureMatrix &raw, naive_bayes::Family family,
                                  double alpha = 1.0, double bernoulli_threshold = 0.0);
std::vector<int> classify_batch(const NaiveBayesModel &model, const Eigen::Ref<const RowMatrix> &raw);

/// Two-hidden-layer perceptron on min-max scaled features.
struct MlpModel {
    preprocess::Normalizer normalizer;
    neuralnet::MlpClassifier mlp;
};

MlpModel train_mlp(const preprocess::FeatureMatrix &raw, const neuralnet::TrainConfig &config,
                   const std::vector<std::size_t> &hidden = neuralnet::kMlpHiddenLayers);
std::vector<int> classify_batch(const MlpModel &model, const Eigen::Ref<const RowMatrix> &raw);

/// MLP schedule: the shared defaults without weight decay.
neuralnet::TrainConfig default_mlp_config();

} // namespace nbcoded::pipeline

#endif
