#ifndef NBCODED_NEURALNET_HPP
#define NBCODED_NEURALNET_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nbcoded/preprocess.hpp"

namespace nbcoded::neuralnet {

enum class Activation : std::uint8_t { kTanh = 0, kSigmoid = 1 };
enum class Loss : std::uint8_t { kMae = 0, kCrossEntropy = 1 };

std::string_view to_string(Activation a);
std::string_view to_string(Loss l);

/// Layer widths from input to output. Every layer but the last uses `hidden`.
struct LayerSpec {
    std::vector<std::size_t> sizes;
    Activation hidden = Activation::kTanh;
    Activation output = Activation::kTanh;

    std::size_t layer_count() const noexcept { return sizes.empty() ? 0 : sizes.size() - 1; }
    Activation activation(std::size_t layer) const noexcept {
        return layer + 1 == layer_count() ? output : hidden;
    }
    /// Throws ModelError unless there are at least two sizes, all >= 1.
    void validate() const;

    bool operator==(const LayerSpec &) const = default;
};

/// The autoencoder used by the NBcoded front-end: 9 -> 8 -> 6 -> 8 -> 9, tanh throughout.
inline LayerSpec autoencoder_spec() { return {{9, 8, 6, 8, 9}, Activation::kTanh, Activation::kTanh}; }

/// Dense feedforward network. weights[l] is (sizes[l+1] x sizes[l]).
struct Network {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    LayerSpec spec;

    std::size_t input_size() const { return spec.sizes.front(); }
    std::size_t output_size() const { return spec.sizes.back(); }
    std::size_t parameter_count() const;
    bool all_finite() const;

    bool operator==(const Network &other) const;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
Network init_network(const LayerSpec &spec, std::uint64_t seed);

/// Activations of every layer (input excluded) for each row of `batch`.
///
/// Rows are evaluated independently, so a row's activations do not depend on
/// what else is in the batch.
std::vector<RowMatrix> forward(const Network &net, const Eigen::Ref<const RowMatrix> &batch);

/// Output-layer activations only.
RowMatrix predict(const Network &net, const Eigen::Ref<const RowMatrix> &batch);

/// Sum of squared weights (biases are not regularized).
double l2_penalty(const Network &net);

/// Mean per-element data loss over the batch.
double data_loss(const Network &net, const Eigen::Ref<const RowMatrix> &inputs,
                 const Eigen::Ref<const RowMatrix> &targets, Loss loss);

/// data_loss + l2_factor * l2_penalty.
double total_loss(const Network &net, const Eigen::Ref<const RowMatrix> &inputs,
                  const Eigen::Ref<const RowMatrix> &targets, Loss loss, double l2_factor);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Exact gradient of total_loss with respect to every parameter. The MAE
/// subgradient at a zero residual is 0.
Gradients gradients(const Network &net, const Eigen::Ref<const RowMatrix> &inputs,
                    const Eigen::Ref<const RowMatrix> &targets, Loss loss, double l2_factor);

struct AdamHyper {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::uint64_t step = 0;
    std::vector<Eigen::MatrixXd> m_weights, v_weights;
    std::vector<Eigen::VectorXd> m_biases, v_biases;

    static AdamState zeros_like(const Network &net);
};

/// One bias-corrected Adam update of `net`; increments `state.step`.
void adam_step(Network &net, AdamState &state, const Gradients &grads, const AdamHyper &hyper);

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 250;
    std::size_t patience = 5;
    double l2_factor = 0.001;
    AdamHyper adam;
    std::uint64_t seed = 0;
    Loss loss = Loss::kMae;
    /// Share of rows held out to monitor early stopping. When it leaves no
    /// validation row, the full training loss is monitored instead.
    double validation_fraction = 0.1;

    /// Throws ModelError on out-of-range values.
    void validate() const;
};

struct TrainResult {
    Network network;
    /// Monitored loss after each completed epoch.
    std::vector<double> history;
    std::size_t best_epoch = 0;
};

/// Mini-batch Adam with seeded shuffling and early stopping.
///
/// Training stops after `patience` consecutive epochs without improvement of
/// the monitored loss (after one epoch when patience is 0) and returns the
/// best parameters seen. A non-finite loss throws TrainingError.
TrainResult train(Network net, const Eigen::Ref<const RowMatrix> &inputs,
                  const Eigen::Ref<const RowMatrix> &targets, const TrainConfig &config);

/// The compressing half of a symmetric autoencoder, through the bottleneck.
struct Encoder {
    Network network;

    std::size_t input_size() const { return network.input_size(); }
    std::size_t output_size() const { return network.output_size(); }
    bool operator==(const Encoder &) const = default;
};

/// Throws ModelError unless the spec is an odd-length palindrome.
Encoder extract_encoder(const Network &autoencoder);

RowMatrix encode(const Encoder &encoder, const Eigen::Ref<const RowMatrix> &batch);

/// Binary classifier: tanh hidden layers, one sigmoid output unit.
struct MlpClassifier {
    Network network;

    /// Probability of class 1 per row.
    Eigen::VectorXd probability(const Eigen::Ref<const RowMatrix> &batch) const;
    /// 1 when the probability exceeds 0.5.
    std::vector<int> predict(const Eigen::Ref<const RowMatrix> &batch) const;
};

inline const std::vector<std::size_t> kMlpHiddenLayers = {100, 100};

/// Trains with cross-entropy loss regardless of `config.loss`.
/// Throws ModelError when only one class is present.
MlpClassifier train_mlp_classifier(const Eigen::Ref<const RowMatrix> &inputs,
                                   std::span<const int> labels, TrainConfig config,
                                   const std::vector<std::size_t> &hidden = kMlpHiddenLayers);

} // namespace nbcoded::neuralnet

#endif
