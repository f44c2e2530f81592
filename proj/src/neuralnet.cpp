#include "nbcoded/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "nbcoded/errors.hpp"
#include "nbcoded/random.hpp"

namespace nbcoded::neuralnet {

namespace {

using Eigen::Index;

double activate(Activation a, double z) {
    switch (a) {
    case Activation::kTanh:
        return std::tanh(z);
    case Activation::kSigmoid:
        return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    return z;
}

// Derivative expressed through the activation value.
double activation_slope(Activation a, double value) {
    switch (a) {
    case Activation::kTanh:
        return 1.0 - value * value;
    case Activation::kSigmoid:
        return value * (1.0 - value);
    }
    return 1.0;
}

constexpr double kProbabilityClip = 1e-15;

double element_loss(Loss loss, double out, double target) {
    if (loss == Loss::kMae) {
        return std::abs(out - target);
    }
    const double p = std::clamp(out, kProbabilityClip, 1.0 - kProbabilityClip);
    return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

void check_width(std::size_t expected, Index got, const char *what) {
    if (static_cast<Index>(expected) != got) {
        std::ostringstream msg;
        msg << what << " width " << got << " does not match network width " << expected;
        throw ModelError(msg.str());
    }
}

// Batched forward pass used by training: one GEMM per layer.
std::vector<RowMatrix> forward_batched(const Network &net, const Eigen::Ref<const RowMatrix> &x) {
    std::vector<RowMatrix> acts;
    acts.reserve(net.weights.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        RowMatrix z = l == 0 ? RowMatrix(x * net.weights[l].transpose())
                             : RowMatrix(acts.back() * net.weights[l].transpose());
        z.rowwise() += net.biases[l].transpose();
        const auto act = net.spec.activation(l);
        acts.push_back(z.unaryExpr([act](double v) { return activate(act, v); }));
    }
    return acts;
}

double mean_loss(const RowMatrix &out, const Eigen::Ref<const RowMatrix> &targets, Loss loss) {
    double sum = 0.0;
    for (Index i = 0; i < out.rows(); ++i) {
        for (Index j = 0; j < out.cols(); ++j) {
            sum += element_loss(loss, out(i, j), targets(i, j));
        }
    }
    return sum / static_cast<double>(out.size());
}

} // namespace

std::string_view to_string(Activation a) {
    return a == Activation::kTanh ? "tanh" : "sigmoid";
}

std::string_view to_string(Loss l) {
    return l == Loss::kMae ? "mae" : "cross_entropy";
}

void LayerSpec::validate() const {
    if (sizes.size() < 2) {
        throw ModelError("a network needs at least an input and an output layer");
    }
    if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end()) {
        throw ModelError("layer sizes must be >= 1");
    }
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    }
    return n;
}

bool Network::all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            return false;
        }
    }
    return true;
}

bool Network::operator==(const Network &other) const {
    if (!(spec == other.spec) || weights.size() != other.weights.size()) {
        return false;
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) {
            return false;
        }
    }
    return true;
}

Network init_network(const LayerSpec &spec, std::uint64_t seed) {
    spec.validate();
    Network net;
    net.spec = spec;
    Rng rng{seed};
    for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
        const auto fan_in = spec.sizes[l];
        const auto fan_out = spec.sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd w(static_cast<Index>(fan_out), static_cast<Index>(fan_in));
        for (Index r = 0; r < w.rows(); ++r) {
            for (Index c = 0; c < w.cols(); ++c) {
                w(r, c) = rng.uniform(-limit, limit);
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(static_cast<Index>(fan_out)));
    }
    return net;
}

std::vector<RowMatrix> forward(const Network &net, const Eigen::Ref<const RowMatrix> &batch) {
    check_width(net.input_size(), batch.cols(), "input");
    std::vector<RowMatrix> acts;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        acts.emplace_back(batch.rows(), net.weights[l].rows());
    }
    Eigen::VectorXd a;
    for (Index i = 0; i < batch.rows(); ++i) {
        a = batch.row(i).transpose();
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            Eigen::VectorXd z = net.weights[l] * a + net.biases[l];
            const auto act = net.spec.activation(l);
            a = z.unaryExpr([act](double v) { return activate(act, v); });
            acts[l].row(i) = a.transpose();
        }
    }
    return acts;
}

RowMatrix predict(const Network &net, const Eigen::Ref<const RowMatrix> &batch) {
    return std::move(forward(net, batch).back());
}

double l2_penalty(const Network &net) {
    double sum = 0.0;
    for (const auto &w : net.weights) {
        sum += w.squaredNorm();
    }
    return sum;
}

double data_loss(const Network &net, const Eigen::Ref<const RowMatrix> &inputs,
                 const Eigen::Ref<const RowMatrix> &targets, Loss loss) {
    check_width(net.output_size(), targets.cols(), "target");
    if (targets.rows() != inputs.rows()) {
        throw ModelError("inputs and targets have different row counts");
    }
    return mean_loss(predict(net, inputs), targets, loss);
}

double total_loss(const Network &net, const Eigen::Ref<const RowMatrix> &inputs,
                  const Eigen::Ref<const RowMatrix> &targets, Loss loss, double l2_factor) {
    return data_loss(net, inputs, targets, loss) + l2_factor * l2_penalty(net);
}

Gradients gradients(const Network &net, const Eigen::Ref<const RowMatrix> &inputs,
                    const Eigen::Ref<const RowMatrix> &targets, Loss loss, double l2_factor) {
    check_width(net.input_size(), inputs.cols(), "input");
    check_width(net.output_size(), targets.cols(), "target");
    if (targets.rows() != inputs.rows() || inputs.rows() == 0) {
        throw ModelError("gradients need a non-empty batch with one target row per input row");
    }
    const auto acts = forward_batched(net, inputs);
    const auto layers = net.weights.size();
    const double scale = 1.0 / static_cast<double>(targets.size());

    // delta = d loss / d pre-activation of the current layer
    const RowMatrix &out = acts.back();
    RowMatrix delta(out.rows(), out.cols());
    const auto out_act = net.spec.output;
    for (Index i = 0; i < out.rows(); ++i) {
        for (Index j = 0; j < out.cols(); ++j) {
            const double y = out(i, j);
            const double t = targets(i, j);
            double d = 0.0;
            if (loss == Loss::kMae) {
                const double r = y - t;
                d = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) * activation_slope(out_act, y);
            } else if (out_act == Activation::kSigmoid) {
                d = y - t;
            } else {
                const double p = std::clamp(y, kProbabilityClip, 1.0 - kProbabilityClip);
                d = (-(t / p) + (1.0 - t) / (1.0 - p)) * activation_slope(out_act, y);
            }
            delta(i, j) = d * scale;
        }
    }

    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        if (l == 0) {
            g.weights[l] = delta.transpose() * inputs;
        } else {
            g.weights[l] = delta.transpose() * acts[l - 1];
        }
        g.weights[l] += 2.0 * l2_factor * net.weights[l];
        g.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            RowMatrix back = delta * net.weights[l];
            const auto act = net.spec.activation(l - 1);
            const auto &a = acts[l - 1];
            for (Index i = 0; i < back.rows(); ++i) {
                for (Index j = 0; j < back.cols(); ++j) {
                    back(i, j) *= activation_slope(act, a(i, j));
                }
            }
            delta = std::move(back);
        }
    }
    return g;
}

AdamState AdamState::zeros_like(const Network &net) {
    AdamState s;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        s.m_weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        s.m_biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    s.v_weights = s.m_weights;
    s.v_biases = s.m_biases;
    return s;
}

void adam_step(Network &net, AdamState &state, const Gradients &grads, const AdamHyper &hyper) {
    if (state.m_weights.size() != net.weights.size() || grads.weights.size() != net.weights.size()) {
        throw ModelError("optimizer state does not match the network");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(hyper.beta1, t);
    const double c2 = 1.0 - std::pow(hyper.beta2, t);

    auto update = [&](auto &param, auto &m, auto &v, const auto &g) {
        m = hyper.beta1 * m + (1.0 - hyper.beta1) * g;
        v = hyper.beta2 * v + (1.0 - hyper.beta2) * g.cwiseProduct(g);
        param.array() -= hyper.learning_rate * (m.array() / c1) /
                         ((v.array() / c2).sqrt() + hyper.epsilon);
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        update(net.weights[l], state.m_weights[l], state.v_weights[l], grads.weights[l]);
        update(net.biases[l], state.m_biases[l], state.v_biases[l], grads.biases[l]);
    }
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ModelError("epochs must be >= 1");
    if (batch_size < 1) throw ModelError("batch size must be >= 1");
    if (!(l2_factor >= 0.0)) throw ModelError("l2 factor must be >= 0");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ModelError("validation fraction must lie in [0, 1)");
    }
    if (!(adam.learning_rate > 0.0)) throw ModelError("learning rate must be > 0");
}

TrainResult train(Network net, const Eigen::Ref<const RowMatrix> &inputs,
                  const Eigen::Ref<const RowMatrix> &targets, const TrainConfig &config) {
    config.validate();
    check_width(net.input_size(), inputs.cols(), "input");
    check_width(net.output_size(), targets.cols(), "target");
    if (inputs.rows() != targets.rows() || inputs.rows() == 0) {
        throw ModelError("training needs a non-empty set with one target row per input row");
    }

    Rng rng{config.seed};
    std::vector<std::size_t> order(static_cast<std::size_t>(inputs.rows()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span{order});

    auto held_out = static_cast<std::size_t>(
        std::floor(static_cast<double>(order.size()) * config.validation_fraction));
    if (held_out >= order.size()) {
        held_out = 0;
    }
    std::vector<std::size_t> fit_rows(order.begin(), order.end() - static_cast<long>(held_out));
    std::vector<std::size_t> val_rows(order.end() - static_cast<long>(held_out), order.end());
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(val_rows.begin(), val_rows.end());

    auto gather = [](const Eigen::Ref<const RowMatrix> &m, const std::vector<std::size_t> &rows) {
        RowMatrix out(static_cast<Index>(rows.size()), m.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(rows[i]));
        }
        return out;
    };
    const auto &monitor_rows = val_rows.empty() ? fit_rows : val_rows;
    const RowMatrix monitor_in = gather(inputs, monitor_rows);
    const RowMatrix monitor_target = gather(targets, monitor_rows);
    auto monitored_loss = [&](const Network &n) {
        return mean_loss(forward_batched(n, monitor_in).back(), monitor_target, config.loss) +
               config.l2_factor * l2_penalty(n);
    };

    AdamState state = AdamState::zeros_like(net);
    TrainResult result;
    result.network = net;
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    RowMatrix batch_in, batch_target;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span{fit_rows});
        for (std::size_t start = 0; start < fit_rows.size(); start += config.batch_size) {
            const auto count = std::min(config.batch_size, fit_rows.size() - start);
            batch_in.resize(static_cast<Index>(count), inputs.cols());
            batch_target.resize(static_cast<Index>(count), targets.cols());
            for (std::size_t i = 0; i < count; ++i) {
                const auto row = static_cast<Index>(fit_rows[start + i]);
                batch_in.row(static_cast<Index>(i)) = inputs.row(row);
                batch_target.row(static_cast<Index>(i)) = targets.row(row);
            }
            adam_step(net, state,
                      gradients(net, batch_in, batch_target, config.loss, config.l2_factor),
                      config.adam);
        }

        const double loss = monitored_loss(net);
        if (!std::isfinite(loss) || !net.all_finite()) {
            throw TrainingError("training diverged: non-finite loss at epoch " +
                                std::to_string(epoch + 1));
        }
        result.history.push_back(loss);
        if (loss < best) {
            best = loss;
            result.network = net;
            result.best_epoch = epoch;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (since_best >= config.patience) {
            break;
        }
    }
    return result;
}

Encoder extract_encoder(const Network &autoencoder) {
    const auto &sizes = autoencoder.spec.sizes;
    if (sizes.size() < 3 || sizes.size() % 2 == 0 ||
        !std::equal(sizes.begin(), sizes.begin() + static_cast<long>(sizes.size() / 2),
                    sizes.rbegin())) {
        throw ModelError("encoder extraction needs a symmetric autoencoder spec");
    }
    const auto half = sizes.size() / 2;
    Encoder enc;
    enc.network.spec.sizes.assign(sizes.begin(), sizes.begin() + static_cast<long>(half) + 1);
    enc.network.spec.hidden = autoencoder.spec.hidden;
    enc.network.spec.output = autoencoder.spec.hidden;
    enc.network.weights.assign(autoencoder.weights.begin(),
                               autoencoder.weights.begin() + static_cast<long>(half));
    enc.network.biases.assign(autoencoder.biases.begin(),
                              autoencoder.biases.begin() + static_cast<long>(half));
    return enc;
}

RowMatrix encode(const Encoder &encoder, const Eigen::Ref<const RowMatrix> &batch) {
    return predict(encoder.network, batch);
}

Eigen::VectorXd MlpClassifier::probability(const Eigen::Ref<const RowMatrix> &batch) const {
    return neuralnet::predict(network, batch).col(0);
}

std::vector<int> MlpClassifier::predict(const Eigen::Ref<const RowMatrix> &batch) const {
    const Eigen::VectorXd p = probability(batch);
    std::vector<int> labels(static_cast<std::size_t>(p.size()));
    for (Index i = 0; i < p.size(); ++i) {
        labels[static_cast<std::size_t>(i)] = p[i] > 0.5 ? 1 : 0;
    }
    return labels;
}

MlpClassifier train_mlp_classifier(const Eigen::Ref<const RowMatrix> &inputs,
                                   std::span<const int> labels, TrainConfig config,
                                   const std::vector<std::size_t> &hidden) {
    if (labels.size() != static_cast<std::size_t>(inputs.rows())) {
        throw ModelError("one label per input row is required");
    }
    RowMatrix targets(inputs.rows(), 1);
    bool seen[2] = {false, false};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw ModelError("labels must be 0 or 1");
        }
        seen[labels[i]] = true;
        targets(static_cast<Index>(i), 0) = labels[i];
    }
    if (!seen[0] || !seen[1]) {
        throw ModelError("the MLP classifier needs both classes in its training set");
    }
    LayerSpec spec;
    spec.sizes.push_back(static_cast<std::size_t>(inputs.cols()));
    spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
    spec.sizes.push_back(1);
    spec.hidden = Activation::kTanh;
    spec.output = Activation::kSigmoid;
    config.loss = Loss::kCrossEntropy;

    auto result = train(init_network(spec, derive_seed(config.seed, 0)), inputs, targets, config);
    return MlpClassifier{std::move(result.network)};
}

} // namespace nbcoded::neuralnet
