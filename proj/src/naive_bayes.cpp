#include "nbcoded/naive_bayes.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nbcoded/errors.hpp"

namespace nbcoded::naive_bayes {

namespace {

ClassPrior class_prior(const Eigen::Ref<const RowMatrix> &x, std::span<const int> y) {
    if (y.size() != static_cast<std::size_t>(x.rows())) {
        throw ModelError("got " + std::to_string(x.rows()) + " rows but " +
                         std::to_string(y.size()) + " labels");
    }
    ClassPrior prior;
    for (int label : y) {
        if (label != 0 && label != 1) {
            throw ModelError("labels must be 0 or 1");
        }
        ++prior.class_count[static_cast<std::size_t>(label)];
    }
    if (prior.class_count[0] == 0 || prior.class_count[1] == 0) {
        throw ModelError("both classes must be present to fit a Naive Bayes model");
    }
    const auto n = static_cast<double>(y.size());
    for (std::size_t c = 0; c < kClasses; ++c) {
        prior.log_prior[c] = std::log(static_cast<double>(prior.class_count[c]) / n);
    }
    return prior;
}

void check_width(std::size_t expected, std::size_t got) {
    if (expected != got) {
        throw ModelError("model expects " + std::to_string(expected) + " features, got " +
                         std::to_string(got));
    }
}

} // namespace

std::string_view to_string(Family family) {
    switch (family) {
    case Family::kGaussian:
        return "gaussian";
    case Family::kBernoulli:
        return "bernoulli";
    case Family::kComplement:
        return "complement";
    }
    return "?";
}

Family parse_family(std::string_view token) {
    if (token == "gaussian") return Family::kGaussian;
    if (token == "bernoulli") return Family::kBernoulli;
    if (token == "complement") return Family::kComplement;
    throw ModelError("unknown Naive Bayes family '" + std::string{token} + "'");
}

GaussianNB fit_gaussian(const Eigen::Ref<const RowMatrix> &x, std::span<const int> y) {
    GaussianNB model;
    model.prior = class_prior(x, y);
    const auto d = x.cols();
    model.mean = ClassMatrix::Zero(2, d);
    model.variance = ClassMatrix::Zero(2, d);

    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        model.mean.row(y[static_cast<std::size_t>(i)]) += x.row(i);
    }
    for (std::size_t c = 0; c < kClasses; ++c) {
        model.mean.row(static_cast<Eigen::Index>(c)) /=
            static_cast<double>(model.prior.class_count[c]);
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int c = y[static_cast<std::size_t>(i)];
        model.variance.row(c) += (x.row(i) - model.mean.row(c)).array().square().matrix();
    }
    for (std::size_t c = 0; c < kClasses; ++c) {
        model.variance.row(static_cast<Eigen::Index>(c)) /=
            static_cast<double>(model.prior.class_count[c]);
    }

    const double largest = d > 0 ? model.variance.maxCoeff() : 0.0;
    model.variance.array() += kVarianceSmoothing * std::max(largest, kVarianceFloor);
    return model;
}

BernoulliNB fit_bernoulli(const Eigen::Ref<const RowMatrix> &x, std::span<const int> y,
                          double alpha, double threshold) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ModelError("Bernoulli smoothing alpha must be >= 0");
    }
    BernoulliNB model;
    model.prior = class_prior(x, y);
    model.alpha = alpha;
    model.binarize_threshold = threshold;
    const auto d = x.cols();

    ClassMatrix ones = ClassMatrix::Zero(2, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int c = y[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) {
            if (x(i, j) > threshold) {
                ones(c, j) += 1.0;
            }
        }
    }

    model.log_p.resize(2, d);
    model.log_q.resize(2, d);
    for (std::size_t c = 0; c < kClasses; ++c) {
        const auto n = static_cast<double>(model.prior.class_count[c]);
        const auto row = static_cast<Eigen::Index>(c);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double on = ones(row, j);
            const double off = n - on;
            if (alpha == 0.0 && (on == 0.0 || off == 0.0)) {
                throw ModelError("alpha = 0 with a zero count for class " + std::to_string(c) +
                                 ", feature " + std::to_string(j) + " would give log(0)");
            }
            const double denom = n + 2.0 * alpha;
            model.log_p(row, j) = std::log((on + alpha) / denom);
            model.log_q(row, j) = std::log((off + alpha) / denom);
        }
    }
    return model;
}

ComplementNB fit_complement(const Eigen::Ref<const RowMatrix> &x, std::span<const int> y,
                            double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ModelError("Complement smoothing alpha must be > 0");
    }
    if (x.size() > 0 && x.minCoeff() < 0.0) {
        throw ModelError("Complement NB needs non-negative inputs; translate the features first");
    }
    ComplementNB model;
    model.prior = class_prior(x, y);
    model.alpha = alpha;
    const auto d = x.cols();

    ClassMatrix totals = ClassMatrix::Zero(2, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        totals.row(y[static_cast<std::size_t>(i)]) += x.row(i);
    }
    model.weight.resize(2, d);
    for (Eigen::Index c = 0; c < 2; ++c) {
        // With two classes the complement of c is the other class.
        const auto complement = totals.row(1 - c);
        const double denom = static_cast<double>(d) * alpha + complement.sum();
        for (Eigen::Index j = 0; j < d; ++j) {
            model.weight(c, j) = std::log((alpha + complement(j)) / denom);
        }
    }
    return model;
}

NBModel fit(Family family, const Eigen::Ref<const RowMatrix> &x, std::span<const int> y,
            double alpha, double threshold) {
    switch (family) {
    case Family::kGaussian:
        return fit_gaussian(x, y);
    case Family::kBernoulli:
        return fit_bernoulli(x, y, alpha, threshold);
    case Family::kComplement:
        return fit_complement(x, y, alpha);
    }
    throw ModelError("unknown family");
}

Family family_of(const NBModel &model) {
    return static_cast<Family>(model.index());
}

std::size_t feature_count(const NBModel &model) {
    return std::visit(
        [](const auto &m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GaussianNB>) {
                return static_cast<std::size_t>(m.mean.cols());
            } else if constexpr (std::is_same_v<T, BernoulliNB>) {
                return static_cast<std::size_t>(m.log_p.cols());
            } else {
                return static_cast<std::size_t>(m.weight.cols());
            }
        },
        model);
}

const ClassPrior &prior_of(const NBModel &model) {
    return std::visit([](const auto &m) -> const ClassPrior & { return m.prior; }, model);
}

Scores log_posterior(const NBModel &model, std::span<const double> x) {
    check_width(feature_count(model), x.size());
    Scores scores{};
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            for (std::size_t c = 0; c < kClasses; ++c) {
                const auto row = static_cast<Eigen::Index>(c);
                double s = 0.0;
                if constexpr (std::is_same_v<T, GaussianNB>) {
                    s = m.prior.log_prior[c];
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        const auto col = static_cast<Eigen::Index>(j);
                        const double var = m.variance(row, col);
                        const double diff = x[j] - m.mean(row, col);
                        s += -0.5 * std::log(2.0 * std::numbers::pi * var) -
                             diff * diff / (2.0 * var);
                    }
                } else if constexpr (std::is_same_v<T, BernoulliNB>) {
                    s = m.prior.log_prior[c];
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        const auto col = static_cast<Eigen::Index>(j);
                        s += x[j] > m.binarize_threshold ? m.log_p(row, col) : m.log_q(row, col);
                    }
                } else {
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        if (x[j] < 0.0) {
                            throw ModelError("Complement NB input must be non-negative");
                        }
                        s -= x[j] * m.weight(row, static_cast<Eigen::Index>(j));
                    }
                }
                scores[c] = s;
            }
        },
        model);
    return scores;
}

std::vector<int> predict(const NBModel &model, const Eigen::Ref<const RowMatrix> &x) {
    check_width(feature_count(model), static_cast<std::size_t>(x.cols()));
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Map<Eigen::RowVectorXd>(row.data(), x.cols()) = x.row(i);
        out[static_cast<std::size_t>(i)] = predict(model, row);
    }
    return out;
}

} // namespace nbcoded::naive_bayes
