#ifndef NBCODED_NAIVE_BAYES_HPP
#define NBCODED_NAIVE_BAYES_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "nbcoded/preprocess.hpp"

/// Binary Naive Bayes classifiers (class 0 = normal, 1 = attack).
///
/// All three families score in the log domain. Gaussian and Bernoulli score
/// a row as log P(c) + sum_i log P(x_i | c); Complement scores it as
/// -sum_i x_i * w(c, i) where w(c, i) are log feature weights estimated from
/// every class other than c. The predicted class is the arg-max score with
/// ties resolved to class 0.
namespace nbcoded::naive_bayes {

inline constexpr std::size_t kClasses = 2;

enum class Family { kGaussian, kBernoulli, kComplement };

std::string_view to_string(Family family);
/// Throws ModelError for anything but gaussian / bernoulli / complement.
Family parse_family(std::string_view token);

struct ClassPrior {
    std::array<double, kClasses> log_prior{};
    std::array<std::size_t, kClasses> class_count{};

    bool operator==(const ClassPrior &) const = default;
};

/// Rows are classes, columns features.
using ClassMatrix = Eigen::Matrix<double, 2, Eigen::Dynamic>;

struct GaussianNB {
    ClassMatrix mean;
    ClassMatrix variance;
    ClassPrior prior;
};

struct BernoulliNB {
    ClassMatrix log_p;
    ClassMatrix log_q;
    double binarize_threshold = 0.0;
    double alpha = 1.0;
    ClassPrior prior;
};

struct ComplementNB {
    ClassMatrix weight;
    double alpha = 1.0;
    ClassPrior prior;
};

using NBModel = std::variant<GaussianNB, BernoulliNB, ComplementNB>;

using Scores = std::array<double, kClasses>;

/// Variance floor: 1e-9 times the largest class variance (itself floored at 1e-12).
inline constexpr double kVarianceSmoothing = 1e-9;
inline constexpr double kVarianceFloor = 1e-12;

GaussianNB fit_gaussian(const Eigen::Ref<const RowMatrix> &x, std::span<const int> y);

/// Features are binarized as x > threshold. alpha = 0 is accepted only when
/// no class-conditional count is zero.
BernoulliNB fit_bernoulli(const Eigen::Ref<const RowMatrix> &x, std::span<const int> y,
                          double alpha = 1.0, double threshold = 0.0);

/// Requires non-negative inputs and alpha > 0.
ComplementNB fit_complement(const Eigen::Ref<const RowMatrix> &x, std::span<const int> y,
                            double alpha = 1.0);

NBModel fit(Family family, const Eigen::Ref<const RowMatrix> &x, std::span<const int> y,
            double alpha = 1.0, double threshold = 0.0);

Family family_of(const NBModel &model);
std::size_t feature_count(const NBModel &model);
const ClassPrior &prior_of(const NBModel &model);

Scores log_posterior(const NBModel &model, std::span<const double> x);

/// Arg-max of `scores`, ties to class 0.
inline int argmax(const Scores &scores) { return scores[1] > scores[0] ? 1 : 0; }

inline int predict(const NBModel &model, std::span<const double> x) {
    return argmax(log_posterior(model, x));
}

std::vector<int> predict(const NBModel &model, const Eigen::Ref<const RowMatrix> &x);

} // namespace nbcoded::naive_bayes

#endif
