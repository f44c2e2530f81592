#ifndef NBCODED_BUILDERS_HPP
#define NBCODED_BUILDERS_HPP

#include "nbcoded/eval.hpp"
#include "nbcoded/pipeline.hpp"

/// Cross-validation builders for the models compared by the tool.
/// Each overrides the configured seed with the one supplied per fold.
namespace nbcoded::builders {

/// Reports the NBcoded stage-time sum as training time.
eval::ModelBuilder nbcoded(naive_bayes::Family family, pipeline::NBcodedConfig config = {});

eval::ModelBuilder naive_bayes(naive_bayes::Family family, double alpha = 1.0,
                               double bernoulli_threshold = 0.0);

eval::ModelBuilder mlp(neuralnet::TrainConfig config = pipeline::default_mlp_config());

} // namespace nbcoded::builders

#endif
