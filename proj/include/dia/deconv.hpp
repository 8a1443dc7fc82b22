#pragma once

#include <cstdint>
#include <vector>

#include "dia/net.hpp"

namespace dia {

enum class StepRule {
  GradientDescent,  // steepest descent, backtracking Armijo search
  LBFGS,            // limited-memory BFGS direction, same line search
};

struct DeconvSettings {
  int maxIterations = 400;
  double relTolerance = 1e-5;
  StepRule stepRule = StepRule::LBFGS;
  int historySize = 8;         // L-BFGS memory
  double armijo = 1e-4;
  std::uint64_t seed = 0;
};

struct FeatureStats {
  double mean = 0.0;
  double stddev = 0.0;
};

FeatureStats feature_stats(const FeatureMap& map);

/// Gaussian map with mean 0 and the target's standard deviation.
FeatureMap init_guess(const FeatureStats& targetStats, int height, int width, int channels,
                      std::uint64_t seed);

struct DeconvResult {
  FeatureMap input;
  /// Loss at the initialization followed by the loss after every accepted step.
  std::vector<double> lossTrace;
  int iterations = 0;
};

/// Loss |subnet(x) - target|^2 and its gradient at x.
double inversion_loss(const Network& net, int from, int to, const FeatureMap& x,
                      const FeatureMap& target, FeatureMap* gradient);

/// Minimizes |subnet(from -> to)(R) - target|^2 over R, starting from
/// init_guess. Throws NumericalError when a loss or gradient turns non-finite.
DeconvResult deconvolve(const Network& net, int from, int to, const FeatureMap& target,
                        const DeconvSettings& settings);

/// Same, from a caller-supplied starting point.
DeconvResult deconvolve_from(const Network& net, int from, int to, const FeatureMap& target,
                             FeatureMap start, const DeconvSettings& settings);

}  // namespace dia
