#pragma once

#include <map>

#include "dia/tensor.hpp"

namespace dia {

struct SigmoidParams {
  double kappa = 300.0;
  double tau = 0.05;
};

/// Per-layer content weights plus a global offset; the effective value is
/// clamped into [0, 1].
struct AlphaSchedule {
  std::map<int, double> perLayer;
  double globalOffset = 0.0;

  double effective(int layer) const;

  /// {0.8, 0.7, 0.6, 0.1} for layers 4..1.
  static AlphaSchedule standard(double offset = 0.0);
  /// Same-scene pairs that differ in tone: standard weights shifted by +0.1.
  static AlphaSchedule photo();
  /// Near-identical pairs: every layer at 1.0.
  static AlphaSchedule identical();
};

/// alpha * sigmoid(kappa * (m(x) - tau)) where m is the max-normalized squared
/// response magnitude of F.
ScalarMap weight_map(const FeatureMap& features, double alpha, const SigmoidParams& params = {});

/// content * W + detail * (1 - W), channel by channel.
FeatureMap blend(const FeatureMap& content, const FeatureMap& detail, const ScalarMap& weights);

}  // namespace dia
