#include "dia/fuse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dia/error.hpp"

namespace dia {

double AlphaSchedule::effective(int layer) const {
  const auto it = perLayer.find(layer);
  if (it == perLayer.end()) {
    throw Error("alpha schedule has no entry for layer " + std::to_string(layer));
  }
  return std::clamp(it->second + globalOffset, 0.0, 1.0);
}

AlphaSchedule AlphaSchedule::standard(double offset) {
  return {{{4, 0.8}, {3, 0.7}, {2, 0.6}, {1, 0.1}}, offset};
}

AlphaSchedule AlphaSchedule::photo() { return standard(0.1); }

AlphaSchedule AlphaSchedule::identical() {
  return {{{4, 1.0}, {3, 1.0}, {2, 1.0}, {1, 1.0}}, 0.0};
}

ScalarMap weight_map(const FeatureMap& features, double alpha, const SigmoidParams& params) {
  if (alpha < 0.0 || alpha > 1.0) throw Error("weight_map: alpha must lie in [0, 1]");
  ScalarMap w = response_magnitude(features);
  for (double& v : w.data()) v = alpha / (1.0 + std::exp(-params.kappa * (v - params.tau)));
  return w;
}

FeatureMap blend(const FeatureMap& content, const FeatureMap& detail, const ScalarMap& weights) {
  if (!content.same_shape(detail) || weights.height() != content.height() ||
      weights.width() != content.width()) {
    std::ostringstream os;
    os << "blend: content " << content.height() << "x" << content.width() << "x"
       << content.channels() << ", detail " << detail.height() << "x" << detail.width() << "x"
       << detail.channels() << ", weights " << weights.height() << "x" << weights.width();
    throw DimensionError(os.str());
  }
  FeatureMap out(content.height(), content.width(), content.channels());
  for (int r = 0; r < content.height(); ++r) {
    for (int c = 0; c < content.width(); ++c) {
      const double wc = weights(r, c);
      const auto a = content.at(r, c);
      const auto b = detail.at(r, c);
      auto o = out.at(r, c);
      for (std::size_t k = 0; k < o.size(); ++k) o[k] = a[k] * wc + b[k] * (1.0 - wc);
    }
  }
  return out;
}

}  // namespace dia
