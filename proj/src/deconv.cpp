#include "dia/deconv.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

namespace dia {

namespace {

using Vec = Eigen::Map<Eigen::VectorXd>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;

ConstVec view(const FeatureMap& m) {
  return ConstVec(m.data().data(), static_cast<Eigen::Index>(m.size()));
}
Vec view(FeatureMap& m) { return Vec(m.data().data(), static_cast<Eigen::Index>(m.size())); }

bool all_finite(const FeatureMap& m) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// Smallest subnet input whose forward pass yields the given output size.
std::array<int, 2> input_size_for(std::span<const Layer> layers, int outH, int outW) {
  int h = outH;
  int w = outW;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (const auto* conv = std::get_if<ConvLayer>(&*it)) {
      h = (h - 1) * conv->stride + conv->kernelH - 2 * conv->padding;
      w = (w - 1) * conv->stride + conv->kernelW - 2 * conv->padding;
    } else if (const auto* pool = std::get_if<MaxPoolLayer>(&*it)) {
      h = (h - 1) * pool->stride + pool->kernel;
      w = (w - 1) * pool->stride + pool->kernel;
    }
  }
  return {h, w};
}

struct Evaluation {
  double loss = 0.0;
  FeatureMap residual;  // subnet(x) - target
  std::optional<SubnetTrace> trace;
};

Evaluation evaluate(const Network& net, int from, int to, const FeatureMap& x,
                    const FeatureMap& target) {
  Evaluation e;
  e.trace.emplace(net, from, to, x);
  const FeatureMap& out = e.trace->output();
  if (!out.same_shape(target)) {
    std::ostringstream os;
    os << "deconvolve: subnet output " << out.height() << "x" << out.width() << "x"
       << out.channels() << " does not match target " << target.height() << "x"
       << target.width() << "x" << target.channels();
    throw DimensionError(os.str());
  }
  e.residual = out;
  view(e.residual) -= view(target);
  e.loss = view(e.residual).squaredNorm();
  return e;
}

FeatureMap gradient_of(Evaluation& e) {
  FeatureMap upstream = e.residual;
  view(upstream) *= 2.0;
  return e.trace->backward(upstream);
}

[[noreturn]] void non_finite(int iteration, const char* what) {
  std::ostringstream os;
  os << "deconvolve: non-finite " << what << " at iteration " << iteration;
  throw NumericalError(os.str());
}

}  // namespace

FeatureStats feature_stats(const FeatureMap& map) {
  FeatureStats stats;
  if (map.empty()) return stats;
  const auto v = view(map);
  stats.mean = v.mean();
  const double var = (v.array() - stats.mean).square().mean();
  stats.stddev = std::sqrt(var);
  return stats;
}

FeatureMap init_guess(const FeatureStats& targetStats, int height, int width, int channels,
                      std::uint64_t seed) {
  FeatureMap out(height, width, channels);
  if (!(targetStats.stddev > 0.0)) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, targetStats.stddev);
  for (double& v : out.data()) v = gauss(rng);
  return out;
}

double inversion_loss(const Network& net, int from, int to, const FeatureMap& x,
                      const FeatureMap& target, FeatureMap* gradient) {
  Evaluation e = evaluate(net, from, to, x, target);
  if (gradient) *gradient = gradient_of(e);
  return e.loss;
}

DeconvResult deconvolve(const Network& net, int from, int to, const FeatureMap& target,
                        const DeconvSettings& settings) {
  const auto [h, w] = input_size_for(net.subnet(from, to), target.height(), target.width());
  if (h <= 0 || w <= 0) throw DimensionError("deconvolve: target too small for this subnet");
  const int channels = from == 0 ? 3 : net.channels_at(from);
  FeatureMap start = init_guess(feature_stats(target), h, w, channels, settings.seed);
  return deconvolve_from(net, from, to, target, std::move(start), settings);
}

DeconvResult deconvolve_from(const Network& net, int from, int to, const FeatureMap& target,
                             FeatureMap start, const DeconvSettings& settings) {
  if (settings.maxIterations < 1 || !(settings.relTolerance > 0.0)) {
    throw Error("deconvolve: maxIterations must be >= 1 and relTolerance > 0");
  }
  DeconvResult result;
  result.input = std::move(start);
  FeatureMap& x = result.input;

  Evaluation current = evaluate(net, from, to, x, target);
  if (!std::isfinite(current.loss)) non_finite(0, "loss");
  FeatureMap grad = gradient_of(current);
  if (!all_finite(grad)) non_finite(0, "gradient");
  result.lossTrace.push_back(current.loss);

  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;  // (s, y)
  Eigen::VectorXd direction(n);
  double lastStep = 1.0;

  for (int iter = 1; iter <= settings.maxIterations; ++iter) {
    if (current.loss == 0.0) break;
    const ConstVec g = view(std::as_const(grad));
    if (g.squaredNorm() == 0.0) break;

    // Search direction.
    if (settings.stepRule == StepRule::LBFGS && !history.empty()) {
      Eigen::VectorXd q = -g;
      std::vector<double> alpha(history.size());
      for (std::size_t i = history.size(); i-- > 0;) {
        const auto& [s, y] = history[i];
        alpha[i] = s.dot(q) / y.dot(s);
        q -= alpha[i] * y;
      }
      const auto& [sLast, yLast] = history.back();
      q *= sLast.dot(yLast) / yLast.squaredNorm();
      for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& [s, y] = history[i];
        const double beta = y.dot(q) / y.dot(s);
        q += (alpha[i] - beta) * s;
      }
      direction = q;
    } else {
      direction = -g;
    }
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      history.clear();
      direction = -g;
      slope = -g.squaredNorm();
    }

    // Backtracking line search (Armijo).
    double step = 1.0;
    const bool probe = settings.stepRule == StepRule::LBFGS && history.empty();
    if (settings.stepRule == StepRule::GradientDescent) {
      if (iter > 1) step = 2.0 * lastStep;
    } else if (probe) {
      // No curvature estimate yet: a short probe step, so the first update
      // cannot overshoot and park entries in a relu's flat region.
      step = std::min(1.0, 1.0 / g.lpNorm<1>());
    }
    bool accepted = false;
    FeatureMap trial(x.height(), x.width(), x.channels());
    Evaluation next;
    for (int attempt = 0; attempt < 60; ++attempt, step *= 0.5) {
      view(trial) = view(x) + step * direction;
      next = evaluate(net, from, to, trial, target);
      if (std::isfinite(next.loss) &&
          next.loss <= current.loss + settings.armijo * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted || !(next.loss < current.loss)) break;

    FeatureMap nextGrad = gradient_of(next);
    if (!all_finite(nextGrad)) non_finite(iter, "gradient");

    if (settings.stepRule == StepRule::LBFGS) {
      Eigen::VectorXd s = view(trial) - view(x);
      Eigen::VectorXd y = view(nextGrad) - g;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        history.emplace_back(std::move(s), std::move(y));
        if (static_cast<int>(history.size()) > settings.historySize) history.pop_front();
      }
    }

    const double previous = current.loss;
    x = std::move(trial);
    grad = std::move(nextGrad);
    current = std::move(next);
    lastStep = step;
    result.iterations = iter;
    result.lossTrace.push_back(current.loss);

    if (!probe && (previous - current.loss) / previous < settings.relTolerance) break;
  }
  return result;
}

}  // namespace dia
