#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dia/deconv.hpp"
#include "dia/fuse.hpp"
#include "dia/match.hpp"
#include "dia/net.hpp"

namespace dia {

enum class Mode { Full, ColorTransfer };

/// Search radius value meaning "the whole target grid".
inline constexpr int kFullGridSearch = 0;

struct PipelineConfig {
  std::map<int, int> patchRadiusPerLayer;
  std::map<int, int> searchRadiusPerLayer;  // kFullGridSearch for the coarsest layer
  int sweepsPerLayer = 10;
  AlphaSchedule alphaSchedule = AlphaSchedule::standard();
  SigmoidParams sigmoid;
  DeconvSettings deconv;
  std::uint64_t seed = 0;
  Mode mode = Mode::Full;
  double wlsLambda = 1.0;
  double wlsAlpha = 1.2;

  /// Defaults for a network with `levels` pyramid tags: patch 3x3 on layers
  /// >= 3 and 5x5 below, search radii {6,6,4,4} on layers 4..1, full-grid
  /// search on the coarsest layer.
  static PipelineConfig defaults(int levels = 5);

  /// Throws Error unless every level of the network has its per-layer entries.
  void validate_for(const Network& net) const;
};

struct LayerDiagnostics {
  int layer = 0;
  int patchRadius = 0;
  int searchRadius = 0;
  std::vector<double> costTraceAB;
  std::vector<double> costTraceBA;
  std::vector<double> deconvLossB;  // R_B' inversion, empty on layer 1
  std::vector<double> deconvLossA;  // R_A inversion
  double alpha = 0.0;               // alpha applied when blending into layer-1
};

struct LayerTiming {
  int layer = 0;
  double matchSeconds = 0.0;
  double reconstructSeconds = 0.0;
};

struct AnalogyResult {
  Image aPrime;
  Image b;
  NNField phiAB;
  NNField phiBA;
  std::vector<LayerDiagnostics> diagnostics;  // coarse to fine
  std::vector<LayerTiming> timings;           // wall clock; not reproducible
};

/// Runs the full coarse-to-fine analogy between A and B'.
AnalogyResult run(const Image& a, const Image& bPrime, const Network& net, const PipelineConfig& cfg);

/// Patch voting at pixel level: out(p) averages source(nnf(x) + (p - x)) over
/// the (2r+1)^2 neighborhood x of p, coordinates clamped, rounded half away
/// from zero.
Image aggregate_output(const Image& source, const NNField& nnf, int patchRadius = 2);

/// Edge-preserving WLS smoothing of `input` guided by `guide`, per channel,
/// values in [0, 255]. Throws NumericalError if the relative residual
/// exceeds 1e-6.
std::vector<double> wls_filter(const Image& input, const Image& guide, double lambda, double alpha);

/// WLS(A', A) + A - WLS(A, A): tone of A' with the detail layer of A.
Image wls_refine(const Image& a, const Image& aPrime, double lambda = 1.0, double alpha = 1.2);

/// Line-oriented, reproducible rendering of the per-layer diagnostics.
std::string format_diagnostics(const AnalogyResult& result);

}  // namespace dia
