#include "dia/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>

#include "dia/error.hpp"
#include "dia/random.hpp"

namespace dia {

namespace {

// Seed streams; one per consumer so that no two draw from the same sequence.
enum Stream : std::uint64_t {
  kInitAB = 1,
  kInitBA = 2,
  kMatchAB = 3,
  kMatchBA = 4,
  kDeconvB = 5,
  kDeconvA = 6,
};

std::uint64_t layer_seed(std::uint64_t base, int layer, Stream stream) {
  return derive_seed(base, static_cast<std::uint64_t>(layer) * 16 + stream);
}

[[noreturn]] void rethrow_with_layer(int layer, const std::exception_ptr& error) {
  const std::string prefix = "layer " + std::to_string(layer) + ": ";
  try {
    std::rethrow_exception(error);
  } catch (const DimensionError& e) {
    throw DimensionError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

// Runs two independent jobs, concurrently when OpenMP threads are available,
// and rethrows the first failure on the calling thread.
template <typename F, typename G>
void run_pair(int layer, F&& first, G&& second) {
  std::exception_ptr errors[2];
#pragma omp parallel sections
  {
#pragma omp section
    {
      try {
        first();
      } catch (...) {
        errors[0] = std::current_exception();
      }
    }
#pragma omp section
    {
      try {
        second();
      } catch (...) {
        errors[1] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) rethrow_with_layer(layer, e);
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

PipelineConfig PipelineConfig::defaults(int levels) {
  if (levels < 2) throw Error("pipeline needs at least 2 pyramid levels");
  PipelineConfig cfg;
  const std::map<int, int> receptiveField{{4, 6}, {3, 6}, {2, 4}, {1, 4}};
  for (int layer = 1; layer <= levels; ++layer) {
    cfg.patchRadiusPerLayer[layer] = layer >= 3 ? 1 : 2;
    if (layer == levels) {
      cfg.searchRadiusPerLayer[layer] = kFullGridSearch;
    } else {
      const auto it = receptiveField.find(layer);
      cfg.searchRadiusPerLayer[layer] = it != receptiveField.end() ? it->second : 6;
    }
  }
  return cfg;
}

void PipelineConfig::validate_for(const Network& net) const {
  for (int layer = 1; layer <= net.levels(); ++layer) {
    if (!patchRadiusPerLayer.contains(layer) || !searchRadiusPerLayer.contains(layer)) {
      throw Error("pipeline config has no patch/search radius for layer " + std::to_string(layer));
    }
    if (patchRadiusPerLayer.at(layer) < 0 || searchRadiusPerLayer.at(layer) < 0) {
      throw Error("pipeline config: negative radius for layer " + std::to_string(layer));
    }
    if (layer < net.levels()) alphaSchedule.effective(layer);
  }
  if (sweepsPerLayer < 1) throw Error("pipeline config: sweepsPerLayer must be >= 1");
}

AnalogyResult run(const Image& a, const Image& bPrime, const Network& net,
                  const PipelineConfig& cfg) {
  cfg.validate_for(net);
  const int levels = net.levels();

  // Index 0 holds layer 1.
  const std::vector<FeatureMap> featA = forward(net, a);
  const std::vector<FeatureMap> featBp = forward(net, bPrime);
  if (featA[0].height() != a.height() || featA[0].width() != a.width()) {
    throw DimensionError("the first pyramid level must keep the input resolution");
  }
  std::vector<FeatureMap> featAp(static_cast<std::size_t>(levels));
  std::vector<FeatureMap> featB(static_cast<std::size_t>(levels));
  const auto idx = [](int layer) { return static_cast<std::size_t>(layer - 1); };
  featAp[idx(levels)] = featA[idx(levels)];
  featB[idx(levels)] = featBp[idx(levels)];

  const FeatureMap& topA = featA[idx(levels)];
  const FeatureMap& topB = featBp[idx(levels)];
  NNField phiAB = random_nnf(topA.height(), topA.width(), topB.height(), topB.width(),
                             layer_seed(cfg.seed, levels, kInitAB));
  NNField phiBA = random_nnf(topB.height(), topB.width(), topA.height(), topA.width(),
                             layer_seed(cfg.seed, levels, kInitBA));

  AnalogyResult result;
  for (int layer = levels; layer >= 1; --layer) {
    LayerDiagnostics diag;
    diag.layer = layer;
    diag.patchRadius = cfg.patchRadiusPerLayer.at(layer);
    diag.searchRadius = cfg.searchRadiusPerLayer.at(layer);
    LayerTiming timing;
    timing.layer = layer;

    auto clock = std::chrono::steady_clock::now();
    const FeatureMap nA = normalize(featA[idx(layer)]);
    const FeatureMap nAp = normalize(featAp[idx(layer)]);
    const FeatureMap nB = normalize(featB[idx(layer)]);
    const FeatureMap nBp = normalize(featBp[idx(layer)]);

    MatchSettings settings;
    settings.patchRadius = diag.patchRadius;
    settings.iterations = cfg.sweepsPerLayer;
    MatchSettings settingsAB = settings;
    MatchSettings settingsBA = settings;
    settingsAB.searchRadius = diag.searchRadius != kFullGridSearch
                                  ? diag.searchRadius
                                  : std::max(nB.height(), nB.width());
    settingsBA.searchRadius = diag.searchRadius != kFullGridSearch
                                  ? diag.searchRadius
                                  : std::max(nA.height(), nA.width());
    settingsAB.seed = layer_seed(cfg.seed, layer, kMatchAB);
    settingsBA.seed = layer_seed(cfg.seed, layer, kMatchBA);

    run_pair(
        layer,
        [&] {
          auto res = patchmatch({nA, nAp, nB, nBp}, phiAB, settingsAB);
          phiAB = std::move(res.nnf);
          diag.costTraceAB = std::move(res.costTrace);
        },
        [&] {
          auto res = patchmatch({nBp, nB, nAp, nA}, phiBA, settingsBA);
          phiBA = std::move(res.nnf);
          diag.costTraceBA = std::move(res.costTrace);
        });
    timing.matchSeconds = seconds_since(clock);

    if (layer > 1) {
      clock = std::chrono::steady_clock::now();
      const int below = layer - 1;
      const double alpha = cfg.alphaSchedule.effective(below);
      diag.alpha = alpha;
      const FeatureMap& contentA = featA[idx(below)];
      const FeatureMap& contentBp = featBp[idx(below)];

      run_pair(
          layer,
          [&] {
            const FeatureMap target = warp(featBp[idx(layer)], phiAB);
            DeconvSettings ds = cfg.deconv;
            ds.seed = layer_seed(cfg.seed, layer, kDeconvB);
            FeatureMap start = init_guess(feature_stats(target), contentA.height(),
                                          contentA.width(), contentA.channels(), ds.seed);
            auto inv = deconvolve_from(net, below, layer, target, std::move(start), ds);
            featAp[idx(below)] = blend(contentA, inv.input, weight_map(contentA, alpha, cfg.sigmoid));
            diag.deconvLossB = std::move(inv.lossTrace);
          },
          [&] {
            const FeatureMap target = warp(featA[idx(layer)], phiBA);
            DeconvSettings ds = cfg.deconv;
            ds.seed = layer_seed(cfg.seed, layer, kDeconvA);
            FeatureMap start = init_guess(feature_stats(target), contentBp.height(),
                                          contentBp.width(), contentBp.channels(), ds.seed);
            auto inv = deconvolve_from(net, below, layer, target, std::move(start), ds);
            featB[idx(below)] =
                blend(contentBp, inv.input, weight_map(contentBp, alpha, cfg.sigmoid));
            diag.deconvLossA = std::move(inv.lossTrace);
          });

      phiAB = upsample_nnf(phiAB, contentA.height(), contentA.width(), contentBp.height(),
                           contentBp.width());
      phiBA = upsample_nnf(phiBA, contentBp.height(), contentBp.width(), contentA.height(),
                           contentA.width());
      timing.reconstructSeconds = seconds_since(clock);
    }
    result.diagnostics.push_back(std::move(diag));
    result.timings.push_back(timing);
  }

  const int outputRadius = cfg.patchRadiusPerLayer.at(1);
  result.aPrime = aggregate_output(bPrime, phiAB, outputRadius);
  result.b = aggregate_output(a, phiBA, outputRadius);
  if (cfg.mode == Mode::ColorTransfer) {
    result.aPrime = wls_refine(a, result.aPrime, cfg.wlsLambda, cfg.wlsAlpha);
    result.b = wls_refine(bPrime, result.b, cfg.wlsLambda, cfg.wlsAlpha);
  }
  result.phiAB = std::move(phiAB);
  result.phiBA = std::move(phiBA);
  return result;
}

Image aggregate_output(const Image& source, const NNField& nnf, int patchRadius) {
  if (nnf.target_height() != source.height() || nnf.target_width() != source.width()) {
    std::ostringstream os;
    os << "aggregate_output: NNF targets " << nnf.target_height() << "x" << nnf.target_width()
       << " but source is " << source.height() << "x" << source.width();
    throw DimensionError(os.str());
  }
  const int h = nnf.height();
  const int w = nnf.width();
  const double n = static_cast<double>((2 * patchRadius + 1) * (2 * patchRadius + 1));
  Image out(h, w);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int sum[3] = {0, 0, 0};
      for (int dy = -patchRadius; dy <= patchRadius; ++dy) {
        const int xr = clamp_index(r + dy, h);
        for (int dx = -patchRadius; dx <= patchRadius; ++dx) {
          const int xc = clamp_index(c + dx, w);
          const Coord q = nnf(xr, xc);
          const int yr = clamp_index(q.row + (r - xr), source.height());
          const int yc = clamp_index(q.col + (c - xc), source.width());
          for (int ch = 0; ch < 3; ++ch) sum[ch] += source(yr, yc, ch);
        }
      }
      for (int ch = 0; ch < 3; ++ch) {
        out(r, c, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(sum[ch] / n), 0L, 255L));
      }
    }
  }
  return out;
}

std::string format_diagnostics(const AnalogyResult& result) {
  std::ostringstream os;
  os.precision(17);
  const auto list = [&os](const char* key, int layer, const std::vector<double>& values) {
    os << "layer " << layer << " " << key;
    for (double v : values) os << " " << v;
    os << "\n";
  };
  os << "layers " << result.diagnostics.size() << "\n";
  for (const LayerDiagnostics& d : result.diagnostics) {
    os << "layer " << d.layer << " patch_radius " << d.patchRadius << " search_radius "
       << d.searchRadius << " alpha " << d.alpha << "\n";
    list("cost_ab", d.layer, d.costTraceAB);
    list("cost_ba", d.layer, d.costTraceBA);
    if (!d.deconvLossB.empty()) list("deconv_loss_b", d.layer, d.deconvLossB);
    if (!d.deconvLossA.empty()) list("deconv_loss_a", d.layer, d.deconvLossA);
  }
  os << "phi_ab " << result.phiAB.height() << " " << result.phiAB.width() << " "
     << result.phiAB.target_height() << " " << result.phiAB.target_width() << "\n";
  os << "phi_ba " << result.phiBA.height() << " " << result.phiBA.width() << " "
     << result.phiBA.target_height() << " " << result.phiBA.target_width() << "\n";
  return os.str();
}

}  // namespace dia
