#include "dia/match.hpp"

#include <limits>
#include <random>
#include <sstream>

#include "dia/error.hpp"
#include "dia/random.hpp"

namespace dia {

namespace {

// Same sum as patch_cost, abandoned as soon as it reaches `bound`. A result
// >= bound is only meaningful as "not better".
double bounded_cost(Coord p, Coord q, const MatchMaps& maps, int radius, bool bidirectional,
                    double bound) {
  const int sh = maps.source.height();
  const int sw = maps.source.width();
  const int th = maps.target.height();
  const int tw = maps.target.width();
  const std::size_t channels = static_cast<std::size_t>(maps.source.channels());
  double sum = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    const int xr = clamp_index(p.row + dy, sh);
    const int yr = clamp_index(q.row + dy, th);
    for (int dx = -radius; dx <= radius; ++dx) {
      const int xc = clamp_index(p.col + dx, sw);
      const int yc = clamp_index(q.col + dx, tw);
      if (bidirectional) {
        const double* a = maps.source.at(xr, xc).data();
        const double* b = maps.target.at(yr, yc).data();
        for (std::size_t k = 0; k < channels; ++k) {
          const double d = a[k] - b[k];
          sum += d * d;
        }
      }
      const double* a2 = maps.sourceAlt.at(xr, xc).data();
      const double* b2 = maps.targetAlt.at(yr, yc).data();
      for (std::size_t k = 0; k < channels; ++k) {
        const double d = a2[k] - b2[k];
        sum += d * d;
      }
    }
    if (sum >= bound) return sum;
  }
  return sum;
}

std::string shape(const FeatureMap& m) {
  std::ostringstream os;
  os << m.height() << "x" << m.width() << "x" << m.channels();
  return os.str();
}

}  // namespace

void check_match_maps(const MatchMaps& maps) {
  if (!maps.source.same_shape(maps.sourceAlt)) {
    throw DimensionError("match: source maps differ in shape (" + shape(maps.source) + " vs " +
                         shape(maps.sourceAlt) + ")");
  }
  if (!maps.target.same_shape(maps.targetAlt)) {
    throw DimensionError("match: target maps differ in shape (" + shape(maps.target) + " vs " +
                         shape(maps.targetAlt) + ")");
  }
  if (maps.source.channels() != maps.target.channels()) {
    throw DimensionError("match: source and target channel counts differ (" + shape(maps.source) +
                         " vs " + shape(maps.target) + ")");
  }
}

double patch_cost(Coord p, Coord q, const MatchMaps& maps, int patchRadius, bool bidirectional) {
  return bounded_cost(p, q, maps, patchRadius, bidirectional,
                      std::numeric_limits<double>::infinity());
}

std::vector<double> cost_field(const MatchMaps& maps, const NNField& nnf, int patchRadius,
                               bool bidirectional) {
  check_match_maps(maps);
  std::vector<double> costs(static_cast<std::size_t>(nnf.height()) * nnf.width());
  const int w = nnf.width();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < nnf.height(); ++r) {
    for (int c = 0; c < w; ++c) {
      costs[static_cast<std::size_t>(r) * w + c] =
          patch_cost({r, c}, nnf(r, c), maps, patchRadius, bidirectional);
    }
  }
  return costs;
}

double total_cost(const MatchMaps& maps, const NNField& nnf, int patchRadius, bool bidirectional) {
  double sum = 0.0;
  for (double c : cost_field(maps, nnf, patchRadius, bidirectional)) sum += c;
  return sum;
}

NNField random_nnf(int height, int width, int targetHeight, int targetWidth, std::uint64_t seed) {
  NNField nnf(height, width, targetHeight, targetWidth);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> row(0, targetHeight - 1);
  std::uniform_int_distribution<int> col(0, targetWidth - 1);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int qr = row(rng);
      nnf.set(r, c, {qr, col(rng)});
    }
  }
  return nnf;
}

PatchMatchResult patchmatch(const MatchMaps& maps, const std::optional<NNField>& init,
                            const MatchSettings& settings) {
  check_match_maps(maps);
  const int h = maps.source.height();
  const int w = maps.source.width();
  const int th = maps.target.height();
  const int tw = maps.target.width();
  if (settings.patchRadius < 0 || settings.iterations < 1 || settings.searchRadius < 1) {
    throw Error("patchmatch: invalid settings");
  }

  PatchMatchResult result;
  if (init) {
    if (init->height() != h || init->width() != w || init->target_height() != th ||
        init->target_width() != tw) {
      throw DimensionError("patchmatch: initial NNF does not match the feature map grids");
    }
    result.nnf = *init;
  } else {
    result.nnf = random_nnf(h, w, th, tw, derive_seed(settings.seed, 0));
  }
  NNField& nnf = result.nnf;
  const int radius = settings.patchRadius;
  const bool bidir = settings.bidirectional;

  std::vector<double> cost = cost_field(maps, nnf, radius, bidir);
  const auto at = [w](int r, int c) { return static_cast<std::size_t>(r) * w + c; };
  const auto sum = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  result.costTrace.push_back(sum(cost));

  std::mt19937_64 rng(derive_seed(settings.seed, 1));
  const auto tryCandidate = [&](int r, int c, Coord q) {
    q = nnf.clamp_target(q);
    const double current = cost[at(r, c)];
    const double candidate = bounded_cost({r, c}, q, maps, radius, bidir, current);
    if (candidate < current) {
      cost[at(r, c)] = candidate;
      nnf.set(r, c, q);
    }
  };

  for (int sweep = 1; sweep <= settings.iterations; ++sweep) {
    const bool forwardScan = sweep % 2 == 1;
    const int step = forwardScan ? 1 : -1;
    const int rBegin = forwardScan ? 0 : h - 1;
    const int cBegin = forwardScan ? 0 : w - 1;
    for (int i = 0, r = rBegin; i < h; ++i, r += step) {
      for (int j = 0, c = cBegin; j < w; ++j, c += step) {
        // Propagation from the already-visited horizontal and vertical neighbors.
        const int nc = c - step;
        if (nc >= 0 && nc < w) {
          const Coord q = nnf(r, nc);
          tryCandidate(r, c, {q.row, q.col + step});
        }
        const int nr = r - step;
        if (nr >= 0 && nr < h) {
          const Coord q = nnf(nr, c);
          tryCandidate(r, c, {q.row + step, q.col});
        }
        // Random search around the current best with a halving window,
        // sampled uniformly inside the window's overlap with the target grid.
        for (int reach = settings.searchRadius; reach >= 1; reach /= 2) {
          const Coord best = nnf(r, c);
          std::uniform_int_distribution<int> row(std::max(0, best.row - reach),
                                                 std::min(th - 1, best.row + reach));
          std::uniform_int_distribution<int> col(std::max(0, best.col - reach),
                                                 std::min(tw - 1, best.col + reach));
          const int qr = row(rng);
          const int qc = col(rng);
          tryCandidate(r, c, {qr, qc});
        }
      }
    }
    result.costTrace.push_back(sum(cost));
  }
  return result;
}

NNField exhaustive_nnf(const MatchMaps& maps, int patchRadius, bool bidirectional) {
  check_match_maps(maps);
  const int th = maps.target.height();
  const int tw = maps.target.width();
  if (th > kExhaustiveMaxSide || tw > kExhaustiveMaxSide) {
    std::ostringstream os;
    os << "exhaustive_nnf: target grid " << th << "x" << tw << " exceeds the "
       << kExhaustiveMaxSide << "x" << kExhaustiveMaxSide << " limit";
    throw DimensionError(os.str());
  }
  const int h = maps.source.height();
  const int w = maps.source.width();
  NNField nnf(h, w, th, tw);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double best = std::numeric_limits<double>::infinity();
      Coord arg{};
      for (int qr = 0; qr < th; ++qr) {
        for (int qc = 0; qc < tw; ++qc) {
          const double cost = bounded_cost({r, c}, {qr, qc}, maps, patchRadius, bidirectional, best);
          if (cost < best) {
            best = cost;
            arg = {qr, qc};
          }
        }
      }
      nnf.set(r, c, arg);
    }
  }
  return nnf;
}

}  // namespace dia
