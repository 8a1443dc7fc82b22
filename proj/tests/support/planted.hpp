#pragma once

// Matching instances with a known translation between source and target.

#include <cstdint>

#include "dia/match.hpp"
#include "support/toy_network.hpp"

namespace dia::testing {

struct PlantedInstance {
  FeatureMap a, aAlt, b, bAlt;
  MatchMaps maps() const { return {a, aAlt, b, bAlt}; }
};

/// A(p) = B(p + (dr, dc)) with clamping; both pairs normalized random maps.
inline PlantedInstance planted_shift(int h, int w, int c, int dr, int dc, std::uint64_t seed) {
  PlantedInstance inst;
  inst.b = normalize(random_map(h, w, c, seed));
  inst.bAlt = normalize(random_map(h, w, c, seed + 1));
  inst.a = FeatureMap(h, w, c);
  inst.aAlt = FeatureMap(h, w, c);
  for (int r = 0; r < h; ++r) {
    for (int col = 0; col < w; ++col) {
      const int sr = clamp_index(r + dr, h);
      const int sc = clamp_index(col + dc, w);
      for (int k = 0; k < c; ++k) {
        inst.a(r, col, k) = inst.b(sr, sc, k);
        inst.aAlt(r, col, k) = inst.bAlt(sr, sc, k);
      }
    }
  }
  return inst;
}

/// Fraction of unambiguous positions (whole patch inside both grids after the
/// shift) whose match equals p + (dr, dc).
inline double shift_recovery(const NNField& nnf, int dr, int dc, int patchRadius) {
  int hits = 0;
  int total = 0;
  for (int r = patchRadius; r + patchRadius < nnf.height(); ++r) {
    for (int c = patchRadius; c + patchRadius < nnf.width(); ++c) {
      const int tr = r + dr;
      const int tc = c + dc;
      if (tr - patchRadius < 0 || tr + patchRadius >= nnf.target_height() || tc - patchRadius < 0 ||
          tc + patchRadius >= nnf.target_width()) {
        continue;
      }
      ++total;
      if (nnf(r, c) == Coord{tr, tc}) ++hits;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

}  // namespace dia::testing
