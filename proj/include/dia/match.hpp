#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dia/tensor.hpp"

namespace dia {

/// The four normalized feature maps of one matching direction. For a->b the
/// source pair is (A, A') and the target pair is (B, B'); for b->a it is
/// (B', B) against (A', A), so the "secondary" term always compares the
/// pair whose source side is the latent image being reconstructed.
struct MatchMaps {
  const FeatureMap& source;       // F_A
  const FeatureMap& sourceAlt;    // F_A'
  const FeatureMap& target;       // F_B
  const FeatureMap& targetAlt;    // F_B'
};

struct MatchSettings {
  int patchRadius = 1;            // patch side 2r+1
  int iterations = 10;            // full sweeps
  int searchRadius = 1;           // initial random-search displacement
  std::uint64_t seed = 0;
  bool bidirectional = true;      // false: only the (sourceAlt, targetAlt) term
};

/// Throws DimensionError unless the source pair and the target pair share shapes.
void check_match_maps(const MatchMaps& maps);

/// Sum over patch offsets d of |A(p+d) - B(q+d)|^2 + |A'(p+d) - B'(q+d)|^2,
/// coordinates clamped into each grid.
double patch_cost(Coord p, Coord q, const MatchMaps& maps, int patchRadius,
                  bool bidirectional = true);

/// Per-position costs of a whole NNF (OpenMP).
std::vector<double> cost_field(const MatchMaps& maps, const NNField& nnf, int patchRadius,
                               bool bidirectional = true);
double total_cost(const MatchMaps& maps, const NNField& nnf, int patchRadius,
                  bool bidirectional = true);

/// Uniformly random NNF over the full target grid.
NNField random_nnf(int height, int width, int targetHeight, int targetWidth, std::uint64_t seed);

struct PatchMatchResult {
  NNField nnf;
  /// Total cost before the first sweep followed by the total after each sweep.
  std::vector<double> costTrace;
};

/// Randomized propagation + random search. Starts from `init` or, when absent,
/// from a random field drawn with the settings' seed.
PatchMatchResult patchmatch(const MatchMaps& maps, const std::optional<NNField>& init,
                            const MatchSettings& settings);

/// Grid-size cap for exhaustive search.
inline constexpr int kExhaustiveMaxSide = 32;

/// Brute-force argmin over every target position; ties go to the first
/// candidate in row-major order. Refuses grids above 32x32.
NNField exhaustive_nnf(const MatchMaps& maps, int patchRadius, bool bidirectional = true);

}  // namespace dia
