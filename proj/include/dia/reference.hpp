#pragma once

// Serial reference implementations of the hot kernels. The library itself
// always uses the OpenMP versions; these exist so tests and benchmarks can
// compare against a straightforward loop nest.

#include "dia/match.hpp"
#include "dia/net.hpp"
#include "dia/tensor.hpp"

namespace dia::reference {

FeatureMap conv2d_forward(const FeatureMap& input, const ConvLayer& conv);
FeatureMap conv2d_backward(const FeatureMap& gradOutput, const ConvLayer& conv, int inH, int inW);

FeatureMap warp(const FeatureMap& src, const NNField& nnf);

/// Per-position patch cost of an NNF, row-major.
std::vector<double> cost_field(const MatchMaps& maps, const NNField& nnf, int patchRadius,
                               bool bidirectional);

NNField exhaustive_nnf(const MatchMaps& maps, int patchRadius, bool bidirectional = true);

Image aggregate_output(const Image& source, const NNField& nnf, int patchRadius);

}  // namespace dia::reference
