#include "dia/reference.hpp"

#include <cmath>
#include <limits>

#include "dia/error.hpp"

namespace dia::reference {

FeatureMap conv2d_forward(const FeatureMap& input, const ConvLayer& conv) {
  const int outH = window_output(input.height(), conv.kernelH, conv.stride, conv.padding);
  const int outW = window_output(input.width(), conv.kernelW, conv.stride, conv.padding);
  if (input.channels() != conv.inChannels || outH <= 0 || outW <= 0) {
    throw DimensionError("reference conv: incompatible input");
  }
  FeatureMap out(outH, outW, conv.outChannels);
  for (int oy = 0; oy < outH; ++oy) {
    for (int ox = 0; ox < outW; ++ox) {
      for (int o = 0; o < conv.outChannels; ++o) {
        double sum = conv.bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < conv.inChannels; ++i) {
          for (int ky = 0; ky < conv.kernelH; ++ky) {
            const int iy = oy * conv.stride - conv.padding + ky;
            if (iy < 0 || iy >= input.height()) continue;
            for (int kx = 0; kx < conv.kernelW; ++kx) {
              const int ix = ox * conv.stride - conv.padding + kx;
              if (ix < 0 || ix >= input.width()) continue;
              sum += conv.w(o, i, ky, kx) * input(iy, ix, i);
            }
          }
        }
        out(oy, ox, o) = sum;
      }
    }
  }
  return out;
}

FeatureMap conv2d_backward(const FeatureMap& gradOutput, const ConvLayer& conv, int inH, int inW) {
  FeatureMap grad(inH, inW, conv.inChannels);
  for (int oy = 0; oy < gradOutput.height(); ++oy) {
    for (int ox = 0; ox < gradOutput.width(); ++ox) {
      for (int o = 0; o < conv.outChannels; ++o) {
        const double g = gradOutput(oy, ox, o);
        for (int i = 0; i < conv.inChannels; ++i) {
          for (int ky = 0; ky < conv.kernelH; ++ky) {
            const int iy = oy * conv.stride - conv.padding + ky;
            if (iy < 0 || iy >= inH) continue;
            for (int kx = 0; kx < conv.kernelW; ++kx) {
              const int ix = ox * conv.stride - conv.padding + kx;
              if (ix < 0 || ix >= inW) continue;
              grad(iy, ix, i) += g * conv.w(o, i, ky, kx);
            }
          }
        }
      }
    }
  }
  return grad;
}

FeatureMap warp(const FeatureMap& src, const NNField& nnf) {
  if (nnf.target_height() != src.height() || nnf.target_width() != src.width()) {
    throw DimensionError("reference warp: NNF target bounds do not match source");
  }
  FeatureMap out(nnf.height(), nnf.width(), src.channels());
  for (int r = 0; r < nnf.height(); ++r) {
    for (int c = 0; c < nnf.width(); ++c) {
      const Coord q = nnf(r, c);
      for (int ch = 0; ch < src.channels(); ++ch) out(r, c, ch) = src(q.row, q.col, ch);
    }
  }
  return out;
}

namespace {

double direct_cost(Coord p, Coord q, const MatchMaps& maps, int radius, bool bidirectional) {
  double sum = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int xr = clamp_index(p.row + dy, maps.source.height());
      const int xc = clamp_index(p.col + dx, maps.source.width());
      const int yr = clamp_index(q.row + dy, maps.target.height());
      const int yc = clamp_index(q.col + dx, maps.target.width());
      for (int k = 0; k < maps.source.channels(); ++k) {
        if (bidirectional) {
          const double d = maps.source(xr, xc, k) - maps.target(yr, yc, k);
          sum += d * d;
        }
        const double d2 = maps.sourceAlt(xr, xc, k) - maps.targetAlt(yr, yc, k);
        sum += d2 * d2;
      }
    }
  }
  return sum;
}

}  // namespace

std::vector<double> cost_field(const MatchMaps& maps, const NNField& nnf, int patchRadius,
                               bool bidirectional) {
  std::vector<double> costs;
  costs.reserve(static_cast<std::size_t>(nnf.height()) * nnf.width());
  for (int r = 0; r < nnf.height(); ++r) {
    for (int c = 0; c < nnf.width(); ++c) {
      costs.push_back(direct_cost({r, c}, nnf(r, c), maps, patchRadius, bidirectional));
    }
  }
  return costs;
}

NNField exhaustive_nnf(const MatchMaps& maps, int patchRadius, bool bidirectional) {
  NNField nnf(maps.source.height(), maps.source.width(), maps.target.height(), maps.target.width());
  for (int r = 0; r < maps.source.height(); ++r) {
    for (int c = 0; c < maps.source.width(); ++c) {
      double best = std::numeric_limits<double>::infinity();
      Coord arg{};
      for (int qr = 0; qr < maps.target.height(); ++qr) {
        for (int qc = 0; qc < maps.target.width(); ++qc) {
          const double cost = direct_cost({r, c}, {qr, qc}, maps, patchRadius, bidirectional);
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

Image aggregate_output(const Image& source, const NNField& nnf, int patchRadius) {
  if (nnf.target_height() != source.height() || nnf.target_width() != source.width()) {
    throw DimensionError("reference aggregate: NNF targets do not match source");
  }
  const int n = (2 * patchRadius + 1) * (2 * patchRadius + 1);
  Image out(nnf.height(), nnf.width());
  for (int r = 0; r < nnf.height(); ++r) {
    for (int c = 0; c < nnf.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        double sum = 0.0;
        for (int dy = -patchRadius; dy <= patchRadius; ++dy) {
          for (int dx = -patchRadius; dx <= patchRadius; ++dx) {
            const int xr = clamp_index(r + dy, nnf.height());
            const int xc = clamp_index(c + dx, nnf.width());
            const Coord q = nnf(xr, xc);
            sum += source(clamp_index(q.row + r - xr, source.height()),
                          clamp_index(q.col + c - xc, source.width()), ch);
          }
        }
        const double mean = sum / n;
        out(r, c, ch) = static_cast<std::uint8_t>(std::round(mean));
      }
    }
  }
  return out;
}

}  // namespace dia::reference
