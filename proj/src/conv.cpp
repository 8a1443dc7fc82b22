#include <Eigen/Core>

#include <algorithm>
#include <sstream>

#include "dia/net.hpp"

namespace dia {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Output positions handled per GEMM call. Fixed so that every element is
// reduced in the same order regardless of the thread count.
constexpr int kBlock = 128;

// [outC, inC, kH, kW] -> rows of [kH, kW, inC], matching the HWC patch layout.
RowMatrix pack_forward(const ConvLayer& conv) {
  const int k = conv.kernelH * conv.kernelW * conv.inChannels;
  RowMatrix packed(conv.outChannels, k);
  for (int o = 0; o < conv.outChannels; ++o) {
    for (int ky = 0; ky < conv.kernelH; ++ky) {
      for (int kx = 0; kx < conv.kernelW; ++kx) {
        for (int i = 0; i < conv.inChannels; ++i) {
          packed(o, (ky * conv.kernelW + kx) * conv.inChannels + i) = conv.w(o, i, ky, kx);
        }
      }
    }
  }
  return packed;
}

// Rows of [kH, kW, outC] -> columns inC.
RowMatrix pack_backward(const ConvLayer& conv) {
  const int k = conv.kernelH * conv.kernelW * conv.outChannels;
  RowMatrix packed(k, conv.inChannels);
  for (int ky = 0; ky < conv.kernelH; ++ky) {
    for (int kx = 0; kx < conv.kernelW; ++kx) {
      for (int o = 0; o < conv.outChannels; ++o) {
        for (int i = 0; i < conv.inChannels; ++i) {
          packed((ky * conv.kernelW + kx) * conv.outChannels + o, i) = conv.w(o, i, ky, kx);
        }
      }
    }
  }
  return packed;
}

}  // namespace

FeatureMap conv2d_forward(const FeatureMap& input, const ConvLayer& conv) {
  const int outH = window_output(input.height(), conv.kernelH, conv.stride, conv.padding);
  const int outW = window_output(input.width(), conv.kernelW, conv.stride, conv.padding);
  if (input.channels() != conv.inChannels || outH <= 0 || outW <= 0) {
    std::ostringstream os;
    os << "conv " << conv.name << ": incompatible input " << input.height() << "x"
       << input.width() << "x" << input.channels();
    throw DimensionError(os.str());
  }
  const RowMatrix weights = pack_forward(conv);
  const Eigen::Map<const Eigen::RowVectorXd> bias(conv.bias.data(), conv.outChannels);
  const int inC = conv.inChannels;
  const int k = static_cast<int>(weights.cols());
  const int positions = outH * outW;
  const int blocks = (positions + kBlock - 1) / kBlock;
  FeatureMap out(outH, outW, conv.outChannels);
  double* outData = out.data().data();

#pragma omp parallel
  {
    RowMatrix cols(kBlock, k);
#pragma omp for schedule(static)
    for (int b = 0; b < blocks; ++b) {
      const int first = b * kBlock;
      const int count = std::min(kBlock, positions - first);
      for (int j = 0; j < count; ++j) {
        const int oy = (first + j) / outW;
        const int ox = (first + j) % outW;
        double* row = cols.row(j).data();
        for (int ky = 0; ky < conv.kernelH; ++ky) {
          const int iy = oy * conv.stride - conv.padding + ky;
          for (int kx = 0; kx < conv.kernelW; ++kx) {
            const int ix = ox * conv.stride - conv.padding + kx;
            double* dst = row + (ky * conv.kernelW + kx) * inC;
            if (iy < 0 || iy >= input.height() || ix < 0 || ix >= input.width()) {
              std::fill(dst, dst + inC, 0.0);
            } else {
              const auto src = input.at(iy, ix);
              std::copy(src.begin(), src.end(), dst);
            }
          }
        }
      }
      Eigen::Map<RowMatrix> block(outData + static_cast<std::size_t>(first) * conv.outChannels,
                                  count, conv.outChannels);
      block.noalias() = cols.topRows(count) * weights.transpose();
      block.rowwise() += bias;
    }
  }
  return out;
}

FeatureMap conv2d_backward(const FeatureMap& gradOutput, const ConvLayer& conv, int inH, int inW) {
  const int outH = window_output(inH, conv.kernelH, conv.stride, conv.padding);
  const int outW = window_output(inW, conv.kernelW, conv.stride, conv.padding);
  if (gradOutput.height() != outH || gradOutput.width() != outW ||
      gradOutput.channels() != conv.outChannels) {
    std::ostringstream os;
    os << "conv " << conv.name << " backward: gradient " << gradOutput.height() << "x"
       << gradOutput.width() << "x" << gradOutput.channels() << " does not match output " << outH
       << "x" << outW << "x" << conv.outChannels;
    throw DimensionError(os.str());
  }
  const RowMatrix weights = pack_backward(conv);
  const int outC = conv.outChannels;
  const int k = static_cast<int>(weights.rows());
  const int positions = inH * inW;
  const int blocks = (positions + kBlock - 1) / kBlock;
  FeatureMap grad(inH, inW, conv.inChannels);
  double* gradData = grad.data().data();

  // Gather form: every input position pulls from the output positions whose
  // window covers it, so blocks never write to shared memory.
#pragma omp parallel
  {
    RowMatrix cols(kBlock, k);
#pragma omp for schedule(static)
    for (int b = 0; b < blocks; ++b) {
      const int first = b * kBlock;
      const int count = std::min(kBlock, positions - first);
      for (int j = 0; j < count; ++j) {
        const int iy = (first + j) / inW;
        const int ix = (first + j) % inW;
        double* row = cols.row(j).data();
        for (int ky = 0; ky < conv.kernelH; ++ky) {
          const int ny = iy + conv.padding - ky;
          const int oy = ny / conv.stride;
          const bool rowHit = ny >= 0 && ny % conv.stride == 0 && oy < outH;
          for (int kx = 0; kx < conv.kernelW; ++kx) {
            const int nx = ix + conv.padding - kx;
            const int ox = nx / conv.stride;
            double* dst = row + (ky * conv.kernelW + kx) * outC;
            if (rowHit && nx >= 0 && nx % conv.stride == 0 && ox < outW) {
              const auto src = gradOutput.at(oy, ox);
              std::copy(src.begin(), src.end(), dst);
            } else {
              std::fill(dst, dst + outC, 0.0);
            }
          }
        }
      }
      Eigen::Map<RowMatrix> block(gradData + static_cast<std::size_t>(first) * conv.inChannels,
                                  count, conv.inChannels);
      block.noalias() = cols.topRows(count) * weights;
    }
  }
  return grad;
}

}  // namespace dia
