#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dia/error.hpp"
#include "dia/pipeline.hpp"

namespace dia {

namespace {

constexpr double kWlsEpsilon = 1e-4;
constexpr double kMaxResidual = 1e-6;

// Factorized (I + lambda * L_guide) for one guide image.
class WlsSystem {
 public:
  WlsSystem(const Image& guide, double lambda, double alpha)
      : height_(guide.height()), width_(guide.width()) {
    const int n = height_ * width_;
    std::vector<double> logLum(static_cast<std::size_t>(n));
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        const double lum =
            (0.299 * guide(r, c, 0) + 0.587 * guide(r, c, 1) + 0.114 * guide(r, c, 2)) / 255.0;
        logLum[index(r, c)] = std::log(lum + kWlsEpsilon);
      }
    }
    const auto smoothness = [&](int i, int j) {
      return lambda / (std::pow(std::abs(logLum[i] - logLum[j]), alpha) + kWlsEpsilon);
    };

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(n) * 5);
    std::vector<double> diagonal(static_cast<std::size_t>(n), 1.0);
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        const int i = index(r, c);
        if (c + 1 < width_) {
          const int j = index(r, c + 1);
          const double wgt = smoothness(i, j);
          entries.emplace_back(i, j, -wgt);
          entries.emplace_back(j, i, -wgt);
          diagonal[i] += wgt;
          diagonal[j] += wgt;
        }
        if (r + 1 < height_) {
          const int j = index(r + 1, c);
          const double wgt = smoothness(i, j);
          entries.emplace_back(i, j, -wgt);
          entries.emplace_back(j, i, -wgt);
          diagonal[i] += wgt;
          diagonal[j] += wgt;
        }
      }
    }
    for (int i = 0; i < n; ++i) entries.emplace_back(i, i, diagonal[i]);
    matrix_.resize(n, n);
    matrix_.setFromTriplets(entries.begin(), entries.end());
    solver_.compute(matrix_);
    if (solver_.info() != Eigen::Success) throw NumericalError("wls: factorization failed");
  }

  std::vector<double> smooth(const Image& input) const {
    if (input.height() != height_ || input.width() != width_) {
      throw DimensionError("wls: input and guide dimensions differ");
    }
    const int n = height_ * width_;
    std::vector<double> out(static_cast<std::size_t>(n) * 3);
    for (int ch = 0; ch < 3; ++ch) {
      Eigen::VectorXd rhs(n);
      for (int r = 0; r < height_; ++r) {
        for (int c = 0; c < width_; ++c) rhs[index(r, c)] = input(r, c, ch);
      }
      const Eigen::VectorXd x = solver_.solve(rhs);
      const double scale = std::max(rhs.norm(), 1e-300);
      const double residual = (matrix_ * x - rhs).norm() / scale;
      if (solver_.info() != Eigen::Success || !(residual <= kMaxResidual)) {
        std::ostringstream os;
        os << "wls: solver did not converge (relative residual " << residual << ")";
        throw NumericalError(os.str());
      }
      for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i) * 3 + ch] = x[i];
    }
    return out;
  }

 private:
  int index(int r, int c) const { return r * width_ + c; }

  int height_;
  int width_;
  Eigen::SparseMatrix<double> matrix_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

}  // namespace

std::vector<double> wls_filter(const Image& input, const Image& guide, double lambda, double alpha) {
  return WlsSystem(guide, lambda, alpha).smooth(input);
}

Image wls_refine(const Image& a, const Image& aPrime, double lambda, double alpha) {
  if (a.height() != aPrime.height() || a.width() != aPrime.width()) {
    throw DimensionError("wls_refine: A and A' dimensions differ");
  }
  const WlsSystem system(a, lambda, alpha);
  const std::vector<double> tone = system.smooth(aPrime);
  const std::vector<double> base = system.smooth(a);
  Image out(a.height(), a.width());
  const auto src = a.rgb();
  auto dst = out.rgb();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double v = static_cast<double>(src[i]) + (tone[i] - base[i]);
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

}  // namespace dia
