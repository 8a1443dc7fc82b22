#include "dia/tensor.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "dia/error.hpp"

namespace dia {

namespace {

std::string dims(int h, int w) {
  std::ostringstream os;
  os << h << "x" << w;
  return os.str();
}

void require_positive(int h, int w, const char* what) {
  if (h <= 0 || w <= 0) {
    throw DimensionError(std::string(what) + ": dimensions must be positive, got " + dims(h, w));
  }
}

}  // namespace

FeatureMap::FeatureMap(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw DimensionError("FeatureMap: dimensions must be positive");
  }
  data_.assign(positions() * static_cast<std::size_t>(channels), fill);
}

FeatureMap::FeatureMap(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw DimensionError("FeatureMap: dimensions must be positive");
  }
  if (data_.size() != positions() * static_cast<std::size_t>(channels)) {
    throw DimensionError("FeatureMap: data length does not match height*width*channels");
  }
}

NNField::NNField(int height, int width, int targetHeight, int targetWidth)
    : height_(height), width_(width), target_height_(targetHeight), target_width_(targetWidth) {
  require_positive(height, width, "NNField source");
  require_positive(targetHeight, targetWidth, "NNField target");
  targets_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), Coord{});
}

NNField NNField::identity(int height, int width) {
  NNField nnf(height, width, height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) nnf.targets_[nnf.index(r, c)] = {r, c};
  }
  return nnf;
}

void NNField::set(int row, int col, Coord q) {
  if (!contains_target(q)) {
    std::ostringstream os;
    os << "NNField: target (" << q.row << "," << q.col << ") outside "
       << dims(target_height_, target_width_);
    throw DimensionError(os.str());
  }
  targets_[index(row, col)] = q;
}

Image::Image(int height, int width, std::uint8_t fill) : height_(height), width_(width) {
  require_positive(height, width, "Image");
  rgb_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 3, fill);
}

Image::Image(int height, int width, std::vector<std::uint8_t> rgb)
    : height_(height), width_(width), rgb_(std::move(rgb)) {
  require_positive(height, width, "Image");
  if (rgb_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 3) {
    throw DimensionError("Image: pixel buffer length does not match height*width*3");
  }
}

FeatureMap warp(const FeatureMap& src, const NNField& nnf) {
  if (nnf.target_height() != src.height() || nnf.target_width() != src.width()) {
    throw DimensionError("warp: NNF target bounds " +
                         dims(nnf.target_height(), nnf.target_width()) +
                         " do not match source map " + dims(src.height(), src.width()));
  }
  FeatureMap out(nnf.height(), nnf.width(), src.channels());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < nnf.height(); ++r) {
    for (int c = 0; c < nnf.width(); ++c) {
      const Coord q = nnf(r, c);
      const auto from = src.at(q.row, q.col);
      std::copy(from.begin(), from.end(), out.at(r, c).begin());
    }
  }
  return out;
}

NNField upsample_nnf(const NNField& nnf, int newHeight, int newWidth, int newTargetHeight,
                     int newTargetWidth) {
  require_positive(newHeight, newWidth, "upsample_nnf source");
  require_positive(newTargetHeight, newTargetWidth, "upsample_nnf target");
  NNField out(newHeight, newWidth, newTargetHeight, newTargetWidth);
  const auto h = static_cast<long long>(nnf.height());
  const auto w = static_cast<long long>(nnf.width());
  const auto th = static_cast<long long>(nnf.target_height());
  const auto tw = static_cast<long long>(nnf.target_width());
  for (int r = 0; r < newHeight; ++r) {
    const auto parentRow = static_cast<int>(r * h / newHeight);
    const auto cellRow = static_cast<int>(parentRow * static_cast<long long>(newHeight) / h);
    for (int c = 0; c < newWidth; ++c) {
      const auto parentCol = static_cast<int>(c * w / newWidth);
      const auto cellCol = static_cast<int>(parentCol * static_cast<long long>(newWidth) / w);
      const Coord q = nnf(parentRow, parentCol);
      const Coord scaled{static_cast<int>(q.row * static_cast<long long>(newTargetHeight) / th) +
                             (r - cellRow),
                         static_cast<int>(q.col * static_cast<long long>(newTargetWidth) / tw) +
                             (c - cellCol)};
      out.set(r, c, out.clamp_target(scaled));
    }
  }
  return out;
}

FeatureMap normalize(const FeatureMap& src) {
  FeatureMap out = src;
  const int w = src.width();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < src.height(); ++r) {
    for (int c = 0; c < w; ++c) {
      auto v = out.at(r, c);
      double sq = 0.0;
      for (double x : v) sq += x * x;
      const double norm = std::sqrt(sq);
      if (norm <= kNormalizeEpsilon) {
        std::fill(v.begin(), v.end(), 0.0);
      } else {
        for (double& x : v) x /= norm;
      }
    }
  }
  return out;
}

ScalarMap response_magnitude(const FeatureMap& src) {
  ScalarMap out(src.height(), src.width());
  double peak = 0.0;
  for (int r = 0; r < src.height(); ++r) {
    for (int c = 0; c < src.width(); ++c) {
      double sq = 0.0;
      for (double x : src.at(r, c)) sq += x * x;
      out(r, c) = sq;
      peak = std::max(peak, sq);
    }
  }
  if (peak <= 0.0) return out;
  for (double& v : out.data()) v /= peak;
  return out;
}

}  // namespace dia
