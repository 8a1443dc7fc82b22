#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dia {

/// Integer grid coordinate. All NNFs in this library are discrete.
struct Coord {
  int row = 0;
  int col = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
};

inline int clamp_index(int v, int size) { return std::clamp(v, 0, size - 1); }

/// Dense (height x width x channels) tensor stored row-major by
/// (row, col, channel), so the channel vector of one position is contiguous.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels, double fill = 0.0);
  FeatureMap(int height, int width, int channels, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t positions() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int row, int col, int channel) {
    return data_[offset(row, col) + static_cast<std::size_t>(channel)];
  }
  double operator()(int row, int col, int channel) const {
    return data_[offset(row, col) + static_cast<std::size_t>(channel)];
  }

  std::span<double> at(int row, int col) {
    return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
  }
  std::span<const double> at(int row, int col) const {
    return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }

  bool same_shape(const FeatureMap& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t offset(int row, int col) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) *
           static_cast<std::size_t>(channels_);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Single-channel real map (weight maps, response magnitudes).
class ScalarMap {
 public:
  ScalarMap() = default;
  ScalarMap(int height, int width, double fill = 0.0)
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {}

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  double& operator()(int row, int col) { return data_[index(row, col)]; }
  double operator()(int row, int col) const { return data_[index(row, col)]; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const ScalarMap&, const ScalarMap&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Nearest-neighbor field: for every source position, a coordinate inside the
/// target grid. The bounds invariant is enforced on every write.
class NNField {
 public:
  NNField() = default;
  /// Every source position maps to (0,0).
  NNField(int height, int width, int targetHeight, int targetWidth);

  static NNField identity(int height, int width);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int target_height() const noexcept { return target_height_; }
  int target_width() const noexcept { return target_width_; }

  Coord operator()(int row, int col) const { return targets_[index(row, col)]; }
  /// Throws DimensionError if q is outside the target grid.
  void set(int row, int col, Coord q);

  std::span<const Coord> targets() const noexcept { return targets_; }

  bool contains_target(Coord q) const noexcept {
    return q.row >= 0 && q.row < target_height_ && q.col >= 0 && q.col < target_width_;
  }
  Coord clamp_target(Coord q) const noexcept {
    return {clamp_index(q.row, target_height_), clamp_index(q.col, target_width_)};
  }

  friend bool operator==(const NNField&, const NNField&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  int height_ = 0;
  int width_ = 0;
  int target_height_ = 0;
  int target_width_ = 0;
  std::vector<Coord> targets_;
};

/// 8-bit RGB raster, interleaved.
class Image {
 public:
  Image() = default;
  Image(int height, int width, std::uint8_t fill = 0);
  Image(int height, int width, std::vector<std::uint8_t> rgb);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::uint8_t& operator()(int row, int col, int channel) { return rgb_[index(row, col, channel)]; }
  std::uint8_t operator()(int row, int col, int channel) const {
    return rgb_[index(row, col, channel)];
  }
  std::span<const std::uint8_t> rgb() const noexcept { return rgb_; }
  std::span<std::uint8_t> rgb() noexcept { return rgb_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int row, int col, int channel) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) * 3 +
           static_cast<std::size_t>(channel);
  }
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> rgb_;
};

/// output(p, c) = src(nnf(p), c). Output has the NNF's source grid.
FeatureMap warp(const FeatureMap& src, const NNField& nnf);

/// Nearest-neighbor upsampling of an NNF to a finer grid. Each fine position p
/// inherits the match of its coarse parent, scaled to the finer target grid,
/// plus p's offset within the parent cell; results are clamped into bounds.
NNField upsample_nnf(const NNField& nnf, int newHeight, int newWidth, int newTargetHeight,
                     int newTargetWidth);

inline constexpr double kNormalizeEpsilon = 1e-12;

/// Per-position unit-length channel vectors; vectors with norm <= 1e-12 become 0.
FeatureMap normalize(const FeatureMap& src);

/// Squared channel norm per position divided by its spatial maximum (all
/// zeros if the map is identically zero).
ScalarMap response_magnitude(const FeatureMap& src);

}  // namespace dia
