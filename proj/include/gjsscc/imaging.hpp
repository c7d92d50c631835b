#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gjsscc/random.hpp"

namespace gjsscc {

/// 8-bit raster, row-major with interleaved channels (1 = gray, 3 = RGB).
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, std::uint8_t fill = 0);
  Image(int width, int height, int channels, std::vector<std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return samples_.empty(); }

  /// Raw bit length of the image (width x height x channels x 8).
  std::uint64_t raw_bits() const noexcept { return static_cast<std::uint64_t>(samples_.size()) * 8; }

  std::uint8_t at(int x, int y, int c = 0) const { return samples_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return samples_[index(x, y, c)]; }

  std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  std::span<std::uint8_t> samples() noexcept { return samples_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> samples_;
};

/// One boolean per pixel.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(int width, int height, bool value = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool test(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v = true) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  bool test_index(std::size_t i) const { return bits_[i] != 0; }

  std::size_t count() const noexcept;
  bool any() const noexcept;
  bool same_shape(const RegionMask& o) const noexcept { return width_ == o.width_ && height_ == o.height_; }
  bool matches(const Image& img) const noexcept {
    return width_ == img.width() && height_ == img.height();
  }

  RegionMask complement() const;
  RegionMask& operator|=(const RegionMask& o);
  /// Clears every pixel set in `o`.
  RegionMask& subtract(const RegionMask& o);
  bool intersects(const RegionMask& o) const;

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

RegionMask mask_union(std::span<const RegionMask> masks);

struct Rect {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  int x1() const noexcept { return x0 + w; }
  int y1() const noexcept { return y0 + h; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x < x1() && y >= y0 && y < y1(); }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Region {
  int id = 0;
  RegionMask mask;
};

/// Disjoint, non-empty regions covering the object; ids are 1..S.
using RegionSet = std::vector<Region>;

// Raster I/O: binary PGM (P5) and PPM (P6), maxval 255.
Image load_raster(const std::filesystem::path& path);
Image parse_raster(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_raster(const Image& img);
void save_raster(const Image& img, const std::filesystem::path& path);

/// Mask from a P5 (or P6) file: any nonzero sample marks the pixel.
RegionMask load_mask(const std::filesystem::path& path);
RegionMask mask_from_image(const Image& img);
Image mask_to_image(const RegionMask& mask);

/// Splits the bounding box of `object_mask` into rows x cols cells (the last
/// row/column absorbs the remainder), intersects each with the mask and keeps
/// the non-empty cells, numbered 1..S in row-major order.
RegionSet grid_presegment(const RegionMask& object_mask, int rows, int cols);

Rect min_bounding_rect(const RegionMask& mask);
Rect min_bounding_rect(std::span<const RegionMask> masks);

Image crop(const Image& img, const Rect& r);

/// Pixels in star_mask come from star_decoded, pixels in rest_mask from
/// rest_decoded, everything else from base. Masks must be disjoint.
Image composite(const Image& base, const Rect& star_rect, const Image& star_decoded,
                const RegionMask& star_mask, const Rect& rest_rect, const Image& rest_decoded,
                const RegionMask& rest_mask);

/// Replaces each background sample with a uniform draw from {0..255}.
Image fill_background_uniform(const Image& img, const RegionMask& background_mask, RandomStream& rng);

void validate(const RegionSet& regions, const RegionMask& object_mask);

}  // namespace gjsscc
