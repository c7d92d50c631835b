#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gjsscc/channel.hpp"
#include "gjsscc/imaging.hpp"

namespace gjsscc {

/// Quantizer divisors in natural (row-major) 8x8 order.
struct QuantTable {
  std::array<int, 64> luma{};
  std::array<int, 64> chroma{};

  /// JPEG-convention scaling of the standard base tables for quality q in [1, 100].
  static QuantTable for_quality(int q);
};

enum class StreamFormat : std::uint8_t {
  codec,  ///< block DCT + resync-marked Exp-Golomb rows
  raw,    ///< uncompressed 8-bit samples, MSB first
};

/// Compressed (or raw) representation of one rectangular crop.
struct RegionBitstream {
  StreamFormat format = StreamFormat::codec;
  int width = 0;
  int height = 0;
  int channels = 1;
  int quality = 100;
  Bits bits;

  std::uint64_t bit_length() const noexcept { return bits.size(); }
  /// Leading bits carrying dimensions and quality; the pipeline sends these
  /// as side information, never through the noisy channel.
  std::size_t header_bits() const noexcept;
};

inline constexpr std::uint32_t kStreamMagic = 0x534A4331;  // "SJC1"
inline constexpr std::uint16_t kRowMarker = 0xB7C3;
inline constexpr std::size_t kHeaderBits = 32 + 16 + 16 + 8 + 8 + 16;
inline constexpr std::size_t kRowOverheadBits = 16 + 24;

RegionBitstream encode_region(const Image& crop, int quality);
/// Total for any payload corruption; throws FormatError only when the header is unparseable.
Image decode_region(const RegionBitstream& stream);

RegionBitstream encode_raw(const Image& crop);

/// Encodes with the codec or the raw format; `quality` is ignored for raw.
RegionBitstream encode_as(StreamFormat format, const Image& crop, int quality);

// Transform primitives, exposed for tests and fixed-point construction.
using Block = std::array<double, 64>;
Block forward_dct(const Block& spatial);
Block inverse_dct(const Block& coefficients);
/// Round half away from zero.
int quantize(double coefficient, int divisor);
/// Natural-order index of the k-th coefficient in zigzag order.
int zigzag_to_natural(int k);

// Bit-level helpers shared by the codec and its tests.
class BitWriter {
 public:
  void put(std::uint64_t value, int nbits);
  void put_ue(std::uint32_t value);
  void put_se(std::int32_t value);
  std::size_t size() const noexcept { return bits_.size(); }
  Bits& bits() noexcept { return bits_; }
  Bits take() noexcept { return std::move(bits_); }

 private:
  Bits bits_;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bits, std::size_t begin, std::size_t end)
      : bits_(bits), pos_(begin), end_(end) {}

  bool get(std::uint64_t& out, int nbits);
  /// False on a prefix longer than the code allows or reading past the end.
  bool get_ue(std::uint32_t& out);
  bool get_se(std::int32_t& out);
  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return end_ - pos_; }

 private:
  std::span<const std::uint8_t> bits_;
  std::size_t pos_;
  std::size_t end_;
};

/// Length in bits of the unsigned / signed Exp-Golomb code for a value.
int ue_length(std::uint32_t value);
int se_length(std::int32_t value);

/// Two-rectangle semantic source coding: the star area at q_star and the
/// remaining areas at q_rest, each over its own minimum bounding rectangle.
struct RectStream {
  Rect rect;
  RegionBitstream stream;
  bool present() const noexcept { return rect.w > 0; }
};

struct SemanticStreams {
  RectStream star;
  RectStream rest;
  std::uint64_t source_bits() const noexcept { return star.stream.bit_length() + rest.stream.bit_length(); }
};

SemanticStreams semantic_encode(const Image& img, const RegionMask& star_mask, std::span<const RegionMask> rest_masks,
                                int q_star, int q_rest, StreamFormat format = StreamFormat::codec);

/// Decodes both streams and keeps only the mask-aligned content of each over `base`.
Image semantic_decode(const Image& base, const RectStream& star, const RegionMask& star_mask, const RectStream& rest,
                      const RegionMask& rest_mask);

}  // namespace gjsscc
