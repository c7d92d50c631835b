#include "gjsscc/source_codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "gjsscc/error.hpp"

namespace gjsscc {

namespace {

// Standard JPEG base tables (natural order).
constexpr std::array<int, 64> kLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
constexpr std::array<int, 64> kChromaBase = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

constexpr std::array<int, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

constexpr int kMaxLevel = 2048;
constexpr int kMaxPrefix = 24;

std::array<int, 64> scale_table(const std::array<int, 64>& base, int q) {
  const int scale = q < 50 ? 5000 / q : 200 - 2 * q;
  std::array<int, 64> out{};
  for (std::size_t i = 0; i < 64; ++i) out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 1024);
  return out;
}

// cos((2x + 1) u pi / 16) scaled by the orthonormal factor c(u).
const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto table = [] {
    std::array<std::array<double, 8>, 8> t{};
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(0.125) : 0.5;
      for (int x = 0; x < 8; ++x) t[u][x] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
    return t;
  }();
  return table;
}

void check_quality(int q) {
  if (q < 1 || q > 100) throw DomainError("quality factor must lie in [1, 100]");
}

int blocks_for(int extent) { return (extent + 7) / 8; }

}  // namespace

QuantTable QuantTable::for_quality(int q) {
  check_quality(q);
  return {scale_table(kLumaBase, q), scale_table(kChromaBase, q)};
}

Block forward_dct(const Block& spatial) {
  const auto& b = dct_basis();
  Block tmp{}, out{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int x = 0; x < 8; ++x) s += b[u][x] * spatial[y * 8 + x];
      tmp[y * 8 + u] = s;
    }
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int y = 0; y < 8; ++y) s += b[v][y] * tmp[y * 8 + u];
      out[v * 8 + u] = s;
    }
  return out;
}

Block inverse_dct(const Block& coefficients) {
  const auto& b = dct_basis();
  Block tmp{}, out{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += b[u][x] * coefficients[v * 8 + u];
      tmp[v * 8 + x] = s;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += b[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = s;
    }
  return out;
}

int quantize(double coefficient, int divisor) {
  const double r = coefficient / divisor;
  return static_cast<int>(r < 0 ? -std::floor(-r + 0.5) : std::floor(r + 0.5));
}

int zigzag_to_natural(int k) { return kZigzag[static_cast<std::size_t>(k)]; }

// ---------------------------------------------------------------------------
// Bits

void BitWriter::put(std::uint64_t value, int nbits) {
  for (int i = nbits - 1; i >= 0; --i) bits_.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
}

void BitWriter::put_ue(std::uint32_t value) {
  const std::uint64_t v = std::uint64_t{value} + 1;
  const int len = std::bit_width(v);
  put(0, len - 1);
  put(v, len);
}

void BitWriter::put_se(std::int32_t value) {
  put_ue(value > 0 ? static_cast<std::uint32_t>(2 * value - 1) : static_cast<std::uint32_t>(-2 * value));
}

int ue_length(std::uint32_t value) { return 2 * std::bit_width(std::uint64_t{value} + 1) - 1; }
int se_length(std::int32_t value) {
  return ue_length(value > 0 ? static_cast<std::uint32_t>(2 * value - 1) : static_cast<std::uint32_t>(-2 * value));
}

bool BitReader::get(std::uint64_t& out, int nbits) {
  if (remaining() < static_cast<std::size_t>(nbits)) return false;
  out = 0;
  for (int i = 0; i < nbits; ++i) out = (out << 1) | bits_[pos_++];
  return true;
}

bool BitReader::get_ue(std::uint32_t& out) {
  int zeros = 0;
  while (true) {
    if (pos_ >= end_) return false;
    if (bits_[pos_] != 0) break;
    ++pos_;
    if (++zeros > kMaxPrefix) return false;
  }
  std::uint64_t v = 0;
  if (!get(v, zeros + 1)) return false;
  out = static_cast<std::uint32_t>(v - 1);
  return true;
}

bool BitReader::get_se(std::int32_t& out) {
  std::uint32_t u = 0;
  if (!get_ue(u)) return false;
  out = (u & 1U) ? static_cast<std::int32_t>((u + 1) / 2) : -static_cast<std::int32_t>(u / 2);
  return true;
}

std::size_t RegionBitstream::header_bits() const noexcept {
  return format == StreamFormat::codec ? kHeaderBits : 0;
}

// ---------------------------------------------------------------------------
// Codec

namespace {

Block load_block(const Image& img, int bx, int by, int ch) {
  Block blk{};
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const int sx = std::min(bx * 8 + x, img.width() - 1);
      const int sy = std::min(by * 8 + y, img.height() - 1);
      blk[y * 8 + x] = static_cast<double>(img.at(sx, sy, ch)) - 128.0;
    }
  return blk;
}

using Levels = std::array<int, 64>;

void encode_block(BitWriter& w, const Levels& levels, int& dc_pred) {
  w.put_se(levels[0] - dc_pred);
  dc_pred = levels[0];
  int run = 0;
  for (int k = 1; k < 64; ++k) {
    const int level = levels[static_cast<std::size_t>(kZigzag[static_cast<std::size_t>(k)])];
    if (level == 0) {
      ++run;
      continue;
    }
    w.put_ue(static_cast<std::uint32_t>(run + 1));
    w.put_se(level);
    run = 0;
  }
  w.put_ue(0);  // end of block
}

bool decode_block(BitReader& rd, Levels& levels, int& dc_pred) {
  levels.fill(0);
  std::int32_t delta = 0;
  if (!rd.get_se(delta)) return false;
  const long dc = static_cast<long>(dc_pred) + delta;
  if (dc < -kMaxLevel || dc > kMaxLevel) return false;
  dc_pred = static_cast<int>(dc);
  levels[0] = dc_pred;
  int k = 1;
  while (true) {
    std::uint32_t code = 0;
    if (!rd.get_ue(code)) return false;
    if (code == 0) return true;
    if (code > 63) return false;
    k += static_cast<int>(code) - 1;
    if (k > 63) return false;
    std::int32_t level = 0;
    if (!rd.get_se(level)) return false;
    if (level == 0 || level < -kMaxLevel || level > kMaxLevel) return false;
    levels[static_cast<std::size_t>(kZigzag[static_cast<std::size_t>(k)])] = level;
    ++k;
  }
}

void store_block(Image& canvas, const Levels& levels, const std::array<int, 64>& table, int bx, int by, int ch) {
  Block coef{};
  for (std::size_t i = 0; i < 64; ++i) coef[i] = static_cast<double>(levels[i]) * table[i];
  const Block px = inverse_dct(coef);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const double v = std::round(px[y * 8 + x] + 128.0);
      canvas.at(bx * 8 + x, by * 8 + y, ch) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
}

std::uint64_t read_field(std::span<const std::uint8_t> bits, std::size_t at, int nbits) {
  std::uint64_t v = 0;
  for (int i = 0; i < nbits; ++i) v = (v << 1) | bits[at + static_cast<std::size_t>(i)];
  return v;
}

// A row frame starts at `at` when the marker matches and the declared
// payload fits inside the stream.
bool frame_at(std::span<const std::uint8_t> bits, std::size_t at, std::size_t& payload_len) {
  if (at + kRowOverheadBits > bits.size()) return false;
  if (read_field(bits, at, 16) != kRowMarker) return false;
  payload_len = static_cast<std::size_t>(read_field(bits, at + 16, 24));
  return at + kRowOverheadBits + payload_len <= bits.size();
}

}  // namespace

RegionBitstream encode_region(const Image& crop, int quality) {
  check_quality(quality);
  if (crop.empty()) throw DomainError("encode_region: empty crop");
  if (crop.width() > 0xFFFF || crop.height() > 0xFFFF) throw DomainError("encode_region: crop too large");

  const auto tables = QuantTable::for_quality(quality);
  const auto& table = tables.luma;  // RGB samples are coded as-is, so every channel uses the luma table
  const int bw = blocks_for(crop.width());
  const int bh = blocks_for(crop.height());

  BitWriter w;
  w.put(kStreamMagic, 32);
  w.put(static_cast<std::uint64_t>(crop.width()), 16);
  w.put(static_cast<std::uint64_t>(crop.height()), 16);
  w.put(static_cast<std::uint64_t>(crop.channels()), 8);
  w.put(static_cast<std::uint64_t>(quality), 8);
  w.put(static_cast<std::uint64_t>(bh), 16);

  for (int by = 0; by < bh; ++by) {
    BitWriter row;
    std::array<int, 3> dc_pred{};
    for (int bx = 0; bx < bw; ++bx) {
      for (int ch = 0; ch < crop.channels(); ++ch) {
        const Block coef = forward_dct(load_block(crop, bx, by, ch));
        Levels levels{};
        for (std::size_t i = 0; i < 64; ++i) levels[i] = quantize(coef[i], table[i]);
        encode_block(row, levels, dc_pred[static_cast<std::size_t>(ch)]);
      }
    }
    if (row.size() >= (std::size_t{1} << 24)) throw DomainError("encode_region: block row exceeds 24-bit length");
    w.put(kRowMarker, 16);
    w.put(row.size(), 24);
    auto& payload = row.bits();
    w.bits().insert(w.bits().end(), payload.begin(), payload.end());
  }

  RegionBitstream out;
  out.format = StreamFormat::codec;
  out.width = crop.width();
  out.height = crop.height();
  out.channels = crop.channels();
  out.quality = quality;
  out.bits = w.take();
  return out;
}

RegionBitstream encode_raw(const Image& crop) {
  if (crop.empty()) throw DomainError("encode_raw: empty crop");
  BitWriter w;
  for (auto s : crop.samples()) w.put(s, 8);
  RegionBitstream out;
  out.format = StreamFormat::raw;
  out.width = crop.width();
  out.height = crop.height();
  out.channels = crop.channels();
  out.quality = 100;
  out.bits = w.take();
  return out;
}

RegionBitstream encode_as(StreamFormat format, const Image& crop, int quality) {
  return format == StreamFormat::codec ? encode_region(crop, quality) : encode_raw(crop);
}

Image decode_region(const RegionBitstream& stream) {
  const auto& bits = stream.bits;
  if (stream.format == StreamFormat::raw) {
    Image img(stream.width, stream.height, stream.channels);
    if (bits.size() != img.samples().size() * 8) throw FormatError("raw stream: length mismatch", bits.size() / 8);
    auto out = img.samples();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(read_field(bits, i * 8, 8));
    return img;
  }

  if (bits.size() < kHeaderBits) throw FormatError("stream: truncated header", bits.size() / 8);
  if (read_field(bits, 0, 32) != kStreamMagic) throw FormatError("stream: bad magic", 0);
  const int width = static_cast<int>(read_field(bits, 32, 16));
  const int height = static_cast<int>(read_field(bits, 48, 16));
  const int channels = static_cast<int>(read_field(bits, 64, 8));
  const int quality = static_cast<int>(read_field(bits, 72, 8));
  const int rows = static_cast<int>(read_field(bits, 80, 16));
  if (width < 1 || height < 1) throw FormatError("stream: zero dimension", 4);
  if (channels != 1 && channels != 3) throw FormatError("stream: bad channel count", 8);
  if (quality < 1 || quality > 100) throw FormatError("stream: bad quality", 9);
  if (rows != blocks_for(height)) throw FormatError("stream: row count inconsistent with height", 10);

  const auto table = QuantTable::for_quality(quality).luma;
  const int bw = blocks_for(width);
  Image canvas(bw * 8, rows * 8, channels, 128);

  // A frame is trusted when it ends exactly where the next frame (or the
  // stream) begins. Otherwise the row is still parsed, and its parse end is
  // accepted if it agrees with the declared length or lands on a frame.
  auto frame_ok = [&](std::size_t pos, int row, std::size_t& len) {
    if (!frame_at(bits, pos, len)) return false;
    const std::size_t next = pos + kRowOverheadBits + len;
    if (row + 1 == rows) return next == bits.size();
    std::size_t next_len = 0;
    return frame_at(bits, next, next_len);
  };
  auto decode_row = [&](std::size_t begin, std::size_t end, int by, std::size_t& parse_end) {
    BitReader rd(bits, begin, end);
    std::array<int, 3> dc_pred{};
    std::array<Levels, 3> levels{};
    bool complete = true;
    for (int bx = 0; bx < bw && complete; ++bx) {
      for (int ch = 0; ch < channels && complete; ++ch) {
        complete = decode_block(rd, levels[static_cast<std::size_t>(ch)], dc_pred[static_cast<std::size_t>(ch)]);
      }
      if (!complete) break;  // rest of the row stays mid-gray
      for (int ch = 0; ch < channels; ++ch) store_block(canvas, levels[static_cast<std::size_t>(ch)], table, bx, by, ch);
    }
    parse_end = rd.pos();
    return complete;
  };

  std::size_t at = kHeaderBits;
  for (int by = 0; by < rows; ++by) {
    const bool marker = at + kRowOverheadBits <= bits.size() && read_field(bits, at, 16) == kRowMarker;
    if (marker) {
      const std::size_t begin = at + kRowOverheadBits;
      std::size_t len = 0;
      std::size_t parse_end = 0;
      if (frame_ok(at, by, len)) {
        decode_row(begin, begin + len, by, parse_end);
        at = begin + len;
        continue;
      }
      const std::size_t declared_end = begin + static_cast<std::size_t>(read_field(bits, at + 16, 24));
      if (decode_row(begin, bits.size(), by, parse_end)) {
        std::size_t next_len = 0;
        const bool lands = by + 1 == rows ? parse_end == bits.size() : frame_at(bits, parse_end, next_len);
        if (parse_end == declared_end || lands) {
          at = parse_end;
          continue;
        }
      }
    }
    if (by + 1 == rows) break;
    bool found = false;
    for (std::size_t probe = at + 1; probe + kRowOverheadBits <= bits.size(); ++probe) {
      std::size_t len = 0;
      if (frame_ok(probe, by + 1, len)) {
        at = probe;
        found = true;
        break;
      }
    }
    if (!found) break;
  }
  return crop(canvas, {0, 0, width, height});
}

// ---------------------------------------------------------------------------
// Semantic source coding

SemanticStreams semantic_encode(const Image& img, const RegionMask& star_mask, std::span<const RegionMask> rest_masks,
                                int q_star, int q_rest, StreamFormat format) {
  if (!star_mask.matches(img)) throw DomainError("semantic_encode: star mask size mismatch");
  if (!star_mask.any()) throw DomainError("semantic_encode: empty star mask");
  check_quality(q_star);
  check_quality(q_rest);

  SemanticStreams out;
  out.star.rect = min_bounding_rect(star_mask);
  out.star.stream = encode_as(format, crop(img, out.star.rect), q_star);

  RegionMask rest(img.width(), img.height());
  for (const auto& m : rest_masks) {
    if (!m.matches(img)) throw DomainError("semantic_encode: rest mask size mismatch");
    rest |= m;
  }
  if (rest.intersects(star_mask)) throw DomainError("semantic_encode: star and rest masks overlap");
  if (rest.any()) {
    out.rest.rect = min_bounding_rect(rest);
    out.rest.stream = encode_as(format, crop(img, out.rest.rect), q_rest);
  }
  return out;
}

Image semantic_decode(const Image& base, const RectStream& star, const RegionMask& star_mask, const RectStream& rest,
                      const RegionMask& rest_mask) {
  const Image star_img = star.present() ? decode_region(star.stream) : Image{};
  const Image rest_img = rest.present() ? decode_region(rest.stream) : Image{};
  return composite(base, star.rect, star_img, star_mask, rest.rect, rest_img, rest_mask);
}

}  // namespace gjsscc
