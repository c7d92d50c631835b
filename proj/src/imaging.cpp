#include "gjsscc/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "gjsscc/error.hpp"

namespace gjsscc {

Image::Image(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw DomainError("image: invalid dimensions or channel count");
  }
  samples_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw DomainError("image: invalid dimensions or channel count");
  }
  if (samples_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw DomainError("image: sample count does not match width x height x channels");
  }
}

RegionMask::RegionMask(int width, int height, bool value) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DomainError("mask: negative dimensions");
  bits_.assign(static_cast<std::size_t>(width) * height, value ? 1 : 0);
}

std::size_t RegionMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool RegionMask::any() const noexcept {
  return std::find(bits_.begin(), bits_.end(), std::uint8_t{1}) != bits_.end();
}

RegionMask RegionMask::complement() const {
  RegionMask out = *this;
  for (auto& b : out.bits_) b = b ? 0 : 1;
  return out;
}

RegionMask& RegionMask::operator|=(const RegionMask& o) {
  if (!same_shape(o)) throw DomainError("mask union: dimension mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
  return *this;
}

RegionMask& RegionMask::subtract(const RegionMask& o) {
  if (!same_shape(o)) throw DomainError("mask difference: dimension mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= static_cast<std::uint8_t>(o.bits_[i] ^ 1U);
  return *this;
}

bool RegionMask::intersects(const RegionMask& o) const {
  if (!same_shape(o)) throw DomainError("mask intersection: dimension mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && o.bits_[i]) return true;
  }
  return false;
}

RegionMask mask_union(std::span<const RegionMask> masks) {
  if (masks.empty()) throw DomainError("mask union: no masks");
  RegionMask out(masks.front().width(), masks.front().height());
  for (const auto& m : masks) out |= m;
  return out;
}

// ---------------------------------------------------------------------------
// PNM

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    last_start_ = start;
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 65535) throw FormatError(std::string("raster header: ") + field + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError(std::string("raster header: expected ") + field, start);
    return v;
  }

  std::size_t pos() const noexcept { return pos_; }
  std::size_t last_start() const noexcept { return last_start_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t last_start_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Image parse_raster(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("raster: expected P5 or P6 magic", 0);
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader rd(bytes);
  rd.advance(2);
  const long width = rd.read_uint("width");
  if (width < 1) throw FormatError("raster: width must be positive", rd.last_start());
  const long height = rd.read_uint("height");
  if (height < 1) throw FormatError("raster: height must be positive", rd.last_start());
  const long maxval = rd.read_uint("maxval");
  if (maxval != 255) throw FormatError("raster: maxval must be 255", rd.last_start());
  if (rd.pos() >= bytes.size() || !std::isspace(bytes[rd.pos()])) {
    throw FormatError("raster: missing whitespace after maxval", rd.pos());
  }
  rd.advance(1);

  const std::size_t payload = static_cast<std::size_t>(width) * height * channels;
  const std::size_t available = bytes.size() - rd.pos();
  if (available < payload) {
    throw FormatError("raster: truncated payload", bytes.size());
  }
  std::vector<std::uint8_t> samples(bytes.begin() + static_cast<std::ptrdiff_t>(rd.pos()),
                                    bytes.begin() + static_cast<std::ptrdiff_t>(rd.pos() + payload));
  return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(samples));
}

Image load_raster(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_raster(bytes);
}

std::vector<std::uint8_t> encode_raster(const Image& img) {
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.samples().begin(), img.samples().end());
  return out;
}

void save_raster(const Image& img, const std::filesystem::path& path) {
  const auto bytes = encode_raster(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write failed: " + path.string());
}

RegionMask mask_from_image(const Image& img) {
  RegionMask m(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      bool on = false;
      for (int c = 0; c < img.channels(); ++c) on = on || img.at(x, y, c) > 0;
      m.set(x, y, on);
    }
  }
  return m;
}

RegionMask load_mask(const std::filesystem::path& path) { return mask_from_image(load_raster(path)); }

Image mask_to_image(const RegionMask& mask) {
  Image img(mask.width(), mask.height(), 1);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) img.at(x, y) = mask.test(x, y) ? 255 : 0;
  return img;
}

// ---------------------------------------------------------------------------
// Geometry

Rect min_bounding_rect(const RegionMask& mask) {
  int x0 = std::numeric_limits<int>::max(), y0 = x0, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw DomainError("min_bounding_rect: empty mask");
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

Rect min_bounding_rect(std::span<const RegionMask> masks) { return min_bounding_rect(mask_union(masks)); }

RegionSet grid_presegment(const RegionMask& object_mask, int rows, int cols) {
  if (rows < 1 || cols < 1) throw DomainError("grid_presegment: rows and cols must be >= 1");
  if (!object_mask.any()) throw DomainError("grid_presegment: empty object mask");
  const Rect box = min_bounding_rect(object_mask);

  // Cell edges along one axis: equal parts, remainder absorbed by the last cell.
  auto edges = [](int origin, int extent, int parts) {
    std::vector<int> e(static_cast<std::size_t>(parts) + 1);
    const int step = extent / parts;
    for (int i = 0; i < parts; ++i) e[static_cast<std::size_t>(i)] = origin + i * step;
    e[static_cast<std::size_t>(parts)] = origin + extent;
    return e;
  };
  const auto ys = edges(box.y0, box.h, rows);
  const auto xs = edges(box.x0, box.w, cols);

  RegionSet out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      RegionMask cell(object_mask.width(), object_mask.height());
      bool any = false;
      for (int y = ys[static_cast<std::size_t>(r)]; y < ys[static_cast<std::size_t>(r) + 1]; ++y) {
        for (int x = xs[static_cast<std::size_t>(c)]; x < xs[static_cast<std::size_t>(c) + 1]; ++x) {
          if (object_mask.test(x, y)) {
            cell.set(x, y);
            any = true;
          }
        }
      }
      if (any) out.push_back({static_cast<int>(out.size()) + 1, std::move(cell)});
    }
  }
  return out;
}

void validate(const RegionSet& regions, const RegionMask& object_mask) {
  RegionMask seen(object_mask.width(), object_mask.height());
  for (const auto& r : regions) {
    if (!r.mask.same_shape(object_mask)) throw DomainError("region set: mask dimension mismatch");
    if (!r.mask.any()) throw DomainError("region set: region " + std::to_string(r.id) + " is empty");
    if (seen.intersects(r.mask)) throw DomainError("region set: regions overlap");
    seen |= r.mask;
  }
  if (!(seen == object_mask)) throw DomainError("region set: union differs from object mask");
}

Image crop(const Image& img, const Rect& r) {
  if (r.w < 1 || r.h < 1 || r.x0 < 0 || r.y0 < 0 || r.x1() > img.width() || r.y1() > img.height()) {
    throw DomainError("crop: rectangle outside image");
  }
  Image out(r.w, r.h, img.channels());
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(r.x0 + x, r.y0 + y, c);
  return out;
}

namespace {

void check_path(const Image& base, const Rect& rect, const Image& decoded, const RegionMask& mask,
                const char* which) {
  if (!mask.matches(base)) throw DomainError(std::string("composite: ") + which + " mask size mismatch");
  if (!mask.any()) return;
  if (decoded.width() != rect.w || decoded.height() != rect.h || decoded.channels() != base.channels()) {
    throw DomainError(std::string("composite: ") + which + " decoded image does not match its rect");
  }
  const Rect need = min_bounding_rect(mask);
  if (need.x0 < rect.x0 || need.y0 < rect.y0 || need.x1() > rect.x1() || need.y1() > rect.y1()) {
    throw DomainError(std::string("composite: ") + which + " mask extends outside its rect");
  }
}

}  // namespace

Image composite(const Image& base, const Rect& star_rect, const Image& star_decoded,
                const RegionMask& star_mask, const Rect& rest_rect, const Image& rest_decoded,
                const RegionMask& rest_mask) {
  check_path(base, star_rect, star_decoded, star_mask, "star");
  check_path(base, rest_rect, rest_decoded, rest_mask, "rest");
  if (star_mask.intersects(rest_mask)) throw DomainError("composite: star and rest masks overlap");

  Image out = base;
  for (int y = 0; y < base.height(); ++y) {
    for (int x = 0; x < base.width(); ++x) {
      if (star_mask.test(x, y)) {
        for (int c = 0; c < base.channels(); ++c)
          out.at(x, y, c) = star_decoded.at(x - star_rect.x0, y - star_rect.y0, c);
      } else if (rest_mask.test(x, y)) {
        for (int c = 0; c < base.channels(); ++c)
          out.at(x, y, c) = rest_decoded.at(x - rest_rect.x0, y - rest_rect.y0, c);
      }
    }
  }
  return out;
}

Image fill_background_uniform(const Image& img, const RegionMask& background_mask, RandomStream& rng) {
  if (!background_mask.matches(img)) throw DomainError("fill_background_uniform: mask size mismatch");
  Image out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!background_mask.test(x, y)) continue;
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = static_cast<std::uint8_t>(rng.next_u64() >> 56);
    }
  }
  return out;
}

}  // namespace gjsscc
