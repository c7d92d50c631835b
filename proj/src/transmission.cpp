#include "gjsscc/transmission.hpp"

#include "gjsscc/error.hpp"

namespace gjsscc {

void CodingProfile::validate() const {
  if (q_basic < 1 || q_basic > 100 || q_target < 1 || q_target > 100) {
    throw DomainError("profile: quality factors must lie in [1, 100]");
  }
  if (q_target < q_basic) throw DomainError("profile: q_t must be >= q_b");
  if (!(ber_channel > 0.0 && ber_channel <= 0.5)) throw DomainError("profile: eps_c must lie in (0, 0.5]");
  if (!(ber_target >= 0.0 && ber_target <= ber_channel)) throw DomainError("profile: eps_t must lie in [0, eps_c]");
  if (trials < 1) throw DomainError("profile: trials must be >= 1");
}

namespace {

RectStream encode_masked(const Image& img, const RegionMask& mask, int quality, StreamFormat format) {
  RectStream out;
  if (!mask.any()) return out;
  out.rect = min_bounding_rect(mask);
  out.stream = encode_as(format, crop(img, out.rect), quality);
  return out;
}

Image receive(const RectStream& sent, double ber, std::uint64_t seed) {
  RegionBitstream noisy = sent.stream;
  const std::size_t header = noisy.header_bits();
  inject_bit_errors_inplace(std::span(noisy.bits).subspan(header), ber, seed, header);
  return decode_region(noisy);
}

}  // namespace

PreparedTransmission prepare_transmission(const Image& img, const RegionMask& treated, const RegionMask& untreated,
                                          const CodingProfile& profile, StreamFormat format) {
  if (!treated.matches(img) || !untreated.matches(img)) throw DomainError("transmission: mask size mismatch");
  if (treated.intersects(untreated)) throw DomainError("transmission: treated and untreated masks overlap");
  PreparedTransmission p;
  if (profile.degenerate()) {
    p.treated = RegionMask(img.width(), img.height());
    p.untreated = untreated;
    p.untreated |= treated;
  } else {
    p.treated = treated;
    p.untreated = untreated;
  }
  p.treated_stream = encode_masked(img, p.treated, profile.q_target, format);
  p.untreated_stream = encode_masked(img, p.untreated, profile.q_basic, format);
  return p;
}

Image deliver(const Image& img, const PreparedTransmission& prepared, const CodingProfile& profile,
              std::uint64_t seed) {
  RegionMask sent = prepared.treated;
  sent |= prepared.untreated;
  RandomStream fill_rng(derive_seed(seed, {3}));
  const Image base = fill_background_uniform(Image(img.width(), img.height(), img.channels()), sent.complement(), fill_rng);

  const Image treated_img = prepared.treated_stream.present()
                                ? receive(prepared.treated_stream, profile.ber_target, derive_seed(seed, {1}))
                                : Image{};
  const Image untreated_img = prepared.untreated_stream.present()
                                  ? receive(prepared.untreated_stream, profile.ber_channel, derive_seed(seed, {2}))
                                  : Image{};
  return composite(base, prepared.treated_stream.rect, treated_img, prepared.treated, prepared.untreated_stream.rect,
                   untreated_img, prepared.untreated);
}

}  // namespace gjsscc
