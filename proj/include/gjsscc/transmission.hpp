#pragma once

#include <cstdint>

#include "gjsscc/channel.hpp"
#include "gjsscc/imaging.hpp"
#include "gjsscc/source_codec.hpp"

namespace gjsscc {

/// (q_b, q_t, eps_c, eps_t) plus Monte-Carlo controls. Treated pixels are
/// coded at q_t and arrive with residual BER eps_t; everything else is coded
/// at q_b and sees the raw channel BER eps_c.
struct CodingProfile {
  int q_basic = 1;
  int q_target = 50;
  double ber_channel = 0.2014;
  double ber_target = 1e-2;
  int trials = 8;
  std::uint64_t master_seed = 0;

  /// Treated and untreated regions are coded identically.
  bool degenerate() const noexcept { return q_basic == q_target && ber_target == ber_channel; }
  /// Throws DomainError. Allows eps_t == eps_c and eps_t == 0 for degenerate and identity setups.
  void validate() const;
};

struct TransmissionOptions {
  StreamFormat format = StreamFormat::codec;
  /// When false the background costs no bits and is replaced by uniform noise at the receiver.
  bool background_transmitted = true;
};

/// Source-coded streams for one treated/untreated split of an image.
struct PreparedTransmission {
  RegionMask treated;
  RegionMask untreated;
  RectStream treated_stream;
  RectStream untreated_stream;

  std::uint64_t treated_bits() const noexcept { return treated_stream.present() ? treated_stream.stream.bit_length() : 0; }
  std::uint64_t untreated_bits() const noexcept {
    return untreated_stream.present() ? untreated_stream.stream.bit_length() : 0;
  }
};

/// Encodes `treated` at q_t and `untreated` at q_b over their minimum
/// rectangles. Under a degenerate profile the split collapses into a single
/// untreated stream. Masks must be disjoint; pixels in neither are not sent.
PreparedTransmission prepare_transmission(const Image& img, const RegionMask& treated, const RegionMask& untreated,
                                          const CodingProfile& profile, StreamFormat format);

/// One noise realisation: payload bits flipped at eps_t / eps_c, decoded,
/// composited; unsent pixels filled with uniform noise. Pure in `seed`.
Image deliver(const Image& img, const PreparedTransmission& prepared, const CodingProfile& profile,
              std::uint64_t seed);

}  // namespace gjsscc
