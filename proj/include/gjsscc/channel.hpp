#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gjsscc/random.hpp"

namespace gjsscc {

/// Bit sequences are stored one bit per byte (values 0 or 1).
using Bits = std::vector<std::uint8_t>;

double q_function(double x);
/// Inverse of q_function on (0, 1).
double q_inverse(double p);

struct ChannelSpec {
  double gain = 1.0;        ///< |h|^2
  double snr_scale = 1.0;   ///< 2P / sigma_z^2
};

/// Uncoded BPSK bit error probability Q(sqrt(snr_scale * |h|^2)).
double bpsk_ber(const ChannelSpec& spec);

/// |h|^2 for h ~ CN(0, variance): exponential with the given mean.
double sample_channel_gain(RandomStream& rng, double variance);

/// Flips each bit independently with probability `ber`. The decision for
/// bit i depends only on (seed, i), so any chunking gives the same result.
Bits inject_bit_errors(const Bits& bits, double ber, std::uint64_t seed);
void inject_bit_errors_inplace(std::span<std::uint8_t> bits, double ber, std::uint64_t seed,
                               std::uint64_t first_index = 0);

/// Mutual information of BPSK over AWGN at SNR `rho` per real dimension, bits/use.
double mutual_info_bpsk(double rho);
/// Channel dispersion (variance of the information density), bits^2/use.
double dispersion_bpsk(double rho);

struct NAResult {
  std::uint64_t info_bits = 0;   ///< K*
  std::uint64_t blocklength = 0; ///< N*
  double rho = 0.0;
  double mutual_info = 0.0;
  double dispersion = 0.0;
  double target_error = 0.0;

  double rate() const noexcept { return static_cast<double>(info_bits) / static_cast<double>(blocklength); }
};

/// Right-hand side of the normal-approximation achievability bound at blocklength n.
double na_bound_bits(double n, double mutual_info, double dispersion, double target_error);

/// Smallest N with K <= I N - sqrt(V N) Qinv(eps_t) + log2(N)/2 at rho = Qinv(eps_c)^2.
/// Needs 0 < eps_c < 0.5 and 0 < eps_t < 1; callers wanting protection pass eps_t < eps_c.
NAResult na_min_blocklength(std::uint64_t info_bits, double channel_ber, double target_ber);

enum class CodingMode { na, ideal };

struct ProtectedStream {
  Bits delivered;
  std::uint64_t channel_bits = 0;
};

/// Channel bits needed to deliver `info_bits` at residual BER `target_ber`
/// over a channel with raw BER `channel_ber`. target_ber >= channel_ber means
/// unprotected transmission (channel bits = info bits).
std::uint64_t protected_length(std::uint64_t info_bits, double channel_ber, double target_ber, CodingMode mode);

/// Sizes the code for `bits` and returns the stream as delivered at rate target_ber.
ProtectedStream protect_stream(const Bits& bits, double channel_ber, double target_ber, CodingMode mode,
                               std::uint64_t seed);

}  // namespace gjsscc
