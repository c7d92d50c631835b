#include "gjsscc/channel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "gjsscc/error.hpp"

namespace gjsscc {

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inverse: probability must lie in (0, 1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double bpsk_ber(const ChannelSpec& spec) {
  if (!(spec.gain > 0.0) || !(spec.snr_scale > 0.0)) throw DomainError("bpsk_ber: gain and snr_scale must be positive");
  return q_function(std::sqrt(spec.snr_scale * spec.gain));
}

double sample_channel_gain(RandomStream& rng, double variance) {
  if (!(variance > 0.0)) throw DomainError("sample_channel_gain: variance must be positive");
  return -variance * std::log1p(-rng.next_unit());
}

void inject_bit_errors_inplace(std::span<std::uint8_t> bits, double ber, std::uint64_t seed,
                               std::uint64_t first_index) {
  if (!(ber >= 0.0 && ber <= 0.5)) throw DomainError("inject_bit_errors: ber must lie in [0, 0.5]");
  if (ber == 0.0) return;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (to_unit(hash_combine(seed, first_index + i)) < ber) bits[i] ^= 1U;
  }
}

Bits inject_bit_errors(const Bits& bits, double ber, std::uint64_t seed) {
  Bits out = bits;
  inject_bit_errors_inplace(out, ber, seed);
  return out;
}

// ---------------------------------------------------------------------------
// Information density integrals

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gk15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <class F>
double adaptive_gk(const F& f, double a, double b, double tol, int depth) {
  const auto [value, err] = gk15(f, a, b);
  if (err <= tol || depth == 0) return value;
  const double mid = 0.5 * (a + b);
  return adaptive_gk(f, a, mid, 0.5 * tol, depth - 1) + adaptive_gk(f, mid, b, 0.5 * tol, depth - 1);
}

constexpr double kTail = 10.0;
constexpr double kQuadTol = 1e-13;

double gaussian_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// log2(1 + e^t) without overflow.
double log2_1p_exp(double t) {
  return (std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)))) / std::numbers::ln2;
}

// Information density of BPSK given the noise realisation z (bit +1 sent).
double info_density(double rho, double z) { return 1.0 - log2_1p_exp(-2.0 * rho - 2.0 * z * std::sqrt(rho)); }

void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("snr rho must be positive and finite");
}

}  // namespace

double mutual_info_bpsk(double rho) {
  check_rho(rho);
  auto f = [rho](double z) { return gaussian_pdf(z) * info_density(rho, z); };
  return adaptive_gk(f, -kTail, kTail, kQuadTol, 30);
}

double dispersion_bpsk(double rho) {
  check_rho(rho);
  const double mean = mutual_info_bpsk(rho);
  auto f = [rho, mean](double z) {
    const double d = info_density(rho, z) - mean;
    return gaussian_pdf(z) * d * d;
  };
  return adaptive_gk(f, -kTail, kTail, kQuadTol, 30);
}

// ---------------------------------------------------------------------------
// Normal approximation

double na_bound_bits(double n, double mutual_info, double dispersion, double target_error) {
  return mutual_info * n - std::sqrt(dispersion * n) * q_inverse(target_error) + 0.5 * std::log2(n);
}

NAResult na_min_blocklength(std::uint64_t info_bits, double channel_ber, double target_ber) {
  if (info_bits < 1) throw DomainError("na_min_blocklength: K* must be >= 1");
  if (!(channel_ber > 0.0 && channel_ber < 0.5)) throw DomainError("na_min_blocklength: need 0 < eps_c < 0.5");
  if (!(target_ber > 0.0 && target_ber < 1.0)) throw DomainError("na_min_blocklength: need 0 < eps_t < 1");
  NAResult r;
  r.info_bits = info_bits;
  r.target_error = target_ber;
  const double qc = q_inverse(channel_ber);
  r.rho = qc * qc;
  r.mutual_info = mutual_info_bpsk(r.rho);
  r.dispersion = dispersion_bpsk(r.rho);

  const double k = static_cast<double>(info_bits);
  const double qt = q_inverse(target_ber);
  const double backoff = std::sqrt(r.dispersion) * qt;
  auto satisfied = [&](std::uint64_t n) {
    return k <= r.mutual_info * static_cast<double>(n) - backoff * std::sqrt(static_cast<double>(n)) +
                    0.5 * std::log2(static_cast<double>(n));
  };

  // In t = sqrt(N) the bound is I t^2 - b t + log2 t, whose derivative
  // vanishes at the roots of 2 I t^2 - b t + 1/ln2. Between the roots the
  // bound decreases, so a direct scan covers everything below the first
  // root and bisection is safe beyond the second.
  double scan_to = 63.0;
  double monotone_from = 1.0;
  const double disc = backoff * backoff - 8.0 * r.mutual_info / std::numbers::ln2;
  if (disc > 0.0) {
    const double t1 = (backoff - std::sqrt(disc)) / (4.0 * r.mutual_info);
    const double t2 = (backoff + std::sqrt(disc)) / (4.0 * r.mutual_info);
    scan_to = std::max(scan_to, std::ceil(t1 * t1));
    monotone_from = std::ceil(t2 * t2);
  }
  const auto scan_limit = static_cast<std::uint64_t>(scan_to);
  std::uint64_t found = 0;
  for (std::uint64_t n = 1; n <= scan_limit; ++n) {
    if (satisfied(n)) {
      found = n;
      break;
    }
  }

  if (found == 0) {
    std::uint64_t lo = std::max<std::uint64_t>(scan_limit + 1, static_cast<std::uint64_t>(monotone_from));
    std::uint64_t hi = std::max<std::uint64_t>(lo, static_cast<std::uint64_t>(std::ceil(4.0 * k / r.mutual_info)));
    constexpr std::uint64_t kCap = std::uint64_t{1} << 52;
    while (!satisfied(hi)) {
      if (hi >= kCap) throw DomainError("na_min_blocklength: bound unachievable below blocklength cap");
      lo = hi + 1;
      hi = std::min(kCap, hi * 2);
    }
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (satisfied(mid)) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    found = lo;
  }

  if (!satisfied(found) || (found > 1 && satisfied(found - 1))) {
    throw std::logic_error("na_min_blocklength: minimality check failed");
  }
  r.blocklength = found;
  return r;
}

std::uint64_t protected_length(std::uint64_t info_bits, double channel_ber, double target_ber, CodingMode mode) {
  if (info_bits == 0) return 0;
  if (target_ber >= channel_ber) return info_bits;
  if (mode == CodingMode::na) return na_min_blocklength(info_bits, channel_ber, target_ber).blocklength;
  const double qc = q_inverse(channel_ber);
  const double capacity = mutual_info_bpsk(qc * qc);
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(info_bits) / capacity));
}

ProtectedStream protect_stream(const Bits& bits, double channel_ber, double target_ber, CodingMode mode,
                               std::uint64_t seed) {
  ProtectedStream out;
  const double residual = std::min(target_ber, channel_ber);
  out.channel_bits = protected_length(bits.size(), channel_ber, target_ber, mode);
  out.delivered = inject_bit_errors(bits, residual, seed);
  return out;
}

}  // namespace gjsscc
