#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gjsscc/channel.hpp"
#include "gjsscc/error.hpp"
#include "quadrature_oracle.hpp"

using namespace gjsscc;

namespace {

std::size_t flips(const Bits& a, const Bits& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i] ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("Q function anchors") {
  CHECK(q_function(0.0) == 0.5);
  for (double x : {0.1, 0.7, 1.3, 2.0, 3.5, 5.0}) CHECK(q_function(-x) == doctest::Approx(1.0 - q_function(x)).epsilon(1e-15));
  // 40-digit erfc evaluations
  CHECK(std::abs(q_function(3.090232306167813) - 1.0000000000000018e-3) < 1e-15);
  CHECK(std::abs(q_function(std::sqrt(0.7)) - 0.20139184712323784) < 1e-15);
  CHECK(std::abs(q_function(std::sqrt(9.5495)) - 0.0010000194527097406) < 1e-16);
}

TEST_CASE("Q is strictly decreasing") {
  double prev = q_function(-8.0);
  for (double x = -7.9; x <= 8.0; x += 0.1) {
    const double q = q_function(x);
    REQUIRE(q < prev);
    prev = q;
  }
}

TEST_CASE("q_inverse inverts Q to 1e-12") {
  CHECK(std::abs(q_inverse(1e-3) - 3.0902323061678135) < 1e-12);
  for (int e = -10; e <= -1; ++e) {
    for (double m : {1.0, 2.5, 5.0}) {
      const double p = m * std::pow(10.0, e);
      CHECK(std::abs(q_function(q_inverse(p)) - p) <= 1e-12);
      CHECK(std::abs(q_function(q_inverse(1.0 - p)) - (1.0 - p)) <= 1e-12);
    }
  }
  CHECK(q_inverse(0.5) == 0.0);
  CHECK_THROWS_AS(q_inverse(0.0), DomainError);
  CHECK_THROWS_AS(q_inverse(1.0), DomainError);
}

TEST_CASE("BPSK BER anchors and monotonicity") {
  CHECK(std::abs(bpsk_ber({0.7, 1.0}) - 0.2014) < 5e-4);
  CHECK(std::abs(bpsk_ber({9.5495, 1.0}) - 1e-3) < 5e-5);
  CHECK(bpsk_ber({0.7, 2.0}) == q_function(std::sqrt(1.4)));
  double prev = 0.5;
  for (double g = 0.01; g < 60.0; g *= 1.5) {
    const double e = bpsk_ber({g, 1.0});
    REQUIRE(e < prev);
    prev = e;
  }
  CHECK(prev < 1e-12);
  CHECK_THROWS_AS(bpsk_ber({0.0, 1.0}), DomainError);
}

TEST_CASE("channel gains are exponential with the requested mean") {
  RandomStream a(17), b(17);
  for (int i = 0; i < 10; ++i) CHECK(sample_channel_gain(a, 2.0) == sample_channel_gain(b, 2.0));

  RandomStream r(99);
  const int n = 100000;
  const double var = 1.5;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = sample_channel_gain(r, var);
    REQUIRE(g >= 0.0);
    sum += g;
  }
  // exponential: sd = mean
  CHECK(std::abs(sum / n - var) < 3.0 * var / std::sqrt(static_cast<double>(n)));
  RandomStream z(1);
  CHECK_THROWS_AS(sample_channel_gain(z, 0.0), DomainError);
}

TEST_CASE("bit error injection") {
  Bits bits(1000000);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<std::uint8_t>((i * 2654435761u >> 7) & 1);

  SUBCASE("zero BER is the identity") { CHECK(inject_bit_errors(bits, 0.0, 5) == bits); }

  SUBCASE("flip counts sit inside binomial bounds") {
    for (double eps : {0.5, 0.2014, 0.01}) {
      const auto out = inject_bit_errors(bits, eps, 12345);
      CHECK(out.size() == bits.size());
      const double n = static_cast<double>(bits.size());
      const double sd = std::sqrt(n * eps * (1 - eps));
      CHECK(std::abs(static_cast<double>(flips(bits, out)) - n * eps) <= 3 * sd);
    }
  }

  SUBCASE("same seed same output, different seed different output") {
    CHECK(inject_bit_errors(bits, 0.1, 1) == inject_bit_errors(bits, 0.1, 1));
    CHECK(inject_bit_errors(bits, 0.1, 1) != inject_bit_errors(bits, 0.1, 2));
  }

  SUBCASE("chunked injection equals serial injection") {
    const auto serial = inject_bit_errors(bits, 0.2014, 777);
    Bits chunked = bits;
    std::span<std::uint8_t> all(chunked);
    std::size_t pos = 0;
    for (std::size_t len : {1u, 63u, 64u, 1000u, 12345u}) {
      inject_bit_errors_inplace(all.subspan(pos, len), 0.2014, 777, pos);
      pos += len;
    }
    inject_bit_errors_inplace(all.subspan(pos), 0.2014, 777, pos);
    CHECK(chunked == serial);
  }

  CHECK_THROWS_AS(inject_bit_errors(bits, 0.6, 1), DomainError);
  CHECK_THROWS_AS(inject_bit_errors(bits, -0.1, 1), DomainError);
}

TEST_CASE("mutual information and dispersion limits") {
  CHECK(mutual_info_bpsk(50.0) > 0.9999);
  CHECK(dispersion_bpsk(50.0) < 1e-3);
  CHECK(mutual_info_bpsk(1e-6) < 1e-4);
  for (double rho : {1e-4, 0.01, 0.3, 0.7, 1.0, 3.0, 9.5495, 20.0}) {
    const double i = mutual_info_bpsk(rho);
    CHECK(i > 0.0);
    CHECK(i < 1.0);
    CHECK(dispersion_bpsk(rho) >= 0.0);
  }
  CHECK_THROWS_AS(mutual_info_bpsk(0.0), DomainError);
}

TEST_CASE("I and V match high-precision reference values") {
  CHECK(std::abs(mutual_info_bpsk(0.7) - 0.37741322641329211) < 1e-9);
  CHECK(std::abs(dispersion_bpsk(0.7) - 0.62549966309623073) < 1e-9);
  const double rho = std::pow(q_inverse(0.2014), 2);
  CHECK(std::abs(mutual_info_bpsk(rho) - 0.37739368306263727) < 1e-9);
  CHECK(std::abs(dispersion_bpsk(rho) - 0.62548812447966660) < 1e-9);
}

TEST_CASE("I and V match an independent tanh-sinh quadrature") {
  const test::QuadratureOracle oracle;
  for (double rho : {0.05, 0.3, 0.7, 1.7, 4.0, 9.5495, 25.0}) {
    CAPTURE(rho);
    CHECK(std::abs(mutual_info_bpsk(rho) - oracle.info(rho)) < 1e-6);
    CHECK(std::abs(dispersion_bpsk(rho) - oracle.dispersion(rho)) < 1e-6);
  }
}

TEST_CASE("NA blocklength regression constants") {
  CHECK(na_min_blocklength(1000, 0.2014, 1e-2).blocklength == 2897);
  CHECK(na_min_blocklength(512, 0.2014, 1e-2).blocklength == 1534);
  CHECK(na_min_blocklength(768, 0.2014, 1e-2).blocklength == 2252);
  const NAResult r = na_min_blocklength(1000, 0.2014, 1e-2);
  CHECK(r.info_bits == 1000);
  CHECK(r.rate() == doctest::Approx(1000.0 / 2897.0));
  CHECK(r.rate() <= r.mutual_info);
}

TEST_CASE("NA blocklength is exactly minimal") {
  for (std::uint64_t k : {1u, 2u, 5u, 17u, 100u, 1000u, 4096u, 100000u}) {
    for (double ec : {0.45, 0.2014, 0.05, 1e-3, 1e-6}) {
      for (double et : {0.3, 1e-2, 1e-4, 1e-8}) {
        if (et >= ec) continue;
        CAPTURE(k);
        CAPTURE(ec);
        CAPTURE(et);
        const NAResult r = na_min_blocklength(k, ec, et);
        const auto n = static_cast<double>(r.blocklength);
        CHECK(static_cast<double>(k) <= na_bound_bits(n, r.mutual_info, r.dispersion, et));
        if (r.blocklength > 1) {
          CHECK(static_cast<double>(k) > na_bound_bits(n - 1, r.mutual_info, r.dispersion, et));
        }
      }
    }
  }
}

TEST_CASE("NA blocklength monotonicity") {
  std::uint64_t prev = 0;
  for (std::uint64_t k = 1; k < 5000; k = k * 3 / 2 + 1) {
    const auto n = na_min_blocklength(k, 0.2014, 1e-2).blocklength;
    CHECK(n >= prev);
    prev = n;
  }
  prev = 0;
  for (double et : {0.1, 3e-2, 1e-2, 1e-3, 1e-4, 1e-6}) {
    const auto n = na_min_blocklength(1000, 0.2014, et).blocklength;
    CHECK(n >= prev);
    prev = n;
  }
  prev = ~std::uint64_t{0};
  for (double ec : {0.4, 0.3, 0.2014, 0.1, 1e-2, 1e-3}) {
    const auto n = na_min_blocklength(1000, ec, 1e-4).blocklength;
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("NA edge behaviour") {
  // With a vanishing backoff term the bound is I N + log2(N) / 2.
  const double rho = std::pow(q_inverse(0.2014), 2);
  const double i = mutual_info_bpsk(rho);
  CHECK(na_bound_bits(100.0, i, dispersion_bpsk(rho), 0.5) == doctest::Approx(i * 100.0 + 0.5 * std::log2(100.0)));

  const NAResult clean = na_min_blocklength(1000, 1e-9, 1e-2);
  CHECK(clean.blocklength <= 1020);
  CHECK(clean.blocklength >= 990);

  CHECK_THROWS_AS(na_min_blocklength(0, 0.2, 0.01), DomainError);
  CHECK_THROWS_AS(na_min_blocklength(10, 0.5, 0.01), DomainError);
  CHECK_THROWS_AS(na_min_blocklength(10, 0.0, 0.01), DomainError);
  CHECK_THROWS_AS(na_min_blocklength(10, 0.2, 0.0), DomainError);
  CHECK_THROWS_AS(na_min_blocklength(10, 0.2, 1.0), DomainError);
}

TEST_CASE("protected lengths") {
  CHECK(protected_length(512, 0.2014, 0.2014, CodingMode::na) == 512);
  CHECK(protected_length(512, 0.2014, 0.3, CodingMode::ideal) == 512);
  CHECK(protected_length(0, 0.2014, 0.01, CodingMode::na) == 0);
  CHECK(protected_length(512, 0.2014, 0.01, CodingMode::na) == 1534);
  const double cap = mutual_info_bpsk(std::pow(q_inverse(0.2014), 2));
  CHECK(protected_length(512, 0.2014, 0.01, CodingMode::ideal) == static_cast<std::uint64_t>(std::ceil(512 / cap)));
  for (std::uint64_t k : {1u, 64u, 777u, 20000u})
    for (double et : {1e-1, 1e-3, 1e-6})
      CHECK(protected_length(k, 0.2014, et, CodingMode::na) >= protected_length(k, 0.2014, et, CodingMode::ideal));
}

TEST_CASE("protect_stream delivers at the residual BER") {
  Bits bits(200000, 0);
  const auto unprotected = protect_stream(bits, 0.2014, 0.2014, CodingMode::na, 3);
  CHECK(unprotected.channel_bits == bits.size());
  CHECK(unprotected.delivered == inject_bit_errors(bits, 0.2014, 3));

  const auto p = protect_stream(bits, 0.2014, 0.01, CodingMode::na, 3);
  CHECK(p.channel_bits == na_min_blocklength(bits.size(), 0.2014, 0.01).blocklength);
  CHECK(p.delivered == inject_bit_errors(bits, 0.01, 3));
}
