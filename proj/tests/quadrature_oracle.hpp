#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>

namespace gjsscc::test {

// Independent quadrature over the whole real line (tanh-sinh after the
// change of variable built into boost for infinite ranges).
inline double log2_1p_exp(double a) {
  const double sp = a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
  return sp / std::numbers::ln2;
}

struct QuadratureOracle {
  double info(double rho) const {
    boost::math::quadrature::tanh_sinh<double> q;
    auto f = [rho](double z) {
      return std::exp(-z * z / 2) / std::sqrt(2 * std::numbers::pi) *
             (1.0 - log2_1p_exp(-2 * rho - 2 * z * std::sqrt(rho)));
    };
    return q.integrate(f, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  }
  double dispersion(double rho) const {
    boost::math::quadrature::tanh_sinh<double> q;
    const double mean = info(rho);
    auto f = [rho, mean](double z) {
      const double d = 1.0 - log2_1p_exp(-2 * rho - 2 * z * std::sqrt(rho)) - mean;
      return std::exp(-z * z / 2) / std::sqrt(2 * std::numbers::pi) * d * d;
    };
    return q.integrate(f, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  }
};

}  // namespace gjsscc::test
