#include "lqg/params.hpp"

#include <cmath>
#include <string>

namespace lqg {

static void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double psi(double gamma, double p) {
  require(gamma > 0 && gamma < 2, "gamma must lie in (0,2), got " + std::to_string(gamma));
  return p - p * (p - 1) * gamma * gamma / 4.0;
}

LqgParams LqgParams::make(double gamma, double gamma_prime, std::optional<double> d_gamma) {
  require(gamma > 0 && gamma < 2, "gamma must lie in (0,2), got " + std::to_string(gamma));
  require(gamma_prime > 0 && gamma_prime < 2,
          "gamma_prime must lie in (0,2), got " + std::to_string(gamma_prime));
  double d;
  if (d_gamma) {
    d = *d_gamma;
    require(d > 2, "d_gamma must be > 2, got " + std::to_string(d));
  } else {
    // No closed form exists for the dimension; the only built-in value is the
    // known one at gamma = sqrt(8/3).
    const double g83 = std::sqrt(8.0 / 3.0);
    require(std::abs(gamma - g83) < 1e-12,
            "d_gamma is required input except at gamma=sqrt(8/3)");
    d = 4.0;
  }
  LqgParams p;
  p.gamma = gamma;
  p.gamma_prime = gamma_prime;
  p.d_gamma = d;
  p.xi = gamma / d;
  p.q = gamma / 2.0 + 2.0 / gamma;
  p.q_prime = gamma_prime / 2.0 + 2.0 / gamma_prime;
  return p;
}

double variation_exponent(const LqgParams& p) {
  return p.gamma_prime * p.d_gamma / (2.0 * p.gamma);
}

double normalization_exponent(const LqgParams& p) {
  return 1.0 - psi(p.gamma, p.gamma_prime / p.gamma);
}

bool check_alpha(const CoalescenceConfig& cfg, const LqgParams& p) {
  require(cfg.alpha1 > 0 && cfg.alpha1 < cfg.alpha2 && cfg.alpha2 < 1,
          "need 0 < alpha1 < alpha2 < 1");
  require(cfg.annulus_ratio > 1, "annulus_ratio must exceed 1");
  return (1.0 - cfg.alpha2) * variation_exponent(p) -
             cfg.alpha2 * psi(p.gamma, p.gamma_prime / p.gamma) >
         0.0;
}

}  // namespace lqg
