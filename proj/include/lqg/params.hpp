#pragma once

#include <optional>
#include <stdexcept>

namespace lqg {

// Multifractal exponent p - p(p-1)*gamma^2/4. Rejects gamma outside (0,2).
double psi(double gamma, double p);

struct LqgParams {
  double gamma = 0;        // boundary-measure / field coupling, in (0,2)
  double gamma_prime = 0;  // variation-measure coupling, in (0,2)
  double d_gamma = 0;      // metric dimension, > 2; user input except gamma=sqrt(8/3)
  double xi = 0;           // gamma / d_gamma
  double q = 0;            // gamma/2 + 2/gamma
  double q_prime = 0;      // gamma_prime/2 + 2/gamma_prime

  // d_gamma may be omitted only at gamma = sqrt(8/3), where the value 4 is known.
  static LqgParams make(double gamma, double gamma_prime,
                        std::optional<double> d_gamma = std::nullopt);
};

double variation_exponent(const LqgParams& p);     // gamma'*d_gamma/(2*gamma)
double normalization_exponent(const LqgParams& p); // 1 - psi(gamma, gamma'/gamma)

struct CoalescenceConfig {
  double alpha1 = 0.25;
  double alpha2 = 0.5;
  double annulus_ratio = 2.0;
};

// (1-alpha2)*gamma'*d/(2*gamma) - alpha2*psi(gamma, gamma'/gamma) > 0.
// Rejects alpha ordering violations.
bool check_alpha(const CoalescenceConfig& cfg, const LqgParams& p);

}  // namespace lqg
