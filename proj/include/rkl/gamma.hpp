#pragma once

// Real gamma function via the Lanczos approximation (g = 7, nine terms),
// good to about 15 significant digits for positive arguments.

#include <array>
#include <cmath>
#include <numbers>

#include "rkl/error.hpp"

namespace rkl {

namespace detail {

inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoeff = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// log Gamma(z) for z >= 0.5.
inline double lanczos_log_gamma(double z) {
  z -= 1.0;
  double series = kLanczosCoeff[0];
  for (std::size_t i = 1; i < kLanczosCoeff.size(); ++i) {
    series += kLanczosCoeff[i] / (z + static_cast<double>(i));
  }
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
         std::log(series);
}

}  // namespace detail

/// log|Gamma(x)|. Poles at non-positive integers raise DomainError.
inline double log_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) {
    throw DomainError("log_gamma: pole at non-positive integer");
  }
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(std::numbers::pi / std::abs(std::sin(std::numbers::pi * x))) -
           detail::lanczos_log_gamma(1.0 - x);
  }
  return detail::lanczos_log_gamma(x);
}

inline double gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) {
    throw DomainError("gamma: pole at non-positive integer");
  }
  if (x < 0.5) {
    return std::numbers::pi /
           (std::sin(std::numbers::pi * x) * std::exp(detail::lanczos_log_gamma(1.0 - x)));
  }
  return std::exp(detail::lanczos_log_gamma(x));
}

/// 1/Gamma(1+mu) and 1/Gamma(1-mu) together with Temme's auxiliary
/// functions gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu) and
/// gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2, for |mu| <= 1/2.
/// Uses the Taylor series of 1/Gamma at the origin, so gam1 carries no
/// cancellation as mu -> 0.
struct TemmeGammas {
  double gam1;
  double gam2;
  double inv_gamma_plus;   // 1/Gamma(1+mu)
  double inv_gamma_minus;  // 1/Gamma(1-mu)
};

inline TemmeGammas temme_gammas(double mu) {
  // 1/Gamma(z) = sum_{k>=1} c[k] z^k
  static constexpr std::array<double, 27> c = {
      0.0,
      1.0,
      0.57721566490153286061,
      -0.65587807152025388108,
      -0.042002635034095235529,
      0.1665386113822914895,
      -0.042197734555544336748,
      -0.0096219715278769735621,
      0.0072189432466630995424,
      -0.0011651675918590651121,
      -0.00021524167411495097282,
      0.00012805028238811618615,
      -0.000020134854780788238656,
      -1.2504934821426706573e-6,
      1.1330272319816958824e-6,
      -2.0563384169776071035e-7,
      6.1160951044814158179e-9,
      5.0020076444692229301e-9,
      -1.1812745704870201446e-9,
      1.0434267116911005105e-10,
      7.782263439905071254e-12,
      -3.6968056186422057082e-12,
      5.100370287454475979e-13,
      -2.0583260535665067832e-14,
      -5.3481225394230179824e-15,
      1.2267786282382607902e-15,
      -1.1812593016974587695e-16};
  const double mu2 = mu * mu;
  double gam1 = 0.0;
  double gam2 = 0.0;
  // Horner in mu^2 from the top.
  for (int k = 26; k >= 2; k -= 2) gam1 = gam1 * mu2 + c[k];
  for (int k = 25; k >= 1; k -= 2) gam2 = gam2 * mu2 + c[k];
  gam1 = -gam1;
  return {gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1};
}

}  // namespace rkl
