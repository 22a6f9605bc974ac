#pragma once

// Bessel functions J_nu, I_nu, K_nu of real order and positive argument.
//
// Evaluation by region:
//   I_nu : ascending series for x <= max(40, nu^2), Hankel expansion of
//          e^-x I_nu(x) beyond.
//   K_nu : Temme's method. Series for x < 2, Steed's continued fraction for
//          e^x K_nu(x) otherwise; then forward recurrence in the order.
//   J_nu : ascending series in extended precision for x <= 20, Hankel
//          expansion with P/Q sums beyond.
//
// I and K come from unrelated algorithms, so the Wronskian
// I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x is an honest accuracy check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "rkl/error.hpp"
#include "rkl/gamma.hpp"
#include "rkl/quadrature.hpp"
#include "rkl/scaled_value.hpp"

namespace rkl::bessel {

inline constexpr double kMaxPublicOrder = 4.0;
inline constexpr double kMaxInternalOrder = 16.0;

/// Bessel order restricted to the public range [0, 4].
class BesselOrder {
 public:
  explicit BesselOrder(double nu) : nu_(nu) {
    require(std::isfinite(nu) && nu >= 0.0 && nu <= kMaxPublicOrder,
            "BesselOrder: order must lie in [0, 4]");
  }
  double value() const { return nu_; }

 private:
  double nu_;
};

/// Values f_{nu}, f_{nu+1}, ... sharing one exponential scale:
/// f_{nu+l} = values[l] * e^log_scale.
struct OrderSequence {
  double log_scale = 0.0;
  std::vector<double> values;

  double log_at(std::size_t l) const { return log_scale + std::log(values[l]); }
  ScaledValue at(std::size_t l) const { return ScaledValue::from_parts(values[l], log_scale); }
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

inline void check_args(double nu, double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(who) + ": argument must be positive and finite");
  }
  if (!(nu >= 0.0) || nu > kMaxInternalOrder) {
    throw DomainError(std::string(who) + ": order out of range");
  }
}

struct LogValue {
  double log_abs;
  double sign;
  double rel_err;
};

// I_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k (x^2/4)^k / (k! (nu+1)_k)
inline LogValue i_series(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  int k = 1;
  for (; k < 2000; ++k) {
    term *= q / (static_cast<double>(k) * (nu + k));
    sum += term;
    if (term < kEps * 0.5 * sum) break;
  }
  const double log_prefactor = nu * std::log(0.5 * x) - log_gamma(nu + 1.0);
  return {log_prefactor + std::log(sum), 1.0, (8.0 + std::sqrt(static_cast<double>(k))) * kEps};
}

// e^-x I_nu(x) ~ (2 pi x)^-1/2 sum_k (-1)^k a_k(nu) / x^k
inline LogValue i_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double last = 1.0;
  int k = 1;
  for (; k < 500; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (mag == 0.0) {  // half-integer order: the expansion terminates
      last = 0.0;
      break;
    }
    if (k > 2.0 * nu + 2 && mag > last) break;  // past the smallest term
    sum += term;
    last = mag;
    if (mag < 0.25 * kEps * std::abs(sum)) break;
  }
  return {x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum), 1.0,
          8.0 * kEps + last / std::abs(sum)};
}

inline LogValue i_log(double nu, double x) {
  check_args(nu, x, "bessel_i");
  if (x <= std::max(40.0, nu * nu)) return i_series(nu, x);
  return i_asymptotic(nu, x);
}

/// I_{nu}, ..., I_{nu+count-1} at x. Top two orders directly, the rest by
/// downward recurrence I_{m-1} = (2m/x) I_m + I_{m+1}, which is stable.
inline OrderSequence i_sequence(double nu, double x, std::size_t count) {
  OrderSequence seq;
  seq.values.assign(count, 0.0);
  if (count == 0) return seq;
  const double top = nu + static_cast<double>(count - 1);
  const LogValue upper = i_log(top, x);
  seq.log_scale = upper.log_abs;
  seq.values[count - 1] = 1.0;
  if (count == 1) return seq;
  const LogValue next = i_log(top + 1.0, x);
  double above = std::exp(next.log_abs - seq.log_scale);
  for (std::size_t l = count - 1; l-- > 0;) {
    const double order = nu + static_cast<double>(l + 1);
    double value = (2.0 * order / x) * seq.values[l + 1] + above;
    above = seq.values[l + 1];
    seq.values[l] = value;
    if (value > 1e250) {
      for (std::size_t m = l; m < count; ++m) seq.values[m] *= 1e-250;
      above *= 1e-250;
      seq.log_scale += 250.0 * std::log(10.0);
    }
  }
  return seq;
}

/// K_{nu}, ..., K_{nu+count-1} at x by Temme's method.
inline OrderSequence k_sequence(double nu, double x, std::size_t count, double* rel_err = nullptr) {
  check_args(nu, x, "bessel_k");
  constexpr double kEpsIter = 1e-17;
  constexpr int kMaxIter = 100000;
  const int nl = static_cast<int>(nu + 0.5);
  const double xmu = nu - nl;
  const double xmu2 = xmu * xmu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  double kmu = 0.0;
  double k1 = 0.0;
  double log_scale = 0.0;
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * xmu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = xmu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(xmu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.inv_gamma_plus;
    double q = 0.5 / (e * g.inv_gamma_minus);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - xmu2);
      c *= d / i;
      p /= (i - xmu);
      q /= (i + xmu);
      const double del = c * ff;
      sum += del;
      const double del1 = c * (p - i * ff);
      sum1 += del1;
      if (std::abs(del) < std::abs(sum) * kEpsIter) break;
    }
    if (i > kMaxIter) throw ConvergenceError("bessel_k: series failed to converge");
    kmu = sum;
    k1 = sum1 * xi2;
  } else {
    // Steed's algorithm for the continued fraction CF2; yields e^x K.
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - xmu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIter; ++i) {
      a -= 2 * (i - 1);
      c = -a * c / i;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEpsIter) break;
    }
    if (i > kMaxIter) throw ConvergenceError("bessel_k: continued fraction failed to converge");
    h = a1 * h;
    kmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    k1 = kmu * (xmu + x + 0.5 - h) * xi;
    log_scale = -x;
  }
  // Forward recurrence K_{m+1} = (2m/x) K_m + K_{m-1}, stable upward.
  OrderSequence seq;
  seq.values.assign(count, 0.0);
  std::size_t stored = 0;
  auto store = [&](int order_index, double value) {
    const int l = order_index - nl;
    if (l >= 0 && static_cast<std::size_t>(l) < count) {
      seq.values[static_cast<std::size_t>(l)] = value;
      ++stored;
    }
  };
  store(nl, std::abs(kmu));  // K_{-mu} = K_mu when xmu < 0 and nl = 0 is impossible
  double prev = kmu;
  double cur = k1;
  const int last = nl + static_cast<int>(count) - 1;
  // cur holds K_{xmu+1}; walk orders xmu+1, xmu+2, ...
  for (int m = 1; m <= last; ++m) {
    store(m, cur);
    if (m == last) break;
    const double next = (xmu + m) * xi2 * cur + prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > 1e250) {
      prev *= 1e-250;
      cur *= 1e-250;
      for (std::size_t l = 0; l < count; ++l) seq.values[l] *= 1e-250;
      log_scale += 250.0 * std::log(10.0);
    }
  }
  seq.log_scale = log_scale;
  if (rel_err != nullptr) *rel_err = (10.0 + 2.0 * (nl + static_cast<double>(count))) * kEps;
  (void)stored;
  return seq;
}

inline LogValue k_log(double nu, double x) {
  double err = 0.0;
  const OrderSequence seq = k_sequence(nu, x, 1, &err);
  return {seq.log_at(0), 1.0, err};
}

// J_nu(x) by the ascending series, summed in long double.
inline LogValue j_series(double nu, double x) {
  const long double q = 0.25L * static_cast<long double>(x) * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  long double max_term = 1.0L;
  int k = 1;
  for (; k < 1000; ++k) {
    term *= -q / (static_cast<long double>(k) * (nu + k));
    sum += term;
    max_term = std::max(max_term, std::fabs(term));
    if (std::fabs(term) < 1e-21L * std::fabs(sum) && k > q) break;
  }
  const double log_prefactor = nu * std::log(0.5 * x) - log_gamma(nu + 1.0);
  const double s = static_cast<double>(sum);
  const double rel_sum = static_cast<double>(std::numeric_limits<long double>::epsilon() *
                                             max_term * (k + 1)) /
                         std::max(std::abs(s), 1e-300);
  if (s == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  return {log_prefactor + std::log(std::abs(s)), s > 0 ? 1.0 : -1.0, 4.0 * kEps + rel_sum};
}

// Hankel expansion J = sqrt(2/(pi x)) (P cos w - Q sin w), w = x - nu pi/2 - pi/4.
inline LogValue j_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 400; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (k > 2.0 * nu + 2 && mag > last) break;
    // a_k / x^k enters P (k even) or Q (k odd) with sign (-1)^floor(k/2)
    const double signed_term = ((k / 2) % 2 == 0) ? term : -term;
    if (k % 2 == 0) {
      p += signed_term;
    } else {
      q += signed_term;
    }
    last = mag;
    if (mag < 1e-18) break;
  }
  const double w = x - (0.5 * nu + 0.25) * std::numbers::pi;
  const double amp = std::sqrt(2.0 / (std::numbers::pi * x));
  const double value = amp * (p * std::cos(w) - q * std::sin(w));
  const double abs_err = amp * (last + 4.0 * kEps * (std::abs(p) + std::abs(q)) +
                                std::abs(x) * kEps);
  if (value == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  return {std::log(std::abs(value)), value > 0 ? 1.0 : -1.0, abs_err / std::abs(value)};
}

inline double j_value(double nu, double x) {
  check_args(nu, x, "bessel_j");
  const LogValue v = x <= 20.0 ? j_series(nu, x) : j_asymptotic(nu, x);
  return v.sign * std::exp(v.log_abs);
}

// Rounding of log|f| itself costs |log f| ulps of relative accuracy in f.
inline EvalResult to_result(const LogValue& v) {
  return {ScaledValue::from_log(v.log_abs, v.sign), v.rel_err + 2.0 * kEps * (1.0 + std::abs(v.log_abs))};
}

}  // namespace detail

/// J_nu(x). Relative error estimates are not meaningful near zeros of J; use
/// abs_err_estimate() there.
inline EvalResult bessel_j(BesselOrder nu, double x) {
  detail::check_args(nu.value(), x, "bessel_j");
  return detail::to_result(x <= 20.0 ? detail::j_series(nu.value(), x)
                                     : detail::j_asymptotic(nu.value(), x));
}

/// I_nu(x) as a ScaledValue; never overflows.
inline EvalResult bessel_i_scaled(BesselOrder nu, double x) {
  return detail::to_result(detail::i_log(nu.value(), x));
}

/// K_nu(x) as a ScaledValue; never underflows.
inline EvalResult bessel_k_scaled(BesselOrder nu, double x) {
  return detail::to_result(detail::k_log(nu.value(), x));
}

/// Plain accessors; throw OverflowError instead of returning infinity.
inline double bessel_i(BesselOrder nu, double x) { return bessel_i_scaled(nu, x).to_double(); }
inline double bessel_k(BesselOrder nu, double x) { return bessel_k_scaled(nu, x).to_double(); }
inline double bessel_j_value(BesselOrder nu, double x) { return detail::j_value(nu.value(), x); }

/// I_t(x) K_t(y) for 0 < x <= y.
inline ScaledValue product_ik(BesselOrder t, double x, double y) {
  require(x > 0.0 && x <= y, "product_ik: need 0 < x <= y");
  const auto i = detail::i_log(t.value(), x);
  const auto k = detail::k_log(t.value(), y);
  return ScaledValue::from_log(i.log_abs + k.log_abs);
}

/// |x (I_nu K_{nu+1} + I_{nu+1} K_nu)(x) - 1|
inline double wronskian_defect(BesselOrder nu, double x) {
  detail::check_args(nu.value(), x, "wronskian_defect");
  const auto i = detail::i_sequence(nu.value(), x, 2);
  const auto k = detail::k_sequence(nu.value(), x, 2);
  const double scale = std::log(x) + i.log_scale + k.log_scale;
  const double w = (i.values[0] * k.values[1] + i.values[1] * k.values[0]) * std::exp(scale);
  return std::abs(w - 1.0);
}

/// I_t(x) K_t(y) through the oscillatory representation
///   int_0^inf J_{2t}(a s) e^{-b sqrt(1+s^2)} ds / sqrt(1+s^2),
/// a = 2 sqrt(xy), b = y - x. Panels are a quarter of the J oscillation
/// period; the first panel is graded towards s = 0 where J_{2t}(as) ~ s^{2t}.
/// Throws ConvergenceError when the tail is too long (small b) or when 8- and
/// 16-point panel rules disagree by more than rel_tol.
inline ScaledValue product_ik_nicholson(double t, double x, double y, double rel_tol = 1e-9,
                                        std::size_t max_panels = 200000) {
  require(t > 0.0 && t < 1.0, "product_ik_nicholson: need t in (0, 1)");
  require(x > 0.0 && x < y, "product_ik_nicholson: need 0 < x < y");
  const double a = 2.0 * std::sqrt(x * y);
  const double b = y - x;
  const double order = 2.0 * t;
  // Relative to the leading e^{-b}, drop the tail where e^{-b(r-1)} < 1e-16 * tol.
  const double r = 1.0 + std::log(1e16 / rel_tol) / b;
  const double s_max = std::sqrt(r * r - 1.0);
  const double width = std::numbers::pi / (2.0 * a);
  const auto panels = static_cast<std::size_t>(std::ceil(s_max / width));
  if (panels > max_panels) {
    throw ConvergenceError("product_ik_nicholson: oscillatory tail needs " +
                           std::to_string(panels) + " panels (b = y - x too small)");
  }
  // Factor e^{-b} out so the integrand stays O(1).
  auto integrand = [&](double s) {
    const double root = std::sqrt(1.0 + s * s);
    return detail::j_value(order, a * s) * std::exp(-b * (root - 1.0)) / root;
  };
  const auto& coarse = quad::gauss_legendre(8);
  const auto& fine = quad::gauss_legendre(16);
  double sum_coarse = 0.0;
  double sum_fine = 0.0;
  // Graded first panel [0, width].
  double hi = width;
  for (int level = 0; level < 40; ++level) {
    const double lo = hi * 0.5;
    sum_coarse += quad::fixed(integrand, lo, hi, coarse);
    sum_fine += quad::fixed(integrand, lo, hi, fine);
    hi = lo;
  }
  for (std::size_t p = 1; p < panels; ++p) {
    const double lo = width * static_cast<double>(p);
    sum_coarse += quad::fixed(integrand, lo, lo + width, coarse);
    sum_fine += quad::fixed(integrand, lo, lo + width, fine);
  }
  if (!(std::abs(sum_fine - sum_coarse) <= rel_tol * std::abs(sum_fine)) || sum_fine <= 0.0) {
    throw ConvergenceError("product_ik_nicholson: panel rules disagree (" +
                           std::to_string(sum_coarse) + " vs " + std::to_string(sum_fine) + ")");
  }
  return ScaledValue::from_log(std::log(sum_fine) - b);
}

}  // namespace rkl::bessel
