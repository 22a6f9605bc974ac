#pragma once

// Resolvent and multiplier kernels on the real line.
//
//   R_t(u,v)       = I_t(e^min) K_t(e^max)
//   M1 kernel      = e^u R_t
//   M0 kernel      = (d_u - d_v) R_t
//   S_j^n(t,u,v)   = (d_u + d_v)^n applied to the M_j kernel
//   S_j^n(u,v)     = integral of S_j^n(t,u,v) over t in [0, 1/2]
//
// With x = e^min, y = e^max the operator d_u + d_v is x d_x + y d_y, whose
// powers on I_t(x) K_t(y) expand through the coefficient tables below.

#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <vector>

#include "rkl/bessel.hpp"
#include "rkl/error.hpp"
#include "rkl/quadrature.hpp"
#include "rkl/scaled_value.hpp"

namespace rkl::kernels {

enum class KernelFamily { M0, M1 };

inline const char* family_name(KernelFamily f) { return f == KernelFamily::M0 ? "m0" : "m1"; }

inline constexpr int kMaxDerivative = 6;

/// Polynomials in t with
///   (x d_x)^N I_t(x) = sum_k C[N][k](t) x^k I_{t+k}(x)
///   (y d_y)^N K_t(y) = sum_k Cp[N][k](t) y^k K_{t+k}(y).
/// Each polynomial is a coefficient list, lowest degree first.
class DerivedCoefficients {
 public:
  using Poly = std::vector<double>;

  explicit DerivedCoefficients(int max_order) : max_order_(max_order) {
    require(max_order >= 0, "DerivedCoefficients: negative order");
    c_.assign(max_order + 1, std::vector<Poly>(max_order + 1, Poly{}));
    cp_ = c_;
    c_[0][0] = {1.0};
    cp_[0][0] = {1.0};
    for (int n = 0; n < max_order; ++n) {
      for (int k = 0; k <= n + 1; ++k) {
        c_[n + 1][k] = step(c_[n], k, +1.0);
        cp_[n + 1][k] = step(cp_[n], k, -1.0);
      }
    }
  }

  int max_order() const { return max_order_; }
  const Poly& c(int n, int k) const { return c_.at(n).at(k); }
  const Poly& c_prime(int n, int k) const { return cp_.at(n).at(k); }

  static double eval(const Poly& p, double t) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  /// Shared instance covering orders up to kMaxDerivative.
  static const DerivedCoefficients& standard() {
    static const DerivedCoefficients table(kMaxDerivative);
    return table;
  }

 private:
  // next[k] = (t + 2k) prev[k] + sign * prev[k-1]
  static Poly step(const std::vector<Poly>& prev, int k, double sign) {
    Poly out;
    auto add = [&](std::size_t degree, double value) {
      if (out.size() <= degree) out.resize(degree + 1, 0.0);
      out[degree] += value;
    };
    const Poly& same = prev[k];
    for (std::size_t d = 0; d < same.size(); ++d) {
      add(d + 1, same[d]);
      add(d, 2.0 * k * same[d]);
    }
    if (k > 0) {
      for (std::size_t d = 0; d < prev[k - 1].size(); ++d) add(d, sign * prev[k - 1][d]);
    }
    return out;
  }

  int max_order_;
  std::vector<std::vector<Poly>> c_;
  std::vector<std::vector<Poly>> cp_;
};

inline double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

/// Homogeneous derivatives of the resolvent at one (t,u,v):
///   (d_u + d_v)^k R_t(u,v) = d[k] * e^log_base,
/// with e^log_base = R_t(u,v). Also keeps the first-order ratios
/// x I_{t+1}(x)/I_t(x) and y K_{t+1}(y)/K_t(y).
struct ResolventJet {
  double log_base = 0.0;
  std::vector<double> d;
  double i_ratio1 = 0.0;
  double k_ratio1 = 0.0;
  double u = 0.0;
  double v = 0.0;
};

inline ResolventJet resolvent_jet(double t, double u, double v, int kmax) {
  require(t >= 0.0 && t < 2.0, "resolvent kernel: t out of range");
  require(std::isfinite(u) && std::isfinite(v), "resolvent kernel: non-finite point");
  require(kmax >= 0 && kmax <= kMaxDerivative, "resolvent kernel: derivative order out of range");
  const double lo = std::min(u, v);
  const double hi = std::max(u, v);
  const double x = std::exp(lo);
  const double y = std::exp(hi);
  const std::size_t count = static_cast<std::size_t>(std::max(kmax, 1)) + 1;
  const auto iseq = bessel::detail::i_sequence(t, x, count);
  const auto kseq = bessel::detail::k_sequence(t, y, count);
  // a[i] = x^i I_{t+i}/I_t, b[l] = y^l K_{t+l}/K_t
  std::array<double, kMaxDerivative + 2> a{};
  std::array<double, kMaxDerivative + 2> b{};
  double xp = 1.0;
  double yp = 1.0;
  for (std::size_t i = 0; i < count; ++i) {
    a[i] = xp * iseq.values[i] / iseq.values[0];
    b[i] = yp * kseq.values[i] / kseq.values[0];
    xp *= x;
    yp *= y;
  }
  const auto& table = DerivedCoefficients::standard();
  std::array<double, kMaxDerivative + 1> A{};
  std::array<double, kMaxDerivative + 1> B{};
  for (int n = 0; n <= kmax; ++n) {
    double sa = 0.0;
    double sb = 0.0;
    for (int k = 0; k <= n; ++k) {
      sa += DerivedCoefficients::eval(table.c(n, k), t) * a[k];
      sb += DerivedCoefficients::eval(table.c_prime(n, k), t) * b[k];
    }
    A[n] = sa;
    B[n] = sb;
  }
  ResolventJet jet;
  jet.log_base = iseq.log_at(0) + kseq.log_at(0);
  jet.d.resize(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    double s = 0.0;
    for (int m = 0; m <= k; ++m) s += binomial(k, m) * A[m] * B[k - m];
    jet.d[k] = s;
  }
  jet.i_ratio1 = a[1];
  jet.k_ratio1 = b[1];
  jet.u = u;
  jet.v = v;
  return jet;
}

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// S_j^n(t,u,v) from a jet holding derivatives up to order >= n (n >= 1 for M0
/// needs order n-1).
inline double kernel_from_jet(KernelFamily family, int n, const ResolventJet& jet) {
  const double u = jet.u;
  const double v = jet.v;
  if (family == KernelFamily::M1) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) s += binomial(n, k) * jet.d[k];
    if (s == 0.0) return 0.0;
    return sign_of(s) * std::exp(u + jet.log_base + std::log(std::abs(s)));
  }
  if (n == 0) {
    const double sg = sign_of(v - u);
    if (sg == 0.0) return 0.0;
    return sg * std::exp(jet.log_base) * (jet.i_ratio1 + jet.k_ratio1);
  }
  const int m = n - 1;
  double s = 0.0;
  for (int k = 0; k <= m; ++k) s += binomial(m, k) * std::ldexp(1.0, m - k) * jet.d[k];
  const double diff = std::exp(2.0 * u) - std::exp(2.0 * v);
  if (s == 0.0 || diff == 0.0) return 0.0;
  return sign_of(s) * sign_of(diff) *
         std::exp(jet.log_base + std::log(std::abs(s)) + std::log(std::abs(diff)));
}

inline int jet_order(KernelFamily family, int n) {
  return family == KernelFamily::M1 ? n : std::max(n - 1, 0);
}

/// Size of the terms that cancel inside kernel_from_jet; roundoff in the
/// kernel is a few ulps of this.
inline double kernel_term_scale(KernelFamily family, int n, const ResolventJet& jet) {
  const double r = 1.0 + std::abs(jet.i_ratio1) + std::abs(jet.k_ratio1);
  if (family == KernelFamily::M1) return std::exp(jet.u + jet.log_base) * std::pow(2.0 * r, n);
  if (n == 0) return std::exp(jet.log_base) * r;
  return std::exp(jet.log_base) * std::pow(3.0 * r, n - 1) * (std::exp(2.0 * jet.u) + std::exp(2.0 * jet.v));
}

/// I_t(e^min(u,v)) K_t(e^max(u,v)).
inline ScaledValue resolvent_kernel(double t, double u, double v) {
  require(t > 0.0 && t < 2.0, "resolvent_kernel: t must lie in (0, 2)");
  const ResolventJet jet = resolvent_jet(t, u, v, 0);
  return ScaledValue::from_log(jet.log_base);
}

/// Kernel of M_j(1,t); t in [0, 1/2].
inline double riesz_kernel_t(KernelFamily family, double t, double u, double v) {
  require(t >= 0.0 && t <= 0.5, "riesz_kernel_t: t must lie in (0, 1/2)");
  return kernel_from_jet(family, 0, resolvent_jet(t, u, v, 0));
}

/// S_j^n(t,u,v), n <= 6.
inline double homog_deriv_kernel_t(KernelFamily family, int n, double t, double u, double v) {
  require(n >= 0 && n <= kMaxDerivative, "homog_deriv_kernel_t: n must lie in [0, 6]");
  require(t >= 0.0 && t <= 0.5, "homog_deriv_kernel_t: t must lie in (0, 1/2)");
  return kernel_from_jet(family, n, resolvent_jet(t, u, v, jet_order(family, n)));
}

/// Quadrature report for an integrated kernel.
struct IntegratedValue {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
};

/// S_j^n(u,v) by adaptive Gauss-Kronrod in t. The tolerance is relative to the
/// L1 size of the integrand, so tiny kernels keep their relative accuracy.
inline IntegratedValue integrated_kernel_report(KernelFamily family, int n, double u, double v,
                                                double tol) {
  require(n >= 0 && n <= kMaxDerivative, "integrated_kernel: n must lie in [0, 6]");
  require(tol >= 1e-12 && tol < 1e-2, "integrated_kernel: tol must lie in (1e-12, 1e-2)");
  if (family == KernelFamily::M0 && u == v) return {};
  const int order = jet_order(family, n);
  auto f = [&](double t) { return kernel_from_jet(family, n, resolvent_jet(t, u, v, order)); };
  const auto& probe = quad::gauss_legendre(8);
  double l1 = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < probe.nodes.size(); ++i) {
    const auto jet = resolvent_jet(0.25 * (probe.nodes[i] + 1.0), u, v, order);
    l1 += 0.25 * probe.weights[i] * std::abs(kernel_from_jet(family, n, jet));
    scale += 0.25 * probe.weights[i] * kernel_term_scale(family, n, jet);
  }
  if (l1 == 0.0) return {0.0, 0.0, probe.nodes.size()};
  // Near the diagonal at large u the kernel is a difference of O(e^u) terms,
  // so the attainable accuracy is bounded below by roundoff in those terms.
  const double noise = 1e-12 * scale;
  const auto est = quad::adaptive(f, 0.0, 0.5, std::max(1e-2 * tol * l1, noise), tol);
  return {est.value, est.abs_error, est.evaluations + probe.nodes.size()};
}

inline double integrated_kernel(KernelFamily family, int n, double u, double v, double tol = 1e-8) {
  return integrated_kernel_report(family, n, u, v, tol).value;
}

/// Kernel of (xi d_xi)^n M_j(xi) at (u,v).
inline double kernel_at_xi(KernelFamily family, int n, double xi, double u, double v,
                           double tol = 1e-8) {
  require(xi > 0.0 && std::isfinite(xi), "kernel_at_xi: xi must be positive");
  const double s = std::log(xi);
  return integrated_kernel(family, n, u + s, v + s, tol);
}

// ---------------------------------------------------------------------------
// K1/K2 split of S_0^0.

namespace detail {

inline double glue(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
inline double glue_prime(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

// phi(r): 1 on [-1,1], 0 outside [-2,2]; even. Returns {phi, phi'}.
inline std::pair<double, double> bump(double r) {
  const double a = std::abs(r);
  if (a <= 1.0) return {1.0, 0.0};
  if (a >= 2.0) return {0.0, 0.0};
  const double rho = 2.0 - a;
  const double f = glue(rho);
  const double g = glue(1.0 - rho);
  const double den = f + g;
  const double value = f / den;
  const double dvalue_drho = (glue_prime(rho) * g + f * glue_prime(1.0 - rho)) / (den * den);
  return {value, -sign_of(r) * dvalue_drho};
}

}  // namespace detail

/// Smooth cutoff chi(s) = phi(log s / log 2); support [1/4, 4], 1 on [1/2, 2].
inline double cutoff(double s) {
  if (!(s > 0.0)) return 0.0;
  return detail::bump(std::log(s) / std::numbers::ln2).first;
}

inline double cutoff_prime(double s) {
  if (!(s > 0.0)) return 0.0;
  return detail::bump(std::log(s) / std::numbers::ln2).second / (s * std::numbers::ln2);
}

struct SplitKernel {
  double k1 = 0.0;
  double k2 = 0.0;
};

/// Pieces of S_0^0 and the partials of its first piece, all at one (u,v).
struct SplitParts {
  double s01 = 0.0;     // sign(v-u) int e^max I_t(e^min) K_{t+1}(e^max) dt
  double s02 = 0.0;     // sign(v-u) int e^min I_{t+1}(e^min) K_t(e^max) dt
  double s01_du = 0.0;  // d_u S_0^{0,1}
  double s01_dv = 0.0;  // d_v S_0^{0,1}
};

/// Fixed composite Gauss-Legendre in t, so the split pieces are smooth
/// functions of (u,v) and finite differences of them are meaningful.
inline SplitParts split_parts(double u, double v) {
  require(u != v, "split_k1_k2: u must differ from v");
  constexpr std::size_t kPanels = 8;
  const auto& rule = quad::gauss_legendre(12);
  const double lo = std::min(u, v);
  const double hi = std::max(u, v);
  const double x = std::exp(lo);
  const double y = std::exp(hi);
  const double sg = sign_of(v - u);
  // F(a,b) = int e^b I_t(e^a) K_{t+1}(e^b), with its partials in a and b.
  double F = 0.0, G = 0.0, Fa = 0.0, Fb = 0.0;
  const double width = 0.5 / kPanels;
  for (std::size_t p = 0; p < kPanels; ++p) {
    const double left = width * static_cast<double>(p);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = left + 0.5 * width * (rule.nodes[i] + 1.0);
      const double w = 0.5 * width * rule.weights[i];
      const auto iseq = bessel::detail::i_sequence(t, x, 2);
      const auto kseq = bessel::detail::k_sequence(t, y, 2);
      const double base = std::exp(iseq.log_scale + kseq.log_scale);
      const double i0 = iseq.values[0], i1 = iseq.values[1];
      const double k0 = kseq.values[0], k1 = kseq.values[1];
      F += w * base * y * i0 * k1;
      G += w * base * x * i1 * k0;
      Fa += w * base * (x * y * i1 * k1 + t * y * i0 * k1);
      Fb += w * base * (-y * y * i0 * k0 - t * y * i0 * k1);
    }
  }
  SplitParts out;
  out.s01 = sg * F;
  out.s02 = sg * G;
  if (u < v) {
    out.s01_du = Fa;
    out.s01_dv = Fb;
  } else {
    // S(u,v) = -F(v,u)
    out.s01_du = -Fb;
    out.s01_dv = -Fa;
  }
  return out;
}

inline bool in_negative_quadrant(double u, double v) { return u < 0.0 && v < 0.0; }

/// K1 = S_0^{0,1} chi(u/v) 1{u<0,v<0}, K2 = S_0^0 - K1.
inline SplitKernel split_k1_k2(double u, double v) {
  const SplitParts p = split_parts(u, v);
  const double total = p.s01 + p.s02;
  const double k1 = in_negative_quadrant(u, v) ? p.s01 * cutoff(u / v) : 0.0;
  return {k1, total - k1};
}

struct Gradient {
  double du = 0.0;
  double dv = 0.0;
};

/// Analytic partials of K1.
inline Gradient k1_gradient(double u, double v) {
  if (!in_negative_quadrant(u, v)) return {};
  const SplitParts p = split_parts(u, v);
  const double s = u / v;
  const double chi = cutoff(s);
  const double dchi = cutoff_prime(s);
  return {chi * p.s01_du + dchi / v * p.s01, chi * p.s01_dv - dchi * u / (v * v) * p.s01};
}

}  // namespace rkl::kernels
