#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rkl/bessel.hpp"
#include "rkl/kernels.hpp"

namespace {

using rkl::bessel::BesselOrder;
using rkl::kernels::KernelFamily;
namespace bs = rkl::bessel;
namespace kn = rkl::kernels;

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

double I(double nu, double x) { return bs::bessel_i(BesselOrder(nu), x); }
double K(double nu, double x) { return bs::bessel_k(BesselOrder(nu), x); }

// Orders above the public range, for the coefficient tables.
double I_any(double nu, double x) { return std::exp(bs::detail::i_log(nu, x).log_abs); }
double K_any(double nu, double x) { return std::exp(bs::detail::k_log(nu, x).log_abs); }

TEST(ResolventKernel, ClosedFormAndSymmetry) {
  EXPECT_LT(rel(kn::resolvent_kernel(0.5, 0.0, 0.0).to_double(), 0.43233235838169365), 1e-12);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> t(0.0, 0.5), u(-8.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double tt = t(rng), a = u(rng), b = u(rng);
    const auto p = kn::resolvent_kernel(tt, a, b);
    const auto q = kn::resolvent_kernel(tt, b, a);
    EXPECT_EQ(p.mantissa(), q.mantissa());
    EXPECT_EQ(p.exponent_offset(), q.exponent_offset());
  }
  const auto far = kn::resolvent_kernel(0.25, -2.0, 8.0);
  EXPECT_GT(far.sign(), 0.0);
  EXPECT_NEAR(far.exponent_offset(), -std::exp(8.0), 10.0);
}

TEST(RieszKernel, PointValues) {
  for (double t : {0.01, 0.3, 0.49}) {
    for (double u : {-5.0, 0.0, 2.0}) EXPECT_EQ(kn::riesz_kernel_t(KernelFamily::M0, t, u, u), 0.0);
  }
  EXPECT_LT(rel(kn::riesz_kernel_t(KernelFamily::M1, 0.5, 0.0, 0.0), 0.43233235838169365), 1e-12);
  EXPECT_LT(rel(kn::riesz_kernel_t(KernelFamily::M0, 0.5, 0.0, 1.0), 0.189616945711275), 1e-12);
  // Half-integer closed form of the same value.
  const double e = std::exp(1.0);
  const double closed = I(1.5, 1.0) * K(0.5, e) + e * I(0.5, 1.0) * K(1.5, e);
  EXPECT_LT(rel(kn::riesz_kernel_t(KernelFamily::M0, 0.5, 0.0, 1.0), closed), 1e-12);
}

TEST(RieszKernelProperty, ExactAntisymmetry) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> t(0.0, 0.5), u(-8.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double tt = t(rng), a = u(rng), b = u(rng);
    EXPECT_EQ(kn::riesz_kernel_t(KernelFamily::M0, tt, a, b), -kn::riesz_kernel_t(KernelFamily::M0, tt, b, a));
  }
}

TEST(RieszKernelProperty, FirstDerivativeIdentity) {
  const double h = 1e-5;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> t(0.01, 0.49), u(-3.0, 2.0), gap(0.1, 2.0);
  for (int i = 0; i < 40; ++i) {
    const double tt = t(rng), x = std::exp(u(rng)), y = x * std::exp(gap(rng));
    const double fd = x * (I(tt, x + h * x) - I(tt, x - h * x)) / (2 * h * x) * K(tt, y) -
                      y * I(tt, x) * (K(tt, y + h * y) - K(tt, y - h * y)) / (2 * h * y);
    const double exact = x * I(tt + 1, x) * K(tt, y) + y * I(tt, x) * K(tt + 1, y);
    EXPECT_LT(rel(fd, exact), 1e-5) << tt << " " << x << " " << y;
  }
}

TEST(RieszKernelProperty, SecondDerivativeIdentity) {
  // f(a,b) = I_t(e^a) K_t(e^b); (d_a + d_b)(d_a - d_b) f = f_aa - f_bb.
  const double h = 1e-3;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> t(0.01, 0.49), u(-3.0, 2.0), gap(0.1, 2.0);
  for (int i = 0; i < 40; ++i) {
    const double tt = t(rng), a = u(rng), b = a + gap(rng);
    auto f = [&](double p, double q) { return I(tt, std::exp(p)) * K(tt, std::exp(q)); };
    const double faa = (f(a + h, b) - 2 * f(a, b) + f(a - h, b)) / (h * h);
    const double fbb = (f(a, b + h) - 2 * f(a, b) + f(a, b - h)) / (h * h);
    const double exact = (std::exp(2 * a) - std::exp(2 * b)) * f(a, b);
    EXPECT_LT(rel(faa - fbb, exact), 1e-4) << tt << " " << a << " " << b;
  }
}

// Independent route for (x d_x)^N I_t and (y d_y)^N K_t: write the result as
// A(x) f + B(x) (x f') with polynomials A, B and reduce (x d_x)^2 f by the
// modified Bessel equation (x d_x)^2 f = (x^2 + t^2) f.
struct OdeForm {
  std::vector<double> a, b;  // coefficients in x, lowest degree first
};

OdeForm theta(const OdeForm& in, double t) {
  const std::size_t n = std::max(in.a.size(), in.b.size()) + 2;
  OdeForm out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t k = 0; k < in.a.size(); ++k) {
    out.a[k] += k * in.a[k];
    out.b[k] += in.a[k];
  }
  for (std::size_t k = 0; k < in.b.size(); ++k) {
    out.b[k] += k * in.b[k];
    out.a[k] += t * t * in.b[k];
    out.a[k + 2] += in.b[k];
  }
  return out;
}

double poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

TEST(DerivedCoefficientsProperty, MatchBesselEquationRoute) {
  const auto& table = kn::DerivedCoefficients::standard();
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> t(0.0, 0.5), lx(-2.0, 2.0);
  for (int sample = 0; sample < 20; ++sample) {
    const double tt = t(rng), x = std::exp(lx(rng));
    OdeForm form{{1.0}, {}};
    for (int n = 1; n <= kn::kMaxDerivative; ++n) {
      form = theta(form, tt);
      const double xi_prime = x * I(tt + 1, x) + tt * I(tt, x);
      const double xk_prime = -x * K(tt + 1, x) + tt * K(tt, x);
      const double ode_i = poly(form.a, x) * I(tt, x) + poly(form.b, x) * xi_prime;
      const double ode_k = poly(form.a, x) * K(tt, x) + poly(form.b, x) * xk_prime;
      double rec_i = 0.0, rec_k = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double xk = std::pow(x, k);
        rec_i += kn::DerivedCoefficients::eval(table.c(n, k), tt) * xk * I_any(tt + k, x);
        rec_k += kn::DerivedCoefficients::eval(table.c_prime(n, k), tt) * xk * K_any(tt + k, x);
      }
      EXPECT_LT(rel(rec_i, ode_i), 1e-10) << "I n=" << n << " t=" << tt << " x=" << x;
      EXPECT_LT(rel(rec_k, ode_k), 1e-8) << "K n=" << n << " t=" << tt << " x=" << x;
    }
  }
}

TEST(HomogDerivKernel, BaseCaseAndDiagonal) {
  for (auto fam : {KernelFamily::M0, KernelFamily::M1}) {
    for (auto [u, v] : {std::pair{0.2, 0.7}, {-3.0, 1.0}, {2.0, -1.0}}) {
      EXPECT_EQ(kn::homog_deriv_kernel_t(fam, 0, 0.3, u, v), kn::riesz_kernel_t(fam, 0.3, u, v));
    }
  }
  for (double u : {-4.0, 0.0, 1.5}) EXPECT_EQ(kn::homog_deriv_kernel_t(KernelFamily::M0, 1, 0.3, u, u), 0.0);
}

TEST(HomogDerivKernelProperty, MatchesDiagonalFiniteDifferences) {
  const double h = 1e-4;
  for (auto fam : {KernelFamily::M0, KernelFamily::M1}) {
    for (auto [u, v] : {std::pair{0.2, 0.7}, {-3.0, -1.0}, {1.0, -0.5}, {-6.0, 0.5}}) {
      for (double t : {0.05, 0.3, 0.49}) {
        auto f = [&](int n, double s) { return kn::homog_deriv_kernel_t(fam, n, t, u + s, v + s); };
        for (int n = 0; n < 4; ++n) {
          const double fd = (f(n, -2 * h) - 8 * f(n, -h) + 8 * f(n, h) - f(n, 2 * h)) / (12 * h);
          EXPECT_LT(rel(fd, f(n + 1, 0.0)), 1e-5)
              << kn::family_name(fam) << " n=" << n + 1 << " t=" << t << " (" << u << "," << v << ")";
        }
      }
    }
  }
}

struct IntegratedCase {
  double u, v;
  double m1[3];
  double m0[3];
};

// Reference values from 30-digit arbitrary-precision quadrature.
const std::vector<IntegratedCase> kIntegrated = {
    {0.0, 1.0, {0.0272490418852183, -0.043060580317921, 0.0125084738942059},
     {0.103775121711334, -0.174095657246771, 0.101020806056936}},
    {-1.0, 0.5, {0.0247761070343422, -0.0206841241015171, -0.0211337509369496},
     {0.160951488107547, -0.173957424379667, -0.0287305350519003}},
    {-3.0, -1.0, {0.0150252988053887, 0.00623959892143351, -0.00337292751060122},
     {0.290583513722279, -0.040094931130984, -0.0567452681578999}},
};

TEST(IntegratedKernel, MatchesReferenceValues) {
  for (const auto& c : kIntegrated) {
    for (int n = 0; n < 3; ++n) {
      EXPECT_LT(rel(kn::integrated_kernel(KernelFamily::M1, n, c.u, c.v), c.m1[n]), 1e-8)
          << "m1 n=" << n << " (" << c.u << "," << c.v << ")";
      EXPECT_LT(rel(kn::integrated_kernel(KernelFamily::M0, n, c.u, c.v), c.m0[n]), 1e-8)
          << "m0 n=" << n << " (" << c.u << "," << c.v << ")";
      EXPECT_LT(rel(kn::integrated_kernel(KernelFamily::M0, n, c.v, c.u), -c.m0[n]), 1e-8)
          << "m0 swapped n=" << n;
    }
  }
}

TEST(IntegratedKernel, DiagonalAndIndependentQuadrature) {
  for (int n = 0; n < 3; ++n) EXPECT_EQ(kn::integrated_kernel(KernelFamily::M0, n, 0.7, 0.7), 0.0);
  // Composite 20-point Gauss-Legendre on 64 panels of int_0^{1/2} I_t(1) K_t(1) dt.
  const auto& rule = rkl::quad::gauss_legendre(20);
  long double acc = 0.0L;
  const int panels = 64;
  for (int p = 0; p < panels; ++p) {
    const double a = 0.5 * p / panels, w = 0.5 / panels;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = a + 0.5 * w * (rule.nodes[i] + 1.0);
      acc += 0.5L * w * rule.weights[i] * I(t, 1.0) * K(t, 1.0);
    }
  }
  EXPECT_LT(rel(kn::integrated_kernel(KernelFamily::M1, 0, 0.0, 0.0, 1e-8), static_cast<double>(acc)), 1e-8);
  const auto r = kn::integrated_kernel_report(KernelFamily::M0, 0, -8.0, -2.0, 1e-8);
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_LE(std::abs(r.value), 1.0);
  EXPECT_LE(r.abs_error, 1e-8 * std::abs(r.value) + 1e-15);
}

TEST(IntegratedKernel, RejectsBadArguments) {
  EXPECT_THROW(kn::integrated_kernel(KernelFamily::M1, 7, 0.0, 1.0), rkl::DomainError);
  EXPECT_THROW(kn::integrated_kernel(KernelFamily::M1, 0, 0.0, 1.0, 0.1), rkl::DomainError);
  EXPECT_THROW(kn::kernel_at_xi(KernelFamily::M1, 0, -1.0, 0.0, 1.0), rkl::DomainError);
}

TEST(KernelAtXi, IdentityAndTranslation) {
  EXPECT_EQ(kn::kernel_at_xi(KernelFamily::M1, 0, 1.0, 0.3, -1.2), kn::integrated_kernel(KernelFamily::M1, 0, 0.3, -1.2));
  EXPECT_EQ(kn::kernel_at_xi(KernelFamily::M1, 0, std::exp(1.0), 0.0, 0.0),
            kn::integrated_kernel(KernelFamily::M1, 0, 1.0, 1.0));
}

TEST(KernelAtXiProperty, TranslationCovarianceIsExact) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-6.0, 3.0), lx(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double a = u(rng), b = u(rng), s = lx(rng), xi = std::exp(s);
    for (auto fam : {KernelFamily::M0, KernelFamily::M1}) {
      const int n = i % 3;
      EXPECT_EQ(kn::kernel_at_xi(fam, n, xi, a, b), kn::kernel_at_xi(fam, n, 1.0, a + std::log(xi), b + std::log(xi)));
    }
  }
}

TEST(KernelAtXiProperty, XiDerivativeByFiniteDifferences) {
  // (xi d_xi)^2 at xi = 0.1 by a 5-point stencil in log xi.
  const double s0 = std::log(0.1), h = 0.02;
  auto f = [&](double s) { return kn::kernel_at_xi(KernelFamily::M0, 0, std::exp(s), 3.0, 5.0, 1e-11); };
  const double fd = (-f(s0 - 2 * h) + 16 * f(s0 - h) - 30 * f(s0) + 16 * f(s0 + h) - f(s0 + 2 * h)) / (12 * h * h);
  EXPECT_LT(rel(fd, kn::kernel_at_xi(KernelFamily::M0, 2, 0.1, 3.0, 5.0, 1e-11)), 1e-4);
}

TEST(SplitKernel, CutoffSupport) {
  const auto a = kn::split_k1_k2(1.0, 2.0);
  EXPECT_EQ(a.k1, 0.0);
  EXPECT_LT(rel(a.k2, kn::integrated_kernel(KernelFamily::M0, 0, 1.0, 2.0)), 1e-9);

  const auto b = kn::split_k1_k2(-3.0, -3.1);
  const auto parts = kn::split_parts(-3.0, -3.1);
  EXPECT_EQ(kn::cutoff(-3.0 / -3.1), 1.0);
  EXPECT_EQ(b.k1, parts.s01);
  EXPECT_NEAR(b.k2, parts.s02, 1e-12 * std::abs(parts.s01));

  const auto c = kn::split_k1_k2(-1.0, -20.0);
  EXPECT_EQ(c.k1, 0.0);
  EXPECT_LT(rel(c.k2, kn::integrated_kernel(KernelFamily::M0, 0, -1.0, -20.0)), 1e-9);
  EXPECT_THROW(kn::split_k1_k2(0.5, 0.5), rkl::DomainError);
}

TEST(SplitKernelProperty, PiecesSumToKernel) {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(-10.0, 4.0);
  for (int i = 0; i < 30; ++i) {
    const double a = u(rng), b = u(rng);
    const auto s = kn::split_k1_k2(a, b);
    EXPECT_LT(rel(s.k1 + s.k2, kn::integrated_kernel(KernelFamily::M0, 0, a, b)), 1e-9) << a << " " << b;
  }
}

TEST(SplitKernelProperty, GradientMatchesFiniteDifferences) {
  const double h = 1e-5;
  for (auto [u, v] : {std::pair{-3.0, -5.0}, {-2.0, -1.2}, {-8.0, -4.5}, {-0.5, -1.7}}) {
    const auto g = kn::k1_gradient(u, v);
    const double du = (kn::split_k1_k2(u + h, v).k1 - kn::split_k1_k2(u - h, v).k1) / (2 * h);
    const double dv = (kn::split_k1_k2(u, v + h).k1 - kn::split_k1_k2(u, v - h).k1) / (2 * h);
    const double scale = std::abs(g.du) + std::abs(g.dv);
    EXPECT_NEAR(g.du, du, 1e-6 * scale + 1e-12) << u << " " << v;
    EXPECT_NEAR(g.dv, dv, 1e-6 * scale + 1e-12) << u << " " << v;
  }
  const auto outside = kn::k1_gradient(1.0, -1.0);
  EXPECT_EQ(outside.du, 0.0);
  EXPECT_EQ(outside.dv, 0.0);
}

}  // namespace
