#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rkl/bessel.hpp"

namespace {

using rkl::bessel::BesselOrder;
namespace bs = rkl::bessel;

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

struct IkCase {
  double nu, x, i, k;
};

// Reference values from 30-digit arbitrary-precision evaluation.
const std::vector<IkCase> kIk = {
    {0.0, 1e-3, 1.0000002500000156, 7.0236888005623813},
    {0.0, 1.0, 1.2660658777520083, 0.42102443824070833},
    {0.25, 0.1, 0.52274467871774868, 2.6851568718760592},
    {0.49, 5.0, 26.507228283753276, 0.0037731914371396856},
    {1.0, 1.0, 0.56515910399248503, 0.60190723019723457},
    {1.3, 20.0, 41710324.216629328, 5.9829197588309228e-10},
    {2.5, 50.0, 2.7531576300354022e20, 3.6278396452990476e-23},
    {3.5, 0.01, 7.5989427952851827e-10, 187995240.64178522},
    {4.0, 300.0, 4.3578761465097204e128, 3.8241583606652807e-132},
    {0.5, 1.0, 0.93767488824548765, 0.46106850444789456},
    {1.5, 3.0, 3.0994834567256358, 0.04803464684235279},
};

TEST(BesselIK, MatchesReferenceValues) {
  for (const auto& c : kIk) {
    EXPECT_LT(rel(bs::bessel_i(BesselOrder(c.nu), c.x), c.i), 1e-12) << "I nu=" << c.nu << " x=" << c.x;
    EXPECT_LT(rel(bs::bessel_k(BesselOrder(c.nu), c.x), c.k), 1e-12) << "K nu=" << c.nu << " x=" << c.x;
  }
}

TEST(BesselIK, ErrorEstimateCoversActualError) {
  for (const auto& c : kIk) {
    const auto i = bs::bessel_i_scaled(BesselOrder(c.nu), c.x);
    const auto k = bs::bessel_k_scaled(BesselOrder(c.nu), c.x);
    EXPECT_LE(rel(i.to_double(), c.i), std::max(i.rel_err_estimate, 4e-16));
    EXPECT_LE(rel(k.to_double(), c.k), std::max(k.rel_err_estimate, 4e-16));
    EXPECT_LT(i.rel_err_estimate, 1e-10);
    EXPECT_LT(k.rel_err_estimate, 1e-10);
  }
}

TEST(BesselIK, ScaledValuesSurviveUnderflow) {
  const auto k = bs::bessel_k_scaled(BesselOrder(0.3), 20.0);
  EXPECT_GT(k.value.mantissa(), 0.0);
  EXPECT_NEAR(k.value.log_abs(), -20.0 + 0.5 * std::log(std::numbers::pi / 40.0), 0.01);

  const auto p = bs::product_ik(BesselOrder(0.2), 1.0, 40.0);
  EXPECT_GT(p.sign(), 0.0);
  EXPECT_NEAR(p.exponent_offset(), -39.0, 3.0);

  const auto far = bs::product_ik(BesselOrder(0.25), std::exp(-2.0), std::exp(8.0));
  EXPECT_GT(far.sign(), 0.0);
  EXPECT_NEAR(far.log_abs(), -std::exp(8.0), 10.0);
}

TEST(BesselIK, RejectsOrdersOutsidePublicRange) {
  EXPECT_THROW(BesselOrder(-0.1), rkl::DomainError);
  EXPECT_THROW(BesselOrder(4.5), rkl::DomainError);
  EXPECT_THROW(bs::bessel_i(BesselOrder(1.0), -1.0), rkl::DomainError);
}

TEST(BesselIK, HalfIntegerClosedForms) {
  for (double x = 1e-3; x <= 30.0; x *= 1.37) {
    const long double X = x;
    const long double pre = std::sqrt(2.0L / (std::numbers::pi_v<long double> * X));
    const long double i12 = pre * std::sinh(X);
    const long double i32 = pre * (std::cosh(X) - std::sinh(X) / X);
    const long double k12 = std::sqrt(std::numbers::pi_v<long double> / (2.0L * X)) * std::exp(-X);
    const long double k32 = k12 * (1.0L + 1.0L / X);
    EXPECT_LT(rel(bs::bessel_i(BesselOrder(0.5), x), static_cast<double>(i12)), 1e-10) << x;
    EXPECT_LT(rel(bs::bessel_i(BesselOrder(1.5), x), static_cast<double>(i32)), 1e-10) << x;
    EXPECT_LT(rel(bs::bessel_k(BesselOrder(0.5), x), static_cast<double>(k12)), 1e-10) << x;
    EXPECT_LT(rel(bs::bessel_k(BesselOrder(1.5), x), static_cast<double>(k32)), 1e-10) << x;
  }
}

TEST(BesselIK, WronskianExamples) {
  EXPECT_LE(bs::wronskian_defect(BesselOrder(0.0), 1.0), 1e-9);
  EXPECT_LE(bs::wronskian_defect(BesselOrder(0.5), 2.0), 1e-9);
  EXPECT_LE(bs::wronskian_defect(BesselOrder(3.5), 10.0), 1e-9);
}

TEST(BesselIKProperty, WronskianOnGrid) {
  double worst = 0.0;
  for (double nu = 0.0; nu <= 4.0; nu += 0.13) {
    for (double x = 1e-3; x <= 1e3; x *= 1.7) worst = std::max(worst, bs::wronskian_defect(BesselOrder(nu), x));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(BesselIKProperty, DerivativeRecurrences) {
  const double h = 1e-5;
  for (double nu = 0.0; nu <= 3.0; nu += 0.35) {
    for (double x = 0.05; x <= 40.0; x *= 1.9) {
      const BesselOrder o(nu), o1(nu + 1.0);
      const double di = x * (bs::bessel_i(o, x + h) - bs::bessel_i(o, x - h)) / (2 * h);
      const double dk = x * (bs::bessel_k(o, x + h) - bs::bessel_k(o, x - h)) / (2 * h);
      EXPECT_LT(rel(di, x * bs::bessel_i(o1, x) + nu * bs::bessel_i(o, x)), 1e-5) << nu << " " << x;
      EXPECT_LT(rel(dk, -x * bs::bessel_k(o1, x) + nu * bs::bessel_k(o, x)), 1e-5) << nu << " " << x;
    }
  }
}

TEST(BesselIKProperty, ThreeTermRecurrence) {
  for (double nu = 1.0; nu <= 3.0; nu += 0.25) {
    for (double x = 0.01; x <= 100.0; x *= 2.3) {
      const double im = bs::bessel_i(BesselOrder(nu - 1), x);
      const double ip = bs::bessel_i(BesselOrder(nu + 1), x);
      const double km = bs::bessel_k(BesselOrder(nu - 1), x);
      const double kp = bs::bessel_k(BesselOrder(nu + 1), x);
      EXPECT_LT(rel(im - ip, 2 * nu / x * bs::bessel_i(BesselOrder(nu), x)), 1e-9) << nu << " " << x;
      EXPECT_LT(rel(kp - km, 2 * nu / x * bs::bessel_k(BesselOrder(nu), x)), 1e-9) << nu << " " << x;
    }
  }
}

TEST(BesselIKProperty, Monotonicity) {
  for (double nu = 0.0; nu < 4.0; nu += 0.25) {
    for (double x = 0.01; x < 200.0; x *= 1.5) {
      const BesselOrder o(nu), on(nu + 0.25);
      EXPECT_LT(bs::bessel_i(o, x), bs::bessel_i(o, x * 1.5));
      EXPECT_GT(bs::bessel_k(o, x), bs::bessel_k(o, x * 1.5));
      EXPECT_GE(bs::bessel_i(o, x), bs::bessel_i(on, x));
      EXPECT_LE(bs::bessel_k(o, x), bs::bessel_k(on, x));
    }
  }
}

TEST(BesselIKProperty, SmallArgumentBounds) {
  for (double t = 0.05; t <= 2.0; t += 0.05) {
    double lo = INFINITY, hi = 0.0;
    for (double x = 1e-4; x < 1.0; x *= 1.3) {
      const double q = bs::bessel_i(BesselOrder(t), x) / std::pow(x, t);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    EXPECT_LE(hi / lo, 10.0) << t;
  }
  for (double t = 0.3; t <= 2.0; t += 0.1) {
    for (double x = 1e-4; x < 1.0; x *= 1.3) {
      const double q = bs::bessel_k(BesselOrder(t), x) * std::pow(x, t);
      EXPECT_GT(q, 0.1) << t << " " << x;
      EXPECT_LT(q, 3.0) << t << " " << x;
    }
  }
  for (double t = 0.02; t < 0.5; t += 0.04) {
    for (double x = 1e-6; x < 1.0; x *= 1.3) {
      EXPECT_LT(bs::bessel_k(BesselOrder(t), x) * std::pow(x, 1.0 - t), 3.0) << t << " " << x;
    }
  }
}

TEST(BesselJ, MatchesReferenceValues) {
  struct Case {
    double nu, x, j;
  };
  const std::vector<Case> cases = {
      {0.0, 1.0, 0.76519768655796655},    {1.0, 1.0, 0.44005058574493352},
      {0.5, 10.0, -0.13726373575505048},  {2.0, 25.0, -0.10629480324238131},
      {3.5, 100.0, 0.071123408762509375}, {0.25, 0.01, 0.29336799414397816},
      {4.0, 19.5, 0.17599502725846424},   {1.3, 21.0, 0.13948396318235353},
  };
  for (const auto& c : cases) {
    EXPECT_NEAR(bs::bessel_j_value(BesselOrder(c.nu), c.x), c.j, 1e-12) << c.nu << " " << c.x;
  }
  EXPECT_NEAR(bs::bessel_j_value(BesselOrder(0.0), 2.404825557695773), 0.0, 1e-14);
  EXPECT_NEAR(bs::bessel_j_value(BesselOrder(0.5), std::numbers::pi), 0.0, 1e-10);
  EXPECT_NEAR(bs::bessel_j_value(BesselOrder(0.0), 1e-8), 1.0, 1e-15);
}

TEST(BesselJProperty, BoundedAndLandau) {
  double landau = 0.0;
  for (double nu = 0.0; nu <= 4.0; nu += 0.25) {
    for (double x = 1e-2; x <= 1e4; x *= 1.05) {
      const double j = bs::bessel_j_value(BesselOrder(nu), x);
      EXPECT_LE(std::abs(j), 1.0);
      landau = std::max(landau, std::abs(j) * std::cbrt(x));
    }
  }
  EXPECT_LE(landau, 1.0);
}

TEST(BesselJProperty, DerivativeRecurrence) {
  const double h = 1e-5;
  for (double nu = 1.0; nu <= 4.0; nu += 0.5) {
    for (double x = 0.1; x <= 200.0; x *= 1.8) {
      const BesselOrder o(nu);
      const double d = (bs::bessel_j_value(o, x + h) - bs::bessel_j_value(o, x - h)) / (2 * h);
      const double r = bs::bessel_j_value(BesselOrder(nu - 1), x) - nu / x * bs::bessel_j_value(o, x);
      EXPECT_NEAR(d, r, 1e-6) << nu << " " << x;
    }
  }
}

TEST(ProductIK, ReferenceValuesAndSymmetricCase) {
  EXPECT_LT(rel(bs::product_ik(BesselOrder(0.5), 1.0, 1.0).to_double(), 0.43233235838169365), 1e-12);
  EXPECT_LT(rel(bs::product_ik(BesselOrder(0.3), std::exp(-2.0), std::exp(1.5)).to_double(),
                0.0032851182111300813),
            1e-12);
  EXPECT_LT(rel(bs::product_ik(BesselOrder(0.1), std::exp(-8.0), std::exp(-3.0)).to_double(),
                1.4063051507142527),
            1e-12);
  for (double t : {0.0, 0.2, 1.7}) {
    const double x = 2.5;
    EXPECT_LT(rel(bs::product_ik(BesselOrder(t), x, x).to_double(),
                  bs::bessel_i(BesselOrder(t), x) * bs::bessel_k(BesselOrder(t), x)),
              1e-13);
    EXPECT_LE(bs::wronskian_defect(BesselOrder(t), x), 1e-9);
  }
}

TEST(ProductIKNicholson, AgreesWithDirectRoute) {
  EXPECT_LT(rel(bs::product_ik_nicholson(0.25, 1.0, 3.0).to_double(),
                bs::product_ik(BesselOrder(0.25), 1.0, 3.0).to_double()),
            1e-6);
  const double closed = std::sinh(0.5) / 0.5 * std::exp(-2.0) / 2.0;
  EXPECT_LT(rel(bs::product_ik_nicholson(0.5, 0.5, 2.0).to_double(), closed), 1e-6);
  for (double t : {0.05, 0.3, 0.45, 0.8}) {
    for (auto [x, y] : {std::pair{0.1, 2.0}, {1.0, 4.0}, {3.0, 10.0}}) {
      EXPECT_LT(rel(bs::product_ik_nicholson(t, x, y).to_double(), bs::product_ik(BesselOrder(t), x, y).to_double()),
                1e-6)
          << t << " " << x << " " << y;
    }
  }
}

TEST(ProductIKNicholson, NearDiagonalMayRefuse) {
  try {
    const double got = bs::product_ik_nicholson(0.25, 1.0, 1.01).to_double();
    EXPECT_LT(rel(got, bs::product_ik(BesselOrder(0.25), 1.0, 1.01).to_double()), 1e-6);
  } catch (const rkl::ConvergenceError&) {
    SUCCEED();
  }
}

}  // namespace
