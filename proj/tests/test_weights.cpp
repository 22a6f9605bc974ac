#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "rkl/weights.hpp"

namespace {

namespace wt = rkl::weights;
using rkl::schrodinger::Grid;

const Grid kGrid(-6.0, 6.0, 385);

TEST(Weights, ConstantIsExactlyOne) {
  for (double level : {1.0, 0.25, 7.0}) {
    wt::WeightProfile p;
    p.level = level;
    EXPECT_EQ(wt::make_weight(p, kGrid).a2_estimate(), 1.0);
  }
}

TEST(Weights, SquareRootPowerReachesUnitIntervalValue) {
  const auto w = wt::make_weight("power:a=0.5:center=0", kGrid);
  EXPECT_GE(w.a2_estimate(), 4.0 / 3.0 * (1.0 - 1e-3));
  EXPECT_TRUE(std::isfinite(w.a2_estimate()));
}

TEST(Weights, ExactPowerIntegral) {
  // int_0^1 u^a du = 1/(1+a); the cell integrals are analytic.
  wt::WeightProfile p;
  p.kind = wt::WeightKind::power;
  p.exponent = -0.7;
  EXPECT_NEAR(p.integral(0.0, 1.0, +1), 1.0 / 0.3, 1e-13);
  EXPECT_NEAR(p.integral(0.0, 1.0, -1), 1.0 / 1.7, 1e-13);
  EXPECT_NEAR(p.integral(-1.0, 1.0, +1), 2.0 / 0.3, 1e-13);
}

TEST(Weights, ClampedExponentialGrowsWithClamp) {
  double previous = 1.0;
  for (double clamp : {0.5, 1.0, 2.0, 4.0}) {
    wt::WeightProfile p;
    p.kind = wt::WeightKind::clamped_exponential;
    p.clamp = clamp;
    const double a2 = wt::make_weight(p, kGrid).a2_estimate();
    EXPECT_TRUE(std::isfinite(a2));
    EXPECT_GT(a2, previous) << clamp;
    previous = a2;
  }
}

TEST(Weights, TranslationByZeroIsIdentity) {
  const auto w = wt::make_weight("power:a=-0.3:center=1", kGrid);
  const auto t = wt::translate_weight(w, 0.0);
  EXPECT_EQ(t.id, w.id);
  EXPECT_EQ(t.samples, w.samples);
  EXPECT_EQ(t.a2_estimate(), w.a2_estimate());
}

TEST(Weights, TranslationKeepsCharacteristic) {
  const double h = kGrid.h();
  for (const char* id : {"power:a=0.7:center=0", "power:a=-0.7:center=-1", "step:low=1:high=4:at=-1"}) {
    const auto w = wt::make_weight(id, kGrid);
    EXPECT_NEAR(wt::translate_weight(w, 8 * h).a2_estimate(), w.a2_estimate(), 1e-12 * w.a2_estimate()) << id;
    EXPECT_NEAR(wt::translate_weight(w, 0.37).a2_estimate(), w.a2_estimate(), 0.02 * w.a2_estimate()) << id;
  }
  const auto c = wt::make_weight("constant:level=3", kGrid);
  EXPECT_EQ(wt::translate_weight(c, 1.3).a2_estimate(), 1.0);
}

TEST(Weights, CoverageFlagsFeaturesOffTheGrid) {
  const auto w = wt::make_weight("power:a=0.3:center=0", kGrid);
  EXPECT_TRUE(w.coverage_ok);
  EXPECT_FALSE(wt::translate_weight(w, 10.0).coverage_ok);
}

TEST(Weights, IdRoundTrip) {
  for (const auto& id : wt::registered_ids()) EXPECT_EQ(wt::format_id(wt::parse_id(id)), id);
  EXPECT_THROW(wt::parse_id("power:a=1.5"), rkl::DomainError);
  EXPECT_THROW(wt::parse_id("bogus:x=1"), rkl::DomainError);
  EXPECT_THROW(wt::parse_id("step:low=abc"), rkl::DomainError);
}

TEST(Weights, RegisteredFamily) {
  const auto ids = wt::registered_ids();
  EXPECT_EQ(ids.size(), 16u);
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
  EXPECT_EQ(ids, wt::registered_ids());
  const auto family = wt::registered_family(kGrid);
  ASSERT_EQ(family.size(), 16u);
  for (std::size_t i = 0; i < family.size(); ++i) {
    EXPECT_EQ(family[i].id, ids[i]);
    EXPECT_GE(family[i].a2_estimate(), 1.0);
    EXPECT_TRUE(std::isfinite(family[i].a2_estimate()));
    for (double s : family[i].samples) EXPECT_GT(s, 0.0);
  }
}

TEST(WeightsProperty, RefinementNeverLowersTheMax) {
  for (const auto& id : wt::registered_ids()) {
    const auto p = wt::parse_id(id);
    double previous = 0.0;
    for (int density : {1, 2, 4, 8}) {
      const double a2 = wt::a2_characteristic(p, kGrid, {density, 4}).value;
      EXPECT_GE(a2, previous) << id << " density " << density;
      previous = a2;
    }
  }
}

TEST(WeightsProperty, PowerMaximizerTouchesCenter) {
  for (const auto& id : wt::registered_ids()) {
    const auto p = wt::parse_id(id);
    if (p.kind != wt::WeightKind::power) continue;
    const auto r = wt::a2_characteristic(p, kGrid);
    EXPECT_LE(r.lo, p.center + 1e-12) << id;
    EXPECT_GE(r.hi, p.center - 1e-12) << id;
  }
}

TEST(WeightsProperty, Deterministic) {
  const auto a = wt::registered_family(kGrid);
  const auto b = wt::registered_family(kGrid);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].a2_estimate(), b[i].a2_estimate());
    EXPECT_EQ(a[i].samples, b[i].samples);
  }
}

}  // namespace
