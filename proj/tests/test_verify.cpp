#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "rkl/verify.hpp"

namespace {

namespace vf = rkl::verify;

const std::vector<vf::EstimateSpec>& all_specs() {
  static const auto specs = vf::registry();
  return specs;
}

const vf::EstimateSpec& find(const std::string& id) {
  for (const auto& s : all_specs()) {
    if (s.id == id) return s;
  }
  throw std::runtime_error("no spec " + id);
}

// sup over x in [0, L] of x e^{-x} against 1, L growing with the level.
vf::EstimateSpec synthetic(double rate, bool expected_pass) {
  vf::EstimateSpec s;
  s.id = "synthetic";
  s.anchor = "test";
  s.suite = "bessel";
  s.coords = {"x"};
  s.lattice = [](int level, const vf::Visitor& visit) {
    for (double x : vf::lattice::linear(0.0, 10.0 + 10.0 * level, vf::lattice::refine(0.1, level))) visit({x, 0, 0, 0});
  };
  s.log_lhs = [rate](const vf::Point& p) { return p[0] == 0.0 ? -INFINITY : std::log(p[0]) - rate * p[0]; };
  s.log_rhs = [](const vf::Point&) { return 0.0; };
  s.expected_pass = expected_pass;
  return s;
}

TEST(Registry, CompleteAndUnique) {
  const auto& specs = all_specs();
  EXPECT_GE(specs.size(), 22u);
  std::set<std::string> ids;
  for (const auto& s : specs) {
    EXPECT_TRUE(ids.insert(s.id).second) << "duplicate " << s.id;
    EXPECT_FALSE(s.anchor.empty()) << s.id;
    EXPECT_TRUE(s.suite == "bessel" || s.suite == "kernels") << s.id;
    EXPECT_TRUE(s.lattice && s.log_lhs && s.log_rhs) << s.id;
  }
  for (const char* id : {"lm3-case4-n1-j0", "stanker-grad-K1", "stanker-size-K1", "lm1-eq5-n0", "lm5-k-small-order",
                         "neg-lm1-eq5-weak-exp", "neg-lm5-k-bounded", "eq4-landau"}) {
    EXPECT_TRUE(ids.count(id)) << id;
  }
}

TEST(Registry, SuitesPartitionTheRegistry) {
  const auto b = vf::select(all_specs(), "bessel");
  const auto k = vf::select(all_specs(), "kernels");
  EXPECT_FALSE(b.empty());
  EXPECT_FALSE(k.empty());
  EXPECT_EQ(b.size() + k.size(), all_specs().size());
  EXPECT_EQ(vf::select(all_specs(), "estimates").size(), all_specs().size());
  EXPECT_TRUE(vf::select(all_specs(), "nothing").empty());
}

TEST(RunSpec, SyntheticSupAndStability) {
  const auto r = vf::run_spec(synthetic(1.0, true));
  EXPECT_NEAR(r.sup_ratio, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(r.argmax[0], 1.0, 1e-9);
  EXPECT_TRUE(r.pass) << r.reason;
  EXPECT_LT(r.drift, 1e-12);
}

TEST(RunSpec, GrowingRatioFailsOnDrift) {
  const auto r = vf::run_spec(synthetic(-0.1, false));
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.drift, vf::kMaxDrift);
  EXPECT_TRUE(r.as_expected());
}

TEST(RunSpec, EvaluationErrorsAreCountedNotFatal) {
  auto s = synthetic(1.0, true);
  s.log_lhs = [](const vf::Point& p) -> double {
    if (p[0] > 5.0) throw rkl::DomainError("out of range");
    return std::log(p[0] + 1e-300) - p[0];
  };
  const auto r = vf::run_spec(s);
  EXPECT_GT(r.errors, 0u);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.first_error.find("out of range"), std::string::npos);
}

TEST(Lattice, RefinementContainsCoarsePoints) {
  const vf::lattice::UVLattice lat;
  std::set<std::pair<long, long>> coarse, fine;
  auto key = [](double u, double v) { return std::pair{std::lround(u * 1600), std::lround(v * 1600)}; };
  lat.visit(0, [&](double u, double v) { coarse.insert(key(u, v)); });
  lat.visit(1, [&](double u, double v) { fine.insert(key(u, v)); });
  EXPECT_GT(fine.size(), 2 * coarse.size());
  for (const auto& p : coarse) EXPECT_TRUE(fine.count(p));
  const auto a = vf::lattice::log_spaced(1e-2, 1e2, 5, 0);
  const auto b = vf::lattice::log_spaced(1e-2, 1e2, 5, 1);
  EXPECT_EQ(b.size(), 9u);
  EXPECT_DOUBLE_EQ(a.front(), b.front());
  EXPECT_NEAR(a.back(), b.back(), 1e-12);
  EXPECT_EQ(vf::lattice::region_of(0.0, 0.5), vf::lattice::Region::diagonal);
  EXPECT_EQ(vf::lattice::region_of(1.0, 3.0), vf::lattice::Region::positive);
  EXPECT_EQ(vf::lattice::region_of(-1.0, 3.0), vf::lattice::Region::mixed);
  EXPECT_EQ(vf::lattice::region_of(-1.0, -3.0), vf::lattice::Region::negative);
}

TEST(Estimates, BesselSmallOrderBoundPasses) {
  const auto r = vf::run_spec(find("lm5-k-small-order"));
  EXPECT_TRUE(r.pass) << r.reason;
  EXPECT_TRUE(std::isfinite(r.fitted_constant));
}

TEST(Estimates, ProductDecayPasses) {
  const auto r = vf::run_spec(find("lm1-eq5-n1"));
  EXPECT_TRUE(r.pass) << r.reason;
  EXPECT_LE(r.drift, vf::kMaxDrift);
}

TEST(Estimates, LandauConstantAtMostOne) {
  const auto r = vf::run_spec(find("eq4-landau"));
  EXPECT_TRUE(r.pass) << r.reason;
  EXPECT_LE(r.fitted_constant, 1.0);
}

TEST(Estimates, NegativeControlsFail) {
  for (const auto& s : all_specs()) {
    if (s.expected_pass) continue;
    const auto r = vf::run_spec(s);
    EXPECT_FALSE(r.pass) << s.id;
    EXPECT_FALSE(r.reason.empty()) << s.id;
  }
}

TEST(Estimates, KernelBoundPasses) {
  const auto r = vf::run_spec(find("lm3-case4-n1-j0"));
  EXPECT_TRUE(r.pass) << r.reason;
  EXPECT_EQ(r.coords.size(), 3u);
}

TEST(Determinism, IdenticalReports) {
  const std::vector<vf::EstimateSpec> specs = {find("lm5-k-small-order"), find("lm1-eq6-n2"), find("eq7-j-series-bound")};
  const auto a = vf::run_all(specs, 1);
  const auto b = vf::run_all(specs, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, specs[i].id);
    EXPECT_EQ(a[i].sup_ratio, b[i].sup_ratio);
    EXPECT_EQ(a[i].sup_level0, b[i].sup_level0);
    EXPECT_EQ(a[i].argmax, b[i].argmax);
    EXPECT_EQ(a[i].samples, b[i].samples);
    EXPECT_EQ(a[i].pass, b[i].pass);
  }
}

}  // namespace
