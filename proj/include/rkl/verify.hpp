#pragma once

// Ratio-supremum sweeps for pointwise estimates.
//
// An estimate |L(p)| <~ R(p) is checked by evaluating sup L/R over a fixed
// lattice (level 0) and over its refinement (level 1: twice the density and,
// where the estimate is claimed on an unbounded set, a longer reach into it).
// The verdict is pass iff both sups are finite, they differ by at most 20%,
// and at most 0.1% of the points failed to evaluate. Constants are fitted,
// never asserted, except where the bound itself names one.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rkl/bessel.hpp"
#include "rkl/gamma.hpp"
#include "rkl/kernels.hpp"

namespace rkl::verify {

using Point = std::array<double, 4>;
using Visitor = std::function<void(const Point&)>;

struct EstimateSpec {
  std::string id;
  std::string anchor;  // quoted phrase locating the inequality
  std::string suite;   // "bessel" or "kernels"
  std::string note;
  std::vector<std::string> coords;
  std::function<void(int level, const Visitor&)> lattice;
  std::function<double(const Point&)> log_lhs;  // log|lhs|, -inf for zero
  std::function<double(const Point&)> log_rhs;  // log of the majorant
  bool expected_pass = true;
  std::optional<double> max_constant;
};

struct LevelResult {
  double sup = 0.0;
  Point argmax{};
  std::size_t samples = 0;
  std::size_t errors = 0;
  std::string first_error;
};

struct RatioReport {
  std::string id;
  std::string anchor;
  std::string suite;
  std::string note;
  std::vector<std::string> coords;
  double sup_ratio = 0.0;
  double sup_level0 = 0.0;
  double drift = 0.0;
  Point argmax{};
  std::size_t samples = 0;
  std::size_t errors = 0;
  std::string first_error;
  double fitted_constant = 0.0;
  bool pass = false;
  bool expected_pass = true;
  std::optional<double> max_constant;
  std::string reason;

  bool as_expected() const { return pass == expected_pass; }
};

inline constexpr double kMaxDrift = 0.20;
inline constexpr double kMaxErrorFraction = 1e-3;

inline LevelResult sweep(const EstimateSpec& spec, int level) {
  LevelResult out;
  spec.lattice(level, [&](const Point& p) {
    ++out.samples;
    double ratio = 0.0;
    try {
      const double l = spec.log_lhs(p);
      const double r = spec.log_rhs(p);
      if (std::isnan(l) || std::isnan(r)) throw ConvergenceError("NaN in evaluator");
      ratio = (l == -std::numeric_limits<double>::infinity()) ? 0.0 : std::exp(l - r);
    } catch (const std::exception& e) {
      if (out.errors++ == 0) out.first_error = e.what();
      return;
    }
    if (ratio > out.sup || std::isnan(ratio)) {
      out.sup = std::isnan(ratio) ? std::numeric_limits<double>::infinity() : ratio;
      out.argmax = p;
    }
  });
  return out;
}

inline RatioReport run_spec(const EstimateSpec& spec) {
  const LevelResult coarse = sweep(spec, 0);
  const LevelResult fine = sweep(spec, 1);
  RatioReport r;
  r.id = spec.id;
  r.anchor = spec.anchor;
  r.suite = spec.suite;
  r.note = spec.note;
  r.coords = spec.coords;
  r.expected_pass = spec.expected_pass;
  r.max_constant = spec.max_constant;
  r.sup_level0 = coarse.sup;
  r.sup_ratio = fine.sup;
  r.fitted_constant = fine.sup;
  r.argmax = fine.argmax;
  r.samples = fine.samples;
  r.errors = coarse.errors + fine.errors;
  r.first_error = coarse.errors ? coarse.first_error : fine.first_error;
  const bool finite = std::isfinite(coarse.sup) && std::isfinite(fine.sup);
  r.drift = coarse.sup > 0.0 ? std::abs(fine.sup - coarse.sup) / coarse.sup
                             : (fine.sup > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  const double error_fraction =
      static_cast<double>(r.errors) / static_cast<double>(std::max<std::size_t>(1, coarse.samples + fine.samples));
  r.pass = true;
  if (coarse.samples == 0) {
    r.pass = false;
    r.reason = "empty lattice";
  } else if (!finite) {
    r.pass = false;
    r.reason = "sup ratio not finite";
  } else if (error_fraction > kMaxErrorFraction) {
    r.pass = false;
    r.reason = "evaluation errors at " + std::to_string(r.errors) + " points: " + r.first_error;
  } else if (r.drift > kMaxDrift) {
    r.pass = false;
    r.reason = "sup ratio drifts by " + std::to_string(100.0 * r.drift) + "% under refinement";
  } else if (spec.max_constant && fine.sup > *spec.max_constant * (1.0 + 1e-9)) {
    r.pass = false;
    r.reason = "constant exceeds " + std::to_string(*spec.max_constant);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lattices.

namespace lattice {

/// a, a+step, ..., up to b (inclusive when b is on the lattice).
inline std::vector<double> linear(double a, double b, double step) {
  const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(a + step * static_cast<double>(i));
  return out;
}

/// count points, log-spaced from a to b. Level l uses (count-1) 2^l + 1
/// points so coarser lattices are nested in finer ones.
inline std::vector<double> log_spaced(double a, double b, std::size_t count, int level) {
  const std::size_t n = (count - 1) * (std::size_t{1} << level) + 1;
  std::vector<double> out(n);
  const double la = std::log(a);
  const double lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return out;
}

inline double refine(double step, int level) { return std::ldexp(step, -level); }

/// Points (u, v): a square lattice on [lo, hi]^2 plus a finer band near the
/// diagonal. Level 1 halves both steps and extends lo by 2.
struct UVLattice {
  double lo = -10.0;
  double hi = 6.0;
  double step = 0.25;
  double band = 2.0;
  double band_step = 0.05;
  double extend = 2.0;

  void visit(int level, const std::function<void(double, double)>& f) const {
    const double a = lo - extend * level;
    const double s = refine(step, level);
    const double bs = refine(band_step, level);
    const auto main = linear(a, hi, s);
    const double eps = 1e-9;
    for (double u : main) {
      for (double v : main) f(u, v);
    }
    // Band offsets that are not already multiples of the main step.
    const auto offsets = linear(-band, band, bs);
    const double ratio = s / bs;
    for (double u : main) {
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        if (std::fmod(static_cast<double>(k), ratio) < eps) continue;
        const double v = u + offsets[k];
        if (v < a - eps || v > hi + eps) continue;
        f(u, v);
      }
    }
  }
};

enum class Region { diagonal, positive, mixed, negative };

inline Region region_of(double u, double v, double c = 1.0) {
  if (std::abs(u - v) <= c) return Region::diagonal;
  if (u > 0.0 && v > 0.0) return Region::positive;
  if (u * v <= 0.0) return Region::mixed;
  return Region::negative;
}

}  // namespace lattice

// ---------------------------------------------------------------------------
// Shared integrated-kernel values, so the Corollary sweeps, K2 sweeps and the
// CLI reuse one evaluation per (family, n, u, v).

class IntegratedKernelCache {
 public:
  static IntegratedKernelCache& instance() {
    static IntegratedKernelCache cache;
    return cache;
  }

  double get(kernels::KernelFamily family, int n, double u, double v) {
    const std::uint64_t key = make_key(family, n, u, v);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = values_.find(key);
      if (it != values_.end()) return it->second;
    }
    const double value = kernels::integrated_kernel(family, n, u, v, kTol);
    std::lock_guard<std::mutex> lock(mutex_);
    values_.emplace(key, value);
    return value;
  }

  static constexpr double kTol = 1e-8;

 private:
  // Lattice points are multiples of 1/1600.
  static std::uint64_t make_key(kernels::KernelFamily family, int n, double u, double v) {
    const auto qu = static_cast<std::uint64_t>(std::llround(u * 1600.0) + (1 << 20)) & 0xFFFFFF;
    const auto qv = static_cast<std::uint64_t>(std::llround(v * 1600.0) + (1 << 20)) & 0xFFFFFF;
    const std::uint64_t tag = static_cast<std::uint64_t>(family == kernels::KernelFamily::M1) * 8 +
                              static_cast<std::uint64_t>(n);
    return (tag << 48) | (qu << 24) | qv;
  }

  std::mutex mutex_;
  std::unordered_map<std::uint64_t, double> values_;
};

// ---------------------------------------------------------------------------
// Registry.

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double safe_log(double x) { return x == 0.0 ? kNegInf : std::log(std::abs(x)); }

inline double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline const char* region_name(lattice::Region r) {
  switch (r) {
    case lattice::Region::diagonal: return "case1";
    case lattice::Region::positive: return "case2";
    case lattice::Region::mixed: return "case3";
    case lattice::Region::negative: return "case4";
  }
  return "";
}

// log|(x dx + y dy)^N I_t(x) K_t(y)| with x = e^lx <= y = e^ly.
inline double log_homog(double t, double lx, double ly, int N) {
  const auto jet = kernels::resolvent_jet(t, lx, ly, N);
  return jet.log_base + safe_log(jet.d[N]);
}

// log|(x dx + y dy)^N (x dx - y dy) I_t(x) K_t(y)|.
inline double log_homog_mixed(double t, double lx, double ly, int N) {
  const auto jet = kernels::resolvent_jet(t, lx, ly, std::max(N - 1, 0));
  if (N == 0) return jet.log_base + safe_log(jet.i_ratio1 + jet.k_ratio1);
  double s = 0.0;
  for (int k = 0; k <= N - 1; ++k) s += kernels::binomial(N - 1, k) * std::ldexp(1.0, N - 1 - k) * jet.d[k];
  return jet.log_base + safe_log(s) + safe_log(std::exp(2.0 * lx) - std::exp(2.0 * ly));
}

// RHS of the pointwise kernel bounds, t-dependent.
inline double log_rhs_pointwise(lattice::Region r, bool s00, double t, double u, double v) {
  switch (r) {
    case lattice::Region::diagonal: return 0.0;
    case lattice::Region::positive: return -(u + v) / 2.0;
    case lattice::Region::mixed: return -std::exp(std::max(u, v)) / 2.0 - t * std::abs(std::min(u, v));
    case lattice::Region::negative:
      if (s00) return -t * std::abs(u - v);
      return log_sum_exp(t * (u + v), std::log(std::exp(-std::abs(u)) + std::exp(-std::abs(v))) -
                                          t * std::abs(u - v));
  }
  return 0.0;
}

// RHS of the integrated kernel bounds.
inline double log_rhs_integrated(lattice::Region r, bool s00, double u, double v) {
  switch (r) {
    case lattice::Region::diagonal: return 0.0;
    case lattice::Region::positive: return -(u + v) / 2.0;
    case lattice::Region::mixed:
      return -std::exp(std::max(u, v)) / 2.0 - std::log(std::abs(std::min(u, v)) + 1.0);
    case lattice::Region::negative:
      if (s00) return -std::log(std::abs(u - v) + 1.0);
      return std::log(1.0 / (std::abs(u) + std::abs(v) + 1.0) +
                      (std::exp(-std::abs(u)) + std::exp(-std::abs(v))) / (std::abs(u - v) + 1.0));
  }
  return 0.0;
}

inline const std::vector<double>& t_lattice(int level) {
  static const std::vector<double> l0 = lattice::log_spaced(1.0 / 80.0, 0.49, 16, 0);
  static const std::vector<double> l1 = lattice::log_spaced(1.0 / 80.0, 0.49, 16, 1);
  return level == 0 ? l0 : l1;
}

// (lx, ly) with lx < ly on [lo - ext*level, hi + ext_hi*level].
inline void visit_xy(int level, double lo, double hi, double ext_lo, double ext_hi, double step,
                     const std::function<void(double, double)>& f) {
  const auto axis = lattice::linear(lo - ext_lo * level, hi + ext_hi * level, lattice::refine(step, level));
  for (double lx : axis) {
    for (double ly : axis) {
      if (lx < ly) f(lx, ly);
    }
  }
}

inline void add_bessel_specs(std::vector<EstimateSpec>& out) {
  using bessel::detail::i_log;
  using bessel::detail::k_log;
  auto nu_x_lattice = [](double nu_lo, double nu_step) {
    return [=](int level, const Visitor& visit) {
      const auto nus = lattice::linear(nu_lo, 4.0, lattice::refine(nu_step, level));
      const auto xs = lattice::log_spaced(1e-2, 1e4, 200, level);
      for (double nu : nus) {
        for (double x : xs) visit({nu, x, 0, 0});
      }
    };
  };
  auto j_log = [](const Point& p) {
    return safe_log(bessel::detail::j_value(p[0], p[1]));
  };
  out.push_back({"eq1-j-bounded", "of nonnegative order are bounded", "bessel", "",
                 {"nu", "x"}, nu_x_lattice(0.0, 0.25), j_log,
                 [](const Point&) { return 0.0; }, true, 1.0});
  out.push_back({"eq4-landau", "the following pointwise bounds", "bessel",
                 "constant fitted; Landau's sharp value is about 0.786", {"nu", "x"},
                 nu_x_lattice(0.125, 0.125), j_log,
                 [](const Point& p) { return -std::log(p[1]) / 3.0; }, true, 1.0});
  out.push_back({"eq7-j-series-bound", "the following pointwise bounds", "bessel", "",
                 {"nu", "x"}, nu_x_lattice(0.0, 0.25), j_log,
                 [](const Point& p) { return p[0] * std::log(0.5 * p[1]) - log_gamma(p[0] + 1.0); },
                 true, 1.0});
  out.push_back({"eq3-elementary", "By applying \\eqref{eq:1} and the estimate", "bessel", "",
                 {"n", "z0", "z"},
                 [](int level, const Visitor& visit) {
                   const auto zs = lattice::linear(0.0, 40.0 + 10.0 * level, lattice::refine(0.5, level));
                   for (int n = 0; n <= 4; ++n) {
                     for (double z0 : zs) {
                       for (double z : zs) {
                         if (z >= z0) visit({static_cast<double>(n), z0, z, 0});
                       }
                     }
                   }
                 },
                 [](const Point& p) { return (p[0] == 0.0 ? 0.0 : p[0] * safe_log(p[2])) - p[2]; },
                 [](const Point& p) { return p[0] * std::log1p(p[1]) - p[1]; }, true, std::nullopt});

  // Small-argument bounds: x in (0,1).
  auto t_lx_lattice = [](std::function<std::vector<double>(int)> ts) {
    return [ts](int level, const Visitor& visit) {
      const double step = lattice::refine(0.1, level);
      const auto lxs = lattice::linear(-10.0 - 2.0 * level, -step, step);
      for (double t : ts(level)) {
        for (double lx : lxs) visit({t, lx, 0, 0});
      }
    };
  };
  auto t_wide = [](int level) { return lattice::log_spaced(1.0 / 80.0, 2.0, 16, level); };
  auto t_mid = [](int level) { return lattice::linear(0.3, 2.0, lattice::refine(0.1, level)); };
  auto t_small = [](int level) { return t_lattice(level); };
  const char* anchor = "The following estimates hold";
  out.push_back({"lm5-i-upper", anchor, "bessel", "", {"t", "log_x"}, t_lx_lattice(t_wide),
                 [](const Point& p) { return i_log(p[0], std::exp(p[1])).log_abs; },
                 [](const Point& p) { return p[0] * p[1]; }, true, std::nullopt});
  out.push_back({"lm5-i-lower", anchor, "bessel", "", {"t", "log_x"}, t_lx_lattice(t_wide),
                 [](const Point& p) { return p[0] * p[1]; },
                 [](const Point& p) { return i_log(p[0], std::exp(p[1])).log_abs; }, true, std::nullopt});
  out.push_back({"lm5-k-upper", anchor, "bessel", "", {"t", "log_x"}, t_lx_lattice(t_mid),
                 [](const Point& p) { return k_log(p[0], std::exp(p[1])).log_abs; },
                 [](const Point& p) { return -p[0] * p[1]; }, true, std::nullopt});
  out.push_back({"lm5-k-lower", anchor, "bessel", "", {"t", "log_x"}, t_lx_lattice(t_mid),
                 [](const Point& p) { return -p[0] * p[1]; },
                 [](const Point& p) { return k_log(p[0], std::exp(p[1])).log_abs; }, true, std::nullopt});
  out.push_back({"lm5-k-small-order", anchor, "bessel", "", {"t", "log_x"}, t_lx_lattice(t_small),
                 [](const Point& p) { return k_log(p[0], std::exp(p[1])).log_abs; },
                 [](const Point& p) { return (p[0] - 1.0) * p[1]; }, true, std::nullopt});
  out.push_back({"neg-lm5-k-bounded", anchor, "bessel",
                 "negative control: K_t is claimed bounded near 0, which is false",
                 {"t", "log_x"}, t_lx_lattice(t_small),
                 [](const Point& p) { return k_log(p[0], std::exp(p[1])).log_abs; },
                 [](const Point&) { return 0.0; }, false, std::nullopt});
}

inline void add_product_specs(std::vector<EstimateSpec>& out) {
  const char* lm1_anchor = "uniformly in $0<x<y<\\infty$";
  auto lm1_lattice = [](int level, const Visitor& visit) {
    for (double t : {0.01, 0.1, 0.3, 0.49, 0.7}) {
      visit_xy(level, -10.0, 4.0, 2.0, 1.0, 0.05, [&](double lx, double ly) { visit({t, lx, ly, 0}); });
    }
  };
  auto lm1_rhs = [](double t, double lx, double ly, int N, double decay) {
    const double b = std::exp(ly) - std::exp(lx);
    return std::log(t + 1.0) + (N + 1) * std::log1p(b) - decay * b - 0.5 * (lx + ly);
  };
  for (int N = 0; N <= 2; ++N) {
    out.push_back({"lm1-eq5-n" + std::to_string(N), lm1_anchor, "kernels", "", {"t", "log_x", "log_y"},
                   lm1_lattice, [N](const Point& p) { return log_homog(p[0], p[1], p[2], N); },
                   [N, lm1_rhs](const Point& p) { return lm1_rhs(p[0], p[1], p[2], N, 1.0); }, true,
                   std::nullopt});
  }
  for (int N = 0; N <= 2; ++N) {
    out.push_back({"lm1-eq6-n" + std::to_string(N), lm1_anchor, "kernels", "", {"t", "log_x", "log_y"},
                   lm1_lattice, [N](const Point& p) { return log_homog_mixed(p[0], p[1], p[2], N); },
                   [N, lm1_rhs](const Point& p) {
                     return std::log(std::exp(p[1]) + std::exp(p[2])) + lm1_rhs(p[0], p[1], p[2], N, 1.0);
                   },
                   true, std::nullopt});
  }
  out.push_back({"neg-lm1-eq5-weak-exp", lm1_anchor, "kernels",
                 "negative control: decay e^{-2(y-x)} is faster than the truth",
                 {"t", "log_x", "log_y"}, lm1_lattice,
                 [](const Point& p) { return log_homog(p[0], p[1], p[2], 0); },
                 [lm1_rhs](const Point& p) { return lm1_rhs(p[0], p[1], p[2], 0, 2.0); }, false,
                 std::nullopt});

  const char* lm2_anchor = "uniformly in $t\\in(0,1)$";
  auto lm2_lattice = [](int level, const Visitor& visit) {
    for (double t : lattice::log_spaced(1.0 / 80.0, 0.99, 16, level)) {
      visit_xy(level, -10.0, 4.0, 2.0, 1.0, 0.05, [&](double lx, double ly) {
        if (std::exp(ly) - std::exp(lx) >= 1.0) visit({t, lx, ly, 0});
      });
    }
  };
  auto lm2_rhs = [](const Point& p) {
    return p[0] * (p[1] + p[2]) - 0.75 * (std::exp(p[2]) - std::exp(p[1]));
  };
  for (int N = 0; N <= 2; ++N) {
    out.push_back({"lm2-first-n" + std::to_string(N), lm2_anchor, "kernels", "epsilon = 1/4, c = 1",
                   {"t", "log_x", "log_y"}, lm2_lattice,
                   [N](const Point& p) { return log_homog(p[0], p[1], p[2], N); }, lm2_rhs, true,
                   std::nullopt});
    out.push_back({"lm2-second-n" + std::to_string(N), lm2_anchor, "kernels", "epsilon = 1/4, c = 1",
                   {"t", "log_x", "log_y"}, lm2_lattice,
                   [N](const Point& p) { return log_homog_mixed(p[0], p[1], p[2], N); },
                   [lm2_rhs](const Point& p) {
                     return std::log(std::exp(p[1]) + std::exp(p[2])) + lm2_rhs(p);
                   },
                   true, std::nullopt});
  }

  const char* eq13_anchor = "Notice now by Lemma";
  for (int k = 0; k <= 2; ++k) {
    for (int l = 0; l <= 2; ++l) {
      out.push_back(
          {"eq13-k" + std::to_string(k) + "-l" + std::to_string(l), eq13_anchor, "kernels", "",
           {"t", "u", "v"},
           [](int level, const Visitor& visit) {
             const auto axis = lattice::linear(-10.0 - 2.0 * level, 0.0, lattice::refine(0.25, level));
             for (double t : t_lattice(level)) {
               for (double u : axis) {
                 for (double v : axis) visit({t, u, v, 0});
               }
             }
           },
           [k, l](const Point& p) {
             const double t = p[0];
             return k * p[1] + l * p[2] + bessel::detail::i_log(t + k, std::exp(p[1])).log_abs +
                    bessel::detail::k_log(t + l, std::exp(p[2])).log_abs;
           },
           [k, l](const Point& p) {
             const double t = p[0];
             if (l != 0) return 2.0 * k * p[1] - (p[2] - p[1]) * t;
             return 2.0 * k * p[1] - p[2] + (p[1] + p[2]) * t;
           },
           true, std::nullopt});
    }
  }
}

inline void add_kernel_specs(std::vector<EstimateSpec>& out) {
  using kernels::KernelFamily;
  const lattice::UVLattice uv;
  const lattice::Region regions[4] = {lattice::Region::diagonal, lattice::Region::positive,
                                      lattice::Region::mixed, lattice::Region::negative};
  for (int n = 0; n <= 2; ++n) {
    for (int j = 0; j <= 1; ++j) {
      const KernelFamily fam = j == 0 ? KernelFamily::M0 : KernelFamily::M1;
      const bool s00 = (n == 0 && j == 0);
      for (int c = 0; c < 4; ++c) {
        const lattice::Region region = regions[c];
        const std::string suffix = std::string(region_name(region)) + "-n" + std::to_string(n) + "-j" +
                                   std::to_string(j);
        out.push_back(
            {"lm3-" + suffix, "uniformly in $t\\in(0,1/2)$", "kernels",
             region == lattice::Region::negative ? "t sampled down to 1/80; smaller t extrapolated" : "",
             {"t", "u", "v"},
             [uv, region](int level, const Visitor& visit) {
               const auto& ts = t_lattice(level);
               uv.visit(level, [&](double u, double v) {
                 if (lattice::region_of(u, v) != region) return;
                 for (double t : ts) visit({t, u, v, 0});
               });
             },
             [fam, n](const Point& p) {
               return safe_log(kernels::homog_deriv_kernel_t(fam, n, p[0], p[1], p[2]));
             },
             [region, s00](const Point& p) { return log_rhs_pointwise(region, s00, p[0], p[1], p[2]); },
             true, std::nullopt});
        out.push_back(
            {"cor1-" + suffix, "we transfer the bounds", "kernels", "", {"u", "v"},
             [uv, region](int level, const Visitor& visit) {
               uv.visit(level, [&](double u, double v) {
                 if (lattice::region_of(u, v) == region) visit({u, v, 0, 0});
               });
             },
             [fam, n](const Point& p) {
               return safe_log(IntegratedKernelCache::instance().get(fam, n, p[0], p[1]));
             },
             [region, s00](const Point& p) { return log_rhs_integrated(region, s00, p[0], p[1]); }, true,
             std::nullopt});
      }
    }
  }
  for (int c = 0; c < 4; ++c) {
    const lattice::Region region = regions[c];
    out.push_back({std::string("k2-") + region_name(region), "$K_1$ is a standard kernel", "kernels", "",
                   {"u", "v"},
                   [uv, region](int level, const Visitor& visit) {
                     uv.visit(level, [&](double u, double v) {
                       if (u != v && lattice::region_of(u, v) == region) visit({u, v, 0, 0});
                     });
                   },
                   [](const Point& p) { return safe_log(kernels::split_k1_k2(p[0], p[1]).k2); },
                   [region](const Point& p) { return log_rhs_integrated(region, false, p[0], p[1]); },
                   true, std::nullopt});
  }

  // Negative quadrant, off the diagonal.
  lattice::UVLattice neg;
  neg.lo = -10.0;
  neg.hi = -0.25;
  auto neg_lattice = [neg](bool ordered) {
    return [neg, ordered](int level, const Visitor& visit) {
      neg.visit(level, [&](double u, double v) {
        if (u == v || (ordered && !(u < v))) return;
        visit({u, v, 0, 0});
      });
    };
  };
  const char* stanker = "differentiable off the diagonal";
  constexpr double kFd = 1e-4;
  out.push_back({"stanker-size-K1", stanker, "kernels", "", {"u", "v"}, neg_lattice(false),
                 [](const Point& p) { return safe_log(kernels::split_k1_k2(p[0], p[1]).k1); },
                 [](const Point& p) { return -std::log(std::abs(p[0] - p[1])); }, true, std::nullopt});
  out.push_back({"stanker-grad-K1", stanker, "kernels", "partials by central differences, step 1e-4",
                 {"u", "v"}, neg_lattice(false),
                 [](const Point& p) {
                   const double u = p[0], v = p[1];
                   auto k1 = [](double a, double b) { return kernels::split_k1_k2(a, b).k1; };
                   const double du = (k1(u + kFd, v) - k1(u - kFd, v)) / (2 * kFd);
                   const double dv = (k1(u, v + kFd) - k1(u, v - kFd)) / (2 * kFd);
                   return safe_log(std::abs(du) + std::abs(dv));
                 },
                 [](const Point& p) { return -2.0 * std::log(std::abs(p[0] - p[1])); }, true,
                 std::nullopt});

  const char* prop7 = "the term $t$ is crucial";
  out.push_back({"prop7-eq14", "We commence by observing", "kernels", "", {"u", "v"}, neg_lattice(true),
                 [](const Point& p) { return safe_log(kernels::split_parts(p[0], p[1]).s01); },
                 [](const Point& p) { return -std::log1p(std::abs(p[0] - p[1])); }, true, std::nullopt});
  out.push_back({"prop7-s002", "We commence by observing", "kernels", "", {"u", "v"}, neg_lattice(true),
                 [](const Point& p) { return safe_log(kernels::split_parts(p[0], p[1]).s02); },
                 [](const Point& p) { return -std::log(std::abs(p[0]) + std::abs(p[1]) + 1.0); }, true,
                 std::nullopt});
  out.push_back({"prop7-eq15", prop7, "kernels", "", {"u", "v"}, neg_lattice(true),
                 [](const Point& p) { return safe_log(kernels::split_parts(p[0], p[1]).s01_du); },
                 [](const Point& p) {
                   const double d = p[0] - p[1];
                   return std::log(std::exp(2.0 * p[0]) + 1.0 / (1.0 + d * d));
                 },
                 true, std::nullopt});
  out.push_back({"prop7-eq16", prop7, "kernels", "", {"u", "v"}, neg_lattice(true),
                 [](const Point& p) { return safe_log(kernels::split_parts(p[0], p[1]).s01_dv); },
                 [](const Point& p) {
                   const double d = p[0] - p[1];
                   return std::log(std::exp(p[1]) + 1.0 / (1.0 + d * d));
                 },
                 true, std::nullopt});
  out.push_back({"prop7-eq17", prop7, "kernels", "region where the cutoff is nonzero", {"u", "v"},
                 [neg](int level, const Visitor& visit) {
                   neg.visit(level, [&](double u, double v) {
                     if (u < v && kernels::cutoff(u / v) > 0.0) visit({u, v, 0, 0});
                   });
                 },
                 [](const Point& p) {
                   const auto s = kernels::split_parts(p[0], p[1]);
                   return safe_log(std::max(std::abs(s.s01_du), std::abs(s.s01_dv)));
                 },
                 [](const Point& p) { return -2.0 * std::log1p(std::abs(p[0] - p[1])); }, true,
                 std::nullopt});
  out.push_back({"prop7-eq19", prop7, "kernels", "", {"u", "v"},
                 [neg](int level, const Visitor& visit) {
                   neg.visit(level, [&](double u, double v) {
                     if (u < v) visit({u, v, 0, 0});
                   });
                 },
                 [](const Point& p) {
                   const double u = p[0], v = p[1];
                   const double d = kernels::cutoff_prime(u / v);
                   return safe_log(std::max(std::abs(d / v), std::abs(u * d / (v * v))));
                 },
                 [](const Point& p) { return -std::log(std::abs(p[0] - p[1])); }, true, std::nullopt});
  // int_0^{1/2} t e^{-d t} dt against 1/(1+d^2), both directions.
  auto t_factor = [](double d) {
    if (d < 1e-6) return 0.125;
    const double e = std::exp(-0.5 * d);
    return (1.0 - e * (1.0 + 0.5 * d)) / (d * d);
  };
  auto d_lattice = [](int level, const Visitor& visit) {
    for (double d : lattice::linear(0.0, 40.0 + 20.0 * level, lattice::refine(0.05, level))) {
      visit({d, 0, 0, 0});
    }
  };
  out.push_back({"prop7-t-factor", prop7, "kernels", "", {"d"}, d_lattice,
                 [t_factor](const Point& p) { return std::log(t_factor(p[0])); },
                 [](const Point& p) { return -std::log1p(p[0] * p[0]); }, true, std::nullopt});
  out.push_back({"prop7-t-factor-lower", prop7, "kernels", "", {"d"}, d_lattice,
                 [](const Point& p) { return -std::log1p(p[0] * p[0]); },
                 [t_factor](const Point& p) { return std::log(t_factor(p[0])); }, true, std::nullopt});
}

}  // namespace detail

/// Every registered estimate, in a fixed order.
inline std::vector<EstimateSpec> registry() {
  std::vector<EstimateSpec> out;
  detail::add_bessel_specs(out);
  detail::add_product_specs(out);
  detail::add_kernel_specs(out);
  return out;
}

/// Specs of one suite: "bessel", "kernels", or "estimates" for all of them.
inline std::vector<EstimateSpec> select(const std::vector<EstimateSpec>& all, const std::string& suite) {
  if (suite == "estimates" || suite == "all") return all;
  std::vector<EstimateSpec> out;
  for (const auto& s : all) {
    if (s.suite == suite) out.push_back(s);
  }
  return out;
}

/// Runs specs on up to `parallelism` threads; report i belongs to spec i.
inline std::vector<RatioReport> run_all(const std::vector<EstimateSpec>& specs, unsigned parallelism,
                                        const std::function<void(const RatioReport&)>& on_done = {}) {
  std::vector<RatioReport> reports(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      reports[i] = run_spec(specs[i]);
      if (on_done) {
        std::lock_guard<std::mutex> lock(done_mutex);
        on_done(reports[i]);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(specs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return reports;
}

inline std::vector<RatioReport> run_all(unsigned parallelism) { return run_all(registry(), parallelism); }

}  // namespace rkl::verify
