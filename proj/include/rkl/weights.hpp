#pragma once

// Muckenhoupt A_2 weights on a grid and their numerical characteristic.
//
// Every family has closed-form antiderivatives for w and 1/w, so interval
// averages are exact; the sweep only approximates the supremum over intervals.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rkl/error.hpp"
#include "rkl/schrodinger.hpp"

namespace rkl::weights {

using schrodinger::Grid;

enum class WeightKind { constant, power, clamped_exponential, piecewise_step };

/// Analytic description of a weight on the real line.
///   constant             w = level
///   power                w = |u - center|^exponent, exponent in (-1, 1)
///   clamped_exponential  w = exp(clamp(rate (u - center), -clamp, clamp))
///   piecewise_step       w = low for u < center, high otherwise
struct WeightProfile {
  WeightKind kind = WeightKind::constant;
  double level = 1.0;
  double exponent = 0.0;
  double center = 0.0;
  double rate = 1.0;
  double clamp = 1.0;
  double low = 1.0;
  double high = 1.0;

  double operator()(double u) const {
    switch (kind) {
      case WeightKind::constant: return level;
      case WeightKind::power: return std::pow(std::abs(u - center), exponent);
      case WeightKind::clamped_exponential:
        return std::exp(std::clamp(rate * (u - center), -clamp, clamp));
      case WeightKind::piecewise_step: return u < center ? low : high;
    }
    return 0.0;
  }

  /// Integral of w^sign over [a, b], sign = +1 or -1.
  double integral(double a, double b, int sign) const {
    if (b < a) return -integral(b, a, sign);
    const double s = static_cast<double>(sign);
    switch (kind) {
      case WeightKind::constant: return std::pow(level, s) * (b - a);
      case WeightKind::power: {
        const double p = s * exponent + 1.0;
        auto prim = [&](double u) {
          const double d = u - center;
          return (d < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(d), p) / p;
        };
        return prim(b) - prim(a);
      }
      case WeightKind::clamped_exponential: {
        // Breakpoints where the clamp engages.
        const double r = rate;
        const double e1 = center - clamp / std::abs(r);
        const double e2 = center + clamp / std::abs(r);
        double total = 0.0;
        const double cuts[4] = {a, std::clamp(e1, a, b), std::clamp(e2, a, b), b};
        for (int k = 0; k < 3; ++k) {
          const double lo = cuts[k];
          const double hi = cuts[k + 1];
          if (hi <= lo) continue;
          const double mid = 0.5 * (lo + hi);
          const double arg = r * (mid - center);
          if (arg <= -clamp || arg >= clamp) {
            total += std::exp(s * std::clamp(arg, -clamp, clamp)) * (hi - lo);
          } else {
            const double k_rate = s * r;
            total += (std::exp(k_rate * (hi - center)) - std::exp(k_rate * (lo - center))) / k_rate;
          }
        }
        return total;
      }
      case WeightKind::piecewise_step: {
        const double split = std::clamp(center, a, b);
        return std::pow(low, s) * (split - a) + std::pow(high, s) * (b - split);
      }
    }
    return 0.0;
  }

  WeightProfile translated(double s) const {
    WeightProfile out = *this;
    out.center -= s;
    return out;
  }
};

/// String identifier such as "power:a=0.3:center=0".
inline std::string format_id(const WeightProfile& p) {
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return std::string(buf);
  };
  switch (p.kind) {
    case WeightKind::constant: return "constant:level=" + num(p.level);
    case WeightKind::power: return "power:a=" + num(p.exponent) + ":center=" + num(p.center);
    case WeightKind::clamped_exponential:
      return "clampexp:rate=" + num(p.rate) + ":clamp=" + num(p.clamp) + ":center=" + num(p.center);
    case WeightKind::piecewise_step:
      return "step:low=" + num(p.low) + ":high=" + num(p.high) + ":at=" + num(p.center);
  }
  return {};
}

inline WeightProfile parse_id(const std::string& id) {
  std::vector<std::string> parts;
  std::stringstream ss(id);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw DomainError("weight id: empty");
  std::map<std::string, double> kv;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw DomainError("weight id: expected key=value in '" + id + "'");
    try {
      kv[parts[i].substr(0, eq)] = std::stod(parts[i].substr(eq + 1));
    } catch (const std::exception&) {
      throw DomainError("weight id: bad number in '" + id + "'");
    }
  }
  auto get = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  WeightProfile p;
  const std::string& family = parts[0];
  if (family == "constant") {
    p.kind = WeightKind::constant;
    p.level = get("level", 1.0);
    require(p.level > 0.0, "weight id: constant level must be positive");
  } else if (family == "power") {
    p.kind = WeightKind::power;
    p.exponent = get("a", 0.0);
    p.center = get("center", 0.0);
    require(p.exponent > -1.0 && p.exponent < 1.0, "weight id: power exponent must lie in (-1, 1)");
  } else if (family == "clampexp") {
    p.kind = WeightKind::clamped_exponential;
    p.rate = get("rate", 1.0);
    p.clamp = get("clamp", 1.0);
    p.center = get("center", 0.0);
    require(p.rate != 0.0 && p.clamp > 0.0, "weight id: clampexp needs rate != 0, clamp > 0");
  } else if (family == "step") {
    p.kind = WeightKind::piecewise_step;
    p.low = get("low", 1.0);
    p.high = get("high", 1.0);
    p.center = get("at", 0.0);
    require(p.low > 0.0 && p.high > 0.0, "weight id: step levels must be positive");
  } else {
    throw DomainError("weight id: unknown family '" + family + "'");
  }
  return p;
}

/// Interval sweep: lengths 4h * 2^{k/density} (in whole cells) up to the full
/// grid, every start node. Doubling the density adds lengths and never
/// removes one.
struct SweepConfig {
  int density = 4;
  std::size_t min_cells = 4;
};

struct A2Result {
  double value = 1.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t intervals = 0;
};

inline std::vector<std::size_t> ladder(std::size_t cells, const SweepConfig& cfg) {
  std::vector<std::size_t> out;
  for (int k = 0;; ++k) {
    const double len = static_cast<double>(cfg.min_cells) * std::exp2(k / static_cast<double>(cfg.density));
    const auto m = static_cast<std::size_t>(std::llround(len));
    if (m > cells) break;
    if (out.empty() || out.back() != m) out.push_back(m);
  }
  if (out.empty() || out.back() != cells) out.push_back(cells);
  return out;
}

inline A2Result a2_characteristic(const WeightProfile& w, const Grid& grid,
                                  const SweepConfig& cfg = {}) {
  // Every interval attains the Cauchy-Schwarz equality case.
  if (w.kind == WeightKind::constant) return {1.0, grid.u_min, grid.u_max, 0};
  const std::size_t n = grid.count;
  std::vector<double> pw(n, 0.0), pinv(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    pw[i] = pw[i - 1] + w.integral(grid.u(i - 1), grid.u(i), +1);
    pinv[i] = pinv[i - 1] + w.integral(grid.u(i - 1), grid.u(i), -1);
  }
  A2Result best;
  best.value = 0.0;
  const double h = grid.h();
  for (std::size_t m : ladder(n - 1, cfg)) {
    const double len = h * static_cast<double>(m);
    for (std::size_t i = 0; i + m < n; ++i) {
      const double q = (pw[i + m] - pw[i]) * (pinv[i + m] - pinv[i]) / (len * len);
      ++best.intervals;
      if (q > best.value) {
        best.value = q;
        best.lo = grid.u(i);
        best.hi = grid.u(i + m);
      }
    }
  }
  // Jensen gives q >= 1; rounding can leave 1 - eps for constants.
  best.value = std::max(best.value, 1.0);
  return best;
}

/// A weight bound to a grid: node samples are averages over dual cells
/// [u_i - h/2, u_i + h/2], finite even at a power singularity.
struct Weight {
  std::string id;
  WeightProfile profile;
  Grid grid;
  std::vector<double> samples;
  A2Result a2;
  bool coverage_ok = true;

  double a2_estimate() const { return a2.value; }
};

inline Weight make_weight(const WeightProfile& profile, const Grid& grid,
                          const SweepConfig& cfg = {}) {
  Weight w;
  w.profile = profile;
  w.id = format_id(profile);
  w.grid = grid;
  const double h = grid.h();
  w.samples.resize(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double u = grid.u(i);
    w.samples[i] = profile.integral(u - 0.5 * h, u + 0.5 * h, +1) / h;
  }
  w.a2 = a2_characteristic(profile, grid, cfg);
  w.coverage_ok = profile.kind == WeightKind::constant ||
                  (profile.center > grid.u_min && profile.center < grid.u_max);
  return w;
}

inline Weight make_weight(const std::string& id, const Grid& grid, const SweepConfig& cfg = {}) {
  return make_weight(parse_id(id), grid, cfg);
}

/// w(. + s) on the same grid; coverage_ok is false when a feature leaves it.
inline Weight translate_weight(const Weight& w, double s, const SweepConfig& cfg = {}) {
  return make_weight(w.profile.translated(s), w.grid, cfg);
}

/// The canonical sweep set, in a fixed order.
inline std::vector<std::string> registered_ids() {
  std::vector<std::string> ids = {"constant:level=1"};
  for (double a : {-0.7, -0.3, 0.3, 0.7}) {
    for (double c : {-2.0, 0.0, 3.0}) {
      WeightProfile p;
      p.kind = WeightKind::power;
      p.exponent = a;
      p.center = c;
      ids.push_back(format_id(p));
    }
  }
  ids.push_back("clampexp:rate=1:clamp=1.5:center=0");
  ids.push_back("clampexp:rate=-0.5:clamp=2:center=1");
  ids.push_back("step:low=1:high=4:at=-1");
  return ids;
}

inline std::vector<Weight> registered_family(const Grid& grid, const SweepConfig& cfg = {}) {
  std::vector<Weight> out;
  for (const auto& id : registered_ids()) out.push_back(make_weight(id, grid, cfg));
  return out;
}

}  // namespace rkl::weights
