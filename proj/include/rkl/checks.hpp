#pragma once

// Operator-level checks shared by the acceptance suite and the CLI. Each
// returns a CheckReport with the measured metric and the pinned threshold.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rkl/bessel.hpp"
#include "rkl/kernels.hpp"
#include "rkl/schrodinger.hpp"
#include "rkl/verify.hpp"
#include "rkl/weights.hpp"

namespace rkl::checks {

using kernels::KernelFamily;
using schrodinger::Grid;

struct CheckReport {
  std::string id;
  std::string anchor;
  bool pass = false;
  double metric = 0.0;
  double threshold = 0.0;
  double seconds = 0.0;
  std::string summary;
  std::vector<std::pair<std::string, double>> details;
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bessel accuracy against half-integer closed forms and the Wronskian.

inline CheckReport bessel_accuracy() {
  detail::Stopwatch clock;
  CheckReport r{"bessel-accuracy", "closed forms and Wronskian", false, 0.0, 1e-10};
  const auto xs = verify::lattice::log_spaced(1e-3, 30.0, 200, 0);
  double worst = 0.0;
  for (double x : xs) {
    // Oracles in long double: cosh x - sinh x / x cancels for small x.
    const long double X = x;
    const long double c = std::sqrt(2.0L / (std::numbers::pi_v<long double> * X));
    const long double k = std::sqrt(std::numbers::pi_v<long double> / (2.0L * X)) * std::exp(-X);
    const long double i32 =
        X < 0.1L ? c * X * X / 3.0L * (1.0L + X * X / 10.0L + X * X * X * X / 280.0L + std::pow(X, 6) / 15120.0L)
                 : c * (std::cosh(X) - std::sinh(X) / X);
    const std::pair<double, long double> cases[4] = {
        {bessel::bessel_i(bessel::BesselOrder(0.5), x), c * std::sinh(X)},
        {bessel::bessel_k(bessel::BesselOrder(0.5), x), k},
        {bessel::bessel_i(bessel::BesselOrder(1.5), x), i32},
        {bessel::bessel_k(bessel::BesselOrder(1.5), x), k * (1.0L + 1.0L / X)},
    };
    for (const auto& [got, want] : cases) {
      worst = std::max(worst, static_cast<double>(std::abs(got / want - 1.0L)));
    }
  }
  double wronskian = 0.0;
  for (double nu : {0.0, 0.25, 0.49, 1.3, 3.5}) {
    for (double x : xs) wronskian = std::max(wronskian, bessel::wronskian_defect(bessel::BesselOrder(nu), x));
  }
  r.metric = worst;
  r.details = {{"closed_form_max_rel_err", worst}, {"wronskian_max_defect", wronskian}};
  r.pass = worst <= 1e-10 && wronskian <= 1e-9;
  r.summary = "closed forms " + detail::fmt(worst) + " (<= 1e-10), Wronskian " + detail::fmt(wronskian) +
              " (<= 1e-9)";
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Finite-difference resolvent against I_t K_t.

/// Max relative deviation of (t^2 + H(1))^{-1} from I_t(e^min)K_t(e^max) over
/// grid nodes with |u|,|v| <= 4.
inline double resolvent_deviation(double t, const Grid& grid, const schrodinger::FdOptions& opts = {}) {
  const auto R = schrodinger::resolvent_fd(1.0, t, grid, opts);
  const std::size_t lo = grid.index_of(-4.0);
  const std::size_t hi = grid.index_of(4.0);
  double worst = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    for (std::size_t j = lo; j <= hi; ++j) {
      const double ref = kernels::resolvent_kernel(t, grid.u(i), grid.u(j)).to_double();
      worst = std::max(worst, std::abs(R.kernel(i, j) / ref - 1.0));
    }
  }
  return worst;
}

/// Relative offset of the continuum Dirichlet resolvent on [u_min, inf) from
/// the whole-line kernel at min(u,v) = u: c K_t(e^u)/I_t(e^u), where
/// c = I_t(e^u_min)/K_t(e^u_min) makes I_t - c K_t vanish at the wall.
inline double dirichlet_offset(double t, double u_min, double u) {
  using bessel::detail::i_log;
  using bessel::detail::k_log;
  return std::exp(i_log(t, std::exp(u_min)).log_abs - k_log(t, std::exp(u_min)).log_abs +
                  k_log(t, std::exp(u)).log_abs - i_log(t, std::exp(u)).log_abs);
}

inline CheckReport resolvent_oracle(double u_min = -12.0, double h = 0.01) {
  detail::Stopwatch clock;
  CheckReport r{"resolvent-oracle", "whose kernels are explicitly given by", false, 0.0, 1e-3};
  const Grid grid = Grid::with_spacing(u_min, 6.0, h);
  r.pass = true;
  for (double t : {0.1, 0.3, 0.49}) {
    const double dev = resolvent_deviation(t, grid);
    r.details.push_back({"t=" + detail::fmt(t), dev});
    r.details.push_back({"t=" + detail::fmt(t) + ":wall_offset", dirichlet_offset(t, u_min, -4.0)});
    r.metric = std::max(r.metric, dev);
    if (dev > r.threshold) r.pass = false;
  }
  r.summary = "grid [" + detail::fmt(u_min) + ", 6], h = " + detail::fmt(h) + ", Dirichlet; max rel dev " +
              detail::fmt(r.metric) + " (<= 1e-3)";
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Subordination: H^{-1/2} spectrally vs (2/pi) int_0^T (t^2 + H)^{-1} dt.

inline CheckReport subordination(double T = 1e3) {
  detail::Stopwatch clock;
  CheckReport r{"subordination", "by means of the subordination formula", false, 0.0, 1e-3};
  const Grid grid = Grid::with_spacing(-12.0, 6.0, 0.015);
  const auto dec = schrodinger::decompose_h(1.0, grid);
  const auto exact = schrodinger::func_calc(dec, schrodinger::inv_sqrt);
  const auto quad = schrodinger::subordination_quadrature(1.0, grid, T);
  const double diff = schrodinger::spectral_norm(exact.entries - quad.entries);
  const double tail = 2.0 / (std::numbers::pi * T);
  r.metric = diff;
  r.pass = diff <= r.threshold;
  r.details = {{"grid_count", static_cast<double>(grid.count)}, {"T", T}, {"tail_bound", tail},
               {"norm_difference", diff}};
  r.summary = "count " + std::to_string(grid.count) + ", ||diff|| = " + detail::fmt(diff) + " (tail bound " +
              detail::fmt(tail) + ", threshold 1e-3)";
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// (pi/2) F_j = M_j + local part, as a functional-calculus identity.

inline CheckReport split_identity() {
  detail::Stopwatch clock;
  CheckReport r{"split-identity", "pure functional-calculus identity", false, 0.0, 1e-9};
  const Grid grid = Grid::with_spacing(-12.0, 5.0, 0.02);
  for (double xi : {0.5, 1.0, 2.0}) {
    const auto dec = schrodinger::decompose_h(xi, grid);
    for (KernelFamily fam : {KernelFamily::M0, KernelFamily::M1}) {
      const auto full = schrodinger::riesz_full_fd(fam, xi, dec);
      const auto m = schrodinger::m_op_fd(fam, xi, dec);
      const auto local = schrodinger::local_part_fd(fam, xi, dec);
      const schrodinger::Matrix lhs = (std::numbers::pi / 2.0) * full.entries;
      const double rel = schrodinger::spectral_norm(lhs - m.entries - local.entries) /
                         schrodinger::spectral_norm(lhs);
      r.details.push_back({std::string(kernels::family_name(fam)) + ":xi=" + detail::fmt(xi), rel});
      r.metric = std::max(r.metric, rel);
    }
  }
  r.pass = r.metric <= r.threshold;
  r.summary = "max relative spectral-norm defect " + detail::fmt(r.metric) + " (<= 1e-9)";
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Heat kernel: zeta-integral formula vs eigendecomposition of e^{-tH(xi)}.

inline CheckReport heat_kernel() {
  detail::Stopwatch clock;
  CheckReport r{"heat-kernel", "We now use Gnewuch's formula", false, 0.0, 1e-3};
  const Grid grid = Grid::with_spacing(-14.0, 6.0, 0.01);
  std::vector<std::size_t> idx;
  for (double u = -2.0; u <= 2.0 + 1e-9; u += 0.05) idx.push_back(grid.index_of(u));
  const auto m = static_cast<Eigen::Index>(idx.size());
  for (double xi : {0.5, 1.0, 2.0}) {
    const auto dec = schrodinger::decompose_h(xi, grid);
    schrodinger::Matrix q(m, dec.eigenvectors.cols());
    for (Eigen::Index a = 0; a < m; ++a) q.row(a) = dec.eigenvectors.row(static_cast<Eigen::Index>(idx[a]));
    for (double t : {0.2, 0.5, 1.0}) {
      const Eigen::VectorXd f = (-t * dec.eigenvalues.array()).exp();
      const schrodinger::Matrix e = q * f.asDiagonal() * q.transpose() / grid.h();
      const schrodinger::GnewuchHeatKernel gn(t);
      double worst = 0.0;
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
          worst = std::max(worst, std::abs(e(a, b) - gn(xi, grid.u(idx[a]), grid.u(idx[b]))));
        }
      }
      r.details.push_back({"xi=" + detail::fmt(xi) + ":t=" + detail::fmt(t), worst});
      r.metric = std::max(r.metric, worst);
    }
  }
  r.pass = r.metric <= r.threshold;
  r.summary = "max absolute deviation " + detail::fmt(r.metric) + " (<= 1e-3) on |u|,|v| <= 2";
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Weighted norms of (xi d_xi)^n M_j(xi) across xi.

struct MihlinConfig {
  double h = 0.125;  // dyadic: nodes and shifts are exact
  double window_lo = -16.0;
  double window_hi = 8.0;
  int k_max = 8;  // xi = e^{k/2}, |k| <= k_max
  double max_variation = 0.10;
  double tol = 1e-8;
  std::vector<std::string> weight_ids;  // empty: the registered family
};

/// Integrated kernel on nodes a*h; operators at xi are index shifts of the table.
class KernelTable {
 public:
  KernelTable(KernelFamily family, int n, long first, long count, double h, double tol)
      : first_(first), count_(count), h_(h), values_(count * count) {
    for (long a = 0; a < count; ++a) {
      for (long b = 0; b < count; ++b) {
        values_[a * count + b] = kernels::integrated_kernel(family, n, node(a), node(b), tol);
      }
    }
  }

  double node(long a) const { return static_cast<double>(first_ + a) * h_; }

  /// h * S(u_i + shift h, u_j + shift h) on `size` nodes starting at absolute
  /// index `start`.
  schrodinger::Matrix window(long start, long size, long shift) const {
    schrodinger::Matrix m(size, size);
    const long off = start + shift - first_;
    require(off >= 0 && off + size <= count_, "KernelTable: window outside table");
    for (long i = 0; i < size; ++i) {
      for (long j = 0; j < size; ++j) m(i, j) = h_ * values_[(off + i) * count_ + off + j];
    }
    return m;
  }

 private:
  long first_;
  long count_;
  double h_;
  std::vector<double> values_;
};

struct MihlinSeries {
  KernelFamily family;
  int n;
  std::string weight;
  double a2;
  std::vector<double> norms;  // aligned grids, one per k = -k_max..k_max
  double variation;           // max/min - 1 over aligned grids
  double fixed_variation;     // the same on the fixed window (diagnostic)
  double envelope;            // C a2^p
};

struct MihlinResult {
  CheckReport report;
  std::vector<double> xis;
  std::vector<MihlinSeries> series;
  double envelope_p = 0.0;
  std::vector<std::pair<std::string, double>> envelope_c;  // per (j,n)
  std::size_t bitwise_checked = 0;
  std::size_t bitwise_mismatches = 0;
};

/// Weighted norms of (xi d_xi)^n M_j(xi) for xi = e^{k/2}.
///
/// Aligned: at xi the grid is W - log xi, on which the operator equals M(1)
/// on W entry for entry, so truncation is the same for every xi and only the
/// weight moves relative to the kernel. Fixed: the grid stays W and the
/// truncation moves with xi; reported as a diagnostic.
inline MihlinResult mihlin_sweep(const MihlinConfig& cfg = {}) {
  detail::Stopwatch clock;
  MihlinResult out;
  out.report = {"mihlin-sweep", "it suffices to justify that", false, 0.0, cfg.max_variation};
  const double h = cfg.h;
  const long per_k = std::lround(0.5 / h);
  require(std::abs(static_cast<double>(per_k) * h - 0.5) < 1e-15, "mihlin_sweep: 1/2 must be a multiple of h");
  const long w_start = std::lround(cfg.window_lo / h);
  const long w_size = std::lround((cfg.window_hi - cfg.window_lo) / h) + 1;
  const long max_shift = cfg.k_max * per_k;
  const Grid window(cfg.window_lo, cfg.window_hi, static_cast<std::size_t>(w_size));
  const auto ids = cfg.weight_ids.empty() ? weights::registered_ids() : cfg.weight_ids;
  std::vector<int> ks;
  for (int k = -cfg.k_max; k <= cfg.k_max; ++k) {
    ks.push_back(k);
    out.xis.push_back(std::exp(0.5 * k));
  }
  auto aligned_grid = [&](int k) {
    return Grid(cfg.window_lo - 0.5 * k, cfg.window_hi - 0.5 * k, static_cast<std::size_t>(w_size));
  };
  // samples[w][k]: weight on the aligned grid at xi_k.
  std::vector<std::vector<std::vector<double>>> aligned(ids.size());
  std::vector<weights::Weight> fixed;
  for (std::size_t w = 0; w < ids.size(); ++w) {
    for (int k : ks) aligned[w].push_back(weights::make_weight(ids[w], aligned_grid(k)).samples);
    fixed.push_back(weights::make_weight(ids[w], window));
  }

  std::vector<std::pair<double, double>> fit_points;  // (log a2, log norm) at xi = 1
  std::vector<std::size_t> block_start;
  bool variation_ok = true;
  double fixed_worst = 0.0;
  for (KernelFamily fam : {KernelFamily::M0, KernelFamily::M1}) {
    for (int n = 0; n <= 2; ++n) {
      const KernelTable table(fam, n, w_start - max_shift, w_size + 2 * max_shift, h, cfg.tol);
      const schrodinger::Matrix base = table.window(w_start, w_size, 0);

      // Independent floating-point path, where log(xi) recovers k/2 exactly.
      for (int k : {-cfg.k_max, 3}) {
        const double xi = std::exp(0.5 * k);
        if (std::log(xi) != 0.5 * k) continue;
        const auto direct = schrodinger::xi_derivative_op(fam, n, xi, aligned_grid(k), cfg.tol);
        ++out.bitwise_checked;
        if (!(direct.entries.array() == base.array()).all()) ++out.bitwise_mismatches;
      }

      block_start.push_back(out.series.size());
      for (std::size_t w = 0; w < ids.size(); ++w) {
        MihlinSeries s{fam, n, ids[w], fixed[w].a2.value, {}, 0.0, 0.0, 0.0};
        std::vector<double> fixed_norms;
        for (std::size_t k = 0; k < ks.size(); ++k) {
          s.norms.push_back(schrodinger::weighted_norm(base, aligned[w][k]));
          fixed_norms.push_back(
              schrodinger::weighted_norm(table.window(w_start, w_size, ks[k] * per_k), fixed[w].samples));
        }
        const auto [mn, mx] = std::minmax_element(s.norms.begin(), s.norms.end());
        s.variation = *mx / *mn - 1.0;
        const auto [fmn, fmx] = std::minmax_element(fixed_norms.begin(), fixed_norms.end());
        s.fixed_variation = *fmx / *fmn - 1.0;
        fixed_worst = std::max(fixed_worst, s.fixed_variation);
        if (s.variation > cfg.max_variation) variation_ok = false;
        out.report.metric = std::max(out.report.metric, s.variation);
        fit_points.push_back({std::log(s.a2), std::log(s.norms[static_cast<std::size_t>(cfg.k_max)])});
        out.series.push_back(std::move(s));
      }
    }
  }

  // Least-squares slope of log norm against log a2 at xi = 1, clamped at 0,
  // then one constant per (j,n) so that the xi = 1 data lie under C a2^p.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : fit_points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double np = static_cast<double>(fit_points.size());
  const double den = np * sxx - sx * sx;
  out.envelope_p = den > 0.0 ? std::max(0.0, (np * sxy - sx * sy) / den) : 0.0;

  std::size_t crossings = 0;
  for (std::size_t b = 0; b < block_start.size(); ++b) {
    const std::size_t first = block_start[b];
    double c = 0.0;
    for (std::size_t s = first; s < first + ids.size(); ++s) {
      const auto& ser = out.series[s];
      c = std::max(c, ser.norms[static_cast<std::size_t>(cfg.k_max)] / std::pow(ser.a2, out.envelope_p));
    }
    const auto& head = out.series[first];
    out.envelope_c.push_back({std::string(kernels::family_name(head.family)) + ":n=" + std::to_string(head.n), c});
    for (std::size_t s = first; s < first + ids.size(); ++s) {
      auto& ser = out.series[s];
      ser.envelope = c * std::pow(ser.a2, out.envelope_p);
      for (double nrm : ser.norms) {
        if (nrm > (1.0 + cfg.max_variation) * ser.envelope) ++crossings;
      }
    }
  }

  const bool bitwise_ok = out.bitwise_checked > 0 && out.bitwise_mismatches == 0;
  out.report.pass = variation_ok && crossings == 0 && bitwise_ok;
  out.report.details = {{"max_variation_aligned", out.report.metric},
                        {"max_variation_fixed_window", fixed_worst},
                        {"envelope_exponent", out.envelope_p},
                        {"envelope_crossings", static_cast<double>(crossings)},
                        {"bitwise_checked", static_cast<double>(out.bitwise_checked)},
                        {"bitwise_mismatches", static_cast<double>(out.bitwise_mismatches)}};
  for (const auto& [name, c] : out.envelope_c) out.report.details.push_back({"envelope_C:" + name, c});
  out.report.summary = "max variation across xi " + detail::fmt(out.report.metric) + " (<= " +
                       detail::fmt(cfg.max_variation) + "), envelope C a2^" + detail::fmt(out.envelope_p) +
                       " crossings " + std::to_string(crossings) + ", bitwise mismatches " +
                       std::to_string(out.bitwise_mismatches) + "/" + std::to_string(out.bitwise_checked);
  out.report.seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Registry-backed checks.

inline CheckReport from_reports(std::string id, std::string anchor, const std::vector<verify::RatioReport>& reports) {
  CheckReport r{std::move(id), std::move(anchor), true, 0.0, verify::kMaxDrift};
  std::string failing;
  for (const auto& rep : reports) {
    r.metric = std::max(r.metric, rep.expected_pass ? rep.drift : 0.0);
    r.details.push_back({rep.id, rep.fitted_constant});
    if (!rep.as_expected()) {
      r.pass = false;
      failing += (failing.empty() ? "" : ", ") + rep.id;
    }
  }
  r.summary = std::to_string(reports.size()) + " specs, max drift of expected-pass specs " +
              detail::fmt(r.metric) + (failing.empty() ? "" : "; unexpected verdicts: " + failing);
  return r;
}

inline CheckReport estimate_registry(unsigned parallelism = 1) {
  detail::Stopwatch clock;
  const auto reports = verify::run_all(parallelism);
  auto r = from_reports("estimate-registry", "registry", reports);
  std::size_t negatives = 0;
  for (const auto& rep : reports) negatives += rep.expected_pass ? 0 : 1;
  if (negatives < 2) {
    r.pass = false;
    r.summary += "; fewer than two negative controls";
  }
  r.seconds = clock.seconds();
  return r;
}

inline CheckReport standard_kernel() {
  detail::Stopwatch clock;
  std::vector<verify::RatioReport> reports;
  for (const auto& spec : verify::registry()) {
    if (spec.id == "stanker-size-K1" || spec.id == "stanker-grad-K1") reports.push_back(verify::run_spec(spec));
  }
  auto r = from_reports("standard-kernel", "$K_1$ is a standard kernel", reports);
  if (reports.size() != 2) r.pass = false;
  r.seconds = clock.seconds();
  return r;
}

}  // namespace rkl::checks
