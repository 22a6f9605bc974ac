#pragma once

// Discretized Schroedinger family H(xi) = -d_u^2 + xi^2 e^{2u} on a truncated
// uniform grid, with resolvents, spectral calculus and the multipliers.
//
// Default stencil is the exponentially fitted three-point scheme: on each
// cell the potential is frozen at the midpoint value W and the row is the
// exact two-cell relation for -phi'' + W phi = 0,
//   off-diagonal  -kappa / (h sinh(kappa h)),
//   diagonal      sum over adjacent cells of kappa / (h tanh(kappa h)),
// with kappa = sqrt(W). It reduces to the central stencil as W h^2 -> 0 and
// stays accurate where xi e^u h is not small. Dirichlet ends put zero ghost
// nodes one step outside the grid.

#include <lapacke.h>
#ifdef RKL_HAVE_QUADMATH
#include <quadmath.h>
#endif

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <type_traits>
#include <vector>

#include "rkl/error.hpp"
#include "rkl/kernels.hpp"
#include "rkl/quadrature.hpp"

namespace rkl::schrodinger {

using kernels::KernelFamily;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Grid {
  double u_min = 0.0;
  double u_max = 0.0;
  std::size_t count = 0;

  Grid() = default;
  Grid(double lo, double hi, std::size_t n) : u_min(lo), u_max(hi), count(n) {
    require(n >= 64, "Grid: count must be at least 64");
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "Grid: need u_min < u_max");
  }

  /// Grid with spacing as close to h as the interval allows.
  static Grid with_spacing(double lo, double hi, double h) {
    require(h > 0.0, "Grid: spacing must be positive");
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / h)) + 1;
    return Grid(lo, hi, n);
  }

  double h() const { return (u_max - u_min) / static_cast<double>(count - 1); }
  double u(std::size_t i) const { return u_min + h() * static_cast<double>(i); }
  std::vector<double> nodes() const {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = u(i);
    return out;
  }
  /// Index of the node nearest to x.
  std::size_t index_of(double x) const {
    const double r = std::round((x - u_min) / h());
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(count - 1)));
  }
};

enum class Stencil { fitted, central };
enum class LeftBoundary { dirichlet, neumann };

struct FdOptions {
  Stencil stencil = Stencil::fitted;
  LeftBoundary left = LeftBoundary::dirichlet;
};

/// Dense operator on a grid. entries(i,j)/h approximates the integral kernel.
struct DiscreteOperator {
  Grid grid;
  Matrix entries;

  double kernel(std::size_t i, std::size_t j) const { return entries(i, j) / grid.h(); }
  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

/// Symmetric tridiagonal matrix: diag (n), off (n-1).
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  Matrix dense() const {
    const auto n = static_cast<Eigen::Index>(diag.size());
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = diag[i];
    for (Eigen::Index i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = off[i];
    return m;
  }
};

namespace detail {

inline double potential(double xi, double u) {
  const double w = xi * xi * std::exp(2.0 * u);
  if (!std::isfinite(w)) {
    throw OverflowError("build_h: potential xi^2 e^{2u} exceeds double range; shrink u_max");
  }
  return w;
}

// Cell contributions {diagonal share, off-diagonal} for a cell of width h
// with frozen potential w.
inline std::pair<double, double> fitted_cell(double w, double h) {
  const double kh = std::sqrt(w) * h;
  if (kh < 1e-4) {
    // Series in (kappa h)^2 avoids 0/0.
    const double z = kh * kh;
    return {(1.0 + z / 3.0) / (h * h), -(1.0 - z / 6.0) / (h * h)};
  }
  const double kappa = std::sqrt(w);
  return {kappa / (h * std::tanh(kh)), -kappa / (h * std::sinh(kh))};
}

}  // namespace detail

inline Tridiagonal build_h_tridiagonal(double xi, const Grid& grid, const FdOptions& opts = {}) {
  require(xi > 0.0 && std::isfinite(xi), "build_h: xi must be positive");
  const std::size_t n = grid.count;
  const double h = grid.h();
  Tridiagonal out;
  out.diag.assign(n, 0.0);
  out.off.assign(n - 1, 0.0);
  detail::potential(xi, grid.u_max + h);
  if (opts.stencil == Stencil::central) {
    for (std::size_t i = 0; i < n; ++i) out.diag[i] = 2.0 / (h * h) + detail::potential(xi, grid.u(i));
    for (std::size_t i = 0; i + 1 < n; ++i) out.off[i] = -1.0 / (h * h);
    if (opts.left == LeftBoundary::neumann) out.diag[0] -= 1.0 / (h * h);
    return out;
  }
  // Cells c = -1..n-1 span [u_c, u_{c+1}]; cell -1 and n-1 reach the ghosts.
  for (std::ptrdiff_t c = -1; c < static_cast<std::ptrdiff_t>(n); ++c) {
    if (c == -1 && opts.left == LeftBoundary::neumann) continue;
    const double mid = grid.u_min + h * (static_cast<double>(c) + 0.5);
    const auto [d, o] = detail::fitted_cell(detail::potential(xi, mid), h);
    if (c >= 0) out.diag[static_cast<std::size_t>(c)] += d;
    if (c + 1 < static_cast<std::ptrdiff_t>(n)) out.diag[static_cast<std::size_t>(c + 1)] += d;
    if (c >= 0 && c + 1 < static_cast<std::ptrdiff_t>(n)) out.off[static_cast<std::size_t>(c)] = o;
  }
  return out;
}

/// Dense H(xi) on the grid.
inline DiscreteOperator build_h(double xi, const Grid& grid, const FdOptions& opts = {}) {
  return {grid, build_h_tridiagonal(xi, grid, opts).dense()};
}

/// LDL^T-free Thomas factorization of (shift + T) reused across right-hand sides.
class TridiagonalSolver {
 public:
  TridiagonalSolver(const Tridiagonal& t, double shift) : off_(t.off) {
    const std::size_t n = t.diag.size();
    pivot_.resize(n);
    pivot_[0] = t.diag[0] + shift;
    for (std::size_t i = 1; i < n; ++i) {
      pivot_[i] = t.diag[i] + shift - off_[i - 1] * off_[i - 1] / pivot_[i - 1];
    }
    min_pivot_ = std::abs(pivot_[0]);
    max_pivot_ = std::abs(pivot_[0]);
    for (double p : pivot_) {
      min_pivot_ = std::min(min_pivot_, std::abs(p));
      max_pivot_ = std::max(max_pivot_, std::abs(p));
    }
    if (!(min_pivot_ > 0.0) || !std::isfinite(max_pivot_)) {
      throw ConvergenceError("tridiagonal solve: zero pivot; pivot ratio " +
                             std::to_string(max_pivot_ / min_pivot_));
    }
  }

  /// Pivot spread, a cheap conditioning indicator.
  double pivot_ratio() const { return max_pivot_ / min_pivot_; }

  void solve_in_place(double* b) const {
    const std::size_t n = pivot_.size();
    for (std::size_t i = 1; i < n; ++i) b[i] -= off_[i - 1] / pivot_[i - 1] * b[i - 1];
    b[n - 1] /= pivot_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) b[i] = (b[i] - off_[i] * b[i + 1]) / pivot_[i];
  }

 private:
  std::vector<double> off_;
  std::vector<double> pivot_;
  double min_pivot_ = 0.0;
  double max_pivot_ = 0.0;
};

/// (t^2 + H(xi))^{-1}, column by column.
inline DiscreteOperator resolvent_fd(double xi, double t, const Grid& grid,
                                     const FdOptions& opts = {}) {
  require(t > 0.0, "resolvent_fd: t must be positive");
  const Tridiagonal tri = build_h_tridiagonal(xi, grid, opts);
  const TridiagonalSolver solver(tri, t * t);
  const auto n = static_cast<Eigen::Index>(grid.count);
  Matrix out = Matrix::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j) solver.solve_in_place(out.col(j).data());
  return {grid, out};
}

struct SpectralDecomp {
  Grid grid;
  Vector eigenvalues;  // ascending
  Matrix eigenvectors;  // orthonormal columns
};

/// Eigendecomposition of a symmetric tridiagonal matrix (LAPACK dstevr).
inline SpectralDecomp decompose(const Tridiagonal& tri, const Grid& grid) {
  const auto n = static_cast<lapack_int>(tri.diag.size());
  std::vector<double> d = tri.diag;
  std::vector<double> e(tri.off);
  e.push_back(0.0);
  SpectralDecomp out;
  out.grid = grid;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'A', n, d.data(), e.data(), 0.0,
                                         0.0, 0, 0, 0.0, &found, out.eigenvalues.data(),
                                         out.eigenvectors.data(), n, support.data());
  if (info != 0 || found != n) {
    throw ConvergenceError("dstevr failed with info " + std::to_string(info));
  }
  return out;
}

/// Eigendecomposition of H(xi).
inline SpectralDecomp decompose_h(double xi, const Grid& grid, const FdOptions& opts = {}) {
  return decompose(build_h_tridiagonal(xi, grid, opts), grid);
}

/// Eigendecomposition of a dense symmetric operator.
inline SpectralDecomp decompose(const DiscreteOperator& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(op.entries);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
  return {op.grid, solver.eigenvalues(), solver.eigenvectors()};
}

/// sum_k f(lambda_k) v_k v_k^T
inline DiscreteOperator func_calc(const SpectralDecomp& decomp,
                                  const std::function<double(double)>& f) {
  Vector fl(decomp.eigenvalues.size());
  for (Eigen::Index k = 0; k < fl.size(); ++k) {
    fl[k] = f(decomp.eigenvalues[k]);
    if (!std::isfinite(fl[k])) throw DomainError("func_calc: f not finite on the spectrum");
  }
  const Matrix scaled = decomp.eigenvectors * fl.asDiagonal();
  return {decomp.grid, scaled * decomp.eigenvectors.transpose()};
}

/// int_0^{1/2} dt / (t^2 + lambda) = lambda^{-1/2} arctan(lambda^{-1/2} / 2)
inline double subord_g(double lambda) {
  require(lambda > 0.0, "subord_g: lambda must be positive");
  const double r = 1.0 / std::sqrt(lambda);
  return r * std::atan(0.5 * r);
}

/// int_{1/2}^inf dt / (t^2 + lambda) = lambda^{-1/2} arctan(2 sqrt(lambda))
inline double subord_h(double lambda) {
  require(lambda > 0.0, "subord_h: lambda must be positive");
  return std::atan(2.0 * std::sqrt(lambda)) / std::sqrt(lambda);
}

inline double inv_sqrt(double lambda) {
  require(lambda > 0.0, "inverse square root: spectrum must be positive");
  return 1.0 / std::sqrt(lambda);
}

/// Central first difference with zero ghosts; exactly antisymmetric.
inline Matrix derivative_matrix(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.count);
  const double c = 0.5 / grid.h();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    d(i, i + 1) = c;
    d(i + 1, i) = -c;
  }
  return d;
}

/// j = M1: xi diag(e^u) f(H);  j = M0: D f(H) + f(H) D.
inline DiscreteOperator assemble_multiplier(KernelFamily family, double xi,
                                            const DiscreteOperator& fh) {
  const Grid& grid = fh.grid;
  const auto n = static_cast<Eigen::Index>(grid.count);
  if (family == KernelFamily::M1) {
    Vector scale(n);
    for (Eigen::Index i = 0; i < n; ++i) scale[i] = xi * std::exp(grid.u(static_cast<std::size_t>(i)));
    return {grid, scale.asDiagonal() * fh.entries};
  }
  const Matrix d = derivative_matrix(grid);
  return {grid, d * fh.entries + fh.entries * d};
}

/// M_j(xi) through the closed form g of the t-integral.
inline DiscreteOperator m_op_fd(KernelFamily family, double xi, const Grid& grid,
                                const FdOptions& opts = {}) {
  return assemble_multiplier(family, xi, func_calc(decompose_h(xi, grid, opts), subord_g));
}

inline DiscreteOperator m_op_fd(KernelFamily family, double xi, const SpectralDecomp& decomp) {
  return assemble_multiplier(family, xi, func_calc(decomp, subord_g));
}

/// Local part: the same assembly with h(lambda) in place of g.
inline DiscreteOperator local_part_fd(KernelFamily family, double xi, const SpectralDecomp& decomp) {
  return assemble_multiplier(family, xi, func_calc(decomp, subord_h));
}

/// F_1 = xi e^u H^{-1/2};  F_0 = D H^{-1/2} + H^{-1/2} D.
inline DiscreteOperator riesz_full_fd(KernelFamily family, double xi, const SpectralDecomp& decomp) {
  return assemble_multiplier(family, xi, func_calc(decomp, inv_sqrt));
}

inline DiscreteOperator riesz_full_fd(KernelFamily family, double xi, const Grid& grid,
                                      const FdOptions& opts = {}) {
  return riesz_full_fd(family, xi, decompose_h(xi, grid, opts));
}

/// (2/pi) int_0^T (t^2 + H)^{-1} dt by composite Gauss-Legendre in log t on
/// [t_lo, T] plus the resolvent at t_lo times t_lo on [0, t_lo]. The omitted
/// tail is bounded by 2/(pi T) in norm.
inline DiscreteOperator subordination_quadrature(double xi, const Grid& grid, double T = 1e3,
                                                 const FdOptions& opts = {},
                                                 std::size_t panels_per_decade = 6) {
  const double t_lo = 1e-6;
  const auto& rule = quad::gauss_legendre(8);
  const double a = std::log(t_lo);
  const double b = std::log(T);
  const auto panels = static_cast<std::size_t>(
      std::ceil((b - a) / std::numbers::ln10 * static_cast<double>(panels_per_decade)));
  const double width = (b - a) / static_cast<double>(panels);
  const auto n = static_cast<Eigen::Index>(grid.count);
  Matrix acc = t_lo * resolvent_fd(xi, t_lo, grid, opts).entries;
  for (std::size_t p = 0; p < panels; ++p) {
    const double left = a + width * static_cast<double>(p);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double s = left + 0.5 * width * (rule.nodes[i] + 1.0);
      const double t = std::exp(s);
      acc += (0.5 * width * rule.weights[i] * t) * resolvent_fd(xi, t, grid, opts).entries;
    }
  }
  (void)n;
  return {grid, (2.0 / std::numbers::pi) * acc};
}

/// Largest singular value of a dense matrix (LAPACK dgesdd, values only).
inline double spectral_norm(const Matrix& m) {
  Matrix a = m;
  const auto rows = static_cast<lapack_int>(a.rows());
  const auto cols = static_cast<lapack_int>(a.cols());
  Vector s(std::min(rows, cols));
  double dummy = 0.0;
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, a.data(), rows,
                                         s.data(), &dummy, 1, &dummy, 1);
  if (info != 0) throw ConvergenceError("dgesdd failed with info " + std::to_string(info));
  return s.size() == 0 ? 0.0 : s[0];
}

/// ||diag(w^{1/2}) A diag(w^{-1/2})||_2, the L^2(w) norm of A.
inline double weighted_norm(const Matrix& a, const std::vector<double>& w) {
  require(static_cast<Eigen::Index>(w.size()) == a.rows() && a.rows() == a.cols(),
          "weighted_norm: weight does not match operator size");
  Vector sw(a.rows());
  for (Eigen::Index i = 0; i < sw.size(); ++i) {
    require(w[i] > 0.0 && std::isfinite(w[i]), "weighted_norm: weight must be positive");
    sw[i] = std::sqrt(w[i]);
  }
  const Matrix b = sw.asDiagonal() * a * sw.cwiseInverse().asDiagonal();
  return spectral_norm(b);
}

inline double weighted_norm(const DiscreteOperator& op, const std::vector<double>& w) {
  return weighted_norm(op.entries, w);
}

/// Dense discretization of (xi d_xi)^n M_j(xi): entries h * S_j^n(u_i + log xi, u_j + log xi).
inline DiscreteOperator xi_derivative_op(KernelFamily family, int n, double xi, const Grid& grid,
                                         double tol = 1e-8) {
  require(n >= 0 && n <= 4, "xi_derivative_op: n must lie in [0, 4]");
  const auto m = static_cast<Eigen::Index>(grid.count);
  const double h = grid.h();
  Matrix out(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out(i, j) = h * kernels::kernel_at_xi(family, n, xi, grid.u(static_cast<std::size_t>(i)),
                                            grid.u(static_cast<std::size_t>(j)), tol);
    }
  }
  return {grid, out};
}

// ---------------------------------------------------------------------------
// Heat kernel through the subordination weight psi_t.

namespace detail {

// Minimal math shims so one template serves long double and __float128.
inline long double m_exp(long double x) { return std::exp(x); }
inline long double m_sinh(long double x) { return std::sinh(x); }
inline long double m_cosh(long double x) { return std::cosh(x); }
inline long double m_sin(long double x) { return std::sin(x); }
inline long double m_atan(long double x) { return std::atan(x); }
#ifdef RKL_HAVE_QUADMATH
inline __float128 m_exp(__float128 x) { return expq(x); }
inline __float128 m_sinh(__float128 x) { return sinhq(x); }
inline __float128 m_cosh(__float128 x) { return coshq(x); }
inline __float128 m_sin(__float128 x) { return sinq(x); }
inline __float128 m_atan(__float128 x) { return atanq(x); }
#endif

// Gauss-Legendre nodes at double precision are accurate to ~1e-16 only, so
// wide-precision sums use a 20-point rule refined by Newton in Real.
template <class Real>
struct WideRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

template <class Real>
WideRule<Real> wide_gauss_legendre(std::size_t n) {
  const auto& seed = quad::gauss_legendre(n);
  WideRule<Real> out;
  for (std::size_t i = 0; i < n; ++i) {
    Real x = seed.nodes[i];
    Real dp = 1;
    for (int it = 0; it < 4; ++it) {
      Real p0 = 1;
      Real p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const Real p2 = (Real(2 * k - 1) * x * p1 - Real(k - 1) * p0) / Real(k);
        p0 = p1;
        p1 = p2;
      }
      dp = Real(n) * (x * p1 - p0) / (x * x - 1);
      x -= p1 / dp;
    }
    out.nodes.push_back(x);
    out.weights.push_back(Real(2) / ((1 - x * x) * dp * dp));
  }
  return out;
}

// e^{pi^2/4t} int_0^inf sinh(th) sin(pi th / 2t) exp(-th^2/4t - cosh(th)/zeta) dth
template <class Real>
double psi_theta_integral(double t, double zeta, int refine = 1) {
  static const WideRule<Real> rule = wide_gauss_legendre<Real>(20);
  const Real pi_q = 4 * m_atan(Real(1));
  const Real tt = t;
  const Real lift = pi_q * pi_q / (4 * tt);
  // Beyond theta_max the Gaussian has removed lift + 90 e-folds.
  const double theta_max =
      2.0 * t + std::sqrt(4.0 * t * t + std::numbers::pi * std::numbers::pi + 4.0 * t * 90.0);
  const double width = 0.5 * t / refine;
  const auto panels = static_cast<std::size_t>(std::ceil(theta_max / width));
  const Real inv_zeta = Real(1) / Real(zeta);
  const Real freq = pi_q / (2 * tt);
  Real sum = 0;
  for (std::size_t p = 0; p < panels; ++p) {
    const Real left = Real(width) * Real(p);
    const Real half = Real(width) / 2;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const Real th = left + half * (rule.nodes[i] + 1);
      const Real e = lift - th * th / (4 * tt) - m_cosh(th) * inv_zeta;
      sum += half * rule.weights[i] * m_sinh(th) * m_sin(freq * th) * m_exp(e);
    }
  }
  return static_cast<double>(sum);
}

}  // namespace detail

struct PsiValue {
  double value = 0.0;
  double abs_error = 0.0;
};

/// psi_t(zeta) with an error estimate from halving the theta panels. Long
/// double suffices while e^{pi^2/4t} stays below ~1e11; smaller t needs quad
/// precision to survive the cancellation.
inline PsiValue psi_weight_report(double t, double zeta, bool estimate_error = true) {
  require(t >= 0.05 && t <= 5.0, "psi_weight: t must lie in [0.05, 5]");
  require(zeta > 0.0 && std::isfinite(zeta), "psi_weight: zeta must be positive");
  auto integral = [&](int refine) {
#ifdef RKL_HAVE_QUADMATH
    if (t < 0.1) return detail::psi_theta_integral<__float128>(t, zeta, refine);
#else
    if (t < 0.1) throw ConvergenceError("psi_weight: t < 0.1 requires quad precision support");
#endif
    return detail::psi_theta_integral<long double>(t, zeta, refine);
  };
  const double norm = zeta * zeta * std::sqrt(4.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi * t);
  const double coarse = integral(1);
  if (!estimate_error) return {coarse / norm, 0.0};
  const double fine = integral(2);
  const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(coarse);
  return {coarse / norm, std::max(std::abs(fine - coarse), rounding) / norm};
}

/// psi_t(zeta).
inline double psi_weight(double t, double zeta) { return psi_weight_report(t, zeta, false).value; }

/// Heat kernel of e^{-t H(xi)} as a zeta-integral against psi_t. The psi
/// values are computed once per t on a log-zeta grid and reused.
class GnewuchHeatKernel {
 public:
  explicit GnewuchHeatKernel(double t) : t_(t) {
    require(t >= 0.05 && t <= 5.0, "heat_kernel_gnewuch: t must lie in [0.05, 5]");
    const auto& rule = quad::gauss_legendre(8);
    const double width = (kSMax - kSMin) / static_cast<double>(kPanels);
    for (std::size_t p = 0; p < kPanels; ++p) {
      const double left = kSMin + width * static_cast<double>(p);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double s = left + 0.5 * width * (rule.nodes[i] + 1.0);
        const double zeta = std::exp(s);
        zeta_.push_back(zeta);
        weight_.push_back(0.5 * width * rule.weights[i] * zeta * psi_weight(t, zeta));
      }
    }
  }

  double t() const { return t_; }

  double operator()(double xi, double u, double v) const {
    const double c = std::cosh(u - v);
    const double q = 0.5 * std::exp(u + v) * xi * xi;
    double sum = 0.0;
    for (std::size_t k = 0; k < zeta_.size(); ++k) {
      sum += weight_[k] * std::exp(-c / zeta_[k] - q * zeta_[k]);
    }
    return sum;
  }

  /// Shared per-t instance; thread safe.
  static std::shared_ptr<const GnewuchHeatKernel> cached(double t) {
    static std::mutex mutex;
    static std::map<double, std::shared_ptr<const GnewuchHeatKernel>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(t);
    if (it != cache.end()) return it->second;
    auto made = std::make_shared<const GnewuchHeatKernel>(t);
    cache.emplace(t, made);
    return made;
  }

 private:
  static constexpr double kSMin = -5.0;
  static constexpr double kSMax = 17.0;
  static constexpr std::size_t kPanels = 88;
  double t_;
  std::vector<double> zeta_;
  std::vector<double> weight_;
};

inline double heat_kernel_gnewuch(double xi, double t, double u, double v) {
  require(xi > 0.0, "heat_kernel_gnewuch: xi must be positive");
  return (*GnewuchHeatKernel::cached(t))(xi, u, v);
}

}  // namespace rkl::schrodinger
