// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_KRYLOV_HPP
#define HALLHOM_KRYLOV_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hallhom/error.hpp"

namespace hallhom
{

/// Compressed sparse row matrix. Column indices inside a row need not be
/// sorted.
struct CsrMatrix
{
  std::size_t rows = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  void apply(std::span<const double> x, std::span<double> y) const
  {
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        s += val[k] * x[col[k]];
      y[r] = s;
    }
  }

  std::vector<double> diagonal() const
  {
    std::vector<double> d(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col[k] == r)
          d[r] += val[k];
    return d;
  }
};

enum class Preconditioner { None, Diagonal };
enum class KrylovMethod { Auto, CG, BiCGStab, GMRES };

inline std::string to_string(KrylovMethod m)
{
  switch (m) {
  case KrylovMethod::Auto: return "auto";
  case KrylovMethod::CG: return "cg";
  case KrylovMethod::BiCGStab: return "bicgstab";
  case KrylovMethod::GMRES: return "gmres";
  }
  return "?";
}

inline std::string to_string(Preconditioner p) { return p == Preconditioner::None ? "none" : "diagonal"; }

struct SolverConfig
{
  double tolerance = 1e-9; // relative residual |b - A x| / |b|
  std::size_t max_iterations = 100000;
  Preconditioner preconditioner = Preconditioner::Diagonal;
  int restart = 60; // GMRES(m) restart length
  // Auto picks CG for symmetric operators and BiCGStab otherwise.
  KrylovMethod method = KrylovMethod::Auto;

  void validate() const
  {
    if (!(tolerance > 0.0 && tolerance <= 1e-3))
      throw InvalidArgument("solver tolerance must lie in (0, 1e-3]");
    if (max_iterations == 0)
      throw InvalidArgument("max_iterations must be positive");
    if (restart < 2)
      throw InvalidArgument("restart length must be >= 2");
  }
};

struct SolveStats
{
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  KrylovMethod method = KrylovMethod::Auto;
};

namespace detail
{

inline double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// y += s x
inline void axpy(double s, std::span<const double> x, std::span<double> y)
{
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] += s * x[i];
}

/// Removes the mean (the constant null vector of periodic operators).
inline void project_out_constant(std::span<double> v)
{
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (auto &x : v)
    x -= mean;
}

class KrylovContext
{
public:
  KrylovContext(const CsrMatrix &a, const SolverConfig &cfg, bool project)
    : a_(a), project_(project)
  {
    if (cfg.preconditioner == Preconditioner::Diagonal) {
      inv_diag_ = a.diagonal();
      for (auto &d : inv_diag_) {
        if (d == 0.0)
          throw InvalidArgument("diagonal preconditioner: zero diagonal entry");
        d = 1.0 / d;
      }
    }
  }

  void apply(std::span<const double> x, std::span<double> y) const { a_.apply(x, y); }

  void precondition(std::span<const double> r, std::span<double> z) const
  {
    if (inv_diag_.empty())
      std::copy(r.begin(), r.end(), z.begin());
    else
      for (std::size_t i = 0; i < r.size(); ++i)
        z[i] = inv_diag_[i] * r[i];
    project(z);
  }

  void project(std::span<double> v) const
  {
    if (project_)
      project_out_constant(v);
  }

  void residual(std::span<const double> b, std::span<const double> x, std::span<double> r) const
  {
    a_.apply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] = b[i] - r[i];
    project(r);
  }

private:
  const CsrMatrix &a_;
  bool project_;
  std::vector<double> inv_diag_;
};

[[noreturn]] inline void fail(const char *name, double best, std::size_t it)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", best);
  throw NonConvergenceError(std::string(name) + " did not converge: best relative residual " + buf +
                                " after " + std::to_string(it) + " iterations",
                            best, it);
}

inline SolveStats solve_cg(const KrylovContext &ctx, std::span<const double> b, std::span<double> x,
                           const SolverConfig &cfg, double bnorm)
{
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), ap(n);
  ctx.residual(b, x, r);
  double best = norm2(r) / bnorm;
  if (best <= cfg.tolerance)
    return {0, best, KrylovMethod::CG};
  ctx.precondition(r, z);
  p = z;
  double rz = dot(r, z);
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    ctx.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0))
      fail("cg (operator not positive definite)", best, it);
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    ctx.project(r);
    const double res = norm2(r) / bnorm;
    best = std::min(best, res);
    if (res <= cfg.tolerance) {
      // Guard against drift of the recursive residual.
      ctx.residual(b, x, r);
      const double true_res = norm2(r) / bnorm;
      if (true_res <= cfg.tolerance)
        return {it, true_res, KrylovMethod::CG};
    }
    ctx.precondition(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i)
      p[i] = z[i] + beta * p[i];
  }
  fail("cg", best, cfg.max_iterations);
}

// Iterations without a 1% drop of the residual before BiCGStab gives up.
// It stalls this way on strongly skew operators.
inline constexpr std::size_t kBicgstabPatience = 1000;

inline SolveStats solve_bicgstab(const KrylovContext &ctx, std::span<const double> b, std::span<double> x,
                                 const SolverConfig &cfg, double bnorm)
{
  const std::size_t n = b.size();
  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
  ctx.residual(b, x, r);
  double best = norm2(r) / bnorm;
  if (best <= cfg.tolerance)
    return {0, best, KrylovMethod::BiCGStab};
  rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double mark = best;
  std::size_t mark_it = 0;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    const double rho_new = dot(rhat, r);
    if (std::abs(rho_new) < 1e-30 * dot(rhat, rhat) + 1e-300 || omega == 0.0) {
      // Breakdown: re-seed the shadow residual with the current one.
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
      continue;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i)
      p[i] = r[i] + beta * (p[i] - omega * v[i]);
    ctx.precondition(p, phat);
    ctx.apply(phat, v);
    ctx.project(v);
    const double rv = dot(rhat, v);
    if (rv == 0.0) {
      rhat = r;
      rho = alpha = omega = 1.0;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      continue;
    }
    alpha = rho / rv;
    for (std::size_t i = 0; i < n; ++i)
      s[i] = r[i] - alpha * v[i];
    ctx.precondition(s, shat);
    ctx.apply(shat, t);
    ctx.project(t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    axpy(alpha, phat, x);
    axpy(omega, shat, x);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = s[i] - omega * t[i];
    const double res = norm2(r) / bnorm;
    best = std::min(best, res);
    if (res < 0.99 * mark) {
      mark = res;
      mark_it = it;
    } else if (it - mark_it > kBicgstabPatience) {
      fail("bicgstab", best, it);
    }
    if (res <= cfg.tolerance) {
      ctx.residual(b, x, r);
      const double true_res = norm2(r) / bnorm;
      if (true_res <= cfg.tolerance)
        return {it, true_res, KrylovMethod::BiCGStab};
      rhat = r;
      rho = alpha = omega = 1.0;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
    }
  }
  fail("bicgstab", best, cfg.max_iterations);
}

// Right-preconditioned restarted GMRES with Givens rotations.
inline SolveStats solve_gmres(const KrylovContext &ctx, std::span<const double> b, std::span<double> x,
                              const SolverConfig &cfg, double bnorm)
{
  const std::size_t n = b.size();
  const int m = cfg.restart;
  std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> zs(m, std::vector<double>(n));
  std::vector<double> h((m + 1) * m), cs(m), sn(m), g(m + 1), w(n), r(n);
  auto H = [&](int i, int j) -> double & { return h[i * m + j]; };

  ctx.residual(b, x, r);
  double best = norm2(r) / bnorm;
  if (best <= cfg.tolerance)
    return {0, best, KrylovMethod::GMRES};
  std::size_t it = 0;
  while (it < cfg.max_iterations) {
    const double beta = norm2(r);
    for (std::size_t i = 0; i < n; ++i)
      basis[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m && it < cfg.max_iterations; ++k) {
      ++it;
      ctx.precondition(basis[k], zs[k]);
      ctx.apply(zs[k], w);
      ctx.project(w);
      for (int j = 0; j <= k; ++j) {
        H(j, k) = dot(w, basis[j]);
        axpy(-H(j, k), basis[j], w);
      }
      H(k + 1, k) = norm2(w);
      if (H(k + 1, k) > 0.0)
        for (std::size_t i = 0; i < n; ++i)
          basis[k + 1][i] = w[i] / H(k + 1, k);
      for (int j = 0; j < k; ++j) {
        const double tmp = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
        H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
        H(j, k) = tmp;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / denom;
      sn[k] = H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      best = std::min(best, std::abs(g[k + 1]) / bnorm);
      if (std::abs(g[k + 1]) / bnorm <= cfg.tolerance) {
        ++k;
        break;
      }
    }
    // Back-substitute and update x with the preconditioned basis.
    std::vector<double> y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j)
        s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    for (int j = 0; j < k; ++j)
      axpy(y[j], zs[j], x);
    ctx.residual(b, x, r);
    const double res = norm2(r) / bnorm;
    best = std::min(best, res);
    if (res <= cfg.tolerance)
      return {it, res, KrylovMethod::GMRES};
  }
  fail("gmres", best, cfg.max_iterations);
}

} // namespace detail

/// Solves A x = b to relative residual cfg.tolerance, starting from x.
/// With `project_constants`, A is a periodic operator whose null space is
/// the constants: iterates and residuals are kept mean-free, and b must be
/// mean-free as well.
inline SolveStats solve(const CsrMatrix &a, std::span<const double> b, std::span<double> x,
                        const SolverConfig &cfg, bool symmetric, bool project_constants)
{
  cfg.validate();
  if (b.size() != a.rows || x.size() != a.rows)
    throw InvalidArgument("solve: dimension mismatch");
  const double bnorm = detail::norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0, cfg.method};
  }
  if (project_constants)
    detail::project_out_constant(x);
  const detail::KrylovContext ctx(a, cfg, project_constants);
  KrylovMethod method = cfg.method;
  if (method == KrylovMethod::Auto)
    method = symmetric ? KrylovMethod::CG : KrylovMethod::Auto;
  switch (method) {
  case KrylovMethod::CG:
    return detail::solve_cg(ctx, b, x, cfg, bnorm);
  case KrylovMethod::GMRES:
    return detail::solve_gmres(ctx, b, x, cfg, bnorm);
  case KrylovMethod::BiCGStab:
    return detail::solve_bicgstab(ctx, b, x, cfg, bnorm);
  default:
    break;
  }
  // Auto on a non-symmetric operator: BiCGStab first, GMRES from the
  // initial guess if it stagnates (the stalled iterate can be far off).
  const std::vector<double> x0(x.begin(), x.end());
  try {
    return detail::solve_bicgstab(ctx, b, x, cfg, bnorm);
  } catch (const NonConvergenceError &e) {
    if (e.iterations() >= cfg.max_iterations)
      throw;
    std::copy(x0.begin(), x0.end(), x.begin());
    SolverConfig rest = cfg;
    rest.max_iterations = cfg.max_iterations - e.iterations();
    SolveStats st = detail::solve_gmres(ctx, b, x, rest, bnorm);
    st.iterations += e.iterations();
    return st;
  }
}

} // namespace hallhom

#endif // HALLHOM_KRYLOV_HPP
