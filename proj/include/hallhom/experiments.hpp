// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_EXPERIMENTS_HPP
#define HALLHOM_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hallhom/cell_solver.hpp"
#include "hallhom/closed_forms.hpp"
#include "hallhom/dykhne.hpp"
#include "hallhom/error.hpp"
#include "hallhom/microstructure.hpp"
#include "hallhom/tensor.hpp"

namespace hallhom
{

struct SweepRecord
{
  int n = 0;
  double feature = 0.0;       // t or r
  double theta_nominal = 0.0; // analytic phase-2 measure from the plan
  double theta = 0.0;         // measured raster measure, used for the scaling
  int resolution = 0;
  double alpha2n = 0.0;
  double beta2n = 0.0;
  bool pre_asymptotic = false;

  bool ok = false;
  bool nonconvergence = false;
  std::string error;

  int dim = 2;
  std::vector<double> computed;  // row-major
  std::vector<double> predicted; // row-major
  std::vector<double> rel_error; // entrywise
  std::vector<double> residuals;
  std::vector<std::size_t> iterations;
  double wall_time_s = 0.0;

  // 3D fiber only
  bool has_xi = false;
  double xi_ratio[2] = {0.0, 0.0};
  double xi_predicted[2] = {0.0, 0.0};
  double epsilon = 0.0;
  double epsilon_flag = 0.0;

  double max_rel_error() const
  {
    double m = 0.0;
    for (double e : rel_error)
      m = std::max(m, e);
    return ok ? m : std::numeric_limits<double>::quiet_NaN();
  }
};

struct SweepResult
{
  std::string kind; // "cross" or "fiber3d"
  int dim = 2;
  LimitPhases phases;
  double ell = 1.0;
  std::vector<double> h;
  bool fixed_beta = false;
  bool epsilon_warning = false; // eps^2 |ln r| supplied but not decreasing
  std::vector<SweepRecord> records;

  bool all_ok() const
  {
    return std::all_of(records.begin(), records.end(), [](const SweepRecord &r) { return r.ok; });
  }
  bool any_nonconvergence() const
  {
    return std::any_of(records.begin(), records.end(), [](const SweepRecord &r) { return r.nonconvergence; });
  }
};

/// |c - p| / |p|, or relative to the norm of the whole predicted tensor when
/// the predicted entry vanishes.
inline double entry_relative_error(double computed, double predicted, double predicted_norm)
{
  const double diff = std::abs(computed - predicted);
  if (std::abs(predicted) > 1e-12 * predicted_norm)
    return diff / std::abs(predicted);
  return diff / std::max(predicted_norm, 1e-300);
}

namespace detail
{

template <int D>
void fill_comparison(SweepRecord &rec, const EffectiveTensor<D> &eff, const Mat<D> &pred)
{
  rec.dim = D;
  const double pn = frobenius_norm(pred);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      rec.computed.push_back(eff.matrix(i, j));
      rec.predicted.push_back(pred(i, j));
      rec.rel_error.push_back(entry_relative_error(eff.matrix(i, j), pred(i, j), pn));
    }
  rec.residuals.assign(eff.residuals.begin(), eff.residuals.end());
  rec.iterations.assign(eff.iterations.begin(), eff.iterations.end());
}

// Runs job(i) for i in [0, count) on up to `threads` workers. Results are
// stored by index, so the outcome does not depend on scheduling.
template <class Job>
void run_indexed(std::size_t count, int threads, Job &&job)
{
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++)
        job(i);
    });
  for (auto &t : pool)
    t.join();
}

template <class Body>
void guarded(SweepRecord &rec, Body &&body)
{
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
    rec.ok = true;
  } catch (const NonConvergenceError &e) {
    rec.nonconvergence = true;
    rec.error = e.what();
  } catch (const Error &e) {
    rec.error = e.what();
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Cross-structure sweep. Each term is scaled by its measured raster area,
/// alpha2n = alpha2 / theta_hat, so that theta_hat alpha2n = alpha2 holds on
/// the grid actually solved. Failed terms are annotated, not fatal.
inline SweepResult run_cross_sweep(const LimitPhases &phases, double ell, double h, const SweepPlan &plan,
                                   const SolverConfig &cfg = {}, int threads = 1)
{
  phases.validate();
  cfg.validate();
  if (plan.dim != 2)
    throw InvalidArgument("cross sweep needs a 2D plan");
  SweepResult out;
  out.kind = "cross";
  out.dim = 2;
  out.phases = phases;
  out.ell = ell;
  out.h = {h};
  out.fixed_beta = plan.fixed_beta;
  out.records.resize(plan.terms.size());
  const Mat2 predicted = cross_formula(phases, ell, h);

  detail::run_indexed(plan.terms.size(), threads, [&](std::size_t i) {
    const SweepTerm &term = plan.terms[i];
    SweepRecord &rec = out.records[i];
    rec.n = static_cast<int>(i);
    rec.feature = term.feature;
    rec.theta_nominal = term.theta;
    rec.resolution = term.resolution;
    detail::guarded(rec, [&] {
      const PhaseMask mask = build_cross_cell(term.feature, ell, term.resolution);
      rec.theta = mask.phase2_measure();
      rec.alpha2n = phases.alpha2 / rec.theta;
      rec.beta2n = plan.fixed_beta ? phases.beta2 : phases.beta2 / rec.theta;
      rec.pre_asymptotic = mask.volume_fraction() >= 0.5;
      const auto field = assemble_conductivity<2>(mask, phases.phase1(), {rec.alpha2n, rec.beta2n}, h);
      detail::fill_comparison(rec, effective_tensor(field, cfg), predicted);
    });
  });
  return out;
}

/// 3D fiber sweep. Also records the fiber-averaged gradient ratios
/// (xi1/xi3, xi2/xi3) of the e3 corrector against the closed-form values.
inline SweepResult run_fiber_sweep_3d(const LimitPhases &phases, const Vec3 &h, const SweepPlan &plan,
                                      const SolverConfig &cfg = {}, int threads = 1)
{
  phases.validate();
  cfg.validate();
  if (plan.dim != 3)
    throw InvalidArgument("fiber sweep needs a 3D plan");
  SweepResult out;
  out.kind = "fiber3d";
  out.dim = 3;
  out.phases = phases;
  out.h = {h[0], h[1], h[2]};
  out.fixed_beta = plan.fixed_beta;
  out.records.resize(plan.terms.size());
  const Mat3 predicted = fiber_formula_3d(phases, h);
  const auto [c1, c2] = fiber_xi_coefficients(phases, h);

  detail::run_indexed(plan.terms.size(), threads, [&](std::size_t i) {
    const SweepTerm &term = plan.terms[i];
    SweepRecord &rec = out.records[i];
    rec.n = static_cast<int>(i);
    rec.feature = term.feature;
    rec.theta_nominal = term.theta;
    rec.resolution = term.resolution;
    rec.epsilon = term.epsilon;
    rec.epsilon_flag = term.epsilon_flag;
    detail::guarded(rec, [&] {
      const PhaseMask mask = build_fiber_cell_3d(term.feature, term.resolution);
      rec.theta = mask.phase2_measure();
      rec.alpha2n = phases.alpha2 / rec.theta;
      rec.beta2n = plan.fixed_beta ? phases.beta2 : phases.beta2 / rec.theta;
      rec.pre_asymptotic = mask.volume_fraction() >= 0.5;
      const auto field = assemble_conductivity<3>(mask, phases.phase1(), {rec.alpha2n, rec.beta2n}, h);
      const auto hom = homogenize(field, cfg);
      detail::fill_comparison(rec, hom.tensor, predicted);
      const Vec3 xi = fiber_average_gradient(hom.correctors[2], mask);
      rec.has_xi = true;
      rec.xi_ratio[0] = xi[0] / xi[2];
      rec.xi_ratio[1] = xi[1] / xi[2];
      rec.xi_predicted[0] = c1;
      rec.xi_predicted[1] = c2;
    });
  });

  for (std::size_t i = 1; i < plan.terms.size(); ++i)
    if (plan.terms[i].epsilon > 0.0 && !(plan.terms[i].epsilon_flag < plan.terms[i - 1].epsilon_flag))
      out.epsilon_warning = true;
  return out;
}

// ---------------------------------------------------------------------------
// Duality and transform identities on a two-phase 2D field

struct DykhneCheck
{
  DykhneCoefficients coeffs;
  Mat2 transformed_sigma_star; // effective tensor of the pointwise transformed field
  Mat2 predicted;              // dual_push_forward of the original effective tensor
  double deviation = 0.0;      // |transformed - predicted| / max norm
  double pointwise_asymmetry = 0.0; // max over phases of |skew| / |A|
};

struct DualityReport
{
  Mat2 sigma_star;
  Mat2 dual_sigma_star; // effective tensor of the pointwise Keller dual field
  Mat2 keller_predicted;
  double keller_deviation = 0.0;
  std::optional<DykhneCheck> dykhne;
  std::string dykhne_skipped; // reason when dykhne is empty
  std::vector<std::size_t> iterations;
};

/// Frobenius distance relative to the larger of the two norms.
inline double relative_deviation(const Mat2 &a, const Mat2 &b)
{
  const double scale = std::max({frobenius_norm(a), frobenius_norm(b), 1e-300});
  return frobenius_norm(a - b) / scale;
}

inline DualityReport run_duality_harness(const PhaseMask &mask, const PerturbedPhase &phase1,
                                         const PerturbedPhase &phase2, double h, const SolverConfig &cfg = {},
                                         int threads = 1)
{
  if (mask.geometry.dim != 2)
    throw InvalidArgument("duality harness is two-dimensional");
  cfg.validate();
  DualityReport rep;
  const auto field = assemble_conductivity<2>(mask, phase1, phase2, h);
  const auto eff = effective_tensor(field, cfg, threads);
  rep.sigma_star = eff.matrix;
  rep.iterations.assign(eff.iterations.begin(), eff.iterations.end());

  const auto dual_field = field.map([](const Mat2 &a) { return keller_dual(a); });
  const auto dual_eff = effective_tensor(dual_field, cfg, threads);
  rep.dual_sigma_star = dual_eff.matrix;
  rep.keller_predicted = keller_dual(rep.sigma_star);
  rep.keller_deviation = relative_deviation(rep.dual_sigma_star, rep.keller_predicted);
  rep.iterations.insert(rep.iterations.end(), dual_eff.iterations.begin(), dual_eff.iterations.end());

  DykhneCoefficients c;
  try {
    c = dykhne_coefficients(phase1, phase2, h);
  } catch (const DegenerateTransformError &e) {
    rep.dykhne_skipped = e.what();
    return rep;
  }
  DykhneCheck chk;
  chk.coeffs = c;
  const auto transformed = field.map([&](const Mat2 &a) { return dykhne_transform_tensor(a, c); });
  for (const auto &a : transformed.palette())
    chk.pointwise_asymmetry = std::max(chk.pointwise_asymmetry, frobenius_norm(skew_part(a)) / frobenius_norm(a));
  const auto t_eff = effective_tensor(transformed, cfg, threads);
  chk.transformed_sigma_star = t_eff.matrix;
  chk.predicted = dual_push_forward(rep.sigma_star, c);
  chk.deviation = relative_deviation(chk.transformed_sigma_star, chk.predicted);
  rep.iterations.insert(rep.iterations.end(), t_eff.iterations.begin(), t_eff.iterations.end());
  rep.dykhne = chk;
  return rep;
}

// ---------------------------------------------------------------------------
// Transformed-phase asymptotics

struct AsymptoticRow
{
  double theta;
  double alpha1_prime;
  double theta_alpha2_prime;
  double a, b, p, q, r;
};

struct AsymptoticTable
{
  LimitPhases phases;
  double h = 0.0;
  // limits (alpha1, alpha2 + beta2^2 h^2 / alpha2, 1, -h beta1, 0)
  double lim_alpha1 = 0.0, lim_theta_alpha2 = 0.0, lim_p = 1.0, lim_q = 0.0, lim_r = 0.0;
  std::vector<AsymptoticRow> rows;
};

/// Phase 2 is scaled as (alpha2/theta, beta2/theta). Degenerate inputs
/// (h = 0 or equal Hall coefficients) throw DegenerateTransformError.
inline AsymptoticTable run_dykhne_asymptotics(const LimitPhases &ph, double h, const std::vector<double> &thetas)
{
  ph.validate();
  detail::check_decreasing(thetas, "theta");
  AsymptoticTable tab;
  tab.phases = ph;
  tab.h = h;
  tab.lim_alpha1 = ph.alpha1;
  tab.lim_theta_alpha2 = ph.alpha2 + ph.beta2 * ph.beta2 * h * h / ph.alpha2;
  tab.lim_q = -h * ph.beta1;
  for (double th : thetas) {
    if (!(th > 0.0))
      throw InvalidArgument("theta must be > 0");
    const auto tp = dykhne_phase_asymptotics(ph.phase1(), {ph.alpha2 / th, ph.beta2 / th}, th, h);
    const auto &c = tp.coeffs;
    tab.rows.push_back({th, tp.alpha1_prime, tp.theta_alpha2_prime, c.a, c.b, c.p, c.q, c.r});
  }
  return tab;
}

} // namespace hallhom

#endif // HALLHOM_EXPERIMENTS_HPP
