// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_CLOSED_FORMS_HPP
#define HALLHOM_CLOSED_FORMS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hallhom/error.hpp"
#include "hallhom/microstructure.hpp"
#include "hallhom/tensor.hpp"

namespace hallhom
{

/// Limit constants of a two-phase sequence: the matrix phase (alpha1, beta1)
/// and the rescaled inclusion phase (alpha2, beta2), where the inclusion
/// conductivity times its measure tends to alpha2.
struct LimitPhases
{
  double alpha1 = 1.0;
  double beta1 = 0.0;
  double alpha2 = 1.0;
  double beta2 = 0.0;

  void validate() const
  {
    if (!(alpha1 > 0.0) || !std::isfinite(alpha1))
      throw InvalidArgument("alpha1 must be > 0");
    if (!(alpha2 > 0.0) || !std::isfinite(alpha2))
      throw InvalidArgument("alpha2 must be > 0");
    if (!std::isfinite(beta1) || !std::isfinite(beta2))
      throw InvalidArgument("beta1 and beta2 must be finite");
  }

  PerturbedPhase phase1() const { return {alpha1, beta1}; }
};

using Sigma0 = std::function<Mat2(double, double)>;

/// sigma0(alpha1, alpha2 + beta2^2 h^2 / alpha2) + beta1 h J
inline Mat2 homogenized_law_2d(const Sigma0 &sigma0, const LimitPhases &ph, double h)
{
  ph.validate();
  const double shifted = ph.alpha2 + ph.beta2 * ph.beta2 * h * h / ph.alpha2;
  return sigma0(ph.alpha1, shifted) + (ph.beta1 * h) * rotation_j();
}

inline Mat2 cross_sigma0(double a1, double a2, double ell)
{
  if (!(ell >= 1.0))
    throw InvalidArgument("cross aspect ell must be >= 1");
  return Mat2::Diagonal({a1 + a2 / (ell + 1.0), a1 + a2 / (ell * (ell + 1.0))});
}

inline Sigma0 cross_sigma0_fn(double ell)
{
  return [ell](double a1, double a2) { return cross_sigma0(a1, a2, ell); };
}

/// Limit tensor of the cross-like thin structure.
inline Mat2 cross_formula(const LimitPhases &ph, double ell, double h)
{
  ph.validate();
  if (!(ell >= 1.0))
    throw InvalidArgument("cross aspect ell must be >= 1");
  const double w = (ph.alpha2 * ph.alpha2 + ph.beta2 * ph.beta2 * h * h) / ph.alpha2;
  Mat2 m = Mat2::Diagonal({ph.alpha1 + w / (ell + 1.0), ph.alpha1 + w / (ell * (ell + 1.0))});
  m(0, 1) = -h * ph.beta1;
  m(1, 0) = h * ph.beta1;
  return m;
}

struct Bounds
{
  double lower;
  double upper;
};

/// Nested line-average bounds on the diagonal entry (axis, axis) of the
/// effective tensor of the scalar two-phase field a1 (1 - chi) + a2 chi.
///   lower: arithmetic mean over the transverse lines of the harmonic mean along `axis`
///   upper: harmonic mean along `axis` of the arithmetic means over transverse slices
/// Both are exact statements about the discrete Q1 solution on the mask grid.
inline Bounds voigt_reuss_bounds(const PhaseMask &mask, double a1, double a2, int axis)
{
  const CellGeometry &g = mask.geometry;
  if (axis < 0 || axis >= g.dim)
    throw InvalidArgument("axis out of range");
  if (!(a1 > 0.0) || !(a2 > 0.0))
    throw InvalidArgument("phase conductivities must be > 0");
  const int na = g.n[axis];
  const std::size_t lines = g.num_elements() / static_cast<std::size_t>(na);

  std::vector<double> inv_line(lines, 0.0); // sum of 1/a along each line
  std::vector<double> slice(na, 0.0);        // sum of a over each transverse slice
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const double a = mask.at(i, j, k) ? a2 : a1;
        const std::array<int, 3> idx{i, j, k};
        std::size_t line = 0, stride = 1;
        for (int d = 0; d < 3; ++d) {
          if (d == axis)
            continue;
          line += static_cast<std::size_t>(idx[d]) * stride;
          stride *= static_cast<std::size_t>(g.n[d]);
        }
        inv_line[line] += 1.0 / a;
        slice[idx[axis]] += a;
      }

  double lower = 0.0;
  for (double s : inv_line)
    lower += na / s;
  lower /= static_cast<double>(lines);

  double inv_upper = 0.0;
  for (double s : slice)
    inv_upper += static_cast<double>(lines) / s;
  const double upper = na / inv_upper;
  return {lower, upper};
}

/// alpha1 I + c e3 (x) e3 + beta1 E(h), c = (alpha2^3 + alpha2 beta2^2 |h|^2)/(alpha2^2 + beta2^2 h3^2)
inline Mat3 fiber_formula_3d(const LimitPhases &ph, const Vec3 &h)
{
  ph.validate();
  const double h2 = h[0] * h[0] + h[1] * h[1] + h[2] * h[2];
  const double a2 = ph.alpha2, b2 = ph.beta2;
  const double c = (a2 * a2 * a2 + a2 * b2 * b2 * h2) / (a2 * a2 + b2 * b2 * h[2] * h[2]);
  Mat3 m = ph.alpha1 * Mat3::Identity() + ph.beta1 * cross_matrix(h);
  m(2, 2) += c;
  return m;
}

/// Three orthogonal fiber lattices: one fiber coefficient per axis.
inline Mat3 triaxial_formula(const LimitPhases &ph, const Vec3 &h)
{
  ph.validate();
  const double h2 = h[0] * h[0] + h[1] * h[1] + h[2] * h[2];
  const double a2 = ph.alpha2, b2 = ph.beta2;
  Mat3 m = ph.alpha1 * Mat3::Identity() + ph.beta1 * cross_matrix(h);
  for (int i = 0; i < 3; ++i)
    m(i, i) += (a2 * a2 * a2 + a2 * b2 * b2 * h2) / (a2 * a2 + b2 * b2 * h[i] * h[i]);
  return m;
}

/// (c1, c2) with xi1 = c1 xi3 and xi2 = c2 xi3 inside the fiber.
inline std::pair<double, double> fiber_xi_coefficients(const LimitPhases &ph, const Vec3 &h)
{
  ph.validate();
  const double a2 = ph.alpha2, b2 = ph.beta2;
  const double den = a2 * a2 + b2 * b2 * h[2] * h[2];
  return {(b2 * b2 * h[0] * h[2] - a2 * b2 * h[1]) / den, (b2 * b2 * h[1] * h[2] + a2 * b2 * h[0]) / den};
}

// ---------------------------------------------------------------------------
// Sweep plans

struct SweepTerm
{
  double feature = 0.0;    // bar half-width t (2D) or fiber radius r (3D)
  double theta = 0.0;      // phase-2 measure in the period cell
  double alpha2n = 0.0;    // alpha2 / theta
  double beta2n = 0.0;     // beta2 / theta, or beta2 with fixed_beta
  int resolution = 0;      // elements per unit length
  double epsilon = 0.0;      // 3D only, optional period eps_n (report only, 0 = unset)
  double epsilon_flag = 0.0; // eps^2 |ln r|
};

struct SweepPlan
{
  int dim = 2;
  bool fixed_beta = false; // beta2n held at beta2: outside the strong-field theory
  std::vector<SweepTerm> terms;
};

inline int default_cross_resolution(double t) { return std::max(CellGeometry::kMinResolution, static_cast<int>(std::ceil(8.0 / (2.0 * t) - 1e-9))); }

inline int default_fiber_resolution(double r)
{
  return std::clamp(static_cast<int>(std::ceil(6.0 / (2.0 * r) - 1e-9)), CellGeometry::kMinResolution, 64);
}

namespace detail
{

inline void check_decreasing(const std::vector<double> &v, const char *name)
{
  if (v.empty())
    throw InvalidArgument(std::string("empty ") + name + " list");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1]))
      throw InvalidArgument(std::string(name) + " values must be strictly decreasing");
}

inline SweepTerm make_term(const LimitPhases &ph, double feature, double theta, int res, bool fixed_beta)
{
  SweepTerm s;
  s.feature = feature;
  s.theta = theta;
  s.alpha2n = ph.alpha2 / theta;
  s.beta2n = fixed_beta ? ph.beta2 : ph.beta2 / theta;
  s.resolution = res;
  return s;
}

} // namespace detail

/// theta_n is the bar-union area 2t(ell+1) - 4t^2, so theta_n alpha2n = alpha2.
/// `resolution` <= 0 selects the default coupling to t.
inline SweepPlan make_cross_plan(const LimitPhases &ph, double ell, const std::vector<double> &t_values,
                                 int resolution = 0, bool fixed_beta = false)
{
  ph.validate();
  detail::check_decreasing(t_values, "t");
  SweepPlan plan;
  plan.dim = 2;
  plan.fixed_beta = fixed_beta;
  for (double t : t_values) {
    if (!(t > 0.0 && t <= 0.5))
      throw InvalidArgument("t must lie in (0, 1/2]");
    plan.terms.push_back(detail::make_term(ph, t, cross_area(t, ell),
                                           resolution > 0 ? resolution : default_cross_resolution(t), fixed_beta));
  }
  return plan;
}

/// theta_n = pi r^2. `epsilon` optionally gives the period eps_n of each
/// term; it only feeds the eps^2 |ln r| annotation.
inline SweepPlan make_fiber_plan(const LimitPhases &ph, const std::vector<double> &r_values, int resolution = 0,
                                 bool fixed_beta = false, const std::vector<double> &epsilon = {})
{
  ph.validate();
  detail::check_decreasing(r_values, "r");
  if (!epsilon.empty() && epsilon.size() != r_values.size())
    throw InvalidArgument("epsilon needs one value per r");
  SweepPlan plan;
  plan.dim = 3;
  plan.fixed_beta = fixed_beta;
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    const double r = r_values[i];
    if (!(r > 0.0 && r < 0.5))
      throw InvalidArgument("r must lie in (0, 1/2)");
    auto term = detail::make_term(ph, r, M_PI * r * r,
                                  resolution > 0 ? resolution : default_fiber_resolution(r), fixed_beta);
    if (!epsilon.empty()) {
      if (!(epsilon[i] > 0.0))
        throw InvalidArgument("epsilon must be > 0");
      term.epsilon = epsilon[i];
      term.epsilon_flag = epsilon[i] * epsilon[i] * std::abs(std::log(r));
    }
    plan.terms.push_back(term);
  }
  return plan;
}

} // namespace hallhom

#endif // HALLHOM_CLOSED_FORMS_HPP
