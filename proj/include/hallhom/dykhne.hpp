// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_DYKHNE_HPP
#define HALLHOM_DYKHNE_HPP

#include <cmath>
#include <limits>
#include <utility>

#include "hallhom/error.hpp"
#include "hallhom/tensor.hpp"

namespace hallhom
{

/// Keller dual A^T / det A. The map is an involution and commutes with
/// two-dimensional homogenization.
inline Mat2 keller_dual(const Mat2 &a, double rel_tol = 1e-14)
{
  const double d = det(a);
  if (!(std::abs(d) > rel_tol * max_abs_entry(a) * max_abs_entry(a)))
    throw SingularMatrixError("keller_dual: determinant vanishes");
  return transpose(a) * (1.0 / d);
}

/// Coefficients of the fractional-linear map
///   A -> ((p A + q J)^{-1} + r J)^{-1} = (a A + b J)(a I + J A)^{-1}
/// with p = a^2/(a^2+b), q = a b/(a^2+b), r = 1/a.
///
/// Identity() is the bypass used when no transform is needed (h = 0 or
/// equal Hall coefficients); it has a = +inf, b = 0 and (p, q, r) = (1, 0, 0).
struct DykhneCoefficients
{
  double a = std::numeric_limits<double>::infinity();
  double b = 0.0;
  double p = 1.0;
  double q = 0.0;
  double r = 0.0;

  static DykhneCoefficients Identity() { return {}; }

  static DykhneCoefficients FromAB(double a, double b)
  {
    if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b))
      throw InvalidArgument("Dykhne coefficient a must be finite and nonzero");
    const double s = a * a + b;
    if (s == 0.0)
      throw InvalidArgument("Dykhne coefficients need a^2 + b != 0");
    return {a, b, a * a / s, a * b / s, 1.0 / a};
  }

  bool is_identity() const { return std::isinf(a); }

  /// (p, q, r) agree with (a, b) to the given relative tolerance.
  bool consistent(double rel_tol = 1e-12) const
  {
    if (is_identity())
      return p == 1.0 && q == 0.0 && r == 0.0 && b == 0.0;
    const double s = a * a + b;
    auto close = [&](double x, double y) {
      return std::abs(x - y) <= rel_tol * std::max({std::abs(x), std::abs(y), 1e-300});
    };
    return close(p, a * a / s) && close(q, a * b / s) && close(r, 1.0 / a);
  }
};

namespace detail
{

// Moebius image (a z + i b)/(a + i z) of z = alpha + i h beta.
inline ComplexScalar moebius(double a, double b, ComplexScalar z)
{
  const ComplexScalar i(0.0, 1.0);
  return (a * z + i * b) / (a + i * z);
}

// b from the reality condition on the phase (alpha, beta). Both expressions
// of the condition agree at a root; the one with the larger denominator is
// better conditioned.
inline double b_from_root(double a, double h, const PerturbedPhase &p1, const PerturbedPhase &p2)
{
  const double d1 = p1.alpha() * p1.alpha() + h * h * p1.beta() * p1.beta();
  const double d2 = p2.alpha() * p2.alpha() + h * h * p2.beta() * p2.beta();
  const double den1 = a - h * p1.beta();
  const double den2 = a - h * p2.beta();
  if (std::abs(den1) >= std::abs(den2))
    return (-a * a * h * p1.beta() + a * d1) / den1;
  return (-a * a * h * p2.beta() + a * d2) / den2;
}

// Real part of the transformed phase has the sign of a^2 + b; both
// transformed phases must be strictly positive.
inline bool yields_positive_medium(double a, double b, double h, const PerturbedPhase &p1,
                                   const PerturbedPhase &p2)
{
  if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b) || !(a * a + b > 0.0))
    return false;
  for (const auto &ph : {p1, p2}) {
    const ComplexScalar w = moebius(a, b, {ph.alpha(), h * ph.beta()});
    if (!(w.real() > 0.0))
      return false;
  }
  return true;
}

} // namespace detail

/// The two roots of the quadratic for a, ordered as (plus-root, minus-root)
/// of the closed-form expression with "+ sqrt" and "- sqrt".
inline std::pair<double, double> dykhne_roots(const PerturbedPhase &p1, const PerturbedPhase &p2,
                                              double h)
{
  if (h == 0.0)
    throw DegenerateTransformError("Dykhne transform is degenerate for h = 0");
  if (p1.beta() == p2.beta())
    throw DegenerateTransformError("Dykhne transform is degenerate for beta1 == beta2");
  const double d1 = p1.alpha() * p1.alpha() + h * h * p1.beta() * p1.beta();
  const double d2 = p2.alpha() * p2.alpha() + h * h * p2.beta() * p2.beta();
  // A a^2 + B a + C = 0
  const double qa = h * (p2.beta() - p1.beta());
  const double qb = d1 - d2;
  const double qc = -h * (p2.beta() * d1 - p1.beta() * d2);
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0)
    throw DegenerateTransformError("Dykhne transform has no real coefficients (negative discriminant)");
  const double sq = std::sqrt(disc);
  // Cancellation-free pair; the "+ sqrt" root is q/A when B <= 0.
  const double qq = -0.5 * (qb + std::copysign(sq, qb));
  if (qq == 0.0)
    throw DegenerateTransformError("Dykhne transform has a vanishing root");
  const double r1 = qq / qa;
  const double r2 = qc / qq;
  return qb <= 0.0 ? std::pair{r1, r2} : std::pair{r2, r1};
}

/// Coefficients (a, b) making both transformed phases real, with a chosen so
/// that the transformed medium is positive. When both roots give positive
/// media the "+ sqrt" root is kept: it is the one that diverges under high
/// contrast.
inline DykhneCoefficients dykhne_coefficients(const PerturbedPhase &phase1,
                                              const PerturbedPhase &phase2, double h)
{
  const auto [plus, minus] = dykhne_roots(phase1, phase2, h);
  const double b_plus = detail::b_from_root(plus, h, phase1, phase2);
  const double b_minus = detail::b_from_root(minus, h, phase1, phase2);
  const bool ok_plus = detail::yields_positive_medium(plus, b_plus, h, phase1, phase2);
  const bool ok_minus = detail::yields_positive_medium(minus, b_minus, h, phase1, phase2);
  if (ok_plus)
    return DykhneCoefficients::FromAB(plus, b_plus);
  if (ok_minus)
    return DykhneCoefficients::FromAB(minus, b_minus);
  throw NonRealTransformError("no root of the Dykhne equation yields a positive medium");
}

/// Image of the phase alpha I + beta h J under the transform; it is a
/// positive multiple of the identity when the coefficients fit the phase.
inline double dykhne_transform_phase(const PerturbedPhase &phase, double h,
                                     const DykhneCoefficients &c, double rel_tol = 1e-8)
{
  if (c.is_identity())
    return phase.alpha();
  const ComplexScalar w = detail::moebius(c.a, c.b, {phase.alpha(), h * phase.beta()});
  if (std::abs(w.imag()) > rel_tol * std::abs(w.real()))
    throw NonRealTransformError("transformed phase is not real: coefficients do not fit this phase");
  if (!(w.real() > 0.0))
    throw NonRealTransformError("transformed phase is not positive");
  return w.real();
}

/// ((p A + q J)^{-1} + r J)^{-1}
inline Mat2 dykhne_transform_tensor(const Mat2 &a, const DykhneCoefficients &c)
{
  if (c.is_identity())
    return a;
  const Mat2 j = rotation_j();
  try {
    return inverse(inverse(c.p * a + c.q * j) + c.r * j);
  } catch (const SingularMatrixError &) {
    throw SingularMatrixError("dykhne_transform_tensor: singular intermediate");
  }
}

/// Effective tensor of the transformed medium predicted from the effective
/// tensor of the original one: (a S + b J)(a I + J S)^{-1}.
inline Mat2 dual_push_forward(const Mat2 &sigma_star, const DykhneCoefficients &c)
{
  if (c.is_identity())
    return sigma_star;
  const Mat2 j = rotation_j();
  const Mat2 id = Mat2::Identity();
  return (c.a * sigma_star + c.b * j) * inverse(c.a * id + j * sigma_star);
}

/// Inverse of dual_push_forward: (a I - S' J)^{-1}(a S' - b J).
inline Mat2 dual_pull_back(const Mat2 &sigma_prime, const DykhneCoefficients &c)
{
  if (c.is_identity())
    return sigma_prime;
  const Mat2 j = rotation_j();
  const Mat2 id = Mat2::Identity();
  return inverse(c.a * id - sigma_prime * j) * (c.a * sigma_prime - c.b * j);
}

struct TransformedPhases
{
  double alpha1_prime;       // image of phase 1
  double theta_alpha2_prime; // theta times the image of the scaled phase 2
  DykhneCoefficients coeffs;
};

/// Transformed phases for phase 2 scaled as (alpha2/theta, beta2/theta).
/// As theta -> 0 these approach (alpha1, alpha2 + beta2^2 h^2 / alpha2).
inline TransformedPhases dykhne_phase_asymptotics(const PerturbedPhase &phase1,
                                                  const PerturbedPhase &phase2_scaled,
                                                  double theta, double h)
{
  if (!(theta > 0.0))
    throw InvalidArgument("theta must be > 0");
  const DykhneCoefficients c = dykhne_coefficients(phase1, phase2_scaled, h);
  return {dykhne_transform_phase(phase1, h, c), theta * dykhne_transform_phase(phase2_scaled, h, c), c};
}

} // namespace hallhom

#endif // HALLHOM_DYKHNE_HPP
