// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_TENSOR_HPP
#define HALLHOM_TENSOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>

#include "hallhom/error.hpp"

namespace hallhom
{

template <int D>
using Vec = std::array<double, D>;

using Vec3 = Vec<3>;

/// Small dense D x D matrix, row-major. Conductivities, their effective
/// tensors and the antisymmetric generators all live here.
template <int D>
struct Mat
{
  static_assert(D == 2 || D == 3, "only 2x2 and 3x3 conductivities are supported");

  std::array<double, D * D> a{};

  double &operator()(int i, int j) { return a[i * D + j]; }
  double operator()(int i, int j) const { return a[i * D + j]; }

  static Mat Zero() { return Mat{}; }

  static Mat Identity()
  {
    Mat m;
    for (int i = 0; i < D; ++i)
      m(i, i) = 1.0;
    return m;
  }

  static Mat Diagonal(const Vec<D> &d)
  {
    Mat m;
    for (int i = 0; i < D; ++i)
      m(i, i) = d[i];
    return m;
  }

  Mat &operator+=(const Mat &o)
  {
    for (std::size_t k = 0; k < a.size(); ++k)
      a[k] += o.a[k];
    return *this;
  }
  Mat &operator-=(const Mat &o)
  {
    for (std::size_t k = 0; k < a.size(); ++k)
      a[k] -= o.a[k];
    return *this;
  }
  Mat &operator*=(double s)
  {
    for (auto &v : a)
      v *= s;
    return *this;
  }

  friend Mat operator+(Mat l, const Mat &r) { return l += r; }
  friend Mat operator-(Mat l, const Mat &r) { return l -= r; }
  friend Mat operator-(Mat m) { return m *= -1.0; }
  friend Mat operator*(Mat m, double s) { return m *= s; }
  friend Mat operator*(double s, Mat m) { return m *= s; }

  friend Mat operator*(const Mat &l, const Mat &r)
  {
    Mat m;
    for (int i = 0; i < D; ++i)
      for (int k = 0; k < D; ++k)
        for (int j = 0; j < D; ++j)
          m(i, j) += l(i, k) * r(k, j);
    return m;
  }

  friend Vec<D> operator*(const Mat &l, const Vec<D> &v)
  {
    Vec<D> out{};
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        out[i] += l(i, j) * v[j];
    return out;
  }

  friend bool operator==(const Mat &, const Mat &) = default;
};

using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

template <int D>
Mat<D> transpose(const Mat<D> &m)
{
  Mat<D> t;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      t(i, j) = m(j, i);
  return t;
}

template <int D>
Mat<D> sym_part(const Mat<D> &m)
{
  return 0.5 * (m + transpose(m));
}

template <int D>
Mat<D> skew_part(const Mat<D> &m)
{
  return 0.5 * (m - transpose(m));
}

template <int D>
double frobenius_norm(const Mat<D> &m)
{
  double s = 0.0;
  for (double v : m.a)
    s += v * v;
  return std::sqrt(s);
}

template <int D>
double max_abs_entry(const Mat<D> &m)
{
  double s = 0.0;
  for (double v : m.a)
    s = std::max(s, std::abs(v));
  return s;
}

template <int D>
bool is_finite(const Mat<D> &m)
{
  for (double v : m.a)
    if (!std::isfinite(v))
      return false;
  return true;
}

inline double det(const Mat2 &m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline double det(const Mat3 &m)
{
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

/// Inverse via the adjugate. Throws SingularMatrixError when |det| is below
/// rel_tol times the natural scale |m|^D.
template <int D>
Mat<D> inverse(const Mat<D> &m, double rel_tol = 1e-14)
{
  const double d = det(m);
  const double scale = std::pow(max_abs_entry(m), D);
  if (!(std::abs(d) > rel_tol * scale))
    throw SingularMatrixError("matrix is singular to working precision");
  Mat<D> inv;
  if constexpr (D == 2) {
    inv(0, 0) = m(1, 1);
    inv(0, 1) = -m(0, 1);
    inv(1, 0) = -m(1, 0);
    inv(1, 1) = m(0, 0);
  } else {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
        const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        inv(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
      }
  }
  return inv * (1.0 / d);
}

template <int D>
bool is_symmetric(const Mat<D> &m, double rel_tol = 1e-12)
{
  return frobenius_norm(skew_part(m)) <= rel_tol * std::max(frobenius_norm(m), 1e-300);
}

/// Smallest eigenvalue of the symmetric part.
inline double min_sym_eigenvalue(const Mat2 &m)
{
  const Mat2 s = sym_part(m);
  const double tr = s(0, 0) + s(1, 1);
  const double dd = s(0, 0) - s(1, 1);
  return 0.5 * (tr - std::sqrt(dd * dd + 4.0 * s(0, 1) * s(0, 1)));
}

inline double min_sym_eigenvalue(const Mat3 &m)
{
  // Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric form).
  const Mat3 s = sym_part(m);
  const double p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
  const double q = (s(0, 0) + s(1, 1) + s(2, 2)) / 3.0;
  if (p1 == 0.0)
    return std::min({s(0, 0), s(1, 1), s(2, 2)});
  const double p2 = (s(0, 0) - q) * (s(0, 0) - q) + (s(1, 1) - q) * (s(1, 1) - q) +
                    (s(2, 2) - q) * (s(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Mat3 b = (1.0 / p) * (s - q * Mat3::Identity());
  const double r = std::clamp(det(b) / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}

template <int D>
bool is_positive_definite_symmetric_part(const Mat<D> &m, double rel_tol = 1e-12)
{
  return min_sym_eigenvalue(m) > rel_tol * frobenius_norm(m);
}

/// The rotation generator J = [[0, -1], [1, 0]].
inline Mat2 rotation_j()
{
  Mat2 j;
  j(0, 1) = -1.0;
  j(1, 0) = 1.0;
  return j;
}

/// Antisymmetric matrix E(h) with E(h) x = h cross x.
inline Mat3 cross_matrix(const Vec3 &h)
{
  Mat3 e;
  e(0, 1) = -h[2];
  e(0, 2) = h[1];
  e(1, 0) = h[2];
  e(1, 2) = -h[0];
  e(2, 0) = -h[1];
  e(2, 1) = h[0];
  return e;
}

/// Magnetic-field parameter: a scalar in 2D, a 3-vector in 3D.
template <int D>
using HallVector = std::conditional_t<D == 2, double, Vec3>;

template <int D>
bool is_zero(const HallVector<D> &h)
{
  if constexpr (D == 2)
    return h == 0.0;
  else
    return h[0] == 0.0 && h[1] == 0.0 && h[2] == 0.0;
}

/// Isotropic phase with a Hall-type coefficient: conductivity alpha > 0,
/// antisymmetric coefficient beta.
class PerturbedPhase
{
public:
  PerturbedPhase(double alpha, double beta) : alpha_(alpha), beta_(beta)
  {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw InvalidArgument("phase conductivity alpha must be finite and > 0");
    if (!std::isfinite(beta))
      throw InvalidArgument("phase Hall coefficient beta must be finite");
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  friend bool operator==(const PerturbedPhase &, const PerturbedPhase &) = default;

private:
  double alpha_;
  double beta_;
};

/// alpha I + beta h J.
inline Mat2 perturbed_tensor_2d(const PerturbedPhase &phase, double h)
{
  return phase.alpha() * Mat2::Identity() + (phase.beta() * h) * rotation_j();
}

/// alpha I + beta E(h).
inline Mat3 perturbed_tensor_3d(const PerturbedPhase &phase, const Vec3 &h)
{
  return phase.alpha() * Mat3::Identity() + phase.beta() * cross_matrix(h);
}

template <int D>
Mat<D> perturbed_tensor(const PerturbedPhase &phase, const HallVector<D> &h)
{
  if constexpr (D == 2)
    return perturbed_tensor_2d(phase, h);
  else
    return perturbed_tensor_3d(phase, h);
}

// Complex representation of the commutative algebra {x I + y J}:
// x I + y J <-> x + i y.
using ComplexScalar = std::complex<double>;

inline ComplexScalar to_complex(const Mat2 &m)
{
  return {0.5 * (m(0, 0) + m(1, 1)), 0.5 * (m(1, 0) - m(0, 1))};
}

inline Mat2 from_complex(ComplexScalar z)
{
  return z.real() * Mat2::Identity() + z.imag() * rotation_j();
}

} // namespace hallhom

#endif // HALLHOM_TENSOR_HPP
