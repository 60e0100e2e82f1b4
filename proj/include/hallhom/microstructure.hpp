// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_MICROSTRUCTURE_HPP
#define HALLHOM_MICROSTRUCTURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <limits>
#include <utility>
#include <string>
#include <vector>

#include "hallhom/error.hpp"
#include "hallhom/tensor.hpp"

namespace hallhom
{

/// Uniform structured grid on a period cell centered at the origin.
/// Axes beyond `dim` have one element and unit extent.
struct CellGeometry
{
  int dim = 2;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> extents{1.0, 1.0, 1.0};

  static constexpr int kMinResolution = 4;

  /// Unit square/cube with `resolution` elements per axis.
  static CellGeometry UnitCell(int dim, int resolution)
  {
    if (dim != 2 && dim != 3)
      throw InvalidArgument("cell dimension must be 2 or 3");
    if (resolution < kMinResolution)
      throw InvalidArgument("resolution must be >= " + std::to_string(kMinResolution));
    CellGeometry g;
    g.dim = dim;
    for (int a = 0; a < dim; ++a)
      g.n[a] = resolution;
    return g;
  }

  /// The ell x 1 rectangle (-ell/2, ell/2) x (-1/2, 1/2); `resolution` is
  /// elements per unit length, so elements stay (nearly) square.
  static CellGeometry CrossCell(double ell, int resolution)
  {
    if (!(ell >= 1.0) || !std::isfinite(ell))
      throw InvalidArgument("cross cell aspect ell must be >= 1");
    if (resolution < kMinResolution)
      throw InvalidArgument("resolution must be >= " + std::to_string(kMinResolution));
    CellGeometry g;
    g.dim = 2;
    g.n = {static_cast<int>(std::lround(ell * resolution)), resolution, 1};
    g.extents = {ell, 1.0, 1.0};
    return g;
  }

  std::size_t num_elements() const
  {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
  }

  double spacing(int axis) const { return extents[axis] / n[axis]; }

  double element_volume() const
  {
    double v = 1.0;
    for (int a = 0; a < dim; ++a)
      v *= spacing(a);
    return v;
  }

  double cell_volume() const
  {
    double v = 1.0;
    for (int a = 0; a < dim; ++a)
      v *= extents[a];
    return v;
  }

  /// Center coordinate of element index i along an axis. Written so that
  /// mirrored indices give exactly negated coordinates.
  double center(int axis, int i) const
  {
    return (2.0 * i + 1.0 - n[axis]) / (2.0 * n[axis]) * extents[axis];
  }

  std::size_t index(int i, int j, int k = 0) const
  {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * (j + static_cast<std::size_t>(n[1]) * k);
  }

  friend bool operator==(const CellGeometry &, const CellGeometry &) = default;
};

/// Characteristic function of phase 2 on the elements, x-fastest.
struct PhaseMask
{
  CellGeometry geometry;
  std::vector<std::uint8_t> flags;

  PhaseMask() = default;
  explicit PhaseMask(const CellGeometry &g) : geometry(g), flags(g.num_elements(), 0) {}

  bool at(int i, int j, int k = 0) const { return flags[geometry.index(i, j, k)] != 0; }
  void set(int i, int j, int k, bool v) { flags[geometry.index(i, j, k)] = v ? 1 : 0; }

  std::size_t count() const
  {
    std::size_t c = 0;
    for (auto f : flags)
      c += f != 0;
    return c;
  }

  double volume_fraction() const
  {
    return flags.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(flags.size());
  }

  /// Measure of phase 2 in cell units (fraction times cell volume).
  double phase2_measure() const { return volume_fraction() * geometry.cell_volume(); }

  friend bool operator==(const PhaseMask &, const PhaseMask &) = default;
};

namespace detail
{

// Closed sets: ties on the boundary go to phase 2.
inline bool within(double value, double bound) { return value <= bound * (1.0 + 1e-12); }

template <class Pred>
PhaseMask rasterize(const CellGeometry &g, Pred inside)
{
  PhaseMask m(g);
  for (int k = 0; k < g.n[2]; ++k) {
    const double z = g.dim == 3 ? g.center(2, k) : 0.0;
    for (int j = 0; j < g.n[1]; ++j) {
      const double y = g.center(1, j);
      for (int i = 0; i < g.n[0]; ++i)
        m.set(i, j, k, inside(g.center(0, i), y, z));
    }
  }
  return m;
}

} // namespace detail

/// Union of the two bars |x1| <= t and |x2| <= t on the ell x 1 cell.
/// Phase-2 area is 2t(ell+1) - 4t^2.
inline PhaseMask build_cross_cell(double t, double ell, int resolution)
{
  if (!(t > 0.0 && t <= 0.5))
    throw InvalidArgument("cross half-width t must lie in (0, 1/2]");
  const CellGeometry g = CellGeometry::CrossCell(ell, resolution);
  if (2.0 * t * resolution < 2.0)
    throw InvalidArgument("resolution too coarse: fewer than 2 elements across the cross bar");
  return detail::rasterize(g, [t](double x, double y, double) {
    return detail::within(std::abs(x), t) || detail::within(std::abs(y), t);
  });
}

inline double cross_area(double t, double ell) { return 2.0 * t * (ell + 1.0) - 4.0 * t * t; }

/// Closed cylinder y1^2 + y2^2 <= r^2 along x3 in the unit cube.
inline PhaseMask build_fiber_cell_3d(double r, int resolution)
{
  if (!(r > 0.0 && r < 0.5))
    throw InvalidArgument("fiber radius r must lie in (0, 1/2)");
  const CellGeometry g = CellGeometry::UnitCell(3, resolution);
  if (2.0 * r * resolution < 3.0)
    throw InvalidArgument("resolution too coarse: fewer than 3 elements across the fiber diameter");
  const double r2 = r * r;
  return detail::rasterize(g, [r2](double x, double y, double) { return detail::within(x * x + y * y, r2); });
}

/// Three orthogonal cylinders of radius r through the cell center.
inline PhaseMask build_triaxial_fiber_cell(double r, int resolution)
{
  if (!(r > 0.0 && r < 0.5))
    throw InvalidArgument("fiber radius r must lie in (0, 1/2)");
  const CellGeometry g = CellGeometry::UnitCell(3, resolution);
  if (2.0 * r * resolution < 3.0)
    throw InvalidArgument("resolution too coarse: fewer than 3 elements across the fiber diameter");
  const double r2 = r * r;
  return detail::rasterize(g, [r2](double x, double y, double z) {
    return detail::within(x * x + y * y, r2) || detail::within(y * y + z * z, r2) ||
           detail::within(x * x + z * z, r2);
  });
}

/// Layers normal to e_{axis+1}: elements whose index along `axis` is below
/// fraction * n are phase 2.
inline PhaseMask build_laminate(int axis, double fraction, int resolution, int dim = 2)
{
  if (axis < 0 || axis >= dim)
    throw InvalidArgument("laminate axis out of range");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidArgument("laminate fraction must lie in (0, 1)");
  const CellGeometry g = CellGeometry::UnitCell(dim, resolution);
  PhaseMask m(g);
  const double cut = fraction * g.n[axis];
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const int idx = axis == 0 ? i : (axis == 1 ? j : k);
        m.set(i, j, k, idx + 0.5 < cut);
      }
  return m;
}

/// 2 x 2 checkerboard tiling of the unit square.
inline PhaseMask build_checkerboard(int resolution)
{
  if (resolution % 2 != 0)
    throw InvalidArgument("checkerboard resolution must be even");
  const CellGeometry g = CellGeometry::UnitCell(2, resolution);
  PhaseMask m(g);
  const int half = resolution / 2;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i)
      m.set(i, j, 0, (i < half) != (j < half));
  return m;
}

/// Piecewise-constant conductivity: a small palette of tensors and a
/// palette index per element. Every palette tensor has a positive definite
/// symmetric part; `coercivity` is the smallest of their lowest eigenvalues.
template <int D>
class ConductivityField
{
public:
  ConductivityField(const CellGeometry &g, std::vector<Mat<D>> palette, std::vector<std::uint16_t> phase)
    : geometry_(g), palette_(std::move(palette)), phase_(std::move(phase))
  {
    if (g.dim != D)
      throw InvalidArgument("conductivity field dimension does not match its geometry");
    if (phase_.size() != g.num_elements())
      throw InvalidArgument("one palette index per element is required");
    if (palette_.empty())
      throw InvalidArgument("empty conductivity palette");
    for (auto p : phase_)
      if (p >= palette_.size())
        throw InvalidArgument("palette index out of range");
    coercivity_ = std::numeric_limits<double>::infinity();
    double largest = 0.0;
    for (const auto &a : palette_) {
      if (!is_finite(a))
        throw InvalidArgument("conductivity entries must be finite");
      const double lo = min_sym_eigenvalue(a);
      if (!(lo > 0.0))
        throw InvalidArgument("conductivity is not coercive (symmetric part not positive definite)");
      coercivity_ = std::min(coercivity_, lo);
      largest = std::max(largest, frobenius_norm(a));
    }
    contrast_ = largest / coercivity_;
  }

  static ConductivityField Constant(const CellGeometry &g, const Mat<D> &a)
  {
    return ConductivityField(g, {a}, std::vector<std::uint16_t>(g.num_elements(), 0));
  }

  const CellGeometry &geometry() const { return geometry_; }
  const std::vector<Mat<D>> &palette() const { return palette_; }
  const std::vector<std::uint16_t> &phase_index() const { return phase_; }
  const Mat<D> &tensor(std::size_t element) const { return palette_[phase_[element]]; }

  double coercivity() const { return coercivity_; }
  double contrast() const { return contrast_; }

  bool is_symmetric(double rel_tol = 1e-12) const
  {
    for (const auto &a : palette_)
      if (!hallhom::is_symmetric(a, rel_tol))
        return false;
    return true;
  }

  /// Pointwise image of the field under f.
  template <class F>
  ConductivityField map(F &&f) const
  {
    std::vector<Mat<D>> out;
    out.reserve(palette_.size());
    for (const auto &a : palette_)
      out.push_back(f(a));
    return ConductivityField(geometry_, std::move(out), phase_);
  }

  ConductivityField transposed() const
  {
    return map([](const Mat<D> &a) { return transpose(a); });
  }

private:
  CellGeometry geometry_;
  std::vector<Mat<D>> palette_;
  std::vector<std::uint16_t> phase_;
  double coercivity_ = 0.0;
  double contrast_ = 1.0;
};

/// (1 - chi) sigma_1(h) + chi sigma_2(h), chi = mask.
template <int D>
ConductivityField<D> assemble_conductivity(const PhaseMask &mask, const PerturbedPhase &phase1,
                                           const PerturbedPhase &phase2, const HallVector<D> &h)
{
  if (mask.geometry.dim != D)
    throw InvalidArgument("mask dimension does not match the Hall vector dimension");
  std::vector<std::uint16_t> idx(mask.flags.begin(), mask.flags.end());
  return ConductivityField<D>(mask.geometry,
                              {perturbed_tensor<D>(phase1, h), perturbed_tensor<D>(phase2, h)},
                              std::move(idx));
}

} // namespace hallhom

#endif // HALLHOM_MICROSTRUCTURE_HPP
