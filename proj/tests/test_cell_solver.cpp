// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "hallhom/cell_solver.hpp"
#include "hallhom/closed_forms.hpp"

using namespace hallhom;
using Vec2 = Vec<2>;

namespace
{

SolverConfig tight()
{
  SolverConfig cfg;
  cfg.tolerance = 1e-11;
  return cfg;
}

template <int D>
void expect_mat_near(const Mat<D> &a, const Mat<D> &b, double tol)
{
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      EXPECT_NEAR(a(i, j), b(i, j), tol) << "entry (" << i << "," << j << ")";
}

// Layers normal to e1 with volume fractions f and f-1, tensors a and b.
// Continuity of the normal flux and the tangential field gives the
// effective tensor in closed form.
Mat2 laminate_oracle(double f, const Mat2 &a, const Mat2 &b)
{
  auto avg = [&](auto fn) { return f * fn(a) + (1 - f) * fn(b); };
  const double s11 = 1.0 / avg([](const Mat2 &m) { return 1.0 / m(0, 0); });
  const double r12 = avg([](const Mat2 &m) { return m(0, 1) / m(0, 0); });
  const double r21 = avg([](const Mat2 &m) { return m(1, 0) / m(0, 0); });
  const double schur = avg([](const Mat2 &m) { return m(1, 1) - m(1, 0) * m(0, 1) / m(0, 0); });
  Mat2 s;
  s(0, 0) = s11;
  s(0, 1) = s11 * r12;
  s(1, 0) = s11 * r21;
  s(1, 1) = schur + s11 * r21 * r12;
  return s;
}

Mat2 m2(double a, double b, double c, double d)
{
  Mat2 m;
  m(0, 0) = a, m(0, 1) = b, m(1, 0) = c, m(1, 1) = d;
  return m;
}

} // namespace

TEST(CellSolver, ConstantFieldIsExact2d)
{
  for (const Mat2 &a : {m2(2, 0, 0, 3), m2(1.5, -0.7, 0.7, 1.5), m2(3, 1, -0.4, 2)}) {
    const auto f = ConductivityField<2>::Constant(CellGeometry::CrossCell(1.5, 8), a);
    const auto t = effective_tensor(f, tight());
    expect_mat_near(t.matrix, a, 1e-12);
    for (auto it : t.iterations)
      EXPECT_EQ(it, 0u);
  }
}

TEST(CellSolver, ConstantFieldIsExact3d)
{
  const Mat3 a = perturbed_tensor_3d({2, 0.8}, {0.3, -1, 2}) + Mat3::Diagonal({0.5, 0, 1});
  const auto f = ConductivityField<3>::Constant(CellGeometry::UnitCell(3, 6), a);
  expect_mat_near(effective_tensor(f, tight()).matrix, a, 1e-12);
}

TEST(CellSolver, ScalarLaminateExample)
{
  // a1 = 1, a2 = 4, half and half, layers stacked along y
  const PhaseMask mask = build_laminate(1, 0.5, 16);
  const auto f = assemble_conductivity<2>(mask, {1, 0}, {4, 0}, 0.0);
  const auto hom = homogenize(f, tight());
  expect_mat_near(hom.tensor.matrix, Mat2::Diagonal({2.5, 1.6}), 1e-9);

  // normal loading: flux 1.6 through both layers
  const auto &normal = hom.correctors[1];
  for (std::size_t e = 0; e < mask.flags.size(); ++e) {
    EXPECT_NEAR(normal.element_gradient[e][1], mask.flags[e] ? 0.4 : 1.6, 1e-9);
    EXPECT_NEAR(normal.element_gradient[e][0], 0.0, 1e-9);
  }
  // tangential loading needs no fluctuation at all
  const auto &tangential = hom.correctors[0];
  EXPECT_EQ(tangential.stats.iterations, 0u);
  for (double v : tangential.fluctuation)
    EXPECT_EQ(v, 0.0);
}

TEST(CellSolver, HallLaminateMatchesLayerFormula)
{
  for (double f : {0.25, 0.5, 0.75})
    for (double h : {0.0, 0.8, -2.0}) {
      const PerturbedPhase p1{1.0, 0.5}, p2{6.0, 3.0};
      const PhaseMask mask = build_laminate(0, f, 16);
      const auto field = assemble_conductivity<2>(mask, p1, p2, h);
      const Mat2 expect =
        laminate_oracle(f, perturbed_tensor_2d(p2, h), perturbed_tensor_2d(p1, h));
      expect_mat_near(effective_tensor(field, tight()).matrix, expect, 1e-8 * frobenius_norm(expect));
    }
}

TEST(CellSolver, AdjointRelation)
{
  // sigma*(A^T) = sigma*(A)^T, and A^T is the field at -h
  const PhaseMask mask = build_cross_cell(0.2, 1.5, 10);
  const PerturbedPhase p1{1.0, 0.7}, p2{5.0, 4.0};
  const Mat2 plus = effective_tensor(assemble_conductivity<2>(mask, p1, p2, 1.3), tight()).matrix;
  const Mat2 minus = effective_tensor(assemble_conductivity<2>(mask, p1, p2, -1.3), tight()).matrix;
  expect_mat_near(minus, transpose(plus), 1e-8);
}

TEST(CellSolver, CheckerboardApproachesGeometricMean)
{
  double prev = 1e300;
  for (int res : {8, 16, 32, 64}) {
    const auto f = assemble_conductivity<2>(build_checkerboard(res), {1, 0}, {4, 0}, 0.0);
    const Mat2 s = effective_tensor(f, tight()).matrix;
    EXPECT_NEAR(s(0, 0), s(1, 1), 1e-8);
    EXPECT_NEAR(s(0, 1), 0.0, 1e-10);
    const double err = std::abs(s(0, 0) - 2.0);
    EXPECT_LT(err, prev) << res;
    prev = err;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(CellSolver, LineAverageBoundsBracketDiagonal)
{
  for (const PhaseMask &mask :
       {build_cross_cell(0.15, 1.0, 20), build_cross_cell(0.25, 2.0, 12), build_checkerboard(16), build_laminate(0, 0.3, 10)}) {
    const auto f = assemble_conductivity<2>(mask, {1, 0}, {9, 0}, 0.0);
    const Mat2 s = effective_tensor(f, tight()).matrix;
    for (int axis = 0; axis < 2; ++axis) {
      const Bounds b = voigt_reuss_bounds(mask, 1.0, 9.0, axis);
      EXPECT_LE(b.lower, s(axis, axis) + 1e-9);
      EXPECT_GE(b.upper, s(axis, axis) - 1e-9);
    }
  }
}

TEST(CellSolver, WeakFormResidualAndZeroMean)
{
  const auto f = assemble_conductivity<2>(build_cross_cell(0.2, 1.0, 15), {1, 1}, {8, 5}, 1.0);
  const CellProblem<2> problem(f);
  for (Vec2 lambda : {Vec2{1, 0}, Vec2{0, 1}, Vec2{3, -4}}) {
    const auto c = problem.solve(lambda, tight());
    EXPECT_LT(problem.weak_form_residual(c), 1e-9);
    const double mean = std::accumulate(c.fluctuation.begin(), c.fluctuation.end(), 0.0) / c.fluctuation.size();
    EXPECT_NEAR(mean, 0.0, 1e-12);
    double len = std::hypot(c.lambda[0], c.lambda[1]);
    EXPECT_NEAR(len, 1.0, 1e-15);
  }
  EXPECT_THROW(problem.solve({0, 0}, tight()), InvalidArgument);
}

TEST(CellSolver, EnergyFormMatchesFluxAverage)
{
  const PhaseMask mask = build_cross_cell(0.2, 1.0, 15);
  const auto f = assemble_conductivity<2>(mask, {1, 1}, {8, 5}, 1.0);
  const auto hom = homogenize(f, tight());
  for (int c = 0; c < 2; ++c) {
    Vec2 flux{};
    for (std::size_t e = 0; e < mask.flags.size(); ++e) {
      const Vec2 q = f.tensor(e) * hom.correctors[c].element_gradient[e];
      flux[0] += q[0] / mask.flags.size();
      flux[1] += q[1] / mask.flags.size();
    }
    for (int r = 0; r < 2; ++r)
      EXPECT_NEAR(hom.tensor.matrix(r, c), flux[r], 1e-8) << r << c;
  }
}

TEST(CellSolver, Coercivity)
{
  const auto f = assemble_conductivity<2>(build_cross_cell(0.25, 1.0, 12), {1, 2}, {10, 30}, 2.0);
  const Mat2 s = effective_tensor(f, tight()).matrix;
  // the symmetric part of the effective tensor is at least the pointwise bound
  EXPECT_GE(min_sym_eigenvalue(s), f.coercivity() - 1e-10);
}

TEST(CellSolver, FiberAxialLoadIsUniform)
{
  const PhaseMask mask = build_fiber_cell_3d(0.3, 8);
  const auto f = assemble_conductivity<3>(mask, {1, 0}, {5, 0}, Vec3{0, 0, 0});
  const auto c = solve_corrector<3>(f, Vec3{0, 0, 1}, tight());
  for (const auto &g : c.element_gradient) {
    EXPECT_NEAR(g[0], 0.0, 1e-12);
    EXPECT_NEAR(g[1], 0.0, 1e-12);
    EXPECT_NEAR(g[2], 1.0, 1e-12);
  }
  const Vec3 avg = fiber_average_gradient<3>(c, mask);
  EXPECT_NEAR(avg[2], 1.0, 1e-12);
  const auto t = effective_tensor(f, tight());
  const double theta = mask.volume_fraction();
  EXPECT_NEAR(t.matrix(2, 2), theta * 5 + (1 - theta), 1e-10);
  EXPECT_THROW(fiber_average_gradient<3>(c, PhaseMask(mask.geometry)), InvalidArgument);
  EXPECT_THROW(fiber_average_gradient<3>(c, build_fiber_cell_3d(0.3, 10)), InvalidArgument);
}

TEST(CellSolver, AutoFallsBackOnStrongHallField)
{
  // Hall ratio 6 in the inclusion: BiCGStab stalls here
  const auto f = assemble_conductivity<2>(build_cross_cell(0.25, 1.0, 12), {1, 2}, {10, 30}, 2.0);
  SolverConfig gm = tight();
  gm.method = KrylovMethod::GMRES;
  const auto ref = effective_tensor(f, gm);
  const auto got = effective_tensor(f, tight());
  EXPECT_EQ(got.method, KrylovMethod::GMRES);
  expect_mat_near(got.matrix, ref.matrix, 1e-8 * frobenius_norm(ref.matrix));
}

TEST(CellSolver, ThreadCountDoesNotChangeResult)
{
  const auto f = assemble_conductivity<2>(build_cross_cell(0.2, 1.0, 15), {1, 1}, {8, 5}, 1.0);
  const auto one = effective_tensor(f, tight(), 1);
  const auto two = effective_tensor(f, tight(), 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_EQ(one.matrix(i, j), two.matrix(i, j));
  EXPECT_EQ(one.iterations, two.iterations);
}

TEST(CellSolver, TooCoarseGridRejected)
{
  CellGeometry g = CellGeometry::UnitCell(2, 4);
  g.n[1] = 2;
  EXPECT_THROW(CellProblem<2>(ConductivityField<2>::Constant(g, Mat2::Identity())), InvalidArgument);
}
