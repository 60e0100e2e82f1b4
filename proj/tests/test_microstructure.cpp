// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hallhom/microstructure.hpp"

using namespace hallhom;

TEST(CrossCell, AreaExamples)
{
  EXPECT_NEAR(build_cross_cell(0.25, 1.0, 64).volume_fraction(), 0.75, 1e-12);
  EXPECT_DOUBLE_EQ(cross_area(0.25, 1.0), 0.75);

  const PhaseMask full = build_cross_cell(0.5, 1.0, 32);
  EXPECT_EQ(full.count(), full.flags.size());
  EXPECT_DOUBLE_EQ(full.volume_fraction(), 1.0);

  const PhaseMask m = build_cross_cell(0.05, 2.0, 256);
  EXPECT_EQ(m.geometry.n[0], 512);
  EXPECT_EQ(m.geometry.n[1], 256);
  EXPECT_NEAR(m.volume_fraction(), (2 * 0.05 * 3 - 0.01) / 2, 2.0 / 256);
  EXPECT_NEAR(m.phase2_measure(), cross_area(0.05, 2.0), 2.0 / 256);
}

TEST(CrossCell, TooCoarse)
{
  EXPECT_THROW(build_cross_cell(0.05, 1.0, 16), InvalidArgument);
  EXPECT_THROW(build_cross_cell(0.6, 1.0, 16), InvalidArgument);
  EXPECT_THROW(build_cross_cell(0.25, 0.5, 16), InvalidArgument);
  EXPECT_NO_THROW(build_cross_cell(0.05, 1.0, 20));
}

TEST(CrossCell, EvenInBothCoordinates)
{
  for (double t : {0.07, 0.1, 0.23}) {
    const PhaseMask m = build_cross_cell(t, 1.5, 40);
    const auto &g = m.geometry;
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        EXPECT_EQ(m.at(i, j), m.at(g.n[0] - 1 - i, j));
        EXPECT_EQ(m.at(i, j), m.at(i, g.n[1] - 1 - j));
      }
  }
}

TEST(CrossCell, FractionConvergesAtFirstOrder)
{
  // |theta_hat - theta| <= C / res with C = 4 (two bars, two edges each)
  for (double t : {0.13, 0.21, 0.37})
    for (int res : {16, 32, 64, 128, 256}) {
      if (2 * t * res < 2)
        continue;
      const PhaseMask m = build_cross_cell(t, 1.0, res);
      EXPECT_LE(std::abs(m.volume_fraction() - cross_area(t, 1.0)), 4.0 / res) << t << " " << res;
    }
}

TEST(FiberCell, FractionExamples)
{
  EXPECT_NEAR(build_fiber_cell_3d(0.2, 64).volume_fraction(), M_PI * 0.04, 4.0 / 64);
  EXPECT_NEAR(build_fiber_cell_3d(0.49, 32).volume_fraction(), 0.7543, 4.0 / 32);
  EXPECT_THROW(build_fiber_cell_3d(0.5, 32), InvalidArgument);
  EXPECT_THROW(build_fiber_cell_3d(0.05, 16), InvalidArgument);
}

TEST(FiberCell, BoundaryTieGoesToPhaseTwo)
{
  // res 8: element centers at +-1/16, +-3/16, ...; r^2 = (1/16)^2 + (3/16)^2
  // puts the centers (1/16, 3/16) exactly on the circle.
  const double r = std::sqrt(10.0) / 16.0;
  const PhaseMask m = build_fiber_cell_3d(r, 8);
  EXPECT_TRUE(m.at(4, 5, 0)); // (1/16, 3/16)
  EXPECT_TRUE(m.at(5, 4, 3)); // (3/16, 1/16)
  EXPECT_FALSE(m.at(5, 5, 0)); // (3/16, 3/16)
}

TEST(FiberCell, SymmetricUnderQuarterTurn)
{
  const PhaseMask m = build_fiber_cell_3d(0.3, 20);
  const int n = 20;
  for (int k = 0; k < n; k += 7)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        // (x, y) -> (-y, x)
        EXPECT_EQ(m.at(i, j, k), m.at(n - 1 - j, i, k));
        EXPECT_EQ(m.at(i, j, k), m.at(i, j, 0));
      }
}

TEST(FiberCell, FractionConvergesAtFirstOrder)
{
  for (double r : {0.11, 0.23, 0.4})
    for (int res : {16, 32, 64}) {
      if (2 * r * res < 3)
        continue;
      EXPECT_LE(std::abs(build_fiber_cell_3d(r, res).volume_fraction() - M_PI * r * r), 4.0 / res);
    }
}

TEST(TriaxialCell, FractionBounds)
{
  const double r = 0.1;
  const PhaseMask m = build_triaxial_fiber_cell(r, 64);
  const double upper = 3 * M_PI * r * r, lower = upper - 16 * r * r * r;
  // grid slack of the order of the single-fiber first-order bound
  EXPECT_GE(m.volume_fraction(), lower - 3.0 / 64);
  EXPECT_LE(m.volume_fraction(), upper + 3.0 / 64);

  // brute-force voxel count at high resolution lies inside the exact bounds
  const PhaseMask fine = build_triaxial_fiber_cell(r, 160);
  EXPECT_GE(fine.volume_fraction(), lower - 0.01);
  EXPECT_LE(fine.volume_fraction(), upper + 0.01);
  EXPECT_LT(build_triaxial_fiber_cell(0.05, 64).volume_fraction(), m.volume_fraction());
}

TEST(TriaxialCell, InvariantUnderAxisPermutations)
{
  const int n = 24;
  const PhaseMask m = build_triaxial_fiber_cell(0.17, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const bool v = m.at(i, j, k);
        EXPECT_EQ(v, m.at(j, i, k));
        EXPECT_EQ(v, m.at(k, j, i));
        EXPECT_EQ(v, m.at(i, k, j));
      }
}

TEST(Laminate, Examples)
{
  const PhaseMask lower = build_laminate(1, 0.5, 16);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i)
      EXPECT_EQ(lower.at(i, j), j < 8);
  EXPECT_DOUBLE_EQ(build_laminate(0, 0.25, 16).volume_fraction(), 0.25);
  EXPECT_DOUBLE_EQ(build_laminate(2, 0.25, 16, 3).volume_fraction(), 0.25);
  EXPECT_THROW(build_laminate(2, 0.5, 16, 2), InvalidArgument);
  EXPECT_THROW(build_laminate(0, 1.0, 16), InvalidArgument);
}

TEST(Checkerboard, Examples)
{
  const PhaseMask m = build_checkerboard(16);
  EXPECT_DOUBLE_EQ(m.volume_fraction(), 0.5);
  EXPECT_NE(m.at(0, 0), m.at(8, 0));
  EXPECT_EQ(m.at(0, 0), m.at(8, 8));
  EXPECT_THROW(build_checkerboard(15), InvalidArgument);
}

TEST(Geometry, Validation)
{
  EXPECT_THROW(CellGeometry::UnitCell(2, 3), InvalidArgument);
  EXPECT_THROW(CellGeometry::UnitCell(4, 16), InvalidArgument);
  const auto g = CellGeometry::CrossCell(2.0, 8);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 2.0);
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.125);
  EXPECT_DOUBLE_EQ(g.center(0, 0), -1.0 + 0.0625);
  EXPECT_DOUBLE_EQ(g.center(0, 15), -g.center(0, 0));
}

TEST(AssembleConductivity, Examples)
{
  const PhaseMask empty(CellGeometry::UnitCell(2, 8));
  const auto f = assemble_conductivity<2>(empty, {2, 0.5}, {7, 1}, 3.0);
  for (std::size_t e = 0; e < empty.flags.size(); ++e)
    EXPECT_EQ(f.tensor(e), perturbed_tensor_2d({2, 0.5}, 3.0));
  EXPECT_DOUBLE_EQ(f.coercivity(), 2.0);

  const auto g = assemble_conductivity<2>(build_checkerboard(8), {1, 1}, {4, 2}, 0.0);
  EXPECT_TRUE(g.is_symmetric());
  EXPECT_DOUBLE_EQ(g.coercivity(), 1.0);

  const PhaseMask cross = build_cross_cell(0.25, 1.0, 16);
  const auto c = assemble_conductivity<2>(cross, {1, 1}, {20, 10}, 1.0);
  for (std::size_t e = 0; e < cross.flags.size(); ++e)
    EXPECT_EQ(c.tensor(e), cross.flags[e] ? perturbed_tensor_2d({20, 10}, 1.0) : perturbed_tensor_2d({1, 1}, 1.0));
  EXPECT_FALSE(c.is_symmetric());
}

TEST(AssembleConductivity, SamePhaseGivesConstantField)
{
  for (const PhaseMask &m : {build_checkerboard(8), build_cross_cell(0.25, 1.0, 8), build_laminate(0, 0.3, 10)}) {
    const auto f = assemble_conductivity<2>(m, {3, -1}, {3, -1}, 0.7);
    for (std::size_t e = 0; e < m.flags.size(); ++e)
      EXPECT_EQ(f.tensor(e), f.tensor(0));
  }
}

TEST(AssembleConductivity, DimensionMismatch)
{
  EXPECT_THROW(assemble_conductivity<3>(build_checkerboard(8), {1, 0}, {2, 0}, Vec3{0, 0, 1}), InvalidArgument);
}

TEST(ConductivityField, RejectsNonCoerciveTensors)
{
  const auto g = CellGeometry::UnitCell(2, 4);
  Mat2 bad = Mat2::Identity();
  bad(1, 1) = -0.1;
  EXPECT_THROW(ConductivityField<2>::Constant(g, bad), InvalidArgument);
  EXPECT_THROW(ConductivityField<2>(g, {Mat2::Identity()}, std::vector<std::uint16_t>(16, 1)), InvalidArgument);
  EXPECT_THROW(ConductivityField<2>(g, {Mat2::Identity()}, std::vector<std::uint16_t>(15, 0)), InvalidArgument);
}
