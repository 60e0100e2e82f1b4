// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hallhom/mask_io.hpp"

using namespace hallhom;

namespace
{

PhaseMask parse(const std::string &text)
{
  std::istringstream is(text);
  return read_mask(is);
}

std::size_t error_line(const std::string &text)
{
  try {
    parse(text);
  } catch (const ParseError &e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return 0;
}

const std::string kHeader2d = "HHOM-MASK v1\nd=2 nx=4 ny=4 ell=1\n";
const std::string kRows4 = "0110\n1001\n1001\n0110\n";

} // namespace

TEST(MaskIo, RoundTrip2d)
{
  for (const PhaseMask &m : {build_cross_cell(0.13, 1.7, 24), build_checkerboard(8), build_laminate(0, 0.3, 10)}) {
    std::ostringstream os;
    write_mask(os, m);
    const PhaseMask back = parse(os.str());
    EXPECT_EQ(back.geometry.dim, 2);
    EXPECT_EQ(back.geometry.n, m.geometry.n);
    EXPECT_EQ(back.geometry.extents[0], m.geometry.extents[0]);
    EXPECT_EQ(back.flags, m.flags);
    std::ostringstream again;
    write_mask(again, back);
    EXPECT_EQ(again.str(), os.str());
  }
}

TEST(MaskIo, RoundTrip3d)
{
  const PhaseMask m = build_triaxial_fiber_cell(0.2, 10);
  std::ostringstream os;
  write_mask(os, m);
  const PhaseMask back = parse(os.str());
  EXPECT_EQ(back.geometry.dim, 3);
  EXPECT_EQ(back.geometry.n, m.geometry.n);
  EXPECT_EQ(back.flags, m.flags);
}

TEST(MaskIo, LayoutIsXFastest)
{
  const PhaseMask m = parse("HHOM-MASK v1\nd=2 nx=5 ny=4 ell=1.25\n10000\n00000\n00000\n00001\n");
  EXPECT_EQ(m.geometry.n[0], 5);
  EXPECT_DOUBLE_EQ(m.geometry.extents[0], 1.25);
  EXPECT_TRUE(m.at(0, 0));
  EXPECT_TRUE(m.at(4, 3));
  EXPECT_EQ(m.count(), 2u);
}

TEST(MaskIo, FileRoundTrip)
{
  const auto path = std::filesystem::temp_directory_path() / "hallhom_test_mask.txt";
  const PhaseMask m = build_cross_cell(0.25, 1.0, 16);
  write_mask_file(path.string(), m);
  EXPECT_EQ(read_mask_file(path.string()).flags, m.flags);
  std::filesystem::remove(path);
  EXPECT_THROW(read_mask_file(path.string()), IoError);
}

TEST(MaskIo, Errors)
{
  EXPECT_EQ(error_line(""), 1u);
  EXPECT_EQ(error_line("HHOM-MASK v2\nd=2 nx=4 ny=4 ell=1\n" + kRows4), 1u);
  EXPECT_EQ(error_line("HHOM-MASK v1\nd=4 nx=4 ny=4 ell=1\n" + kRows4), 2u);
  EXPECT_EQ(error_line("HHOM-MASK v1\nd=2 nx=4 ny=4 nz=4 ell=1\n" + kRows4), 2u);
  EXPECT_EQ(error_line("HHOM-MASK v1\nd=2 nx=4 ny=4 ell=1 foo=3\n" + kRows4), 2u);
  EXPECT_EQ(error_line("HHOM-MASK v1\nd=2 nx=4 nx=4 ny=4 ell=1\n" + kRows4), 2u);
  EXPECT_EQ(error_line("HHOM-MASK v1\nd=2 nx=4 ny=4\n" + kRows4), 2u);
  EXPECT_EQ(error_line("HHOM-MASK v1\nd=2 nx=4 ny=4 ell=-1\n" + kRows4), 2u);
  EXPECT_EQ(error_line("HHOM-MASK v1\nd=2 nx=2 ny=4 ell=1\n" + kRows4), 2u);
  // truncated: three rows of four
  EXPECT_EQ(error_line(kHeader2d + "0110\n1001\n1001\n"), 6u);
  EXPECT_EQ(error_line(kHeader2d + "0110\n10010\n1001\n0110\n"), 4u);
  EXPECT_EQ(error_line(kHeader2d + "0110\n1001\n1x01\n0110\n"), 5u);
  EXPECT_EQ(error_line(kHeader2d + "0110\n1001\n1001\n0110"), 6u);
  EXPECT_EQ(error_line(kHeader2d + kRows4 + "0000\n"), 7u);
  EXPECT_NO_THROW(parse(kHeader2d + kRows4));
}
