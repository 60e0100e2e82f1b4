// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_MASK_IO_HPP
#define HALLHOM_MASK_IO_HPP

// HHOM-MASK v1 text format:
//
//   HHOM-MASK v1
//   d=<2|3> nx=<int> ny=<int> [nz=<int>] ell=<float>
//   <ny*nz rows of nx '0'/'1' characters, x fastest, then y, then z>
//
// Every line, including the last, ends with '\n'.

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "hallhom/error.hpp"
#include "hallhom/microstructure.hpp"

namespace hallhom
{

inline constexpr const char *kMaskMagic = "HHOM-MASK v1";

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_mask(std::ostream &os, const PhaseMask &mask)
{
  const CellGeometry &g = mask.geometry;
  os << kMaskMagic << '\n';
  os << "d=" << g.dim << " nx=" << g.n[0] << " ny=" << g.n[1];
  if (g.dim == 3)
    os << " nz=" << g.n[2];
  os << " ell=" << format_double(g.extents[0]) << '\n';
  std::string row(static_cast<std::size_t>(g.n[0]), '0');
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j) {
      for (int i = 0; i < g.n[0]; ++i)
        row[i] = mask.at(i, j, k) ? '1' : '0';
      os << row << '\n';
    }
}

inline PhaseMask read_mask(std::istream &is)
{
  std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string &out) {
    if (pos >= content.size())
      return false;
    const auto nl = content.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos)
      throw ParseError("missing trailing newline", line_no);
    out.assign(content, pos, nl - pos);
    pos = nl + 1;
    return true;
  };

  std::string line;
  if (!next_line(line))
    throw ParseError("empty file", 1);
  if (line != kMaskMagic)
    throw ParseError("bad magic, expected '" + std::string(kMaskMagic) + "'", line_no);
  if (!next_line(line))
    throw ParseError("missing header line", line_no + 1);

  std::map<std::string, std::string> kv;
  {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ParseError("malformed header token '" + tok + "'", line_no);
      const std::string key = tok.substr(0, eq);
      if (key != "d" && key != "nx" && key != "ny" && key != "nz" && key != "ell")
        throw ParseError("unknown header key '" + key + "'", line_no);
      if (!kv.emplace(key, tok.substr(eq + 1)).second)
        throw ParseError("duplicate header key '" + key + "'", line_no);
    }
  }
  auto get_int = [&](const std::string &key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ParseError("missing header key '" + key + "'", line_no);
    int v = 0;
    const auto &s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParseError("header key '" + key + "' is not an integer", line_no);
    return v;
  };

  const int d = get_int("d");
  if (d != 2 && d != 3)
    throw ParseError("unsupported dimension d=" + std::to_string(d), line_no);
  if (d == 2 && kv.count("nz"))
    throw ParseError("nz given for a 2D mask", line_no);
  double ell = 1.0;
  {
    auto it = kv.find("ell");
    if (it == kv.end())
      throw ParseError("missing header key 'ell'", line_no);
    const auto &s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), ell);
    if (ec != std::errc() || p != s.data() + s.size() || !(ell > 0.0))
      throw ParseError("header key 'ell' must be a positive number", line_no);
  }

  CellGeometry g;
  g.dim = d;
  g.n = {get_int("nx"), get_int("ny"), d == 3 ? get_int("nz") : 1};
  g.extents = {ell, 1.0, 1.0};
  for (int a = 0; a < d; ++a)
    if (g.n[a] < CellGeometry::kMinResolution)
      throw ParseError("grid size below " + std::to_string(CellGeometry::kMinResolution) + " along an axis", line_no);

  PhaseMask mask(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j) {
      if (!next_line(line))
        throw ParseError("truncated file: expected " + std::to_string(g.n[1] * g.n[2]) + " rows", line_no + 1);
      if (line.size() != static_cast<std::size_t>(g.n[0]))
        throw ParseError("row length " + std::to_string(line.size()) + " does not match nx=" + std::to_string(g.n[0]),
                         line_no);
      for (int i = 0; i < g.n[0]; ++i) {
        if (line[i] != '0' && line[i] != '1')
          throw ParseError("row contains a character other than 0/1", line_no);
        mask.set(i, j, k, line[i] == '1');
      }
    }
  if (pos != content.size())
    throw ParseError("trailing content after the last row", line_no + 1);
  return mask;
}

inline void write_mask_file(const std::string &path, const PhaseMask &mask)
{
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw IoError("cannot open '" + path + "' for writing");
  write_mask(os, mask);
  if (!os)
    throw IoError("write to '" + path + "' failed");
}

inline PhaseMask read_mask_file(const std::string &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw IoError("cannot open '" + path + "'");
  return read_mask(is);
}

} // namespace hallhom

#endif // HALLHOM_MASK_IO_HPP
