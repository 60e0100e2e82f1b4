// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_ERROR_HPP
#define HALLHOM_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hallhom
{

// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

class SingularMatrixError : public Error
{
public:
  using Error::Error;
};

// The Dykhne coefficients do not exist (h = 0 or equal Hall coefficients).
// Callers bypass the transform with DykhneCoefficients::Identity().
class DegenerateTransformError : public Error
{
public:
  using Error::Error;
};

// The Moebius image of a phase kept an imaginary part, or lost positivity.
class NonRealTransformError : public Error
{
public:
  using Error::Error;
};

class NonConvergenceError : public Error
{
public:
  NonConvergenceError(const std::string &what, double best_residual, std::size_t iterations)
    : Error(what), best_residual_(best_residual), iterations_(iterations)
  {}

  double best_residual() const { return best_residual_; }
  std::size_t iterations() const { return iterations_; }

private:
  double best_residual_;
  std::size_t iterations_;
};

class ParseError : public Error
{
public:
  ParseError(const std::string &what, std::size_t line)
    : Error("line " + std::to_string(line) + ": " + what), line_(line)
  {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace hallhom

#endif // HALLHOM_ERROR_HPP
