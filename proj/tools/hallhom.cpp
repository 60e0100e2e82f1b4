// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "hallhom/cli.hpp"

int main(int argc, char **argv)
{
  return hallhom::run_cli(argc, argv, std::cout, std::cerr);
}
