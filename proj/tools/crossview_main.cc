// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "crossview/cli.h"

int main(int argc, char** argv) {
  return crossview::RunCli(argc, argv, std::cout, std::cerr);
}
