// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_CLI_H_
#define CROSSVIEW_CLI_H_

#include <iosfwd>

namespace crossview {

// Subcommands: gen-data, train, eval, match, ablate.
// Returns 0 on success, 2 on usage errors, 1 on runtime failures.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace crossview

#endif  // CROSSVIEW_CLI_H_
