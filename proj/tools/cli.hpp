#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace levyopt::cli {

/// Runs one command line (arguments without the program name). Reports go to `out`,
/// diagnostics to `err`; artifacts are written below the output directory.
/// Exit codes: 0 success (warnings allowed), 1 a check failed, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace levyopt::cli
