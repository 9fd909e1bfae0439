#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cpt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCompute = 3;

/// Runs one command line (without the program name). Primary output goes to
/// `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpt::cli
