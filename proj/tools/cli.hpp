#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kscope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// Runs one `kernelscope` invocation. `args` excludes the program name.
/// Returns 0 on success, 2 on usage/validation errors, 1 on runtime errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kscope::cli
