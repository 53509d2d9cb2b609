#ifndef DRN_CLI_HPP
#define DRN_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace drn {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// Single-threaded, deterministic kernels when DRN_DETERMINISTIC=1.
void apply_determinism_from_env();

}  // namespace drn

#endif
