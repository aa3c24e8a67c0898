#ifndef SARSA_PD_CLI_HPP
#define SARSA_PD_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace sarsa_pd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitConfigError = 2;

/// Parses argv (program name first), runs the selected subcommand and
/// returns the process exit status. Subcommands: run, heatmap, rho-sweep,
/// snapshot-series.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sarsa_pd

#endif  // SARSA_PD_CLI_HPP
