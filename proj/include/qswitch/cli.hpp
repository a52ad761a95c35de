#pragma once

// Command-line front end: argument parsing into a RunConfig and dispatch.
// Exit statuses: 0 all checks passed, 1 a check failed, 2 usage error.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qswitch/switchboard.hpp"

namespace qswitch::cli {

enum class Command { Verify, Clone, Demux, Ghz, Noise, Mg, Scan };
std::string command_name(Command c);

enum class OutputFormat { Table, Records };

struct RunConfig {
  Command command = Command::Verify;
  std::optional<Route> route;
  int shots = 1;
  std::uint64_t seed = 0;
  std::optional<std::array<double, 2>> state_angles;  // (theta, phi); empty means random
  int sites = 4;
  double coupling = 1.0;
  double alpha_mg = 1.0;
  std::vector<double> alpha_grid;
  OutputFormat format = OutputFormat::Table;
  std::optional<std::string> out_path;
  switchboard::NoiseChannel channel = switchboard::NoiseChannel::CollectiveUnitary;
};

/// Bad invocation; `flag` names the offending option (or the subcommand).
class UsageError : public std::invalid_argument {
 public:
  UsageError(std::string flag, const std::string& what)
      : std::invalid_argument(what), flag_(std::move(flag)) {}
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

/// `args` excludes the program name. Throws UsageError.
RunConfig parse_args(const std::vector<std::string>& args);

/// "a:b:step", inclusive of b up to rounding. Throws UsageError.
std::vector<double> parse_grid(const std::string& text);

/// Runs the command, writing the report to `out` and diagnostics to `err`.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + execute, honoring --out. Returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// The |alpha> used by shot `shot`: the fixed Bloch angles or a seeded draw.
StateVector input_state(const RunConfig& config, int shot);

}  // namespace qswitch::cli
