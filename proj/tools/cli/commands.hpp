#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ceo_rd::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitDomain = 2,
  kExitInconsistent = 3,
  kExitGate = 4,
};

enum class Format { json, csv };

/// Everything one invocation needs. Model fields default to two independent
/// unit-variance sources in dimension 3.
struct RunConfig {
  double gamma_x = 1.0;
  double rho_x = 0.0;
  double gamma_z = 1.0;
  double rho_z = 0.0;
  int ell = 3;

  int k = 1;
  std::optional<double> dk;
  std::optional<double> dk_min;
  std::optional<double> dk_max;
  int steps = 50;
  std::optional<int> j;
  std::optional<double> lambda_q;
  std::optional<double> lambda_w;

  std::int64_t n = 100000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  double tol = 1e-9;      // KKT residual tolerance
  double gap_tol = 1e-6;  // certificate vs numeric optimum

  std::optional<Format> format;  // unset: csv for sweep and region, json otherwise
  std::string out;
  bool bits = false;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string output;
  std::vector<std::string> warnings;
};

/// Commands understood by run_command.
[[nodiscard]] const std::vector<std::string>& command_names();

/// Runs one command on an already-parsed config. Domain errors propagate as
/// ceo_rd::DomainError; statistical and consistency failures are reported
/// through the exit code.
[[nodiscard]] CommandResult run_command(const std::string& name, const RunConfig& config);

/// Full entry point: parses argv, runs the command and writes output and
/// diagnostics. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ceo_rd::cli
