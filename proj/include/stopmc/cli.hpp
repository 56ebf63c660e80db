#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stopmc/driver.hpp"
#include "stopmc/model.hpp"

namespace stopmc {

enum class PayoffKind { exit_time, exit_time_running, constant };

PayoffKind parse_payoff(const std::string& name);
std::string to_string(PayoffKind kind);

/// Everything that determines a CLI run. Echoed next to every CSV.
struct RunManifest {
  std::string subcommand;
  std::string problem = "cube3d";
  PayoffKind payoff = PayoffKind::exit_time;
  double constant_value = 1.0;
  std::vector<Estimator> estimators{Estimator::new2};
  std::vector<double> eps{0.01};
  std::vector<int> levels{0, 1, 2, 3, 4};
  std::int64_t samples = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
  int truncation = 39;
  int refinement = 4;
  double h0 = 0.1;
  SplitRule m_rule;
  int L_min = 2;
  int L_max = 10;
  std::int64_t initial_samples = 50;
  std::vector<double> point;  // reference subcommand; defaults to the problem's start
  double time = 0.0;
};

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitSimulation = 3, kExitLevelCap = 4, kExitIo = 5 };

/// "0:4", "1,3,5" or a single level.
std::vector<int> parse_levels(const std::string& text);

ProblemSpec manifest_problem(const RunManifest& m);
MlmcConfig manifest_config(const RunManifest& m, Estimator estimator, double eps);
std::string manifest_json(const RunManifest& m);

/// Reference value at the problem's start (or NaN when none is known).
double problem_reference(const RunManifest& m);

inline const char* kLevelsHeader =
    "estimator,level,h,N,mean_diff,var_diff,mean_fine,var_fine,kurtosis,cost_per_sample,normalized_cost";
inline const char* kRunHeader = "estimator,eps,estimate,reference,abs_error,L,total_cost,eps2_cost,status";
inline const char* kRunLevelsHeader = "estimator,eps,level,h,N,mean_diff,var_diff,cost_per_sample";

std::string levels_csv(const RunManifest& m);

struct RunTables {
  std::string summary;
  std::string per_level;
  bool level_cap = false;
};
RunTables run_csv(const RunManifest& m);

double reference_value(const RunManifest& m);

/// Writes to a sibling temp file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

/// "<stem>_levels.csv" next to a run summary at `path`.
std::string per_level_path(const std::string& path);

int cmd_levels(const RunManifest& m, std::ostream& out);
int cmd_run(const RunManifest& m, std::ostream& out);
int cmd_reference(const RunManifest& m, std::ostream& out);

/// Parses argv (without the program name), dispatches, and maps failures
/// to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stopmc
