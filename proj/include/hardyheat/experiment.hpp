#pragma once

#include <optional>
#include <string>

#include "hardyheat/report.hpp"

namespace hardyheat {

struct RunOptions {
  std::string out_dir;  // overrides the config's out_dir when nonempty
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool dry_run = false;
  bool dump_matrices = false;
};

/// Validates a config document against the schema; throws ConfigInvalid with
/// the offending key in the message. Returns the config with defaults filled.
Json validate_config(const Json& cfg);

/// Runs the experiment described by the config file. Writes report.json,
/// summary.csv and a run_meta.json sidecar into the output directory.
/// Exit code: 0 all checks pass, 2 when some verdict is inconclusive, 1 on
/// failed checks (errors escape as exceptions).
int run_experiment(const std::string& config_path, const RunOptions& opts);

/// Same, but returns the report for in-process callers (tests).
int run_experiment_json(const Json& cfg, const RunOptions& opts, Json* report_out);

/// Potential catalog with predicted exponents.
Json catalog_json();

}  // namespace hardyheat
