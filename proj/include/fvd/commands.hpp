#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace fvd {

struct CliOptions {
  std::string config_path;
  /// Overrides the config's output_dir.
  std::optional<std::string> out_dir;
  unsigned workers = 1;
  /// Replaces the config's seed list with this single seed.
  std::optional<std::uint64_t> seed_override;
};

/// Exit codes shared by the subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitRunFailed = 3;

inline constexpr const char* kStepCsvHeader =
    "step,alpha_t,lambda,n_dead,n_revived,distinct_lineages,mean_reward,std_log_g";
inline constexpr const char* kSummaryCsvHeader =
    "sweep_point,seed,mean_reward,mmd,diversity,tv_oracle,final_lineages,wall_ms";
inline constexpr const char* kSummarySchemaLine = "# schema: fvd-summary v1";

/// Every (sweep point, seed) run: run_<id>.json, run_<id>_steps.csv, and one
/// summary.csv, all under the output directory.
int cmd_run(const CliOptions& opts, std::ostream& out, std::ostream& err);

/// Prints the self-check table; 0 iff every check passes.
int cmd_verify(const CliOptions& opts, std::ostream& out, std::ostream& err);

/// Runs each (sweep point, seed) with both resampling methods and writes
/// per-method step CSVs, a summary, and a killed-rank histogram.
int cmd_compare(const CliOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace fvd
