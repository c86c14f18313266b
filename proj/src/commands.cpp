#include "fvd/commands.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "fvd/config.hpp"
#include "fvd/diagnostics.hpp"
#include "fvd/verify.hpp"

namespace fvd {
namespace {

namespace fs = std::filesystem;

/// Empty for missing or NaN values so CSV readers see a blank cell.
std::string cell(double v) { return std::isfinite(v) ? fmt::format("{}", v) : ""; }

std::string metric_cell(const RunReport& r, const std::string& name) {
  const auto it = r.metrics.find(name);
  return it == r.metrics.end() ? "" : cell(it->second);
}

std::string step_row(const StepStats& s) {
  return fmt::format("{},{},{},{},{},{},{},{}", s.step, cell(s.alpha_t), cell(s.lambda),
                     s.n_dead, s.n_revived, s.distinct_lineages, cell(s.mean_reward),
                     cell(s.std_log_g));
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write {}", path.string()));
  f << content;
  if (!f) throw Error(fmt::format("write to {} failed", path.string()));
}

struct Plan {
  ExperimentConfig exp;
  std::vector<SweepPoint> points;
  std::vector<std::uint64_t> seeds;
  fs::path out_dir;
};

Plan make_plan(const CliOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError("--config is required");
  if (opts.workers < 1) throw ConfigError("--workers must be >= 1");
  Plan p;
  p.exp = load_experiment(opts.config_path);
  p.points = expand_sweep(p.exp);
  p.seeds = opts.seed_override ? std::vector<std::uint64_t>{*opts.seed_override}
                               : p.exp.seeds;
  p.out_dir = opts.out_dir.value_or(p.exp.output_dir);
  fs::create_directories(p.out_dir);
  return p;
}

std::string run_id(std::size_t point, std::uint64_t seed) {
  return fmt::format("p{:03}_s{}", point, seed);
}

Json report_json(const std::string& id, const SweepPoint& pt, const RunConfig& cfg,
                 const RunReport& report, std::optional<double> wall_ms) {
  Json steps = Json::array();
  for (const auto& s : report.per_step_stats) {
    steps.push_back({{"step", s.step},
                     {"alpha_t", s.alpha_t},
                     {"lambda", s.lambda},
                     {"n_dead", s.n_dead},
                     {"n_revived", s.n_revived},
                     {"distinct_lineages", s.distinct_lineages},
                     {"mean_reward", s.mean_reward},
                     {"std_log_g", s.std_log_g}});
  }
  Json assignments = Json::object();
  for (const auto& [k, v] : pt.assignments) assignments[k] = v;
  Json metrics = Json::object();
  for (const auto& [k, v] : report.metrics) {
    metrics[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
  }
  Json j = {{"version", fmt::format("fvd {}", FVD_VERSION)},
            {"run_id", id},
            {"sweep_point", pt.index},
            {"sweep_assignments", assignments},
            {"seed", cfg.seed},
            {"config", run_config_to_json(cfg)},
            {"metrics", metrics},
            {"lambda_trace", report.lambda_trace},
            {"per_step", steps},
            {"selected", report.selected}};
  if (wall_ms) j["wall_ms"] = *wall_ms;
  return j;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitBadConfig;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitRunFailed;
  }
}

}  // namespace

int cmd_run(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Plan plan = make_plan(opts);
    std::string summary = fmt::format("{}\n{}\n", kSummarySchemaLine, kSummaryCsvHeader);
    for (const auto& pt : plan.points) {
      for (std::uint64_t seed : plan.seeds) {
        RunConfig cfg = pt.config;
        cfg.seed = seed;
        cfg.workers = opts.workers;
        const std::string id = run_id(pt.index, seed);
        RunReport report;
        double wall = 0.0;
        try {
          const auto t0 = std::chrono::steady_clock::now();
          report = run(cfg);
          evaluate_metrics(cfg, report, plan.exp.metrics, plan.exp.oracle_lambda);
          wall = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
        } catch (const std::exception& e) {
          throw Error(fmt::format("run {} failed: {}", id, e.what()));
        }
        if (!plan.exp.record_wall_time) wall = 0.0;

        write_file(plan.out_dir / fmt::format("run_{}.json", id),
                   report_json(id, pt, cfg, report,
                               plan.exp.record_wall_time ? std::optional(wall)
                                                         : std::nullopt)
                           .dump(2) +
                       "\n");
        std::string steps = fmt::format("{}\n", kStepCsvHeader);
        for (const auto& s : report.per_step_stats) steps += step_row(s) + "\n";
        write_file(plan.out_dir / fmt::format("run_{}_steps.csv", id), steps);

        summary += fmt::format("{},{},{},{},{},{},{},{}\n", pt.index, seed,
                               metric_cell(report, "mean_reward"),
                               metric_cell(report, "mmd"),
                               metric_cell(report, "diversity"),
                               metric_cell(report, "tv_oracle"),
                               metric_cell(report, "final_lineages"), cell(wall));
        fmt::print(out, "run {} done\n", id);
      }
    }
    write_file(plan.out_dir / "summary.csv", summary);
    return kExitOk;
  });
}

int cmd_verify(const CliOptions&, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto results = verify::run_all();
    verify::print_table(out, results);
    const bool ok = std::all_of(results.begin(), results.end(),
                                [](const verify::CheckResult& r) { return r.passed; });
    return ok ? kExitOk : kExitCheckFailed;
  });
}

int cmd_compare(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Plan plan = make_plan(opts);
    constexpr std::array<Method, 2> kMethods{Method::kFvd, Method::kSmcMultinomial};
    constexpr std::size_t kBins = 10;
    const std::vector<std::string> names{"mean_reward", "final_lineages", "mean_death_rate",
                                         "mean_killed_rank", "frac_killed_rank_above_0.7"};

    std::array<std::string, 2> steps;
    std::array<std::array<std::size_t, kBins>, 2> hist{};
    for (auto& s : steps) s = fmt::format("sweep_point,seed,{}\n", kStepCsvHeader);
    std::string summary = fmt::format(
        "# schema: fvd-compare v1\nsweep_point,seed,method,final_lineages,mean_death_rate,"
        "mean_killed_rank,frac_killed_rank_above_0.7,mean_reward\n");

    for (const auto& pt : plan.points) {
      for (std::uint64_t seed : plan.seeds) {
        for (std::size_t m = 0; m < kMethods.size(); ++m) {
          RunConfig cfg = pt.config;
          cfg.seed = seed;
          cfg.workers = opts.workers;
          cfg.method = kMethods[m];
          const std::string id = fmt::format("{}_{}", run_id(pt.index, seed),
                                             to_string(kMethods[m]));
          RunReport report;
          try {
            report = run(cfg);
            evaluate_metrics(cfg, report, names);
          } catch (const std::exception& e) {
            throw Error(fmt::format("run {} failed: {}", id, e.what()));
          }
          for (const auto& s : report.per_step_stats) {
            steps[m] += fmt::format("{},{},{}\n", pt.index, seed, step_row(s));
          }
          for (const auto& ev : report.events) {
            for (double r : ev.killed_ranks) {
              ++hist[m][std::min(kBins - 1, static_cast<std::size_t>(r * kBins))];
            }
          }
          summary += fmt::format("{},{},{},{},{},{},{},{}\n", pt.index, seed,
                                 to_string(kMethods[m]),
                                 metric_cell(report, "final_lineages"),
                                 metric_cell(report, "mean_death_rate"),
                                 metric_cell(report, "mean_killed_rank"),
                                 metric_cell(report, "frac_killed_rank_above_0.7"),
                                 metric_cell(report, "mean_reward"));
          fmt::print(out, "run {} done\n", id);
        }
      }
    }

    std::string histogram = "method,bin_lo,bin_hi,count,fraction\n";
    for (std::size_t m = 0; m < kMethods.size(); ++m) {
      std::size_t total = 0;
      for (auto c : hist[m]) total += c;
      for (std::size_t b = 0; b < kBins; ++b) {
        histogram += fmt::format(
            "{},{},{},{},{}\n", to_string(kMethods[m]),
            static_cast<double>(b) / kBins, static_cast<double>(b + 1) / kBins, hist[m][b],
            total == 0 ? std::string("") : cell(static_cast<double>(hist[m][b]) /
                                                static_cast<double>(total)));
      }
    }
    for (std::size_t m = 0; m < kMethods.size(); ++m) {
      write_file(plan.out_dir / fmt::format("compare_{}_steps.csv", to_string(kMethods[m])),
                 steps[m]);
    }
    write_file(plan.out_dir / "compare_summary.csv", summary);
    write_file(plan.out_dir / "killed_rank_histogram.csv", histogram);
    return kExitOk;
  });
}

}  // namespace fvd
