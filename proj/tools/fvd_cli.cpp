#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fvd/commands.hpp"

namespace {

void add_common(CLI::App* cmd, fvd::CliOptions& opts, std::string& out_dir,
                std::optional<std::uint64_t>& seed) {
  cmd->add_option("--config", opts.config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  cmd->add_option("--workers", opts.workers, "Worker threads per run")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed-override", seed, "Run only this seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleming-Viot reward-aligned diffusion sampler"};
  app.set_version_flag("--version", std::string("fvd ") + FVD_VERSION);
  app.require_subcommand(1);

  fvd::CliOptions opts;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run every sweep point and seed");
  add_common(run, opts, out_dir, seed);
  auto* compare = app.add_subcommand("compare", "Matched FV vs multinomial runs");
  add_common(compare, opts, out_dir, seed);
  auto* verify = app.add_subcommand("verify", "Check the sampler against exact laws");
  verify->add_option("--workers", opts.workers, "Accepted for symmetry; unused")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (!out_dir.empty()) opts.out_dir = out_dir;
  opts.seed_override = seed;

  if (run->parsed()) return fvd::cmd_run(opts, std::cout, std::cerr);
  if (compare->parsed()) return fvd::cmd_compare(opts, std::cout, std::cerr);
  return fvd::cmd_verify(opts, std::cout, std::cerr);
}
