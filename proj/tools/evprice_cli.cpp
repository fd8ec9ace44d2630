#include "evprice/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* cmd, evprice::CommonOptions& o)
{
  cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Run seed (default: scenario seed)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads for population evaluation (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--strict", o.strict, "Exit with code 3 when any window fails to converge");
  cmd->add_option("--choice", o.choice, "Choice model")->check(CLI::IsMember({"dc", "mnl", "msa"}));
}

void add_cem(CLI::App* cmd, evprice::CemOverrides& o)
{
  cmd->add_option("--population", o.population, "Samples per iteration");
  cmd->add_option("--max-iters", o.max_iters, "Iteration cap per window");
  cmd->add_option("--elite-ratio", o.elite_ratio, "Elite fraction");
  cmd->add_option("--smoothing", o.smoothing, "Mean smoothing weight on the previous mean");
  cmd->add_option("--tolerance", o.tolerance, "Relative elite spread for the stopping rule");
  cmd->add_option("--psa-threshold", o.psa_threshold, "KL threshold for the active set");
  cmd->add_option("--psa-frequency", o.psa_frequency, "Run sensitivity screening every n iterations");
  cmd->add_option("--sigma-min", o.sigma_min, "Lower clamp on sampling std");
  cmd->add_option("--sigma-max", o.sigma_max, "Upper clamp on sampling std");
  cmd->add_option("--window", o.window_hours, "Rolling window length in hours");
  cmd->add_option("--cem-seed", o.cem_seed, "Optimizer seed");
  cmd->add_flag("--warm-start", o.warm_start, "Start each window from the previous window's distribution");
  cmd->add_flag("--psa-exact", o.psa_exact, "Re-solve frozen populations from scratch");
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"EV charging price simulator and optimizer"};
  app.require_subcommand(1);

  evprice::RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one pricing strategy");
  add_common(run_cmd, run.common);
  run_cmd->add_option("--pricing", run.pricing, "Pricing strategy")
      ->check(CLI::IsMember({"fixed", "tou", "dynamic-file"}));
  run_cmd->add_option("--prices", run.prices_file, "Stored schedule for dynamic-file pricing");
  run_cmd->add_option("--level", run.level, "Fixed price level ($/kWh)");

  evprice::OptimizeOptions opt;
  auto* opt_cmd = app.add_subcommand("optimize", "Optimize dynamic prices over the horizon");
  add_common(opt_cmd, opt.common);
  add_cem(opt_cmd, opt.cem);
  opt_cmd->add_option("--omega", opt.omega, "Revenue weight in the performance index");

  evprice::CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare fixed, time-of-use and dynamic pricing");
  add_common(cmp_cmd, cmp.common);
  add_cem(cmp_cmd, cmp.cem);

  evprice::OmegaSweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("omega-sweep", "Optimize once per revenue weight");
  add_common(sweep_cmd, sweep.common);
  add_cem(sweep_cmd, sweep.cem);
  sweep_cmd->add_option("--omegas", sweep.omegas, "Revenue weights")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? evprice::kSuccess : evprice::kUsage;
  }

  try {
    if (*run_cmd) return evprice::cmd_run(run, std::cerr);
    if (*opt_cmd) return evprice::cmd_optimize(opt, std::cerr);
    if (*cmp_cmd) return evprice::cmd_compare(cmp, std::cerr);
    if (*sweep_cmd) return evprice::cmd_omega_sweep(sweep, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return evprice::kValidation;
  }
  return evprice::kUsage;
}
