#pragma once

#include "evprice/report.hpp"
#include "evprice/rolling_horizon.hpp"
#include "evprice/scenario.hpp"
#include "evprice/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evprice {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kValidation = 2, kNonConverged = 3 };

struct CommonOptions {
  std::filesystem::path scenario;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  std::optional<int> threads;
  bool strict = false;
  std::optional<std::string> choice;  // dc | mnl | msa
};

/// Optional overrides of the scenario's cem block.
struct CemOverrides {
  std::optional<int> population;
  std::optional<int> max_iters;
  std::optional<double> elite_ratio;
  std::optional<double> smoothing;
  std::optional<double> tolerance;
  std::optional<double> psa_threshold;
  std::optional<int> psa_frequency;
  std::optional<double> sigma_min;
  std::optional<double> sigma_max;
  std::optional<int> window_hours;
  std::optional<std::uint64_t> cem_seed;
  bool warm_start = false;
  bool psa_exact = false;
};

struct RunOptions {
  CommonOptions common;
  std::string pricing = "fixed";  // fixed | tou | dynamic-file
  std::filesystem::path prices_file;
  std::optional<double> level;     // fixed price override
};

struct OptimizeOptions {
  CommonOptions common;
  CemOverrides cem;
  std::optional<double> omega;
};

struct CompareOptions {
  CommonOptions common;
  CemOverrides cem;
};

struct OmegaSweepOptions {
  CommonOptions common;
  CemOverrides cem;
  std::vector<double> omegas = {0.1, 0.3, 0.5, 0.7, 0.9};
};

/// Scenario with command-line overrides applied; run seed resolved.
struct Prepared {
  Scenario scenario;
  std::uint64_t seed = 0;
};

Prepared prepare(const CommonOptions& common, const CemOverrides* cem = nullptr);

struct StrategyRun {
  std::string strategy;
  PriceSchedule schedule;
  SimulationResult simulation;
  report::CsvTable hourly;
  report::RunTotals totals;
  std::optional<RollingResult> optimization;
};

StrategyRun run_fixed(const Scenario& scenario, std::uint64_t seed, std::optional<double> level = std::nullopt);
StrategyRun run_tou(const Scenario& scenario, std::uint64_t seed);
StrategyRun run_schedule(const Scenario& scenario, const PriceSchedule& schedule, std::uint64_t seed,
                         const std::string& strategy);
StrategyRun run_dynamic(const Scenario& scenario, std::uint64_t seed, std::ostream* log = nullptr);

/// Demand-weighted mean price over the horizon; the plain mean when nothing arrives.
double average_price(const StrategyRun& run);

int cmd_run(const RunOptions& options, std::ostream& log);
int cmd_optimize(const OptimizeOptions& options, std::ostream& log);
int cmd_compare(const CompareOptions& options, std::ostream& log);
int cmd_omega_sweep(const OmegaSweepOptions& options, std::ostream& log);

}  // namespace evprice
