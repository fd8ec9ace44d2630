#include "evprice/commands.hpp"

#include "evprice/parallel.hpp"

#include <chrono>
#include <ostream>
#include <stdexcept>

namespace evprice {

namespace {

void apply(const CemOverrides& o, CemConfig& c)
{
  if (o.population) c.population = *o.population;
  if (o.max_iters) c.max_iters = *o.max_iters;
  if (o.elite_ratio) c.elite_ratio = *o.elite_ratio;
  if (o.smoothing) c.smoothing = *o.smoothing;
  if (o.tolerance) c.tolerance = *o.tolerance;
  if (o.psa_threshold) c.psa_threshold = *o.psa_threshold;
  if (o.psa_frequency) c.psa_frequency = *o.psa_frequency;
  if (o.sigma_min) c.sigma_min = *o.sigma_min;
  if (o.sigma_max) c.sigma_max = *o.sigma_max;
  if (o.window_hours) c.window_hours = *o.window_hours;
  if (o.cem_seed) c.seed = *o.cem_seed;
  if (o.warm_start) c.warm_start = true;
  if (o.psa_exact) c.psa_exact = true;
}

void check_cem(const CemConfig& c)
{
  if (c.population < 1) throw ScenarioError("cem.population", "must be >= 1");
  if (!(c.elite_ratio > 0.0 && c.elite_ratio <= 1.0)) throw ScenarioError("cem.elite_ratio", "must be in (0, 1]");
  if (!(c.smoothing >= 0.0 && c.smoothing <= 1.0)) throw ScenarioError("cem.smoothing", "must be in [0, 1]");
  if (!(c.tolerance > 0.0)) throw ScenarioError("cem.tolerance", "must be > 0");
  if (c.max_iters < 1) throw ScenarioError("cem.max_iters", "must be >= 1");
  if (c.psa_frequency < 1) throw ScenarioError("cem.psa_frequency", "must be >= 1");
  if (!(c.psa_threshold >= 0.0)) throw ScenarioError("cem.psa_threshold", "must be >= 0");
  if (!(c.sigma_min > 0.0)) throw ScenarioError("cem.sigma_min", "must be > 0");
  if (c.sigma_max < 0.0) throw ScenarioError("cem.sigma_max", "must be >= 0");
  if (c.window_hours < 1) throw ScenarioError("cem.window_hours", "must be >= 1");
}

StrategyRun finish(const Scenario& scenario, PriceSchedule schedule, std::uint64_t seed, std::string strategy)
{
  StrategyRun run;
  run.strategy = std::move(strategy);
  run.simulation = simulate(scenario, schedule, scenario.choice, seed);
  run.schedule = std::move(schedule);
  run.hourly = report::hourly_table(scenario, run.simulation.hours);
  run.totals = report::totals_from(run.hourly);
  return run;
}

void write_run(const std::filesystem::path& out, const Scenario& scenario, const StrategyRun& run,
               const std::string& command, std::uint64_t seed)
{
  report::write_csv(out / "hourly.csv", run.hourly);
  report::TotalsDocument doc;
  doc.metadata = {command, run.strategy, report::mode_name(scenario.choice.mode), seed, scenario.econ.omega};
  doc.totals = run.totals;
  doc.sampled_arrivals = report::sampled_arrivals(run.simulation.hours, seed);
  if (run.optimization) {
    doc.optimized = true;
    doc.non_converged_windows = run.optimization->non_converged;
    doc.audit = run.optimization->audit;
  }
  report::write_totals(out / "totals.json", scenario, doc);
}

class Stopwatch {
 public:
  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

Prepared prepare(const CommonOptions& common, const CemOverrides* cem)
{
  Prepared p{load_scenario(common.scenario), 0};
  if (common.choice) {
    try {
      p.scenario.choice.mode = report::parse_mode(*common.choice);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("choice.mode", e.what());
    }
  }
  if (common.threads) p.scenario.cem.threads = *common.threads;
  if (cem) apply(*cem, p.scenario.cem);
  check_cem(p.scenario.cem);
  p.seed = common.seed.value_or(p.scenario.seed);
  return p;
}

StrategyRun run_fixed(const Scenario& scenario, std::uint64_t seed, std::optional<double> level)
{
  return finish(scenario, fixed_schedule(scenario, level.value_or(scenario.benchmarks.fixed_level)), seed, "fixed");
}

StrategyRun run_tou(const Scenario& scenario, std::uint64_t seed)
{
  const auto& b = scenario.benchmarks;
  return finish(scenario, tou_schedule(scenario, b.peak_hours, b.tou_peak, b.tou_offpeak), seed, "tou");
}

StrategyRun run_schedule(const Scenario& scenario, const PriceSchedule& schedule, std::uint64_t seed,
                         const std::string& strategy)
{
  return finish(scenario, schedule, seed, strategy);
}

StrategyRun run_dynamic(const Scenario& scenario, std::uint64_t seed, std::ostream* log)
{
  auto progress = [log](const WindowResult& w) {
    if (!log) return;
    *log << "window " << w.index << ": best " << report::format_number(w.best_score) << " after " << w.iterations
         << " iterations" << (w.converged ? "" : " (not converged)") << '\n';
  };
  RollingResult rolling = rolling_horizon(scenario, scenario.cem, scenario.choice, seed, progress);
  StrategyRun run = finish(scenario, rolling.schedule, seed, "dynamic");
  run.optimization = std::move(rolling);
  return run;
}

double average_price(const StrategyRun& run)
{
  double paid = 0.0, volume = 0.0;
  for (const auto& h : run.simulation.hours) {
    paid += h.prices.dot(h.equilibrium.arrival_rates);
    volume += h.equilibrium.arrival_rates.sum();
  }
  if (volume > 0.0) return paid / volume;
  return run.schedule.prices.size() ? run.schedule.prices.mean() : 0.0;
}

int cmd_run(const RunOptions& options, std::ostream& log)
{
  const Stopwatch clock;
  const Prepared p = prepare(options.common);
  StrategyRun run;
  if (options.pricing == "fixed") {
    run = run_fixed(p.scenario, p.seed, options.level);
  } else if (options.pricing == "tou") {
    run = run_tou(p.scenario, p.seed);
  } else if (options.pricing == "dynamic-file") {
    if (options.prices_file.empty()) throw std::invalid_argument("--pricing dynamic-file needs --prices");
    run = run_schedule(p.scenario, report::read_prices(options.prices_file, p.scenario), p.seed, "dynamic-file");
  } else {
    throw std::invalid_argument("unknown pricing " + options.pricing);
  }
  write_run(options.common.out, p.scenario, run, "run", p.seed);
  log << "run " << run.strategy << ": PI " << report::format_number(run.totals.pi) << ", wall " << clock.seconds()
      << " s\n";
  return kSuccess;
}

int cmd_optimize(const OptimizeOptions& options, std::ostream& log)
{
  const Stopwatch clock;
  Prepared p = prepare(options.common, &options.cem);
  if (options.omega) {
    if (!(*options.omega >= 0.0 && *options.omega <= 1.0)) throw ScenarioError("econ.omega", "must be in [0, 1]");
    p.scenario.econ.omega = *options.omega;
  }
  const StrategyRun run = run_dynamic(p.scenario, p.seed, &log);
  const auto& opt = *run.optimization;
  report::write_prices(options.common.out / "prices.json", p.scenario, run.schedule);
  report::write_csv(options.common.out / "trace.csv", report::trace_table(opt.windows));
  report::write_text(options.common.out / "report.svg", report::convergence_svg(opt.windows));
  write_run(options.common.out, p.scenario, run, "optimize", p.seed);
  log << "optimize: PI " << report::format_number(run.totals.pi) << ", " << opt.non_converged.size()
      << " non-converged windows, wall " << clock.seconds() << " s\n";
  if (options.common.strict && !opt.non_converged.empty()) return kNonConverged;
  return kSuccess;
}

int cmd_compare(const CompareOptions& options, std::ostream& log)
{
  const Stopwatch clock;
  Prepared p = prepare(options.common, &options.cem);
  p.scenario.choice.mode = ChoiceMode::MnlMsa;
  const std::vector<StrategyRun> runs{run_fixed(p.scenario, p.seed), run_tou(p.scenario, p.seed),
                                      run_dynamic(p.scenario, p.seed, &log)};
  report::CsvTable table;
  table.header = {"strategy", "total_ev_utility", "total_cs_revenue", "total_queue_penalty", "total_PI"};
  for (const auto& r : runs)
    table.rows.push_back({r.strategy, report::format_number(r.totals.ev_utility),
                          report::format_number(r.totals.cs_revenue), report::format_number(r.totals.queue_penalty),
                          report::format_number(r.totals.pi)});
  report::write_csv(options.common.out / "compare.csv", table);
  log << "compare: wall " << clock.seconds() << " s\n";
  const bool nonconverged = !runs.back().optimization->non_converged.empty();
  return options.common.strict && nonconverged ? kNonConverged : kSuccess;
}

int cmd_omega_sweep(const OmegaSweepOptions& options, std::ostream& log)
{
  const Stopwatch clock;
  if (options.omegas.empty()) throw std::invalid_argument("--omegas needs at least one value");
  for (double w : options.omegas)
    if (!(w >= 0.0 && w <= 1.0)) throw ScenarioError("omegas", "every omega must be in [0, 1]");
  const Prepared p = prepare(options.common, &options.cem);
  report::CsvTable table;
  table.header = {"omega", "avg_price", "cs_revenue", "ev_utility", "pi", "system_utility"};
  bool nonconverged = false;
  for (double w : options.omegas) {
    Scenario s = p.scenario;
    s.econ.omega = w;
    log << "omega " << report::format_number(w) << '\n';
    const StrategyRun run = run_dynamic(s, p.seed, &log);
    nonconverged = nonconverged || !run.optimization->non_converged.empty();
    const double r = run.totals.cs_revenue, u = run.totals.ev_utility;
    table.rows.push_back({report::format_number(w), report::format_number(average_price(run)),
                          report::format_number(r), report::format_number(u), report::format_number(run.totals.pi),
                          report::format_number(0.5 * (r + u))});
  }
  report::write_csv(options.common.out / "omega_sweep.csv", table);
  log << "omega-sweep: wall " << clock.seconds() << " s\n";
  return options.common.strict && nonconverged ? kNonConverged : kSuccess;
}

}  // namespace evprice
