#pragma once

// CSV/JSON/SVG writers for run artefacts. Every float is written with six
// decimals, and totals are summed from the written (rounded) values so a
// reader recomputing them from the CSV gets the same numbers.

#include "evprice/cem.hpp"
#include "evprice/economics.hpp"
#include "evprice/rolling_horizon.hpp"
#include "evprice/scenario.hpp"
#include "evprice/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace evprice::report {

std::string format_number(double value);
double rounded(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  Vec numeric(const std::string& name) const;
  double sum(const std::string& name) const;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// One row per hour: prices and queue metrics per station, then the
/// hour's economics.
CsvTable hourly_table(const Scenario& scenario, const std::vector<HourOutcome>& hours);

struct RunTotals {
  double queue_penalty = 0.0;
  double wait_loss = 0.0;
  double rejection_loss = 0.0;
  double ev_utility = 0.0;
  double cs_revenue = 0.0;
  double pi = 0.0;
  double rejected = 0.0;
  double unserved = 0.0;
  double arrivals = 0.0;
};

RunTotals totals_from(const CsvTable& hourly);

struct RunMetadata {
  std::string command;
  std::string strategy;
  std::string mode;
  std::uint64_t seed = 0;
  double omega = 0.5;
};

struct TotalsDocument {
  RunMetadata metadata;
  RunTotals totals;
  std::vector<double> sampled_arrivals;  // per station, realised categorical draws
  std::vector<int> non_converged_windows;
  bool optimized = false;
  PriceAudit audit;
};

void write_totals(const std::filesystem::path& path, const Scenario& scenario, const TotalsDocument& doc);

/// Realised station counts over the horizon from one categorical draw per EV.
std::vector<double> sampled_arrivals(const std::vector<HourOutcome>& hours, std::uint64_t seed);

void write_prices(const std::filesystem::path& path, const Scenario& scenario, const PriceSchedule& schedule);
/// Reads a stored schedule and checks its shape and bounds against the scenario.
PriceSchedule read_prices(const std::filesystem::path& path, const Scenario& scenario);

CsvTable trace_table(const std::vector<WindowResult>& windows);

/// Line chart of each window's best score.
std::string convergence_svg(const std::vector<WindowResult>& windows);

std::string mode_name(ChoiceMode mode);
ChoiceMode parse_mode(const std::string& name);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace evprice::report
