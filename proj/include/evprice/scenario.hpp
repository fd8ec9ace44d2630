#pragma once

#include "evprice/charging.hpp"
#include "evprice/params.hpp"
#include "evprice/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evprice {

struct Station {
  int id = 0;
  ChargerLevel level = ChargerLevel::L3;
  int poles = 1;
  int capacity = 1;
  double service_rate = 1.0;  // veh/h per pole
  double power = 50.0;        // kW
  Vec grid_price;             // $/kWh per hour
  Vec price_cap;              // $/kWh per hour
  Point location = Point::Zero();
};

struct EvAgent {
  int id = 0;
  double initial_soc = 0.5;
  double battery_capacity = 75.0;  // kWh
  double consumption_rate = 5.0;   // km/kWh
  double age_years = 0.0;
  double risk_aversion = 0.0;
  double degradation_rate = 0.02;  // 1/year
  Point location = Point::Zero();
  int spawn_hour = 0;
};

struct Hotspot {
  Point center = Point::Zero();
  double weight = 1.0;
  double radius = 1.0;  // km, std-dev of the placement scatter
};

struct DemandProfile {
  std::vector<int> hourly_counts;
  std::vector<Hotspot> hotspots;
  Point area_min = Point::Zero();
  Point area_max = Point(10.0, 10.0);
};

struct EvDistributions {
  double soc_min = 0.1;
  double soc_max = 0.6;
  double battery_capacity = 75.0;
  double consumption_rate = 5.0;
  double age_min = 0.0;
  double age_max = 8.0;
  std::vector<double> risk_aversion = {0.0, 0.05, 0.15};
  double degradation_rate = 0.02;
  ChargingCurve<double> l3 = ChargingCurve<double>::l3();
  ChargingCurve<double> l2 = ChargingCurve<double>::l2();
  double target_soc_l3 = 0.9;
  double target_soc_l2 = 1.0;

  const ChargingCurve<double>& curve(ChargerLevel level) const
  {
    return level == ChargerLevel::L2 ? l2 : l3;
  }
  double target_soc(ChargerLevel level) const
  {
    return level == ChargerLevel::L2 ? target_soc_l2 : target_soc_l3;
  }
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Travel times in hours, either straight-line distance over a speed or a
/// station-by-grid-cell lookup table (optionally one table per hour).
class TravelTimeProvider {
 public:
  enum class Mode { Euclidean, Matrix };

  static TravelTimeProvider euclidean(double speed_kmh);
  static TravelTimeProvider matrix(double speed_kmh, Point origin, double cell_size, int cols,
                                   int rows, std::vector<Mat> tables);

  Mode mode() const { return mode_; }
  double speed_kmh() const { return speed_kmh_; }
  int cell_of(const Point& location) const;

  double hours(const Point& from, const Point& station_location, std::size_t station_index,
               int hour) const;

 private:
  Mode mode_ = Mode::Euclidean;
  double speed_kmh_ = 40.0;
  Point origin_ = Point::Zero();
  double cell_size_ = 1.0;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<Mat> tables_;  // station x cell; NaN marks a missing cell
};

struct Scenario {
  std::vector<Station> stations;
  DemandProfile demand;
  EvDistributions ev_distributions;
  TravelTimeProvider travel = TravelTimeProvider::euclidean(40.0);
  int horizon_hours = 24;
  EconParams econ;
  std::uint64_t seed = 0;
  ChoiceConfig choice;
  CemConfig cem;
  BenchmarkConfig benchmarks;

  std::size_t station_count() const { return stations.size(); }
  std::optional<std::size_t> index_of(int station_id) const;
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field))
  {
  }
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text);

/// Checks every type invariant; throws ScenarioError naming the field.
void validate(const Scenario& scenario);

/// Exactly demand.hourly_counts[hour] agents, deterministic in (scenario, hour, seed).
std::vector<EvAgent> spawn_evs(const Scenario& scenario, int hour, std::uint64_t rng_seed);

double travel_time(const TravelTimeProvider& provider, const EvAgent& ev, const Station& station,
                   std::size_t station_index, int hour);

}  // namespace evprice
