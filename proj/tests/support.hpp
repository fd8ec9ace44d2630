#pragma once

#include "evprice/scenario.hpp"

#include <filesystem>
#include <string>

namespace evprice::fixtures {

inline std::filesystem::path source_dir()
{
  return EVPRICE_SOURCE_DIR;
}

inline std::filesystem::path scenario_path(const std::string& name)
{
  return source_dir() / "scenarios" / name;
}

inline Station make_station(int id, ChargerLevel level, int poles, int capacity, Point location, int hours,
                            double service_rate = 1.5, double power = 50.0)
{
  Station s;
  s.id = id;
  s.level = level;
  s.poles = poles;
  s.capacity = capacity;
  s.service_rate = service_rate;
  s.power = power;
  s.grid_price = Vec::Constant(hours, 0.2);
  s.price_cap = Vec::Constant(hours, 0.8);
  s.location = location;
  return s;
}

/// Small euclidean world: `stations` L3 sites on a line, uniform demand.
inline Scenario small_scenario(int stations = 3, int hours = 2, int evs_per_hour = 6)
{
  Scenario s;
  s.horizon_hours = hours;
  s.seed = 42;
  for (int i = 0; i < stations; ++i)
    s.stations.push_back(make_station(i + 1, ChargerLevel::L3, 2, 4, Point(2.0 + 3.0 * i, 5.0), hours));
  s.demand.hourly_counts.assign(static_cast<std::size_t>(hours), evs_per_hour);
  s.travel = TravelTimeProvider::euclidean(30.0);
  s.choice.theta = 0.02;
  return s;
}

}  // namespace evprice::fixtures
