#include "evprice/charging.hpp"

#include "evprice/scenario.hpp"

#include <cmath>

namespace evprice {

double energy_demand(const EvAgent& ev, const ChargingCurve<double>& curve, double target_soc)
{
  if (target_soc < ev.initial_soc) throw std::invalid_argument("target_soc below initial_soc");
  if (curve.level == ChargerLevel::L3 && target_soc >= 1.0)
    throw UnreachableTarget("soc >= 1 is the L3 asymptote and is never reached");
  return (target_soc - ev.initial_soc) * ev.battery_capacity;
}

double max_range_hours(const EvAgent& ev, double speed_kmh)
{
  if (!(speed_kmh > 0)) throw std::invalid_argument("speed must be positive");
  return ev.initial_soc * ev.battery_capacity * ev.consumption_rate / speed_kmh;
}

double adjusted_range_hours(const EvAgent& ev, double speed_kmh)
{
  return max_range_hours(ev, speed_kmh) * (1.0 - ev.risk_aversion) *
         std::exp(-ev.degradation_rate * ev.age_years);
}

std::vector<int> eca(const EvAgent& ev, const Scenario& scenario, int hour)
{
  std::vector<int> reachable;
  const double budget = adjusted_range_hours(ev, scenario.travel.speed_kmh());
  if (!(budget > 0)) return reachable;
  for (std::size_t i = 0; i < scenario.stations.size(); ++i) {
    const Station& st = scenario.stations[i];
    if (travel_time(scenario.travel, ev, st, i, hour) <= budget) reachable.push_back(st.id);
  }
  return reachable;
}

}  // namespace evprice
