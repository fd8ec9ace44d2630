#pragma once

#include "evprice/choice.hpp"
#include "evprice/economics.hpp"
#include "evprice/scenario.hpp"

#include <cstdint>
#include <vector>

namespace evprice {

/// Expected vehicles from earlier hours still holding a pole at each station.
struct CarryState {
  Vec occupancy;

  static CarryState empty(const Scenario& scenario)
  {
    return {Vec::Zero(static_cast<Eigen::Index>(scenario.stations.size()))};
  }
};

/// Poles (and spots) held by carried vehicles are removed from the hour's
/// queue; at least one pole always stays available.
StationState effective_state(const Scenario& scenario, const CarryState& carry);

/// Vehicles in the system at the end of an hour, averaged over how long they
/// keep holding a pole during the next hour under exponential service.
CarryState advance_carry(const StationState& state, const CarryState& carry, const ChoiceEquilibrium& eq);

struct HourOutcome {
  int hour = 0;
  Vec prices;
  StationState state;
  ChoiceEquilibrium equilibrium;
  UtilityBreakdown economics;
  CarryState carry_out;
};

HourOutcome evaluate_hour(const Scenario& scenario, const HourData& hd, const CarryState& carry, const Vec& prices,
                          const ChoiceConfig& config, const Mat* warm_start = nullptr);

struct SimulationResult {
  std::vector<HourOutcome> hours;
  UtilityBreakdown totals;
};

SimulationResult simulate(const Scenario& scenario, const PriceSchedule& schedule, const ChoiceConfig& config,
                          std::uint64_t seed);

}  // namespace evprice
