#include "evprice/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evprice {

StationState effective_state(const Scenario& scenario, const CarryState& carry)
{
  StationState s = nominal_state(scenario);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const int held = std::clamp(static_cast<int>(std::lround(carry.occupancy(i))), 0, s.servers(i) - 1);
    s.servers(i) -= held;
    s.capacity(i) = std::max(s.servers(i), s.capacity(i) - held);
  }
  return s;
}

CarryState advance_carry(const StationState& state, const CarryState& carry, const ChoiceEquilibrium& eq)
{
  CarryState next{Vec::Zero(state.size())};
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    const double mu = state.service_rate(i);
    const double stay = std::exp(-mu);
    const double present = eq.mean_in_system(i) + carry.occupancy(i) * stay;
    next.occupancy(i) = present * (1.0 - stay) / mu;
  }
  return next;
}

HourOutcome evaluate_hour(const Scenario& scenario, const HourData& hd, const CarryState& carry, const Vec& prices,
                          const ChoiceConfig& config, const Mat* warm_start)
{
  HourOutcome out;
  out.hour = hd.hour;
  out.prices = prices;
  out.state = effective_state(scenario, carry);
  out.equilibrium = solve_equilibrium(hd, out.state, prices, config, warm_start);
  Vec grid(out.state.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    grid(i) = scenario.stations[static_cast<std::size_t>(i)].grid_price(hd.hour);
  out.economics = evaluate_economics(out.equilibrium, hd, prices, grid, scenario.econ);
  out.carry_out = advance_carry(out.state, carry, out.equilibrium);
  return out;
}

SimulationResult simulate(const Scenario& scenario, const PriceSchedule& schedule, const ChoiceConfig& config,
                          std::uint64_t seed)
{
  if (schedule.stations() != static_cast<Eigen::Index>(scenario.stations.size()) ||
      schedule.hours() != scenario.horizon_hours)
    throw std::invalid_argument("schedule shape does not match stations x horizon");
  SimulationResult result;
  CarryState carry = CarryState::empty(scenario);
  std::vector<UtilityBreakdown> parts;
  for (int h = 0; h < scenario.horizon_hours; ++h) {
    const HourData hd = hour_data(scenario, h, seed);
    result.hours.push_back(evaluate_hour(scenario, hd, carry, schedule.prices.col(h), config));
    carry = result.hours.back().carry_out;
    parts.push_back(result.hours.back().economics);
  }
  result.totals = accumulate(parts, scenario.econ);
  return result;
}

}  // namespace evprice
