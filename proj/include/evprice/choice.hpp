#pragma once

#include "evprice/params.hpp"
#include "evprice/queueing.hpp"
#include "evprice/scenario.hpp"
#include "evprice/types.hpp"

#include <cstdint>
#include <vector>

namespace evprice {

/// Price-independent inputs of one decision hour, EV rows by station columns.
struct HourData {
  int hour = 0;
  std::vector<EvAgent> evs;
  Mat travel_hours;
  Mat charge_hours;
  Mat energy_kwh;
  Mask reachable;
  Mat gumbel;  // standard Gumbel draws, scaled by ChoiceConfig::gumbel_scale at use

  Eigen::Index ev_count() const { return static_cast<Eigen::Index>(evs.size()); }
  Eigen::Index station_count() const { return travel_hours.cols(); }
  int unserved() const;
};

/// Queue-side station attributes in effect for one hour.
struct StationState {
  VecI ids;
  VecI servers;
  VecI capacity;
  Vec service_rate;
  Vec power;

  Eigen::Index size() const { return ids.size(); }
  queueing::QueueParams<double> queue(Eigen::Index i, double arrival_rate) const
  {
    return {arrival_rate, service_rate(i), servers(i), capacity(i)};
  }
};

StationState nominal_state(const Scenario& scenario);

struct ChoiceEquilibrium {
  Mat probs;
  Vec arrival_rates;
  Vec waits;
  Vec rejected;
  Vec rejection_prob;
  Vec queue_length;
  Vec mean_in_system;
  int iterations_used = 0;
  bool converged = true;
};

/// Floor applied to the total cost before it enters the attraction.
inline constexpr double kCostFloorHours = 1e-3;

HourData prepare_hour(const Scenario& scenario, int hour, std::vector<EvAgent> evs, std::uint64_t gumbel_seed);

/// Spawns the hour's EVs and prepares them; all draws derive from seed.
HourData hour_data(const Scenario& scenario, int hour, std::uint64_t seed);

inline double total_cost(double travel_hours, double wait_hours, double charge_hours)
{
  return travel_hours + wait_hours + charge_hours;
}

double total_cost(const Scenario& scenario, const EvAgent& ev, std::size_t station, int hour, const Vec& waits);

inline double attractiveness(double poles, double power, double price, double cost_hours)
{
  const double cost = cost_hours < kCostFloorHours ? kCostFloorHours : cost_hours;
  return poles * power / (price * cost * cost);
}

/// theta * Attr + scale * eps over the ECA; -inf outside it.
Mat systematic_utilities(const HourData& hd, const StationState& state, const Vec& prices, const Vec& waits,
                         const ChoiceConfig& config);

Mat choice_probabilities(const HourData& hd, const StationState& state, const Vec& prices, const Vec& waits,
                         const ChoiceConfig& config);

/// Row-wise softmax of utilities; rows with no finite entry stay all-zero.
Mat softmax_rows(const Mat& utilities);

inline Vec arrival_rates(const Mat& probs)
{
  if (probs.rows() == 0) return Vec::Zero(probs.cols());
  return probs.colwise().sum().transpose();
}

/// Queue metrics induced by arrivals; fills every per-station field of eq.
void apply_queue_response(const StationState& state, ChoiceEquilibrium& eq);

/// Method of successive averages on p -> MNL(waits(lambda(p))) with step 1/(n+1).
ChoiceEquilibrium msa_equilibrium(const HourData& hd, const StationState& state, const Vec& prices,
                                  const ChoiceConfig& config, const Mat* warm_start = nullptr);

/// Dispatches on config.mode: DC and standard MNL make one congestion-blind pass.
ChoiceEquilibrium solve_equilibrium(const HourData& hd, const StationState& state, const Vec& prices,
                                    const ChoiceConfig& config, const Mat* warm_start = nullptr);

/// One categorical draw per row; -1 for all-zero rows.
std::vector<int> sample_choices(const Mat& probs, std::uint64_t rng_seed);

}  // namespace evprice
