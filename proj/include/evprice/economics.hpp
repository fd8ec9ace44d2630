#pragma once

#include "evprice/choice.hpp"
#include "evprice/params.hpp"
#include "evprice/scenario.hpp"
#include "evprice/types.hpp"

#include <vector>

namespace evprice {

struct UtilityBreakdown {
  double ev_utility_total = 0.0;  // U_EV, penalties included
  Vec per_ev;                     // U_j before penalties
  double cs_revenue = 0.0;
  double wait_loss = 0.0;
  double rejection_loss = 0.0;
  double queue_penalty = 0.0;     // wait_loss + rejection_loss
  double rejected = 0.0;          // expected rejected EVs
  int unserved = 0;               // EVs with an empty ECA
  double performance_index = 0.0;
};

/// Station x hour price matrix ($/kWh).
struct PriceSchedule {
  Mat prices;

  Eigen::Index stations() const { return prices.rows(); }
  Eigen::Index hours() const { return prices.cols(); }
};

struct PriceBounds {
  Mat lower;
  Mat upper;
};

/// U_j = sum_i [kappa Q_ij - Q_ij Pr_i - W_i vot] p_ij. The payment term bills
/// the session's delivered energy at the posted price.
Vec ev_utility(const ChoiceEquilibrium& eq, const HourData& hd, const Vec& prices, const EconParams& econ);

double aggregate_ev_utility(const Vec& per_ev, const Vec& rejected, int unserved, const EconParams& econ);

double cs_revenue(const ChoiceEquilibrium& eq, const HourData& hd, const Vec& prices, const Vec& grid_price);

inline double performance_index(double revenue, double ev_utility, const EconParams& econ)
{
  return econ.omega * revenue + (1.0 - econ.omega) * ev_utility;
}

UtilityBreakdown evaluate_economics(const ChoiceEquilibrium& eq, const HourData& hd, const Vec& prices,
                                    const Vec& grid_price, const EconParams& econ);

/// Sums hourly breakdowns; per_ev is concatenated.
UtilityBreakdown accumulate(const std::vector<UtilityBreakdown>& parts, const EconParams& econ);

/// [max(grid, floor), min(cap, ceiling)] per station-hour.
PriceBounds price_bounds(const Scenario& scenario);

PriceSchedule clamp_prices(const PriceSchedule& schedule, const Scenario& scenario);

bool within_bounds(const PriceSchedule& schedule, const Scenario& scenario, double tol = 1e-12);

PriceSchedule fixed_schedule(const Scenario& scenario, double level);

PriceSchedule tou_schedule(const Scenario& scenario, const std::vector<int>& peak_hours, double peak, double offpeak);

}  // namespace evprice
