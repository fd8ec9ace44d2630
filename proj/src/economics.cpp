#include "evprice/economics.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace evprice {

Vec ev_utility(const ChoiceEquilibrium& eq, const HourData& hd, const Vec& prices, const EconParams& econ)
{
  const auto m = hd.ev_count();
  Vec u = Vec::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < hd.station_count(); ++i) {
      const double p = eq.probs(j, i);
      if (p == 0.0) continue;
      const double energy = hd.energy_kwh(j, i);
      total += (econ.kappa * energy - energy * prices(i) - eq.waits(i) * econ.vot) * p;
    }
    u(j) = total;
  }
  return u;
}

double aggregate_ev_utility(const Vec& per_ev, const Vec& rejected, int unserved, const EconParams& econ)
{
  return per_ev.sum() - rejected.sum() * econ.rejection_penalty - unserved * econ.rejection_penalty;
}

double cs_revenue(const ChoiceEquilibrium& eq, const HourData& hd, const Vec& prices, const Vec& grid_price)
{
  if (hd.ev_count() == 0) return 0.0;
  const Vec margin = prices - grid_price;
  // sum_j sum_i Q_ij (Pr_i - nu_i) p_ij
  return (hd.energy_kwh.cwiseProduct(eq.probs) * margin).sum();
}

UtilityBreakdown evaluate_economics(const ChoiceEquilibrium& eq, const HourData& hd, const Vec& prices,
                                    const Vec& grid_price, const EconParams& econ)
{
  UtilityBreakdown b;
  b.per_ev = ev_utility(eq, hd, prices, econ);
  b.unserved = hd.unserved();
  b.rejected = eq.rejected.sum();
  b.ev_utility_total = aggregate_ev_utility(b.per_ev, eq.rejected, b.unserved, econ);
  b.cs_revenue = cs_revenue(eq, hd, prices, grid_price);
  if (hd.ev_count() > 0) b.wait_loss = (eq.probs * eq.waits).sum() * econ.vot;
  b.rejection_loss = b.rejected * econ.rejection_penalty;
  b.queue_penalty = b.wait_loss + b.rejection_loss;
  b.performance_index = performance_index(b.cs_revenue, b.ev_utility_total, econ);
  return b;
}

UtilityBreakdown accumulate(const std::vector<UtilityBreakdown>& parts, const EconParams& econ)
{
  UtilityBreakdown total;
  Eigen::Index evs = 0;
  for (const auto& p : parts) evs += p.per_ev.size();
  total.per_ev.resize(evs);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    total.per_ev.segment(at, p.per_ev.size()) = p.per_ev;
    at += p.per_ev.size();
    total.ev_utility_total += p.ev_utility_total;
    total.cs_revenue += p.cs_revenue;
    total.wait_loss += p.wait_loss;
    total.rejection_loss += p.rejection_loss;
    total.queue_penalty += p.queue_penalty;
    total.rejected += p.rejected;
    total.unserved += p.unserved;
  }
  total.performance_index = performance_index(total.cs_revenue, total.ev_utility_total, econ);
  return total;
}

PriceBounds price_bounds(const Scenario& scenario)
{
  const auto n = static_cast<Eigen::Index>(scenario.stations.size());
  PriceBounds b;
  b.lower.resize(n, scenario.horizon_hours);
  b.upper.resize(n, scenario.horizon_hours);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Station& st = scenario.stations[static_cast<std::size_t>(i)];
    b.lower.row(i) = st.grid_price.transpose().cwiseMax(scenario.econ.price_floor);
    b.upper.row(i) = st.price_cap.transpose().cwiseMin(scenario.econ.price_ceiling);
  }
  return b;
}

PriceSchedule clamp_prices(const PriceSchedule& schedule, const Scenario& scenario)
{
  const PriceBounds b = price_bounds(scenario);
  if (schedule.prices.rows() != b.lower.rows() || schedule.prices.cols() != b.lower.cols())
    throw std::invalid_argument("schedule shape does not match stations x horizon");
  return {schedule.prices.cwiseMax(b.lower).cwiseMin(b.upper)};
}

bool within_bounds(const PriceSchedule& schedule, const Scenario& scenario, double tol)
{
  const PriceBounds b = price_bounds(scenario);
  if (schedule.prices.rows() != b.lower.rows() || schedule.prices.cols() != b.lower.cols()) return false;
  return ((schedule.prices - b.lower).array() >= -tol).all() && ((b.upper - schedule.prices).array() >= -tol).all();
}

namespace {

void require_level(const PriceBounds& b, double level, const char* what)
{
  if (level < b.lower.maxCoeff() || level > b.upper.minCoeff())
    throw std::invalid_argument(std::string(what) + " price " + std::to_string(level) + " outside [" +
                                std::to_string(b.lower.maxCoeff()) + ", " + std::to_string(b.upper.minCoeff()) +
                                "]");
}

}  // namespace

PriceSchedule fixed_schedule(const Scenario& scenario, double level)
{
  const PriceBounds b = price_bounds(scenario);
  require_level(b, level, "fixed");
  return {Mat::Constant(b.lower.rows(), b.lower.cols(), level)};
}

PriceSchedule tou_schedule(const Scenario& scenario, const std::vector<int>& peak_hours, double peak, double offpeak)
{
  const PriceBounds b = price_bounds(scenario);
  require_level(b, peak, "peak");
  require_level(b, offpeak, "off-peak");
  PriceSchedule s{Mat::Constant(b.lower.rows(), b.lower.cols(), offpeak)};
  for (int h : peak_hours)
    if (h >= 0 && h < scenario.horizon_hours) s.prices.col(h).setConstant(peak);
  return s;
}

}  // namespace evprice
