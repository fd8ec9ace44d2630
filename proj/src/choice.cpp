#include "evprice/choice.hpp"

#include "evprice/charging.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace evprice {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Mat congestion_blind(const HourData& hd, const StationState& state, const Vec& prices, const ChoiceConfig& config)
{
  return choice_probabilities(hd, state, prices, Vec::Zero(state.size()), config);
}

}  // namespace

int HourData::unserved() const
{
  int count = 0;
  for (Eigen::Index j = 0; j < reachable.rows(); ++j)
    if (!reachable.row(j).any()) ++count;
  return count;
}

StationState nominal_state(const Scenario& scenario)
{
  const auto n = static_cast<Eigen::Index>(scenario.stations.size());
  StationState s;
  s.ids.resize(n);
  s.servers.resize(n);
  s.capacity.resize(n);
  s.service_rate.resize(n);
  s.power.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Station& st = scenario.stations[static_cast<std::size_t>(i)];
    s.ids(i) = st.id;
    s.servers(i) = st.poles;
    s.capacity(i) = st.capacity;
    s.service_rate(i) = st.service_rate;
    s.power(i) = st.power;
  }
  return s;
}

HourData prepare_hour(const Scenario& scenario, int hour, std::vector<EvAgent> evs, std::uint64_t gumbel_seed)
{
  HourData hd;
  hd.hour = hour;
  hd.evs = std::move(evs);
  const auto m = hd.ev_count();
  const auto n = static_cast<Eigen::Index>(scenario.stations.size());
  hd.travel_hours.resize(m, n);
  hd.charge_hours.resize(m, n);
  hd.energy_kwh.resize(m, n);
  hd.reachable.resize(m, n);
  hd.gumbel.resize(m, n);

  const auto& dist = scenario.ev_distributions;
  const double speed = scenario.travel.speed_kmh();
  std::mt19937_64 rng(gumbel_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (Eigen::Index j = 0; j < m; ++j) {
    const EvAgent& ev = hd.evs[static_cast<std::size_t>(j)];
    const double budget = adjusted_range_hours(ev, speed);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Station& st = scenario.stations[static_cast<std::size_t>(i)];
      const double travel = travel_time(scenario.travel, ev, st, static_cast<std::size_t>(i), hour);
      const auto& curve = dist.curve(st.level);
      const double target = std::max(ev.initial_soc, dist.target_soc(st.level));
      hd.travel_hours(j, i) = travel;
      hd.reachable(j, i) = budget > 0 && travel <= budget;
      hd.charge_hours(j, i) = charging_duration(curve, ev.initial_soc, target) / 60.0;
      hd.energy_kwh(j, i) = energy_demand(ev, curve, target);

      double u = unit(rng);
      while (u <= 0.0) u = unit(rng);
      hd.gumbel(j, i) = -std::log(-std::log(u));
    }
  }
  return hd;
}

HourData hour_data(const Scenario& scenario, int hour, std::uint64_t seed)
{
  return prepare_hour(scenario, hour, spawn_evs(scenario, hour, seed),
                      mix_seed(seed, 0x6e6dULL, static_cast<std::uint64_t>(hour)));
}

double total_cost(const Scenario& scenario, const EvAgent& ev, std::size_t station, int hour, const Vec& waits)
{
  const Station& st = scenario.stations.at(station);
  const auto& dist = scenario.ev_distributions;
  const double target = std::max(ev.initial_soc, dist.target_soc(st.level));
  const double charge = charging_duration(dist.curve(st.level), ev.initial_soc, target) / 60.0;
  return total_cost(travel_time(scenario.travel, ev, st, station, hour),
                    waits(static_cast<Eigen::Index>(station)), charge);
}

Mat systematic_utilities(const HourData& hd, const StationState& state, const Vec& prices, const Vec& waits,
                         const ChoiceConfig& config)
{
  const auto m = hd.ev_count();
  const auto n = hd.station_count();
  Mat u(m, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale = static_cast<double>(state.servers(i)) * state.power(i) / prices(i);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!hd.reachable(j, i)) {
        u(j, i) = kNegInf;
        continue;
      }
      double cost = hd.travel_hours(j, i) + waits(i) + hd.charge_hours(j, i);
      if (cost < kCostFloorHours) cost = kCostFloorHours;
      u(j, i) = config.theta * scale / (cost * cost);
      if (config.gumbel_scale > 0) u(j, i) += config.gumbel_scale * hd.gumbel(j, i);
    }
  }
  return u;
}

Mat softmax_rows(const Mat& utilities)
{
  Mat p = Mat::Zero(utilities.rows(), utilities.cols());
  for (Eigen::Index j = 0; j < utilities.rows(); ++j) {
    const double top = utilities.row(j).maxCoeff();
    if (!std::isfinite(top)) continue;
    double total = 0.0;
    for (Eigen::Index i = 0; i < utilities.cols(); ++i) {
      const double e = std::isfinite(utilities(j, i)) ? std::exp(utilities(j, i) - top) : 0.0;
      p(j, i) = e;
      total += e;
    }
    p.row(j) /= total;
  }
  return p;
}

Mat choice_probabilities(const HourData& hd, const StationState& state, const Vec& prices, const Vec& waits,
                         const ChoiceConfig& config)
{
  if (config.mode != ChoiceMode::DeterministicDc)
    return softmax_rows(systematic_utilities(hd, state, prices, waits, config));

  ChoiceConfig plain = config;
  plain.gumbel_scale = 0.0;
  const Mat attr = systematic_utilities(hd, state, prices, waits, plain);
  Mat p = Mat::Zero(attr.rows(), attr.cols());
  for (Eigen::Index j = 0; j < attr.rows(); ++j) {
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < attr.cols(); ++i) {
      if (!std::isfinite(attr(j, i))) continue;
      if (best < 0 || attr(j, i) > attr(j, best) ||
          (attr(j, i) == attr(j, best) && state.ids(i) < state.ids(best)))
        best = i;
    }
    if (best >= 0) p(j, best) = 1.0;
  }
  return p;
}

void apply_queue_response(const StationState& state, ChoiceEquilibrium& eq)
{
  const auto n = state.size();
  eq.waits.resize(n);
  eq.rejected.resize(n);
  eq.rejection_prob.resize(n);
  eq.queue_length.resize(n);
  eq.mean_in_system.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto metrics = queueing::analyze(state.queue(i, eq.arrival_rates(i)));
    eq.waits(i) = metrics.wait_hours;
    eq.rejected(i) = metrics.rejected_rate;
    eq.rejection_prob(i) = metrics.rejection_prob;
    eq.queue_length(i) = metrics.queue_length;
    eq.mean_in_system(i) = metrics.mean_in_system;
  }
}

ChoiceEquilibrium msa_equilibrium(const HourData& hd, const StationState& state, const Vec& prices,
                                  const ChoiceConfig& config, const Mat* warm_start)
{
  ChoiceEquilibrium eq;
  eq.probs = warm_start != nullptr ? *warm_start : congestion_blind(hd, state, prices, config);
  eq.converged = false;
  for (int n = 0; n < config.msa_max_iters; ++n) {
    eq.arrival_rates = arrival_rates(eq.probs);
    apply_queue_response(state, eq);
    const Mat target = choice_probabilities(hd, state, prices, eq.waits, config);
    const Mat step = (target - eq.probs) / static_cast<double>(n + 1);
    eq.probs += step;
    eq.iterations_used = n + 1;
    const double change = step.size() == 0 ? 0.0 : step.cwiseAbs().maxCoeff();
    if (change < config.msa_tol) {
      eq.converged = true;
      break;
    }
  }
  eq.arrival_rates = arrival_rates(eq.probs);
  apply_queue_response(state, eq);
  return eq;
}

ChoiceEquilibrium solve_equilibrium(const HourData& hd, const StationState& state, const Vec& prices,
                                    const ChoiceConfig& config, const Mat* warm_start)
{
  if (config.mode == ChoiceMode::MnlMsa) return msa_equilibrium(hd, state, prices, config, warm_start);
  ChoiceEquilibrium eq;
  eq.probs = congestion_blind(hd, state, prices, config);
  eq.iterations_used = 1;
  eq.arrival_rates = arrival_rates(eq.probs);
  apply_queue_response(state, eq);
  return eq;
}

std::vector<int> sample_choices(const Mat& probs, std::uint64_t rng_seed)
{
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> assignment(static_cast<std::size_t>(probs.rows()), -1);
  for (Eigen::Index j = 0; j < probs.rows(); ++j) {
    const double total = probs.row(j).sum();
    const double u = unit(rng);
    if (total <= 0.0) continue;
    double acc = 0.0;
    Eigen::Index last = -1;
    for (Eigen::Index i = 0; i < probs.cols(); ++i) {
      if (probs(j, i) <= 0.0) continue;
      last = i;
      acc += probs(j, i) / total;
      if (u < acc) break;
    }
    assignment[static_cast<std::size_t>(j)] = static_cast<int>(last);
  }
  return assignment;
}

}  // namespace evprice
