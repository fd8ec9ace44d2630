#include "evprice/rolling_horizon.hpp"

#include <algorithm>

namespace evprice {

Mat WindowContext::unstack(const Vec& theta) const
{
  const auto h = static_cast<Eigen::Index>(hour_count());
  const auto n = theta.size() / std::max<Eigen::Index>(h, 1);
  Mat prices(n, h);
  for (Eigen::Index i = 0; i < n; ++i) prices.row(i) = theta.segment(i * h, h).transpose();
  return prices;
}

Vec WindowContext::stack(const Mat& prices) const
{
  Vec theta(prices.size());
  for (Eigen::Index i = 0; i < prices.rows(); ++i) theta.segment(i * prices.cols(), prices.cols()) = prices.row(i).transpose();
  return theta;
}

WindowContext make_window(const Scenario& scenario, int index, int start_hour, int hours, const CarryState& carry,
                          const ChoiceConfig& choice, std::uint64_t seed)
{
  WindowContext ctx;
  ctx.scenario = &scenario;
  ctx.index = index;
  ctx.start_hour = start_hour;
  ctx.carry_in = carry;
  ctx.choice = choice;
  for (int h = start_hour; h < start_hour + hours; ++h) ctx.hours.push_back(hour_data(scenario, h, seed));
  const PriceBounds all = price_bounds(scenario);
  ctx.bounds.lower = ctx.stack(all.lower.middleCols(start_hour, hours));
  ctx.bounds.upper = ctx.stack(all.upper.middleCols(start_hour, hours));
  return ctx;
}

WindowEvaluation evaluate_window(const WindowContext& ctx, const Vec& theta, const std::vector<Mat>* warm_start)
{
  const Mat prices = ctx.unstack(theta);
  WindowEvaluation ev;
  CarryState carry = ctx.carry_in;
  for (int h = 0; h < ctx.hour_count(); ++h) {
    const Mat* warm = warm_start != nullptr && static_cast<std::size_t>(h) < warm_start->size()
                          ? &(*warm_start)[static_cast<std::size_t>(h)]
                          : nullptr;
    ev.outcomes.push_back(
        evaluate_hour(*ctx.scenario, ctx.hours[static_cast<std::size_t>(h)], carry, prices.col(h), ctx.choice, warm));
    carry = ev.outcomes.back().carry_out;
    ev.score += ev.outcomes.back().economics.performance_index;
  }
  return ev;
}

double evaluate(const Vec& theta, const WindowContext& ctx)
{
  return evaluate_window(ctx, theta).score;
}

void WindowObjective::reserve(std::size_t slots)
{
  cache_.assign(slots, {});
  audits_.assign(slots, {});
}

void WindowObjective::record(const Vec& theta, std::size_t slot)
{
  auto& audit = audits_[slot];
  ++audit.evaluated;
  if (((theta - ctx_.bounds.lower).array() < 0.0).any() || ((ctx_.bounds.upper - theta).array() < 0.0).any())
    ++audit.violations;
}

double WindowObjective::evaluate(const Vec& theta, std::size_t slot)
{
  record(theta, slot);
  WindowEvaluation ev = evaluate_window(ctx_, theta);
  auto& cached = cache_[slot];
  cached.clear();
  for (auto& o : ev.outcomes) cached.push_back(std::move(o.equilibrium.probs));
  return ev.score;
}

double WindowObjective::evaluate_near(const Vec& theta, std::size_t slot)
{
  record(theta, slot);
  const auto& cached = cache_[slot];
  return evaluate_window(ctx_, theta, cached.empty() ? nullptr : &cached).score;
}

PriceAudit WindowObjective::audit() const
{
  PriceAudit total;
  for (const auto& a : audits_) total += a;
  return total;
}

double resolved_sigma_max(const Scenario& scenario, const CemConfig& config)
{
  if (config.sigma_max > 0) return config.sigma_max;
  return (scenario.econ.price_ceiling - scenario.econ.price_floor) / 4.0;
}

WindowResult optimize_window(const WindowContext& ctx, const CemConfig& config,
                             std::optional<cem::SamplingDistribution> initial, std::uint64_t rng_seed)
{
  const double sigma_max = std::max(resolved_sigma_max(*ctx.scenario, config), config.sigma_min);
  cem::SamplingDistribution dist =
      initial && initial->size() == ctx.dimension()
          ? *initial
          : cem::SamplingDistribution::initial(ctx.bounds, config.sigma_min, sigma_max);
  dist.sigma_min = config.sigma_min;
  dist.sigma_max = sigma_max;

  WindowObjective objective(ctx);
  const cem::OptimizeResult opt = cem::optimize(objective, ctx.bounds, config, dist, rng_seed);

  WindowResult r;
  r.index = ctx.index;
  r.start_hour = ctx.start_hour;
  r.hours = ctx.hour_count();
  r.best_prices = ctx.unstack(opt.best);
  r.best_score = opt.best_score;
  r.trace = opt.trace;
  r.converged = opt.converged;
  r.iterations = opt.iterations;
  r.audit = objective.audit();
  r.final_distribution = opt.final_distribution;
  WindowEvaluation best = evaluate_window(ctx, opt.best);
  r.outcomes = std::move(best.outcomes);
  r.carry_out = r.outcomes.empty() ? ctx.carry_in : r.outcomes.back().carry_out;
  return r;
}

RollingResult rolling_horizon(const Scenario& scenario, const CemConfig& config, const ChoiceConfig& choice,
                              std::uint64_t seed, const std::function<void(const WindowResult&)>& on_window)
{
  const int width = std::max(1, config.window_hours);
  RollingResult result;
  result.schedule.prices = price_bounds(scenario).lower;
  CarryState carry = CarryState::empty(scenario);
  std::optional<cem::SamplingDistribution> previous;

  int index = 0;
  for (int start = 0; start < scenario.horizon_hours; start += width, ++index) {
    const int hours = std::min(width, scenario.horizon_hours - start);
    const WindowContext ctx = make_window(scenario, index, start, hours, carry, choice, seed);
    const auto window_seed = mix_seed(seed, config.seed, static_cast<std::uint64_t>(index));
    WindowResult w = optimize_window(ctx, config, config.warm_start ? previous : std::nullopt, window_seed);
    result.schedule.prices.middleCols(start, hours) = w.best_prices;
    if (!w.converged) result.non_converged.push_back(index);
    result.audit += w.audit;
    carry = w.carry_out;
    previous = w.final_distribution;
    if (on_window) on_window(w);
    result.windows.push_back(std::move(w));
  }
  return result;
}

}  // namespace evprice
