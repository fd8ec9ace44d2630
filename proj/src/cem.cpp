#include "evprice/cem.hpp"

#include "evprice/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace evprice::cem {

namespace {

std::pair<double, double> fit_gaussian(const Vec& values)
{
  const double mean = values.mean();
  const double var = (values.array() - mean).square().mean();
  return {mean, std::sqrt(std::max(var, 0.0))};
}

Vec evaluate_population(Objective& objective, const Mat& samples, int threads, bool near)
{
  Vec scores(samples.cols());
  parallel_for(static_cast<std::size_t>(samples.cols()), threads, [&](std::size_t m) {
    const Vec theta = samples.col(static_cast<Eigen::Index>(m));
    scores(static_cast<Eigen::Index>(m)) = near ? objective.evaluate_near(theta, m) : objective.evaluate(theta, m);
  });
  return scores;
}

}  // namespace

Mat cem_sample(const SamplingDistribution& dist, int n, const Bounds& bounds, std::uint64_t rng_seed)
{
  if (n < 1) throw std::invalid_argument("cem_sample needs n >= 1");
  const auto d = dist.size();
  Mat samples(d, n);
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < d; ++k)
      samples(k, m) = std::clamp(dist.mean(k) + dist.std(k) * normal(rng), bounds.lower(k), bounds.upper(k));
  return samples;
}

EliteSet elite_select(const Mat& samples, const Vec& scores, double elite_ratio)
{
  const auto n = static_cast<int>(scores.size());
  if (n < 1 || samples.cols() != scores.size()) throw std::invalid_argument("elite_select: shape mismatch");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  const int count = std::min(n, elite_count(n, elite_ratio));
  EliteSet e;
  e.indices.assign(order.begin(), order.begin() + count);
  e.samples.resize(samples.rows(), count);
  e.scores.resize(count);
  for (int r = 0; r < count; ++r) {
    e.samples.col(r) = samples.col(e.indices[static_cast<std::size_t>(r)]);
    e.scores(r) = scores(e.indices[static_cast<std::size_t>(r)]);
  }
  e.threshold = e.scores(count - 1);
  e.elite_mean = e.samples.rowwise().mean();
  e.elite_std = ((e.samples.colwise() - e.elite_mean).array().square().rowwise().sum() / count).sqrt().matrix();
  return e;
}

SamplingDistribution cem_update(const SamplingDistribution& dist, const EliteSet& elites,
                                const std::vector<bool>& active, double smoothing)
{
  if (static_cast<Eigen::Index>(active.size()) != dist.size())
    throw std::invalid_argument("cem_update: active mask size mismatch");
  SamplingDistribution next = dist;
  for (Eigen::Index k = 0; k < dist.size(); ++k) {
    if (active[static_cast<std::size_t>(k)]) {
      next.mean(k) = smoothing * dist.mean(k) + (1.0 - smoothing) * elites.elite_mean(k);
      next.std(k) = smoothing * dist.std(k) + (1.0 - smoothing) * elites.elite_std(k);
    }
    next.std(k) = std::clamp(next.std(k), dist.sigma_min, dist.sigma_max);
  }
  return next;
}

std::vector<Eigen::Index> active_set(const Vec& indices, double threshold)
{
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < indices.size(); ++k)
    if (indices(k) > threshold) active.push_back(k);
  return active;
}

SensitivityReport psa_indices(Objective& objective, const Mat& samples, const Vec& scores, const EliteSet& elites,
                              const PsaOptions& options)
{
  if (scores.size() < 2) throw std::invalid_argument("psa_indices needs at least two samples");
  const auto d = samples.rows();
  SensitivityReport r;
  std::tie(r.unconditional_mean, r.unconditional_std) = fit_gaussian(scores);
  r.indices = Vec::Zero(d);
  r.conditional_mean = Vec::Constant(d, r.unconditional_mean);
  r.conditional_std = Vec::Constant(d, r.unconditional_std);
  if (!(r.unconditional_std > 0.0)) return r;  // no information: every D_k = 0

  // Freezing that removes all variability is capped rather than infinite.
  const double std_floor = r.unconditional_std * 1e-6;
  for (Eigen::Index k = 0; k < d; ++k) {
    Mat frozen = samples;
    frozen.row(k).setConstant(elites.elite_mean(k));
    const Vec conditional = evaluate_population(objective, frozen, options.threads, !options.exact);
    auto [mean, std] = fit_gaussian(conditional);
    r.conditional_mean(k) = mean;
    r.conditional_std(k) = std;
    r.indices(k) = std::max(0.0, gaussian_kl(mean, std::max(std, std_floor), r.unconditional_mean,
                                             r.unconditional_std));
  }
  r.active_set = active_set(r.indices, options.threshold);
  return r;
}

double elite_spread(const EliteSet& elites)
{
  const double hi = elites.scores.maxCoeff();
  const double lo = elites.scores.minCoeff();
  const double scale = std::max(std::abs(hi), std::abs(lo));
  if (scale == 0.0) return 0.0;
  return (hi - lo) / scale;
}

OptimizeResult optimize(Objective& objective, const Bounds& bounds, const CemConfig& config,
                        SamplingDistribution dist, std::uint64_t rng_seed)
{
  if (dist.size() != bounds.size()) throw std::invalid_argument("optimize: distribution/bounds size mismatch");
  const auto d = bounds.size();
  const int n = config.population;
  for (Eigen::Index k = 0; k < d; ++k) dist.std(k) = std::clamp(dist.std(k), dist.sigma_min, dist.sigma_max);

  objective.reserve(static_cast<std::size_t>(n));
  OptimizeResult result;
  result.best_score = -std::numeric_limits<double>::infinity();
  const PsaOptions psa{config.psa_threshold, config.psa_exact, config.threads};
  int calm = 0;

  for (int it = 0; it < config.max_iters; ++it) {
    const Mat samples = cem_sample(dist, n, bounds, mix_seed(rng_seed, static_cast<std::uint64_t>(it)));
    const Vec scores = evaluate_population(objective, samples, config.threads, false);
    result.evaluations += static_cast<std::size_t>(n);

    Eigen::Index top = 0;
    for (Eigen::Index m = 1; m < scores.size(); ++m)
      if (scores(m) > scores(top)) top = m;
    if (scores(top) > result.best_score || result.best.size() == 0) {
      result.best_score = scores(top);
      result.best = samples.col(top);
    }

    const EliteSet elites = elite_select(samples, scores, config.elite_ratio);
    std::vector<bool> active(static_cast<std::size_t>(d), true);
    int active_count = static_cast<int>(d);
    if (it % config.psa_frequency == 0 && n >= 2) {
      const SensitivityReport report = psa_indices(objective, samples, scores, elites, psa);
      std::fill(active.begin(), active.end(), false);
      for (auto k : report.active_set) active[static_cast<std::size_t>(k)] = true;
      active_count = static_cast<int>(report.active_set.size());
      result.evaluations += static_cast<std::size_t>(n) * static_cast<std::size_t>(d);
    }
    dist = cem_update(dist, elites, active, config.smoothing);

    TraceRow row;
    row.iteration = it;
    row.best = result.best_score;
    row.mean = scores.mean();
    row.elite_min = elites.scores.minCoeff();
    row.elite_max = elites.scores.maxCoeff();
    row.mean_sigma = dist.std.size() ? dist.std.mean() : 0.0;
    row.active_count = active_count;
    result.trace.push_back(row);
    result.iterations = it + 1;

    // A single elite has no spread to measure.
    const bool settled = elites.scores.size() >= 2 && elite_spread(elites) < config.tolerance;
    calm = settled ? calm + 1 : 0;
    if (calm >= 2) {
      result.converged = true;
      break;
    }
  }
  result.final_distribution = dist;
  return result;
}

}  // namespace evprice::cem
