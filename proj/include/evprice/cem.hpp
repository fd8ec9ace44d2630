#pragma once

// Cross-entropy search over a box with Gaussian sampling and periodic
// KL-based sensitivity screening of the decision variables.

#include "evprice/params.hpp"
#include "evprice/types.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace evprice::cem {

struct Bounds {
  Vec lower;
  Vec upper;

  Eigen::Index size() const { return lower.size(); }
  Vec midpoint() const { return 0.5 * (lower + upper); }
};

struct SamplingDistribution {
  Vec mean;
  Vec std;
  double sigma_min = 0.005;
  double sigma_max = 0.15;

  Eigen::Index size() const { return mean.size(); }
  static SamplingDistribution initial(const Bounds& bounds, double sigma_min, double sigma_max)
  {
    return {bounds.midpoint(), Vec::Constant(bounds.size(), sigma_max), sigma_min, sigma_max};
  }
};

struct EliteSet {
  std::vector<Eigen::Index> indices;  // into the population, best first
  Mat samples;                        // one column per elite
  Vec scores;
  double threshold = 0.0;             // worst elite score
  Vec elite_mean;
  Vec elite_std;
};

struct SensitivityReport {
  Vec indices;                         // D_k in nats
  std::vector<Eigen::Index> active_set;
  double unconditional_mean = 0.0;
  double unconditional_std = 0.0;
  Vec conditional_mean;
  Vec conditional_std;
};

struct TraceRow {
  int iteration = 0;
  double best = 0.0;  // best-ever in the window
  double mean = 0.0;
  double elite_min = 0.0;
  double elite_max = 0.0;
  double mean_sigma = 0.0;
  int active_count = 0;
};

/// Objective to maximise. Slots let an implementation cache per-sample state
/// from evaluate() for reuse by evaluate_near(); distinct slots may be
/// evaluated concurrently.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual void reserve(std::size_t /*slots*/) {}
  virtual double evaluate(const Vec& theta, std::size_t slot) = 0;
  /// Evaluates a point close to the one last evaluated in slot, without
  /// replacing the slot's cache.
  virtual double evaluate_near(const Vec& theta, std::size_t slot) { return evaluate(theta, slot); }
};

class FunctionObjective : public Objective {
 public:
  explicit FunctionObjective(std::function<double(const Vec&)> f) : f_(std::move(f)) {}
  double evaluate(const Vec& theta, std::size_t) override { return f_(theta); }

 private:
  std::function<double(const Vec&)> f_;
};

/// KL(p || q) between univariate Gaussians, in nats.
template <typename Scalar>
Scalar gaussian_kl(Scalar mean_p, Scalar std_p, Scalar mean_q, Scalar std_q)
{
  using std::log;
  if (!(std_p > Scalar(0)) || !(std_q > Scalar(0))) throw std::invalid_argument("gaussian_kl needs positive std");
  const Scalar shift = mean_p - mean_q;
  return log(std_q / std_p) + (std_p * std_p + shift * shift) / (Scalar(2) * std_q * std_q) - Scalar(0.5);
}

/// n columns, each coordinate N(mean_k, std_k) clamped into the bounds.
Mat cem_sample(const SamplingDistribution& dist, int n, const Bounds& bounds, std::uint64_t rng_seed);

inline int elite_count(int population, double elite_ratio)
{
  return std::max(1, static_cast<int>(std::ceil(elite_ratio * population - 1e-9)));
}

/// Top ceil(ratio N) by score, ties to the lower sample index.
EliteSet elite_select(const Mat& samples, const Vec& scores, double elite_ratio);

/// Smoothed refit for active coordinates; frozen ones keep (mean, std). All
/// std entries are then clamped to [sigma_min, sigma_max].
SamplingDistribution cem_update(const SamplingDistribution& dist, const EliteSet& elites,
                                const std::vector<bool>& active, double smoothing);

struct PsaOptions {
  double threshold = 0.01;
  bool exact = false;
  int threads = 1;
};

/// D_k = KL(g_k || f) where f fits the population scores and g_k fits the
/// scores with coordinate k pinned at its elite mean.
SensitivityReport psa_indices(Objective& objective, const Mat& samples, const Vec& scores, const EliteSet& elites,
                              const PsaOptions& options);

/// Active set {k : D_k > threshold} from precomputed indices.
std::vector<Eigen::Index> active_set(const Vec& indices, double threshold);

struct OptimizeResult {
  Vec best;
  double best_score = 0.0;
  std::vector<TraceRow> trace;
  SamplingDistribution final_distribution;
  bool converged = false;
  int iterations = 0;
  std::size_t evaluations = 0;
};

/// Relative spread (max - min) / |max| of the elite scores.
double elite_spread(const EliteSet& elites);

OptimizeResult optimize(Objective& objective, const Bounds& bounds, const CemConfig& config,
                        SamplingDistribution initial, std::uint64_t rng_seed);

}  // namespace evprice::cem
