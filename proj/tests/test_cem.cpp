#include "evprice/cem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace evprice;
using namespace evprice::cem;

namespace {

Bounds box(Eigen::Index d, double lo = 0.2, double hi = 0.8)
{
  return {Vec::Constant(d, lo), Vec::Constant(d, hi)};
}

CemConfig small_config(int population = 200, int max_iters = 100)
{
  CemConfig c;
  c.population = population;
  c.max_iters = max_iters;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Kl, ClosedForm)
{
  EXPECT_EQ(gaussian_kl(0.3, 1.2, 0.3, 1.2), 0.0);
  EXPECT_NEAR(gaussian_kl(1.0, 1.0, 0.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(gaussian_kl(0.0, 2.0, 0.0, 1.0), 2.0 - std::log(2.0) - 0.5, 1e-15);
  EXPECT_THROW(gaussian_kl(0.0, 0.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(gaussian_kl(0.0, 1.0, 0.0, -1.0), std::invalid_argument);
  EXPECT_NEAR(static_cast<double>(gaussian_kl<long double>(1.0L, 1.0L, 0.0L, 1.0L)), 0.5, 1e-15);
}

TEST(Sample, ClampConcentrationDeterminism)
{
  const Bounds b = box(3);
  SamplingDistribution tight{Vec::Constant(3, 0.5), Vec::Constant(3, 0.005), 0.005, 0.15};
  const Mat s = cem_sample(tight, 500, b, 9);
  EXPECT_LT((s.array() - 0.5).abs().maxCoeff(), 5 * 0.005);
  EXPECT_EQ(s, cem_sample(tight, 500, b, 9));
  EXPECT_NE(s, cem_sample(tight, 500, b, 10));

  SamplingDistribution above{Vec::Constant(3, 5.0), Vec::Constant(3, 0.005), 0.005, 0.15};
  EXPECT_TRUE((cem_sample(above, 100, b, 1).array() == 0.8).all());
  EXPECT_THROW(cem_sample(tight, 0, b, 1), std::invalid_argument);
}

TEST(Elites, Selection)
{
  Mat samples(1, 4);
  samples << 10, 20, 30, 40;
  const Vec scores = (Vec(4) << 1, 2, 3, 4).finished();
  const EliteSet e = elite_select(samples, scores, 0.5);
  EXPECT_EQ(e.indices, (std::vector<Eigen::Index>{3, 2}));
  EXPECT_EQ(e.threshold, 3.0);
  EXPECT_NEAR(e.elite_mean(0), 35.0, 1e-12);
  EXPECT_NEAR(e.elite_std(0), 5.0, 1e-12);

  const EliteSet tie = elite_select(samples, Vec::Constant(4, 7.0), 0.5);
  EXPECT_EQ(tie.indices, (std::vector<Eigen::Index>{0, 1}));

  EXPECT_EQ(elite_count(1000, 0.05), 50);
  EXPECT_EQ(elite_count(10, 0.05), 1);
  EXPECT_EQ(elite_count(30, 0.05), 2);
}

TEST(Update, SmoothingFreezingClamp)
{
  SamplingDistribution d{(Vec(2) << 1.0, 1.0).finished(), (Vec(2) << 0.1, 0.1).finished(), 0.005, 0.15};
  EliteSet e;
  e.elite_mean = Vec::Zero(2);
  e.elite_std = Vec::Zero(2);
  const auto next = cem_update(d, e, {true, false}, 0.7);
  EXPECT_NEAR(next.mean(0), 0.7, 1e-15);
  EXPECT_NEAR(next.std(0), std::max(0.7 * 0.1, 0.005), 1e-15);
  EXPECT_EQ(next.mean(1), d.mean(1));
  EXPECT_EQ(next.std(1), d.std(1));

  e.elite_std = Vec::Constant(2, 10.0);
  EXPECT_EQ(cem_update(d, e, {true, true}, 0.0).std, Vec::Constant(2, 0.15));
  EXPECT_THROW(cem_update(d, e, {true}, 0.7), std::invalid_argument);
}

TEST(Psa, NullVariableAndThreshold)
{
  FunctionObjective f([](const Vec& x) { return -std::pow(x(0) - 0.4, 2); });
  const Bounds b = box(2);
  const auto dist = SamplingDistribution::initial(b, 0.005, 0.15);
  const Mat samples = cem_sample(dist, 300, b, 4);
  Vec scores(300);
  for (int m = 0; m < 300; ++m) scores(m) = f.evaluate(samples.col(m), 0);
  const EliteSet e = elite_select(samples, scores, 0.05);
  const SensitivityReport r = psa_indices(f, samples, scores, e, PsaOptions{0.01, true, 1});
  EXPECT_EQ(r.indices(1), 0.0);
  EXPECT_GT(r.indices(0), 0.01);
  EXPECT_EQ(r.active_set, (std::vector<Eigen::Index>{0}));
  EXPECT_TRUE((r.indices.array() >= 0.0).all());

  EXPECT_EQ(active_set((Vec(2) << 0.5, 0.01).finished(), 0.1), (std::vector<Eigen::Index>{0}));

  FunctionObjective flat([](const Vec&) { return 3.0; });
  const SensitivityReport none = psa_indices(flat, samples, Vec::Constant(300, 3.0), e, PsaOptions{});
  EXPECT_EQ(none.indices, Vec::Zero(2));
  EXPECT_TRUE(none.active_set.empty());
}

TEST(Psa, SeparableSurrogateMatchesOracle)
{
  auto score = [](const Vec& x) { return 10 * x(0) * x(0) + 0.1 * x(1) * x(1); };
  FunctionObjective f(score);
  const Bounds b = box(2, -1.0, 1.0);
  const SamplingDistribution dist{Vec::Zero(2), Vec::Constant(2, 0.5), 0.005, 1.0};
  const Mat samples = cem_sample(dist, 1000, b, 17);
  Vec scores(1000);
  for (int m = 0; m < 1000; ++m) scores(m) = score(samples.col(m));
  const EliteSet e = elite_select(samples, scores, 0.05);
  const SensitivityReport r = psa_indices(f, samples, scores, e, PsaOptions{0.01, true, 1});

  // Independent Monte-Carlo evaluation of both indices.
  auto fit = [](const std::vector<double>& v) {
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(var / v.size())};
  };
  std::vector<double> all;
  for (int m = 0; m < 1000; ++m) all.push_back(score(samples.col(m)));
  const auto [fm, fs] = fit(all);
  for (int k = 0; k < 2; ++k) {
    std::vector<double> frozen;
    for (int m = 0; m < 1000; ++m) {
      Vec x = samples.col(m);
      x(k) = e.elite_mean(k);
      frozen.push_back(score(x));
    }
    const auto [gm, gs] = fit(frozen);
    const double kl = std::log(fs / gs) + (gs * gs + (gm - fm) * (gm - fm)) / (2 * fs * fs) - 0.5;
    EXPECT_NEAR(r.indices(k), kl, 1e-9 * std::max(1.0, kl));
  }
  EXPECT_GT(r.indices(0), r.indices(1));
}

TEST(Optimize, DegenerateSingleSample)
{
  FunctionObjective f([](const Vec& x) { return x.sum(); });
  CemConfig c = small_config(1, 3);
  c.elite_ratio = 1.0;
  const Bounds b = box(2);
  const auto dist = SamplingDistribution{b.midpoint(), Vec::Constant(2, 0.005), 0.005, 0.005};
  const auto r = optimize(f, b, c, dist, 3);
  ASSERT_GE(r.trace.size(), 1u);
  EXPECT_EQ(r.best_score, f.evaluate(r.best, 0));
}

TEST(Optimize, SinglePriceSurrogate)
{
  FunctionObjective f([](const Vec& x) { return -std::pow(x(0) - 0.5, 2); });
  const Bounds b = box(1);
  const auto r = optimize(f, b, small_config(), SamplingDistribution::initial(b, 0.005, 0.15), 21);
  EXPECT_NEAR(r.best(0), 0.5, 0.01);

  // Best-ever is monotone; sigma stays clamped and stops growing after the
  // first few iterations.
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_GE(r.trace[i].best, r.trace[i - 1].best);
    EXPECT_GE(r.trace[i].mean_sigma, 0.005 - 1e-15);
    EXPECT_LE(r.trace[i].mean_sigma, 0.15 + 1e-15);
    if (i > 5) EXPECT_LE(r.trace[i].mean_sigma, r.trace[i - 1].mean_sigma + 1e-15);
  }
}

TEST(Optimize, ThreadCountDoesNotChangeResult)
{
  auto score = [](const Vec& x) { return -(x.array() - 0.33).square().sum() + 0.01 * std::sin(40 * x(1)); };
  FunctionObjective f(score);
  const Bounds b = box(4);
  CemConfig one = small_config(100, 20);
  CemConfig four = one;
  four.threads = 4;
  const auto a = optimize(f, b, one, SamplingDistribution::initial(b, 0.005, 0.15), 8);
  const auto c = optimize(f, b, four, SamplingDistribution::initial(b, 0.005, 0.15), 8);
  EXPECT_EQ(a.best, c.best);
  EXPECT_EQ(a.best_score, c.best_score);
  EXPECT_EQ(a.final_distribution.mean, c.final_distribution.mean);
}

TEST(Optimize, MaxItersFlagsNonConvergence)
{
  FunctionObjective f([](const Vec& x) { return -std::pow(x(0) - 0.5, 2) + 1.0; });
  const Bounds b = box(1);
  const auto r = optimize(f, b, small_config(10, 2), SamplingDistribution::initial(b, 0.005, 0.15), 1);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
}
