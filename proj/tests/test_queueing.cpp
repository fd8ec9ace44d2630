#include "evprice/queueing.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <queue>
#include <random>

using evprice::queueing::QueueParams;
namespace q = evprice::queueing;

namespace {

// Balance equations of the birth-death generator, normalisation replacing
// the last row, solved directly.
Eigen::VectorXd oracle_distribution(double lambda, double mu, int s, int c)
{
  const int n = c + 1;
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n, n);
  for (int d = 0; d < n; ++d) {
    if (d < c) gen(d, d + 1) = lambda;
    if (d > 0) gen(d, d - 1) = std::min(d, s) * mu;
    gen(d, d) = -gen.row(d).sum();
  }
  Eigen::MatrixXd a = gen.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  return a.fullPivLu().solve(rhs);
}

struct SimStats {
  double full_fraction = 0.0;  // time-average P(N = c)
  double mean_wait = 0.0;      // admitted arrivals only
};

// Event-driven M/M/s/c run with FIFO waiting.
SimStats simulate_queue(double lambda, double mu, int s, int c, long events, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> inter(lambda);
  std::exponential_distribution<double> service(mu);
  std::priority_queue<double, std::vector<double>, std::greater<>> departures;
  std::queue<double> waiting;  // arrival times
  double now = 0.0, next_arrival = inter(rng), full_time = 0.0, wait_total = 0.0;
  long admitted = 0;
  int in_system = 0;
  const double warmup = 100.0 / lambda;
  for (long e = 0; e < events; ++e) {
    const bool arrival = departures.empty() || next_arrival < departures.top();
    const double t = arrival ? next_arrival : departures.top();
    if (in_system == c && t > warmup) full_time += t - std::max(now, warmup);
    now = t;
    if (arrival) {
      next_arrival = now + inter(rng);
      if (in_system == c) continue;
      ++in_system;
      if (now >= warmup) ++admitted;
      if (static_cast<int>(departures.size()) < s) {
        departures.push(now + service(rng));
      } else {
        waiting.push(now);
      }
    } else {
      departures.pop();
      --in_system;
      if (!waiting.empty()) {
        const double arrived = waiting.front();
        waiting.pop();
        if (arrived >= warmup) wait_total += now - arrived;
        departures.push(now + service(rng));
      }
    }
  }
  return {full_time / (now - warmup), wait_total / static_cast<double>(admitted)};
}

}  // namespace

TEST(Stationary, TwoStateSymmetric)
{
  const auto pi = q::stationary_distribution(QueueParams<double>{1.0, 1.0, 1, 1});
  EXPECT_NEAR(pi(0), 0.5, 1e-15);
  EXPECT_NEAR(pi(1), 0.5, 1e-15);
}

TEST(Stationary, UniformAtUnitLoad)
{
  const auto pi = q::stationary_distribution(QueueParams<double>{1.0, 1.0, 1, 2});
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(pi(d), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(q::expected_queue_length(QueueParams<double>{1.0, 1.0, 1, 2}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(q::expected_wait(QueueParams<double>{1.0, 1.0, 1, 2}), 0.5, 1e-15);
}

TEST(Stationary, NoArrivals)
{
  const QueueParams<double> p{0.0, 1.0, 2, 5};
  EXPECT_EQ(q::stationary_distribution(p)(0), 1.0);
  EXPECT_EQ(q::expected_wait(p), 0.0);
  EXPECT_EQ(q::rejected_rate(p), 0.0);
}

TEST(Stationary, NoWaitingRoomHasNoQueue)
{
  EXPECT_EQ(q::expected_queue_length(QueueParams<double>{4.0, 1.0, 3, 3}), 0.0);
}

TEST(Stationary, RejectedRateTwoState)
{
  EXPECT_NEAR(q::rejected_rate(QueueParams<double>{1.0, 1.0, 1, 1}), 0.5, 1e-15);
}

TEST(Stationary, ReferenceCaseAgainstOracle)
{
  const QueueParams<double> p{3.0, 1.0, 2, 4};
  const Eigen::VectorXd ref = oracle_distribution(3.0, 1.0, 2, 4);
  const auto m = q::analyze(p);
  EXPECT_LT((m.state_probs - ref).cwiseAbs().maxCoeff(), 1e-12);
  const double length = ref(3) + 2.0 * ref(4);
  EXPECT_NEAR(m.queue_length, length, 1e-12);
  EXPECT_NEAR(m.wait_hours, length / (3.0 * (1.0 - ref(4))), 1e-12);
  EXPECT_NEAR(m.rejected_rate, 3.0 * ref(4), 1e-12);
}

TEST(Stationary, InvalidParametersThrow)
{
  EXPECT_THROW(q::stationary_distribution(QueueParams<double>{1.0, 1.0, 3, 2}), std::invalid_argument);
  EXPECT_THROW(q::stationary_distribution(QueueParams<double>{1.0, 0.0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(q::stationary_distribution(QueueParams<double>{-1.0, 1.0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(q::stationary_distribution(QueueParams<double>{1.0, 1.0, 0, 2}), std::invalid_argument);
}

TEST(Stationary, LargeCapacityStaysFinite)
{
  const auto pi = q::stationary_distribution(QueueParams<double>{50.0, 1.0, 10, 400});
  EXPECT_TRUE(pi.allFinite());
  EXPECT_NEAR(pi.sum(), 1.0, 1e-12);
}

TEST(Stationary, FlowConservationAndMonotoneBlocking)
{
  for (double mu : {0.5, 1.0, 2.0})
    for (int s = 1; s <= 5; ++s)
      for (int c = s; c <= s + 5; ++c) {
        double previous = -1.0;
        for (double lambda = 0.1; lambda <= 10.0 + 1e-12; lambda += 0.1) {
          const auto m = q::analyze(QueueParams<double>{lambda, mu, s, c});
          EXPECT_LE(lambda * (1.0 - m.rejection_prob), s * mu + 1e-12);
          EXPECT_GE(m.rejection_prob, previous - 1e-15);
          previous = m.rejection_prob;
        }
      }
}

TEST(Stationary, TemplatedOnLongDouble)
{
  const auto pi = q::stationary_distribution(QueueParams<long double>{3.0L, 1.0L, 2, 4});
  const Eigen::VectorXd ref = oracle_distribution(3.0, 1.0, 2, 4);
  for (int d = 0; d < 5; ++d) EXPECT_NEAR(static_cast<double>(pi(d)), ref(d), 1e-12);
}

TEST(Stationary, DiscreteEventSimulationAgrees)
{
  struct Case {
    double lambda, mu;
    int s, c;
  };
  int k = 0;
  for (const Case& cs : {Case{3.0, 1.0, 2, 4}, Case{5.0, 2.0, 3, 6}, Case{1.5, 1.0, 1, 3}}) {
    const auto m = q::analyze(QueueParams<double>{cs.lambda, cs.mu, cs.s, cs.c});
    const SimStats sim = simulate_queue(cs.lambda, cs.mu, cs.s, cs.c, 1'000'000, 1000 + k++);
    EXPECT_NEAR(sim.full_fraction / m.rejection_prob, 1.0, 0.02) << cs.lambda;
    EXPECT_NEAR(sim.mean_wait / m.wait_hours, 1.0, 0.02) << cs.lambda;
  }
}
