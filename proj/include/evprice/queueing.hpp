#pragma once

// Stationary analysis of the M/M/s/c birth-death chain.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evprice::queueing {

template <typename Scalar = double>
struct QueueParams {
  Scalar arrival_rate = Scalar(0);  // veh/h
  Scalar service_rate = Scalar(1);  // veh/h per server
  int servers = 1;
  int capacity = 1;  // servers plus waiting spots

  void validate() const
  {
    if (servers < 1) throw std::invalid_argument("servers must be >= 1");
    if (capacity < servers) throw std::invalid_argument("capacity must be >= servers");
    if (!(arrival_rate >= Scalar(0))) throw std::invalid_argument("arrival_rate must be >= 0");
    if (!(service_rate > Scalar(0))) throw std::invalid_argument("service_rate must be > 0");
  }
};

template <typename Scalar>
using Distribution = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct QueueMetrics {
  Distribution<Scalar> state_probs;
  Scalar queue_length = Scalar(0);
  Scalar wait_hours = Scalar(0);
  Scalar rejection_prob = Scalar(0);
  Scalar rejected_rate = Scalar(0);
  Scalar mean_in_system = Scalar(0);
};

/// pi_0..pi_c. Terms are accumulated as log running products of the
/// per-step ratios lambda / (min(d, s) mu), so large c never overflows.
template <typename Scalar>
Distribution<Scalar> stationary_distribution(const QueueParams<Scalar>& p)
{
  using std::exp;
  using std::log;
  p.validate();
  Distribution<Scalar> pi = Distribution<Scalar>::Zero(p.capacity + 1);
  if (p.arrival_rate == Scalar(0)) {
    pi(0) = Scalar(1);
    return pi;
  }
  const Scalar log_rho = log(p.arrival_rate / p.service_rate);
  Distribution<Scalar> log_w(p.capacity + 1);
  log_w(0) = Scalar(0);
  for (int d = 1; d <= p.capacity; ++d)
    log_w(d) = log_w(d - 1) + log_rho - log(Scalar(std::min(d, p.servers)));
  const Scalar top = log_w.maxCoeff();
  pi = (log_w.array() - top).exp().matrix();
  pi /= pi.sum();
  return pi;
}

template <typename Scalar>
Scalar queue_length_from(const Distribution<Scalar>& pi, int servers)
{
  Scalar length = Scalar(0);
  for (Eigen::Index d = servers + 1; d < pi.size(); ++d) length += Scalar(d - servers) * pi(d);
  return length;
}

template <typename Scalar>
Scalar expected_queue_length(const QueueParams<Scalar>& p)
{
  return queue_length_from(stationary_distribution(p), p.servers);
}

/// Little's law over admitted arrivals; zero when nothing gets in.
template <typename Scalar>
Scalar wait_from(const QueueParams<Scalar>& p, const Distribution<Scalar>& pi)
{
  const Scalar throughput = p.arrival_rate * (Scalar(1) - pi(p.capacity));
  if (p.arrival_rate == Scalar(0) || !(throughput > Scalar(0))) return Scalar(0);
  return queue_length_from(pi, p.servers) / throughput;
}

template <typename Scalar>
Scalar expected_wait(const QueueParams<Scalar>& p)
{
  return wait_from(p, stationary_distribution(p));
}

template <typename Scalar>
Scalar rejected_rate(const QueueParams<Scalar>& p)
{
  return p.arrival_rate * stationary_distribution(p)(p.capacity);
}

template <typename Scalar>
QueueMetrics<Scalar> analyze(const QueueParams<Scalar>& p)
{
  QueueMetrics<Scalar> m;
  m.state_probs = stationary_distribution(p);
  m.queue_length = queue_length_from(m.state_probs, p.servers);
  m.wait_hours = wait_from(p, m.state_probs);
  m.rejection_prob = m.state_probs(p.capacity);
  m.rejected_rate = p.arrival_rate * m.rejection_prob;
  for (Eigen::Index d = 1; d < m.state_probs.size(); ++d)
    m.mean_in_system += Scalar(d) * m.state_probs(d);
  return m;
}

}  // namespace evprice::queueing
