#pragma once

#include "evprice/cem.hpp"
#include "evprice/economics.hpp"
#include "evprice/simulation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace evprice {

/// Immutable inputs of one rolling window. Decision variable k maps to
/// station k / hours and hour start_hour + k % hours (station-major stacking).
struct WindowContext {
  const Scenario* scenario = nullptr;
  int index = 0;
  int start_hour = 0;
  std::vector<HourData> hours;
  CarryState carry_in;
  ChoiceConfig choice;
  cem::Bounds bounds;

  int hour_count() const { return static_cast<int>(hours.size()); }
  Eigen::Index dimension() const { return bounds.size(); }
  /// stations x hours view of a decision vector.
  Mat unstack(const Vec& theta) const;
  Vec stack(const Mat& prices) const;
};

WindowContext make_window(const Scenario& scenario, int index, int start_hour, int hours, const CarryState& carry,
                          const ChoiceConfig& choice, std::uint64_t seed);

/// Counts of evaluated price vectors and of those that left the bounds.
struct PriceAudit {
  std::size_t evaluated = 0;
  std::size_t violations = 0;

  PriceAudit& operator+=(const PriceAudit& other)
  {
    evaluated += other.evaluated;
    violations += other.violations;
    return *this;
  }
};

struct WindowEvaluation {
  double score = 0.0;
  std::vector<HourOutcome> outcomes;
};

/// Performance index summed over the window's hours; carry state flows
/// from hour to hour inside the window.
WindowEvaluation evaluate_window(const WindowContext& ctx, const Vec& theta,
                                 const std::vector<Mat>* warm_start = nullptr);

double evaluate(const Vec& theta, const WindowContext& ctx);

class WindowObjective : public cem::Objective {
 public:
  explicit WindowObjective(const WindowContext& ctx) : ctx_(ctx) {}

  void reserve(std::size_t slots) override;
  double evaluate(const Vec& theta, std::size_t slot) override;
  double evaluate_near(const Vec& theta, std::size_t slot) override;

  PriceAudit audit() const;

 private:
  void record(const Vec& theta, std::size_t slot);

  const WindowContext& ctx_;
  std::vector<std::vector<Mat>> cache_;
  std::vector<PriceAudit> audits_;
};

struct WindowResult {
  int index = 0;
  int start_hour = 0;
  int hours = 0;
  Mat best_prices;  // stations x hours
  double best_score = 0.0;
  std::vector<cem::TraceRow> trace;
  std::vector<HourOutcome> outcomes;
  CarryState carry_out;
  bool converged = false;
  int iterations = 0;
  PriceAudit audit;
  cem::SamplingDistribution final_distribution;
};

WindowResult optimize_window(const WindowContext& ctx, const CemConfig& config,
                             std::optional<cem::SamplingDistribution> initial = std::nullopt,
                             std::uint64_t rng_seed = 0);

struct RollingResult {
  std::vector<WindowResult> windows;
  PriceSchedule schedule;
  std::vector<int> non_converged;
  PriceAudit audit;
};

/// Effective sigma_max: configured value or a quarter of the price range.
double resolved_sigma_max(const Scenario& scenario, const CemConfig& config);

RollingResult rolling_horizon(const Scenario& scenario, const CemConfig& config, const ChoiceConfig& choice,
                              std::uint64_t seed,
                              const std::function<void(const WindowResult&)>& on_window = {});

}  // namespace evprice
