#pragma once

#include "evprice/types.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace evprice {

struct EvAgent;
struct Scenario;

/// SOC-versus-minutes charging curve. L2 is linear with a constant rate; L3 is
/// the bi-exponential taper 1 + a e^{-bT} - (1 + a) e^{-cT}.
template <typename Scalar = double>
struct ChargingCurve {
  ChargerLevel level = ChargerLevel::L3;
  Scalar rate = Scalar(1) / Scalar(225);  // L2, SOC per minute
  Scalar a = Scalar(2.096);
  Scalar b = Scalar(0.0749);
  Scalar c = Scalar(0.0552);

  static ChargingCurve l2(Scalar rate_per_minute = Scalar(1) / Scalar(225))
  {
    ChargingCurve curve;
    curve.level = ChargerLevel::L2;
    curve.rate = rate_per_minute;
    return curve;
  }

  static ChargingCurve l3(Scalar a = Scalar(2.096), Scalar b = Scalar(0.0749),
                          Scalar c = Scalar(0.0552))
  {
    ChargingCurve curve;
    curve.level = ChargerLevel::L3;
    curve.a = a;
    curve.b = b;
    curve.c = c;
    return curve;
  }

  /// True when the L3 coefficients give f(0)=0, f increasing, f -> 1.
  bool valid() const
  {
    if (level == ChargerLevel::L2) return rate > Scalar(0);
    return a >= Scalar(0) && b > c && c > Scalar(0) && a * b <= (Scalar(1) + a) * c;
  }
};

class UnreachableTarget : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <typename Scalar>
Scalar soc_from_time(const ChargingCurve<Scalar>& curve, Scalar minutes)
{
  using std::exp;
  using std::min;
  if (minutes <= Scalar(0)) return Scalar(0);
  if (curve.level == ChargerLevel::L2) return min(Scalar(1), curve.rate * minutes);
  return Scalar(1) - ((Scalar(1) + curve.a) * exp(-curve.c * minutes) - curve.a * exp(-curve.b * minutes));
}

/// Inverse of soc_from_time. L3 has no closed form and is inverted by
/// bisection on [0, 2000] minutes followed by a Newton polish.
template <typename Scalar>
Scalar time_from_soc(const ChargingCurve<Scalar>& curve, Scalar soc)
{
  using std::abs;
  using std::exp;
  if (soc < Scalar(0)) throw std::invalid_argument("soc must be non-negative");
  if (soc == Scalar(0)) return Scalar(0);
  if (curve.level == ChargerLevel::L2) {
    if (soc > Scalar(1)) throw UnreachableTarget("soc above 1 is unreachable on an L2 curve");
    return soc / curve.rate;
  }
  if (soc >= Scalar(1)) throw UnreachableTarget("soc >= 1 is the L3 asymptote and is never reached");

  // Work on the deficit 1 - soc: it is exact for soc near 1 and keeps the
  // residual accurate on the flat tail of the curve.
  const Scalar target = Scalar(1) - soc;
  const auto deficit = [&](Scalar t) {
    return (Scalar(1) + curve.a) * exp(-curve.c * t) - curve.a * exp(-curve.b * t);
  };
  Scalar lo = Scalar(0);
  Scalar hi = Scalar(2000);
  if (deficit(hi) > target) throw UnreachableTarget("soc not reached within 2000 minutes");
  while (hi - lo > Scalar(1e-10)) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (deficit(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  Scalar t = Scalar(0.5) * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const Scalar slope = -curve.a * curve.b * exp(-curve.b * t) +
                         (Scalar(1) + curve.a) * curve.c * exp(-curve.c * t);
    if (slope <= Scalar(0)) break;
    const Scalar next = t + (deficit(t) - target) / slope;
    if (!(next >= lo - Scalar(1e-9) && next <= hi + Scalar(1e-9))) break;
    t = next;
  }
  return t;
}

/// Minutes needed to go from initial_soc to target_soc.
template <typename Scalar>
Scalar charging_duration(const ChargingCurve<Scalar>& curve, Scalar initial_soc, Scalar target_soc)
{
  if (target_soc < initial_soc) throw std::invalid_argument("target_soc below initial_soc");
  if (target_soc == initial_soc) return Scalar(0);
  // Time already "spent" on the curve before arrival.
  const Scalar initial_minutes = time_from_soc(curve, initial_soc);
  return time_from_soc(curve, target_soc) - initial_minutes;
}

/// (target - initial) * Q_max in kWh; throws like charging_duration.
double energy_demand(const EvAgent& ev, const ChargingCurve<double>& curve, double target_soc);

/// Travel-time budget from the remaining range: soc * Q_max * phi / speed.
double max_range_hours(const EvAgent& ev, double speed_kmh);

/// Range budget shrunk by risk aversion and battery ageing.
double adjusted_range_hours(const EvAgent& ev, double speed_kmh);

/// Station ids whose travel time is within the adjusted range budget.
std::vector<int> eca(const EvAgent& ev, const Scenario& scenario, int hour);

}  // namespace evprice
