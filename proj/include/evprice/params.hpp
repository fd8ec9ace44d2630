#pragma once

#include <cstdint>
#include <vector>

namespace evprice {

struct EconParams {
  double kappa = 1.0;              // $/kWh charging satisfaction
  double vot = 5.0;                // $/h waiting penalty
  double rejection_penalty = 30.0; // $/EV
  double omega = 0.5;
  double price_floor = 0.20;       // $/kWh
  double price_ceiling = 0.80;     // $/kWh
};

enum class ChoiceMode { DeterministicDc, MnlStandard, MnlMsa };

struct ChoiceConfig {
  double theta = 0.05;
  ChoiceMode mode = ChoiceMode::MnlMsa;
  double gumbel_scale = 1.0;
  int msa_max_iters = 200;
  double msa_tol = 1e-3;
};

struct CemConfig {
  int population = 1000;
  double elite_ratio = 0.05;
  double smoothing = 0.7;
  double tolerance = 1e-3;
  int max_iters = 100;
  double psa_threshold = 0.01;
  int psa_frequency = 5;
  std::uint64_t seed = 1;
  // Zero means (ceiling - floor) / 4.
  double sigma_max = 0.0;
  double sigma_min = 0.005;
  int window_hours = 1;
  bool warm_start = false;
  bool psa_exact = false;
  int threads = 0;  // 0: hardware concurrency
};

struct BenchmarkConfig {
  double fixed_level = 0.5;
  double tou_peak = 0.6;
  double tou_offpeak = 0.3;
  std::vector<int> peak_hours = {8, 9, 10, 11, 12, 13, 14, 15, 16, 17};
};

}  // namespace evprice
