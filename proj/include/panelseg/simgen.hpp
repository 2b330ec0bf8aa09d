#ifndef PANELSEG_SIMGEN_HPP
#define PANELSEG_SIMGEN_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "panelseg/panel.hpp"

namespace panelseg {

// Noise generators for the Monte Carlo study.  Model n1 is a spatial MA
// panel with per-series ARMA(2,2) dynamics; n2 adds one common AR factor
// shared across series.
struct NoiseModelSpec {
  enum class Model { n1, n2 };
  Model model = Model::n1;
  double rho = 0.2;    // n1: spatial MA scale, > 0 (sigma_v = 0.1 / rho)
  double rho_h = 0.0;  // n2: factor loading, in (0, 1)
  long n = 0;
  long T = 0;
  long burn_in = 100;       // ARMA warm-up steps discarded, >= 100
  double noise_scale = 1.0; // scales every innovation; 0 gives a zero panel
};

// Panel of stationary-regime noise.  v innovations are drawn for auxiliary
// coordinates j in -98..n so the spatial MA sum is fully populated at j = 1;
// the recursion starts from zero initial conditions.
PanelData gen_noise(const NoiseModelSpec& spec, std::uint64_t seed);

// One mean shift: at time eta the series in pi (or a random subset of size m
// when pi is empty) jump by signed magnitudes drawn around delta.
struct ChangeSpec {
  long eta = 0;
  long m = 0;
  double delta = 0.0;
  std::vector<long> pi;  // explicit affected set; empty = draw m at random
};

struct SignalSpec {
  std::vector<ChangeSpec> change_points;  // etas strictly increasing
  double jitter = 0.25;  // |delta_{j,r}| ~ U((1-jitter) delta, (1+jitter) delta)
};

struct RealizedChange {
  long eta = 0;
  std::vector<long> members;   // ascending
  std::vector<double> deltas;  // signed, aligned with members
};

struct SignalTruth {
  std::vector<RealizedChange> changes;
};

// Piecewise-constant mean matrix: cumulative jumps applied from eta_r + 1 on.
PanelData gen_signal(const SignalSpec& spec, long n, long T, std::uint64_t seed,
                     SignalTruth* truth = nullptr);

// (true positives + true negatives) / n for the changed-vs-unchanged split.
double rand_index(std::span<const long> true_set, std::span<const long> est_set, long n);

}  // namespace panelseg

#endif  // PANELSEG_SIMGEN_HPP
