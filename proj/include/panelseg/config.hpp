#ifndef PANELSEG_CONFIG_HPP
#define PANELSEG_CONFIG_HPP

#include <cstdint>

#include "panelseg/cusum.hpp"

namespace panelseg {

// Detection pipeline configuration.  Defaults follow the combined statistic
// with gamma_n = log n, alpha* = 0.05, B = 100 bootstrap replicates, trim
// d_T = 5 and the automatic tree depth L_T = floor(log2(log T + 1)).
struct DetectorConfig {
  DcMode mode = DcMode::combined();
  double alpha = 0.05;      // alpha* before any Bonferroni correction
  long boot_reps = 100;     // B
  long trim = 5;            // d_T
  long depth = 0;           // L_T; 0 selects the T-dependent default
  std::uint64_t seed = 0;
  bool bonferroni = true;   // alpha* / (2^{L_T} - 1) inside the multi pipeline
  long threads = 0;         // 0: PANELSEG_THREADS env, else hardware
};

void validate(const DetectorConfig& config);

}  // namespace panelseg

#endif  // PANELSEG_CONFIG_HPP
