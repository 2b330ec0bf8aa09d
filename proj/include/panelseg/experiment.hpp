#ifndef PANELSEG_EXPERIMENT_HPP
#define PANELSEG_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "panelseg/config.hpp"
#include "panelseg/simgen.hpp"

namespace panelseg {

// One detector row of an experiment plan.
struct DetectorSpec {
  enum class Kind { dc, sbs, jirak, eh };
  Kind kind = Kind::dc;
  DcMode mode;        // dc only
  std::string label;  // unique row label in the output tables
};

// Declarative Monte Carlo plan.  null_size runs noise-only replications;
// single evaluates full-window statistics against one mean shift with size
// correction; multi runs the complete segmentation pipeline and tallies the
// estimated change-point count.
struct ExperimentPlan {
  enum class Mode { null_size, single, multi };
  Mode mode = Mode::null_size;
  NoiseModelSpec noise;
  SignalSpec signal;
  long reps = 100;       // R
  double alpha = 0.05;
  long boot_reps = 100;  // B
  long trim = 5;         // d_T
  long depth = 0;        // segmentation-tree depth cap input, 0 = automatic
  std::uint64_t seed = 0;
  long threads = 0;
  std::vector<DetectorSpec> detectors;
};

// Outcome of one detector on one replication under the full-window protocol.
struct SingleOutcome {
  double stat = 0.0;      // scalar used for size correction
  bool rejected = false;  // the detector's own decision rule
  long eta = 0;           // 0 when the detector does not locate
  std::vector<long> contributors;  // estimated affected set; empty = undefined
};

// Injectable detector for tests: raw panel plus replication seed -> outcome.
struct CustomDetector {
  std::string label;
  std::function<SingleOutcome(const PanelData&, std::uint64_t)> fn;
};

struct DetectorMetrics {
  std::string label;
  double type1 = std::numeric_limits<double>::quiet_NaN();
  double power_raw = std::numeric_limits<double>::quiet_NaN();
  double size_corrected_power = std::numeric_limits<double>::quiet_NaN();
  double null_quantile = std::numeric_limits<double>::quiet_NaN();
  double location_accuracy = std::numeric_limits<double>::quiet_NaN();
  double rand_index = std::numeric_limits<double>::quiet_NaN();
  std::map<long, long> nhat_histogram;  // multi mode: estimated count -> reps
  std::vector<double> eta_accuracy;     // multi mode, aligned with plan change points
};

struct ExperimentResult {
  ExperimentPlan plan;
  std::vector<DetectorMetrics> rows;
};

// key = value plan text; '#' comments; repeated `cp = eta m delta` lines add
// change points, with eta/m accepting "0.3T", "0.75n", "sqrtn", "logn" forms.
// Parse errors carry the offending line number.
ExperimentPlan parse_plan(const std::string& text);

// Built-in plans: type1-n1, power-single, multi, n2-strong.
ExperimentPlan preset_plan(const std::string& name);

ExperimentResult run_experiment(const ExperimentPlan& plan,
                                const std::vector<CustomDetector>& custom = {});

std::string metrics_to_csv(const ExperimentResult& result);
std::string metrics_to_json(const ExperimentResult& result);

}  // namespace panelseg

#endif  // PANELSEG_EXPERIMENT_HPP
