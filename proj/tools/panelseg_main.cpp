// Command-line front end for the panel change-point library.  Everything
// goes through the shared-library C interface.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "panelseg.h"

namespace {

int exit_for(ps_status st) {
  switch (st) {
    case PS_OK:
      return 0;
    case PS_ERR_DEGENERATE:
    case PS_ERR_INTERNAL:
      return 1;  // pipeline failure
    default:
      return 2;  // usage / input error
  }
}

int complain(const std::string& what, ps_status st) {
  std::fprintf(stderr, "panelseg: %s: %s\n", what.c_str(), ps_last_error());
  return exit_for(st);
}

struct CommonOpts {
  std::string mode = "combined";
  double alpha = 0.05;
  long boot_reps = 100;
  long trim = 5;
  long depth = 0;
  std::uint64_t seed = 0;
  long threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--mode", o.mode,
                  "Cross-sectional aggregation: phi=<v> or combined[,gamma=<v>]");
  cmd->add_option("--alpha", o.alpha, "Significance level (default 0.05)");
  cmd->add_option("--boot-reps", o.boot_reps, "Bootstrap replicates B (default 100)");
  cmd->add_option("--trim", o.trim, "Candidate trimming d_T (default 5)");
  cmd->add_option("--depth", o.depth, "Segmentation tree depth, 0 = automatic");
  cmd->add_option("--seed", o.seed, "Master RNG seed");
  cmd->add_option("--threads", o.threads,
                  "Worker threads, 0 = PANELSEG_THREADS env or hardware");
}

// Returns 0 and fills *out on success, else prints the problem and returns 2.
int make_config(const CommonOpts& o, ps_config** out) {
  ps_config* cfg = nullptr;
  ps_config_create(&cfg);
  ps_status st = PS_OK;
  if (o.mode.rfind("phi=", 0) == 0) {
    char* end = nullptr;
    const std::string v = o.mode.substr(4);
    const double phi = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty()) {
      std::fprintf(stderr, "panelseg: --mode: cannot parse phi from '%s'\n", o.mode.c_str());
      ps_config_free(cfg);
      return 2;
    }
    st = ps_config_set_mode_exponent(cfg, phi);
  } else if (o.mode == "combined") {
    st = ps_config_set_mode_combined(cfg, 0.0);
  } else if (o.mode.rfind("combined,gamma=", 0) == 0) {
    char* end = nullptr;
    const std::string v = o.mode.substr(15);
    const double gamma = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty()) {
      std::fprintf(stderr, "panelseg: --mode: cannot parse gamma from '%s'\n", o.mode.c_str());
      ps_config_free(cfg);
      return 2;
    }
    st = ps_config_set_mode_combined(cfg, gamma);
  } else {
    std::fprintf(stderr,
                 "panelseg: --mode must be phi=<v> or combined[,gamma=<v>], got '%s'\n",
                 o.mode.c_str());
    ps_config_free(cfg);
    return 2;
  }
  if (st != PS_OK) {
    ps_config_free(cfg);
    return complain("--mode", st);
  }
  ps_config_set_alpha(cfg, o.alpha);
  ps_config_set_boot_reps(cfg, o.boot_reps);
  ps_config_set_trim(cfg, o.trim);
  ps_config_set_depth(cfg, o.depth);
  ps_config_set_seed(cfg, o.seed);
  ps_config_set_threads(cfg, o.threads);
  *out = cfg;
  return 0;
}

int write_text(const std::string& path, const std::string& text, const char* what) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::fprintf(stderr, "panelseg: cannot open '%s' for %s\n", path.c_str(), what);
    return 2;
  }
  f << text;
  if (!f) {
    std::fprintf(stderr, "panelseg: write failed for '%s'\n", path.c_str());
    return 2;
  }
  return 0;
}

int run_detect(const std::string& input, bool header, const std::string& output,
               const CommonOpts& o) {
  ps_panel* panel = nullptr;
  ps_status st = ps_panel_read_csv(input.c_str(), header ? 1 : 0, &panel);
  if (st != PS_OK) return complain("--input", st);

  ps_config* cfg = nullptr;
  int rc = make_config(o, &cfg);
  if (rc != 0) {
    ps_panel_free(panel);
    return rc;
  }

  ps_report* report = nullptr;
  st = ps_detect(panel, cfg, &report);
  ps_config_free(cfg);
  ps_panel_free(panel);
  if (st != PS_OK) return complain("detect", st);

  char* json = nullptr;
  st = ps_report_json(report, &json);
  ps_report_free(report);
  if (st != PS_OK) return complain("report", st);
  rc = write_text(output, json, "the report");
  ps_string_free(json);
  return rc;
}

int run_threshold(const std::string& input, bool header, const std::string& output,
                  long window, const std::string& dump_boot, const CommonOpts& o) {
  ps_panel* panel = nullptr;
  ps_status st = ps_panel_read_csv(input.c_str(), header ? 1 : 0, &panel);
  if (st != PS_OK) return complain("--input", st);

  ps_config* cfg = nullptr;
  int rc = make_config(o, &cfg);
  if (rc != 0) {
    ps_panel_free(panel);
    return rc;
  }

  double quantile = 0.0;
  std::vector<double> stats(static_cast<size_t>(o.boot_reps));
  long written = 0;
  st = ps_bootstrap_threshold(panel, cfg, window, &quantile,
                              dump_boot.empty() ? nullptr : stats.data(),
                              static_cast<long>(stats.size()), &written);
  ps_config_free(cfg);
  const long T = ps_panel_cols(panel);
  ps_panel_free(panel);
  if (st != PS_OK) return complain("threshold", st);

  if (!dump_boot.empty()) {
    std::string text = "replicate,stat\n";
    char line[64];
    for (long i = 0; i < written; ++i) {
      std::snprintf(line, sizeof line, "%ld,%.17g\n", i + 1, stats[static_cast<size_t>(i)]);
      text += line;
    }
    rc = write_text(dump_boot, text, "the bootstrap dump");
    if (rc != 0) return rc;
  }

  char body[256];
  std::snprintf(body, sizeof body,
                "{\n  \"window_len\": %ld,\n  \"alpha\": %.17g,\n  \"boot_reps\": %ld,\n"
                "  \"quantile\": %.17g\n}\n",
                window > 0 ? window : T, o.alpha, o.boot_reps, quantile);
  return write_text(output, body, "the threshold report");
}

int run_simulate(const std::string& model, double rho, long n, long T, std::uint64_t seed,
                 const std::string& out_path) {
  int model_id = 0;
  if (model == "n1") model_id = 1;
  else if (model == "n2") model_id = 2;
  else {
    std::fprintf(stderr, "panelseg: --model must be n1 or n2, got '%s'\n", model.c_str());
    return 2;
  }
  ps_panel* panel = nullptr;
  ps_status st = ps_simulate_noise(model_id, rho, n, T, seed, &panel);
  if (st != PS_OK) return complain("simulate", st);
  st = ps_panel_write_csv(panel, out_path.c_str());
  ps_panel_free(panel);
  if (st != PS_OK) return complain("--out", st);
  return 0;
}

int run_benchmark(const std::string& preset, const std::string& plan_path, long reps,
                  std::uint64_t seed, bool seed_given, long threads,
                  const std::string& output, const std::string& json_path) {
  ps_experiment* exp = nullptr;
  ps_status st;
  if (!preset.empty()) {
    st = ps_experiment_preset(preset.c_str(), &exp);
    if (st != PS_OK) return complain("--preset", st);
  } else if (!plan_path.empty()) {
    std::ifstream f(plan_path, std::ios::binary);
    if (!f) {
      std::fprintf(stderr, "panelseg: cannot open plan '%s'\n", plan_path.c_str());
      return 2;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    st = ps_experiment_parse(buf.str().c_str(), &exp);
    if (st != PS_OK) return complain("--input", st);
  } else {
    std::fprintf(stderr, "panelseg: benchmark needs --preset or --input PLAN\n");
    return 2;
  }
  if (reps > 0) ps_experiment_set_reps(exp, reps);
  if (seed_given) ps_experiment_set_seed(exp, seed);
  if (threads != 0) ps_experiment_set_threads(exp, threads);

  char* csv = nullptr;
  char* json = nullptr;
  st = ps_experiment_run(exp, &csv, json_path.empty() ? nullptr : &json);
  ps_experiment_free(exp);
  if (st != PS_OK) return complain("benchmark", st);

  int rc = write_text(output, csv, "the metrics table");
  ps_string_free(csv);
  if (rc == 0 && !json_path.empty()) {
    rc = write_text(json_path, json, "the JSON summary");
  }
  ps_string_free(json);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple change-point detection in high-dimensional panels"};
  app.set_version_flag("--version", std::string(ps_version()));
  app.require_subcommand(1);

  // detect
  std::string det_input, det_output;
  bool det_header = false;
  CommonOpts det_opts;
  CLI::App* detect = app.add_subcommand("detect", "Segment a CSV panel");
  detect->add_option("--input", det_input, "Input CSV, one series per row")->required();
  detect->add_flag("--header", det_header, "Skip a leading header row");
  detect->add_option("--output", det_output, "JSON report path (default stdout)");
  add_common(detect, det_opts);

  // threshold
  std::string thr_input, thr_output, thr_dump;
  bool thr_header = false;
  long thr_window = 0;
  CommonOpts thr_opts;
  CLI::App* threshold =
      app.add_subcommand("threshold", "Bootstrap scan threshold for one window length");
  threshold->add_option("--input", thr_input, "Input CSV, one series per row")->required();
  threshold->add_flag("--header", thr_header, "Skip a leading header row");
  threshold->add_option("--window", thr_window, "Window length (0 = full span)");
  threshold->add_option("--output", thr_output, "JSON output path (default stdout)");
  threshold->add_option("--dump-boot", thr_dump, "Write replicate statistics CSV here");
  add_common(threshold, thr_opts);

  // simulate
  std::string sim_model = "n1", sim_out;
  double sim_rho = 0.2;
  long sim_n = 0, sim_T = 0;
  std::uint64_t sim_seed = 0;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a noise panel CSV");
  simulate->add_option("--model", sim_model, "n1 or n2");
  simulate->add_option("--rho", sim_rho, "Spatial scale (n1) or factor loading (n2)");
  simulate->add_option("--n", sim_n, "Number of series")->required();
  simulate->add_option("--T", sim_T, "Number of time points")->required();
  simulate->add_option("--seed", sim_seed, "Master RNG seed");
  simulate->add_option("--out", sim_out, "Output CSV path")->required();

  // benchmark
  std::string bench_preset, bench_plan, bench_output, bench_json;
  long bench_reps = 0, bench_threads = 0;
  std::uint64_t bench_seed = 0;
  CLI::App* benchmark = app.add_subcommand("benchmark", "Run a Monte Carlo experiment plan");
  benchmark->add_option("--preset", bench_preset,
                        "Built-in plan: type1-n1, power-single, multi, n2-strong");
  benchmark->add_option("--input", bench_plan, "Plan file (key = value lines)");
  benchmark->add_option("--reps", bench_reps, "Override replication count");
  CLI::Option* bench_seed_opt = benchmark->add_option("--seed", bench_seed, "Master RNG seed");
  benchmark->add_option("--threads", bench_threads, "Worker threads");
  benchmark->add_option("--output", bench_output, "Metrics CSV path (default stdout)");
  benchmark->add_option("--json", bench_json, "Also write a JSON summary here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (detect->parsed()) return run_detect(det_input, det_header, det_output, det_opts);
  if (threshold->parsed()) {
    return run_threshold(thr_input, thr_header, thr_output, thr_window, thr_dump, thr_opts);
  }
  if (simulate->parsed()) {
    return run_simulate(sim_model, sim_rho, sim_n, sim_T, sim_seed, sim_out);
  }
  if (benchmark->parsed()) {
    return run_benchmark(bench_preset, bench_plan, bench_reps, bench_seed,
                         bench_seed_opt->count() > 0, bench_threads, bench_output, bench_json);
  }
  return 2;
}
