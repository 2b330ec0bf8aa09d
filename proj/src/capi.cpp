#include "panelseg.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <utility>

#include "panelseg/bootstrap.hpp"
#include "panelseg/config.hpp"
#include "panelseg/dcbs.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/experiment.hpp"
#include "panelseg/panel.hpp"
#include "panelseg/simgen.hpp"
#include "panelseg/version.hpp"

struct ps_panel {
  panelseg::PanelData data;
};
struct ps_config {
  panelseg::DetectorConfig cfg;
};
struct ps_report {
  panelseg::ChangePointReport rep;
};
struct ps_experiment {
  panelseg::ExperimentPlan plan;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
ps_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PS_OK;
  } catch (const panelseg::Error& e) {
    g_last_error = e.what();
    return static_cast<ps_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return PS_ERR_INTERNAL;
  }
}

ps_status fail(ps_status code, const char* msg) {
  g_last_error = msg;
  return code;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p != nullptr) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* ps_version(void) { return PANELSEG_VERSION; }

const char* ps_last_error(void) { return g_last_error.c_str(); }

void ps_string_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ panels */

ps_status ps_panel_create(long n, long T, const double* values, ps_panel** out) {
  if (out == nullptr) return fail(PS_ERR_DOMAIN, "ps_panel_create: out is NULL");
  if (values == nullptr) return fail(PS_ERR_DOMAIN, "ps_panel_create: values is NULL");
  *out = nullptr;
  return guarded([&] {
    if (n < 1 || T < 2) {
      throw panelseg::DimensionError("ps_panel_create: need n >= 1 and T >= 2");
    }
    auto* p = new ps_panel;
    p->data = panelseg::PanelData(n, T);
    std::memcpy(p->data.values.data(), values, sizeof(double) * static_cast<size_t>(n * T));
    *out = p;
  });
}

ps_status ps_panel_read_csv(const char* path, int has_header, ps_panel** out) {
  if (out == nullptr) return fail(PS_ERR_DOMAIN, "ps_panel_read_csv: out is NULL");
  if (path == nullptr) return fail(PS_ERR_DOMAIN, "ps_panel_read_csv: path is NULL");
  *out = nullptr;
  return guarded([&] {
    auto* p = new ps_panel;
    p->data = panelseg::load_csv(path, has_header != 0);
    *out = p;
  });
}

ps_status ps_panel_write_csv(const ps_panel* panel, const char* path) {
  if (panel == nullptr) return fail(PS_ERR_DOMAIN, "ps_panel_write_csv: panel is NULL");
  if (path == nullptr) return fail(PS_ERR_DOMAIN, "ps_panel_write_csv: path is NULL");
  return guarded([&] { panelseg::write_csv(panel->data, path); });
}

long ps_panel_rows(const ps_panel* panel) { return panel == nullptr ? 0 : panel->data.n; }

long ps_panel_cols(const ps_panel* panel) { return panel == nullptr ? 0 : panel->data.T; }

ps_status ps_panel_values(const ps_panel* panel, double* buffer) {
  if (panel == nullptr) return fail(PS_ERR_DOMAIN, "ps_panel_values: panel is NULL");
  if (buffer == nullptr) return fail(PS_ERR_DOMAIN, "ps_panel_values: buffer is NULL");
  std::memcpy(buffer, panel->data.values.data(),
              sizeof(double) * panel->data.values.size());
  return PS_OK;
}

void ps_panel_free(ps_panel* panel) { delete panel; }

/* ------------------------------------------------------------------ config */

ps_status ps_config_create(ps_config** out) {
  if (out == nullptr) return fail(PS_ERR_DOMAIN, "ps_config_create: out is NULL");
  *out = new ps_config;
  return PS_OK;
}

#define PS_CONFIG_SETTER(call)                                                       \
  if (config == nullptr) return fail(PS_ERR_DOMAIN, "config is NULL");               \
  return guarded([&] { call; })

ps_status ps_config_set_mode_exponent(ps_config* config, double phi) {
  PS_CONFIG_SETTER(config->cfg.mode = panelseg::DcMode::exponent(phi));
}
ps_status ps_config_set_mode_combined(ps_config* config, double gamma) {
  PS_CONFIG_SETTER(config->cfg.mode = panelseg::DcMode::combined(gamma));
}
ps_status ps_config_set_alpha(ps_config* config, double alpha) {
  PS_CONFIG_SETTER(config->cfg.alpha = alpha);
}
ps_status ps_config_set_boot_reps(ps_config* config, long B) {
  PS_CONFIG_SETTER(config->cfg.boot_reps = B);
}
ps_status ps_config_set_trim(ps_config* config, long d_T) {
  PS_CONFIG_SETTER(config->cfg.trim = d_T);
}
ps_status ps_config_set_depth(ps_config* config, long depth) {
  PS_CONFIG_SETTER(config->cfg.depth = depth);
}
ps_status ps_config_set_seed(ps_config* config, uint64_t seed) {
  PS_CONFIG_SETTER(config->cfg.seed = seed);
}
ps_status ps_config_set_bonferroni(ps_config* config, int enabled) {
  PS_CONFIG_SETTER(config->cfg.bonferroni = enabled != 0);
}
ps_status ps_config_set_threads(ps_config* config, long threads) {
  PS_CONFIG_SETTER(config->cfg.threads = threads);
}

#undef PS_CONFIG_SETTER

void ps_config_free(ps_config* config) { delete config; }

/* --------------------------------------------------------------- detection */

ps_status ps_detect(const ps_panel* panel, const ps_config* config, ps_report** out) {
  if (out == nullptr) return fail(PS_ERR_DOMAIN, "ps_detect: out is NULL");
  if (panel == nullptr) return fail(PS_ERR_DOMAIN, "ps_detect: panel is NULL");
  if (config == nullptr) return fail(PS_ERR_DOMAIN, "ps_detect: config is NULL");
  *out = nullptr;
  return guarded([&] {
    auto* r = new ps_report;
    try {
      r->rep = panelseg::detect(panel->data, config->cfg);
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

long ps_report_count(const ps_report* report) {
  return report == nullptr ? 0 : static_cast<long>(report->rep.change_points.size());
}

long ps_report_surviving(const ps_report* report) {
  return report == nullptr ? 0 : report->rep.surviving_count();
}

ps_status ps_report_change_point(const ps_report* report, long index, long* eta, long* m,
                                 double* stat, double* threshold, int* survived) {
  if (report == nullptr) return fail(PS_ERR_DOMAIN, "ps_report_change_point: report is NULL");
  if (index < 0 || index >= ps_report_count(report)) {
    return fail(PS_ERR_DIMENSION, "ps_report_change_point: index out of range");
  }
  const panelseg::ChangePoint& cp = report->rep.change_points[static_cast<size_t>(index)];
  if (eta != nullptr) *eta = cp.eta;
  if (m != nullptr) *m = cp.m;
  if (stat != nullptr) *stat = cp.stat;
  if (threshold != nullptr) *threshold = cp.threshold;
  if (survived != nullptr) *survived = cp.survived ? 1 : 0;
  return PS_OK;
}

ps_status ps_report_contributors(const ps_report* report, long index, long* buffer,
                                 long capacity, long* written) {
  if (report == nullptr) return fail(PS_ERR_DOMAIN, "ps_report_contributors: report is NULL");
  if (index < 0 || index >= ps_report_count(report)) {
    return fail(PS_ERR_DIMENSION, "ps_report_contributors: index out of range");
  }
  const auto& c = report->rep.change_points[static_cast<size_t>(index)].contributors;
  const long count = static_cast<long>(c.size());
  if (written != nullptr) *written = count;
  if (buffer == nullptr) return PS_OK; /* size query */
  if (capacity < count) {
    return fail(PS_ERR_DIMENSION, "ps_report_contributors: buffer too small");
  }
  for (long i = 0; i < count; ++i) buffer[i] = c[static_cast<size_t>(i)];
  return PS_OK;
}

ps_status ps_report_json(const ps_report* report, char** out) {
  if (report == nullptr) return fail(PS_ERR_DOMAIN, "ps_report_json: report is NULL");
  if (out == nullptr) return fail(PS_ERR_DOMAIN, "ps_report_json: out is NULL");
  *out = nullptr;
  return guarded([&] {
    char* s = dup_string(panelseg::report_to_json(report->rep));
    if (s == nullptr) throw panelseg::InternalError("ps_report_json: allocation failed");
    *out = s;
  });
}

void ps_report_free(ps_report* report) { delete report; }

ps_status ps_bootstrap_threshold(const ps_panel* panel, const ps_config* config,
                                 long window_len, double* quantile, double* stats,
                                 long stats_capacity, long* stats_written) {
  if (panel == nullptr) return fail(PS_ERR_DOMAIN, "ps_bootstrap_threshold: panel is NULL");
  if (config == nullptr) return fail(PS_ERR_DOMAIN, "ps_bootstrap_threshold: config is NULL");
  if (quantile == nullptr) return fail(PS_ERR_DOMAIN, "ps_bootstrap_threshold: quantile is NULL");
  return guarded([&] {
    panelseg::BootstrapThreshold thr =
        panelseg::bootstrap_threshold(panel->data, config->cfg, window_len);
    *quantile = thr.quantile;
    if (stats != nullptr) {
      const long count = static_cast<long>(thr.replicate_stats.size());
      if (stats_capacity < count) {
        throw panelseg::DimensionError("ps_bootstrap_threshold: stats buffer too small");
      }
      for (long i = 0; i < count; ++i) stats[i] = thr.replicate_stats[static_cast<size_t>(i)];
      if (stats_written != nullptr) *stats_written = count;
    } else if (stats_written != nullptr) {
      *stats_written = 0;
    }
  });
}

/* ------------------------------------------------------------- simulation */

ps_status ps_simulate_noise(int model, double rho, long n, long T, uint64_t seed,
                            ps_panel** out) {
  if (out == nullptr) return fail(PS_ERR_DOMAIN, "ps_simulate_noise: out is NULL");
  *out = nullptr;
  return guarded([&] {
    panelseg::NoiseModelSpec spec;
    if (model == 1) {
      spec.model = panelseg::NoiseModelSpec::Model::n1;
      spec.rho = rho;
    } else if (model == 2) {
      spec.model = panelseg::NoiseModelSpec::Model::n2;
      spec.rho_h = rho;
    } else {
      throw panelseg::DomainError("ps_simulate_noise: model must be 1 or 2");
    }
    spec.n = n;
    spec.T = T;
    auto* p = new ps_panel;
    try {
      p->data = panelseg::gen_noise(spec, seed);
    } catch (...) {
      delete p;
      throw;
    }
    *out = p;
  });
}

/* ------------------------------------------------------------ experiments */

ps_status ps_experiment_parse(const char* plan_text, ps_experiment** out) {
  if (out == nullptr) return fail(PS_ERR_DOMAIN, "ps_experiment_parse: out is NULL");
  if (plan_text == nullptr) return fail(PS_ERR_DOMAIN, "ps_experiment_parse: text is NULL");
  *out = nullptr;
  return guarded([&] {
    auto* e = new ps_experiment;
    try {
      e->plan = panelseg::parse_plan(plan_text);
    } catch (...) {
      delete e;
      throw;
    }
    *out = e;
  });
}

ps_status ps_experiment_preset(const char* name, ps_experiment** out) {
  if (out == nullptr) return fail(PS_ERR_DOMAIN, "ps_experiment_preset: out is NULL");
  if (name == nullptr) return fail(PS_ERR_DOMAIN, "ps_experiment_preset: name is NULL");
  *out = nullptr;
  return guarded([&] {
    auto* e = new ps_experiment;
    try {
      e->plan = panelseg::preset_plan(name);
    } catch (...) {
      delete e;
      throw;
    }
    *out = e;
  });
}

ps_status ps_experiment_set_reps(ps_experiment* exp, long reps) {
  if (exp == nullptr) return fail(PS_ERR_DOMAIN, "ps_experiment_set_reps: exp is NULL");
  exp->plan.reps = reps;
  return PS_OK;
}

ps_status ps_experiment_set_seed(ps_experiment* exp, uint64_t seed) {
  if (exp == nullptr) return fail(PS_ERR_DOMAIN, "ps_experiment_set_seed: exp is NULL");
  exp->plan.seed = seed;
  return PS_OK;
}

ps_status ps_experiment_set_threads(ps_experiment* exp, long threads) {
  if (exp == nullptr) return fail(PS_ERR_DOMAIN, "ps_experiment_set_threads: exp is NULL");
  exp->plan.threads = threads;
  return PS_OK;
}

ps_status ps_experiment_run(const ps_experiment* exp, char** csv_out, char** json_out) {
  if (exp == nullptr) return fail(PS_ERR_DOMAIN, "ps_experiment_run: exp is NULL");
  if (csv_out != nullptr) *csv_out = nullptr;
  if (json_out != nullptr) *json_out = nullptr;
  return guarded([&] {
    panelseg::ExperimentResult result = panelseg::run_experiment(exp->plan);
    if (csv_out != nullptr) {
      *csv_out = dup_string(panelseg::metrics_to_csv(result));
      if (*csv_out == nullptr) throw panelseg::InternalError("ps_experiment_run: allocation failed");
    }
    if (json_out != nullptr) {
      *json_out = dup_string(panelseg::metrics_to_json(result));
      if (*json_out == nullptr) {
        throw panelseg::InternalError("ps_experiment_run: allocation failed");
      }
    }
  });
}

void ps_experiment_free(ps_experiment* exp) { delete exp; }

}  // extern "C"
