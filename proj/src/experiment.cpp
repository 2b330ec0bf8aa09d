#include "panelseg/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "panelseg/bootstrap.hpp"
#include "panelseg/cusum.hpp"
#include "panelseg/dcbs.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/parallel.hpp"
#include "panelseg/reference_detectors.hpp"
#include "panelseg/rng.hpp"
#include "panelseg/scaling.hpp"

namespace panelseg {

namespace {

constexpr long kJirakBlockLen = 4;

// ------------------------------------------------------------ plan parsing

std::string trim_ws(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void plan_fail(long line, const std::string& msg) {
  throw ParseError("plan line " + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& tok, long line, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || std::isnan(v)) {
    plan_fail(line, "cannot parse " + what + " from '" + tok + "'");
  }
  return v;
}

long parse_integer(const std::string& tok, long line, const std::string& what) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') {
    plan_fail(line, "cannot parse " + what + " from '" + tok + "'");
  }
  return v;
}

// eta/m tokens: plain number, "<coef><letter>", "sqrt<letter>", "log<letter>";
// the letter is T for times and n for cardinalities.
long parse_extent(const std::string& tok, long dim, char letter, long line,
                  const std::string& what) {
  const std::string low = lower(tok);
  const std::string suffix(1, static_cast<char>(std::tolower(letter)));
  if (low == "sqrt" + suffix) return static_cast<long>(std::floor(std::sqrt(static_cast<double>(dim))));
  if (low == "log" + suffix) return static_cast<long>(std::floor(std::log(static_cast<double>(dim))));
  if (!low.empty() && low.back() == suffix[0]) {
    const std::string head = tok.substr(0, tok.size() - 1);
    const double coef = head.empty() ? 1.0 : parse_real(head, line, what);
    return static_cast<long>(std::floor(coef * static_cast<double>(dim)));
  }
  const double v = parse_real(tok, line, what);
  return static_cast<long>(std::floor(v));
}

std::vector<std::string> split_tokens(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim_ws(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim_ws(cur));
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const std::string& t) { return t.empty(); }),
            out.end());
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

DetectorSpec parse_detector(const std::string& tok, long line) {
  DetectorSpec d;
  const std::string low = lower(tok);
  if (low == "sbs") {
    d.kind = DetectorSpec::Kind::sbs;
    d.label = "sbs";
    return d;
  }
  if (low == "jirak") {
    d.kind = DetectorSpec::Kind::jirak;
    d.label = "jirak";
    return d;
  }
  if (low == "eh") {
    d.kind = DetectorSpec::Kind::eh;
    d.label = "eh";
    return d;
  }
  if (low.rfind("dc:", 0) == 0) {
    d.kind = DetectorSpec::Kind::dc;
    const std::string rest = low.substr(3);
    if (rest.rfind("phi=", 0) == 0) {
      const double phi = parse_real(rest.substr(4), line, "phi");
      d.mode = DcMode::exponent(phi);
      d.label = "dc_phi" + format_number(phi);
      return d;
    }
    if (rest == "combined") {
      d.mode = DcMode::combined();
      d.label = "dc_combined";
      return d;
    }
    if (rest.rfind("combined:gamma=", 0) == 0) {
      const double g = parse_real(rest.substr(15), line, "gamma");
      d.mode = DcMode::combined(g);
      d.label = "dc_combined_g" + format_number(g);
      return d;
    }
  }
  plan_fail(line, "unknown detector '" + tok +
                      "' (expected dc:phi=<v>, dc:combined[:gamma=<v>], sbs, jirak, eh)");
}

struct PlanLine {
  long number = 0;
  std::string key;
  std::string value;
};

}  // namespace

ExperimentPlan parse_plan(const std::string& text) {
  std::vector<PlanLine> lines;
  {
    std::istringstream in(text);
    std::string raw;
    long number = 0;
    while (std::getline(in, raw)) {
      ++number;
      const size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      raw = trim_ws(raw);
      if (raw.empty()) continue;
      const size_t eq = raw.find('=');
      if (eq == std::string::npos) plan_fail(number, "expected key = value");
      PlanLine pl;
      pl.number = number;
      pl.key = lower(trim_ws(raw.substr(0, eq)));
      pl.value = trim_ws(raw.substr(eq + 1));
      if (pl.key.empty()) plan_fail(number, "empty key");
      if (pl.value.empty()) plan_fail(number, "empty value for '" + pl.key + "'");
      lines.push_back(std::move(pl));
    }
  }

  ExperimentPlan plan;
  // model first: the meaning of `rho` and of cp tokens depends on it.
  for (const PlanLine& pl : lines) {
    if (pl.key != "model") continue;
    const std::string v = lower(pl.value);
    if (v == "n1") {
      plan.noise.model = NoiseModelSpec::Model::n1;
    } else if (v == "n2") {
      plan.noise.model = NoiseModelSpec::Model::n2;
    } else {
      plan_fail(pl.number, "unknown model '" + pl.value + "' (expected n1 or n2)");
    }
  }
  for (const PlanLine& pl : lines) {
    if (pl.key == "n") plan.noise.n = parse_integer(pl.value, pl.number, "n");
    else if (pl.key == "t") plan.noise.T = parse_integer(pl.value, pl.number, "T");
  }

  bool saw_detectors = false;
  for (const PlanLine& pl : lines) {
    if (pl.key == "model" || pl.key == "n" || pl.key == "t") {
      continue;
    } else if (pl.key == "mode") {
      const std::string v = lower(pl.value);
      if (v == "null") plan.mode = ExperimentPlan::Mode::null_size;
      else if (v == "single") plan.mode = ExperimentPlan::Mode::single;
      else if (v == "multi") plan.mode = ExperimentPlan::Mode::multi;
      else plan_fail(pl.number, "unknown mode '" + pl.value + "' (expected null, single, multi)");
    } else if (pl.key == "rho") {
      const double v = parse_real(pl.value, pl.number, "rho");
      if (plan.noise.model == NoiseModelSpec::Model::n1) plan.noise.rho = v;
      else plan.noise.rho_h = v;
    } else if (pl.key == "rho_h") {
      plan.noise.rho_h = parse_real(pl.value, pl.number, "rho_h");
    } else if (pl.key == "burn_in") {
      plan.noise.burn_in = parse_integer(pl.value, pl.number, "burn_in");
    } else if (pl.key == "noise_scale") {
      plan.noise.noise_scale = parse_real(pl.value, pl.number, "noise_scale");
    } else if (pl.key == "jitter") {
      plan.signal.jitter = parse_real(pl.value, pl.number, "jitter");
    } else if (pl.key == "reps") {
      plan.reps = parse_integer(pl.value, pl.number, "reps");
    } else if (pl.key == "alpha") {
      plan.alpha = parse_real(pl.value, pl.number, "alpha");
    } else if (pl.key == "boot_reps") {
      plan.boot_reps = parse_integer(pl.value, pl.number, "boot_reps");
    } else if (pl.key == "trim") {
      plan.trim = parse_integer(pl.value, pl.number, "trim");
    } else if (pl.key == "depth") {
      plan.depth = parse_integer(pl.value, pl.number, "depth");
    } else if (pl.key == "seed") {
      plan.seed = static_cast<std::uint64_t>(parse_integer(pl.value, pl.number, "seed"));
    } else if (pl.key == "threads") {
      plan.threads = parse_integer(pl.value, pl.number, "threads");
    } else if (pl.key == "detectors") {
      saw_detectors = true;
      plan.detectors.clear();
      for (const std::string& tok : split_tokens(pl.value, ',')) {
        plan.detectors.push_back(parse_detector(tok, pl.number));
      }
      if (plan.detectors.empty()) plan_fail(pl.number, "empty detector list");
    } else if (pl.key == "cp") {
      if (plan.noise.n < 1 || plan.noise.T < 1) {
        plan_fail(pl.number, "cp lines require n and T to be set");
      }
      const std::vector<std::string> toks = split_tokens(pl.value, ' ');
      if (toks.size() != 3) plan_fail(pl.number, "cp needs three tokens: eta m delta");
      ChangeSpec cp;
      cp.eta = parse_extent(toks[0], plan.noise.T, 'T', pl.number, "eta");
      cp.m = parse_extent(toks[1], plan.noise.n, 'n', pl.number, "m");
      cp.delta = parse_real(toks[2], pl.number, "delta");
      plan.signal.change_points.push_back(cp);
    } else {
      plan_fail(pl.number, "unknown key '" + pl.key + "'");
    }
  }
  if (!saw_detectors && plan.detectors.empty()) {
    plan.detectors.push_back(parse_detector("dc:combined", 0));
  }
  return plan;
}

ExperimentPlan preset_plan(const std::string& name) {
  auto build = [](const std::string& text) { return parse_plan(text); };
  if (name == "type1-n1") {
    return build(
        "mode = null\nmodel = n1\nrho = 0.2\nn = 50\nT = 100\nreps = 100\n"
        "detectors = dc:phi=0, dc:phi=0.5, dc:combined\n");
  }
  if (name == "power-single") {
    return build(
        "mode = single\nmodel = n1\nrho = 0.2\nn = 100\nT = 100\nreps = 50\n"
        "detectors = dc:phi=0, dc:phi=0.5, dc:combined, sbs, jirak, eh\n"
        "cp = 0.5T 0.4n 0.1\n");
  }
  if (name == "multi") {
    // Break magnitudes keep delta * sqrt(affected count) ~ 0.69 per break, so
    // the three breaks stay comparably detectable at this cross-section size.
    return build(
        "mode = multi\nmodel = n1\nrho = 0.2\nn = 100\nT = 250\nreps = 50\n"
        "detectors = dc:combined, dc:phi=0\n"
        "cp = 0.3T 0.75n 0.079\ncp = 0.6T 0.25n 0.138\ncp = 0.8T 0.1n 0.221\n");
  }
  if (name == "n2-strong") {
    return build(
        "mode = single\nmodel = n2\nrho = 0.9\nn = 100\nT = 100\nreps = 50\n"
        "detectors = dc:phi=0, dc:phi=0.5\n"
        "cp = 0.5T sqrtn 0.1\n");
  }
  throw ConfigError("unknown preset '" + name +
                    "' (expected type1-n1, power-single, multi, n2-strong)");
}

// --------------------------------------------------------------- execution

namespace {

void validate_plan(const ExperimentPlan& plan, size_t custom_count) {
  if (plan.reps < 1) throw ConfigError("experiment: need reps >= 1");
  if (!(plan.alpha > 0.0 && plan.alpha < 1.0)) {
    throw ConfigError("experiment: alpha outside (0, 1)");
  }
  if (plan.boot_reps < 1) throw ConfigError("experiment: need boot_reps >= 1");
  if (plan.trim < 0) throw ConfigError("experiment: trim must be >= 0");
  if (plan.detectors.empty() && custom_count == 0) {
    throw ConfigError("experiment: no detectors");
  }
  if (plan.mode == ExperimentPlan::Mode::null_size && !plan.signal.change_points.empty()) {
    throw ConfigError("experiment: null mode takes no change points");
  }
  if (plan.mode == ExperimentPlan::Mode::single && plan.signal.change_points.size() != 1) {
    throw ConfigError("experiment: single mode needs exactly one change point");
  }
  if (plan.mode == ExperimentPlan::Mode::multi) {
    if (plan.signal.change_points.empty()) {
      throw ConfigError("experiment: multi mode needs at least one change point");
    }
    if (custom_count > 0) throw ConfigError("experiment: multi mode takes no custom detectors");
    for (const DetectorSpec& d : plan.detectors) {
      if (d.kind != DetectorSpec::Kind::dc) {
        throw ConfigError("experiment: multi mode supports dc detectors only");
      }
    }
  }
  std::vector<std::string> labels;
  for (const DetectorSpec& d : plan.detectors) labels.push_back(d.label);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw ConfigError("experiment: duplicate detector labels");
  }
}

long quantile_rank(double alpha, long count) {
  const long rank = static_cast<long>(std::ceil((1.0 - alpha) * static_cast<double>(count)));
  return std::clamp<long>(rank, 1, count);
}

double quantile_of(std::vector<double> values, double alpha) {
  std::sort(values.begin(), values.end());
  const long rank = quantile_rank(alpha, static_cast<long>(values.size()));
  return values[static_cast<size_t>(rank - 1)];
}

struct Prepared {
  ScalingEstimate scaling;
  std::vector<double> sigma;
  ScaledPanel scaled;
  PanelData e_std;
};

Prepared prepare_panel(const PanelData& panel, long depth) {
  Prepared p;
  p.scaling = estimate_scales(panel, depth);
  p.sigma.resize(static_cast<size_t>(panel.n));
  for (long j = 0; j < panel.n; ++j) {
    p.sigma[static_cast<size_t>(j)] = std::sqrt(p.scaling.sigma2[static_cast<size_t>(j)]);
  }
  p.scaled = standardize(panel, p.sigma);
  p.e_std = PanelData(panel.n, panel.T);
  for (long j = 1; j <= panel.n; ++j) {
    const double inv = 1.0 / p.sigma[static_cast<size_t>(j - 1)];
    for (long t = 1; t <= panel.T; ++t) p.e_std.at(j, t) = p.scaling.residuals.at(j, t) * inv;
  }
  return p;
}

std::vector<long> top_contributors(const CusumScanResult& scan) {
  std::vector<long> c(scan.order.begin(), scan.order.begin() + scan.m_hat);
  std::sort(c.begin(), c.end());
  return c;
}

// Oracle sparsification threshold for the thresholded-sum detector: the
// (1-alpha)-quantile of the noise-only max |CUSUM| under the plan's own DGP.
double compute_sbs_pi(const ExperimentPlan& plan, long depth, int threads) {
  const long B = plan.boot_reps;
  std::vector<ScaledPanel> panels(static_cast<size_t>(B));
  parallel_for(B, threads, [&](long l) {
    const std::uint64_t s = mix_seed(plan.seed, {stream::sbs_oracle, static_cast<std::uint64_t>(l)});
    PanelData noise = gen_noise(plan.noise, s);
    Prepared p = prepare_panel(noise, depth);
    panels[static_cast<size_t>(l)] = std::move(p.scaled);
  });
  return sbs_oracle_threshold(panels, plan.alpha);
}

struct RepRow {
  double stat = 0.0;
  bool rejected = false;
  long eta = 0;
  std::vector<long> contributors;
  bool has_contributors = false;
  bool has_location = false;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan,
                                const std::vector<CustomDetector>& custom) {
  validate_plan(plan, custom.size());
  const long n = plan.noise.n;
  const long T = plan.noise.T;
  const long R = plan.reps;
  const int threads = resolve_threads(plan.threads);
  // Residual tree depth: segmentation needs the depth-L_T tree so that means
  // between multiple breaks are removed before variance estimation; the
  // full-window tests use the one-split residuals.
  const long depth =
      plan.depth > 0
          ? plan.depth
          : (plan.mode == ExperimentPlan::Mode::multi ? default_tree_depth(T) : 1);

  ExperimentResult result;
  result.plan = plan;

  if (plan.mode == ExperimentPlan::Mode::multi) {
    // Full segmentation pipeline per replication; shared bootstrap replicates
    // across the dc modes.
    std::vector<DcMode> modes;
    for (const DetectorSpec& d : plan.detectors) modes.push_back(d.mode);
    const size_t D = modes.size();
    const size_t NC = plan.signal.change_points.size();
    std::vector<std::map<long, long>> hist(D);
    std::vector<std::vector<long>> eta_hits(D, std::vector<long>(NC, 0));
    const double loc_tol = std::log(static_cast<double>(T));

    for (long i = 0; i < R; ++i) {
      const std::uint64_t rep_seed =
          mix_seed(plan.seed, {stream::alt_rep, static_cast<std::uint64_t>(i)});
      PanelData panel = gen_noise(plan.noise, rep_seed);
      SignalTruth truth;
      PanelData signal = gen_signal(plan.signal, n, T, rep_seed, &truth);
      for (size_t k = 0; k < panel.values.size(); ++k) panel.values[k] += signal.values[k];

      const double alpha_eff =
          plan.alpha / (std::pow(2.0, static_cast<double>(depth)) - 1.0);
      Prepared p = prepare_panel(panel, depth);
      BootstrapEngine engine(p.e_std, modes, plan.boot_reps, alpha_eff, plan.trim, rep_seed,
                             threads);
      for (size_t d = 0; d < D; ++d) {
        ThresholdFn fn = [&engine, d](long len) { return engine.threshold(len, d).quantile; };
        ChangePointReport rep = dcbs_run(p.scaled, modes[d], fn, plan.trim);
        rep = post_process(p.scaled, std::move(rep), modes[d], fn, plan.trim);
        std::vector<long> etas;
        for (const ChangePoint& cp : rep.change_points) {
          if (cp.survived) etas.push_back(cp.eta);
        }
        hist[d][static_cast<long>(etas.size())] += 1;
        for (size_t r = 0; r < NC; ++r) {
          const long true_eta = truth.changes[r].eta;
          for (long est : etas) {
            if (std::abs(static_cast<double>(est - true_eta)) < loc_tol) {
              eta_hits[d][r] += 1;
              break;
            }
          }
        }
      }
    }
    for (size_t d = 0; d < D; ++d) {
      DetectorMetrics row;
      row.label = plan.detectors[d].label;
      row.nhat_histogram = hist[d];
      for (size_t r = 0; r < NC; ++r) {
        row.eta_accuracy.push_back(static_cast<double>(eta_hits[d][r]) /
                                   static_cast<double>(R));
      }
      result.rows.push_back(std::move(row));
    }
    return result;
  }

  // ---- null / single protocols: full-window statistics per replication.
  std::vector<DcMode> dc_modes;
  std::vector<size_t> dc_rows;
  bool has_sbs = false, has_jirak = false, has_eh = false;
  size_t sbs_row = 0, jirak_row = 0, eh_row = 0;
  const size_t D = plan.detectors.size() + custom.size();
  for (size_t d = 0; d < plan.detectors.size(); ++d) {
    switch (plan.detectors[d].kind) {
      case DetectorSpec::Kind::dc:
        dc_modes.push_back(plan.detectors[d].mode);
        dc_rows.push_back(d);
        break;
      case DetectorSpec::Kind::sbs:
        has_sbs = true;
        sbs_row = d;
        break;
      case DetectorSpec::Kind::jirak:
        has_jirak = true;
        jirak_row = d;
        break;
      case DetectorSpec::Kind::eh:
        has_eh = true;
        eh_row = d;
        break;
    }
  }

  const double pi_T = has_sbs ? compute_sbs_pi(plan, depth, threads) : 0.0;

  auto run_rep = [&](std::uint64_t rep_seed, bool alt, SignalTruth* truth_out) {
    std::vector<RepRow> rows(D);
    PanelData panel = gen_noise(plan.noise, rep_seed);
    if (alt) {
      SignalTruth truth;
      PanelData signal = gen_signal(plan.signal, n, T, rep_seed, &truth);
      for (size_t k = 0; k < panel.values.size(); ++k) panel.values[k] += signal.values[k];
      if (truth_out != nullptr) *truth_out = std::move(truth);
    }
    const bool need_prepared = !dc_modes.empty() || has_sbs || has_jirak || has_eh;
    Prepared p;
    if (need_prepared) p = prepare_panel(panel, depth);

    if (!dc_modes.empty()) {
      BootstrapEngine engine(p.e_std, dc_modes, plan.boot_reps, plan.alpha, plan.trim,
                             rep_seed, threads);
      const std::vector<BootstrapThreshold>& thr = engine.thresholds(T);
      for (size_t k = 0; k < dc_modes.size(); ++k) {
        CusumScanResult scan = dc_scan(p.scaled, 1, T, dc_modes[k], plan.trim);
        RepRow& row = rows[dc_rows[k]];
        row.stat = scan.stat;
        row.rejected = scan.stat > thr[k].quantile;
        row.eta = scan.b_hat;
        row.contributors = top_contributors(scan);
        row.has_contributors = true;
        row.has_location = true;
      }
    }
    if (has_sbs) {
      StatLocation r = sbs_statistic(p.scaled, 1, T, pi_T, plan.trim);
      RepRow& row = rows[sbs_row];
      row.stat = r.stat;
      row.rejected = r.stat > 0.0;
      row.eta = r.b_hat;
      row.has_location = true;
      if (r.b_hat > 0) {
        OrderedCusums oc = ordered_abs_cusums(p.scaled, 1, r.b_hat, T);
        for (size_t i = 0; i < oc.sorted_abs.size(); ++i) {
          if (oc.sorted_abs[i] > pi_T) row.contributors.push_back(oc.order[i]);
        }
        std::sort(row.contributors.begin(), row.contributors.end());
        row.has_contributors = true;
      }
    }
    if (has_jirak) {
      StatLocation r = jirak_statistic(p.scaled, plan.trim);
      const double thr = jirak_block_threshold(p.e_std, plan.alpha, plan.boot_reps, rep_seed,
                                               kJirakBlockLen, plan.trim);
      RepRow& row = rows[jirak_row];
      row.stat = r.stat;
      row.rejected = r.stat > thr;
      row.eta = r.b_hat;
      row.has_location = true;
    }
    if (has_eh) {
      EhResult r = eh_statistics(p.scaled, plan.alpha, plan.trim);
      RepRow& row = rows[eh_row];
      row.stat = std::max(r.linear, r.scan);
      row.rejected = r.combined_reject;
    }
    for (size_t c = 0; c < custom.size(); ++c) {
      SingleOutcome out = custom[c].fn(panel, rep_seed);
      RepRow& row = rows[plan.detectors.size() + c];
      row.stat = out.stat;
      row.rejected = out.rejected;
      row.eta = out.eta;
      row.contributors = out.contributors;
      row.has_contributors = !out.contributors.empty();
      row.has_location = out.eta > 0;
    }
    return rows;
  };

  // Null runs: always needed (type I error, size-correction critical values).
  std::vector<std::vector<double>> null_stats(D, std::vector<double>(R));
  std::vector<long> null_rejects(D, 0);
  for (long i = 0; i < R; ++i) {
    const std::uint64_t rep_seed =
        mix_seed(plan.seed, {stream::null_rep, static_cast<std::uint64_t>(i)});
    std::vector<RepRow> rows = run_rep(rep_seed, false, nullptr);
    for (size_t d = 0; d < D; ++d) {
      null_stats[d][static_cast<size_t>(i)] = rows[d].stat;
      if (rows[d].rejected) null_rejects[d] += 1;
    }
  }

  std::vector<double> null_quantiles(D);
  for (size_t d = 0; d < D; ++d) null_quantiles[d] = quantile_of(null_stats[d], plan.alpha);

  const bool alt = plan.mode == ExperimentPlan::Mode::single;
  std::vector<long> alt_reject_own(D, 0), alt_reject_corr(D, 0), alt_located(D, 0);
  std::vector<double> rand_sum(D, 0.0);
  std::vector<char> any_contributors(D, 0), any_location(D, 0);
  if (alt) {
    const double loc_tol = std::log(static_cast<double>(T));
    for (long i = 0; i < R; ++i) {
      const std::uint64_t rep_seed =
          mix_seed(plan.seed, {stream::alt_rep, static_cast<std::uint64_t>(i)});
      SignalTruth truth;
      std::vector<RepRow> rows = run_rep(rep_seed, true, &truth);
      const RealizedChange& change = truth.changes.front();
      for (size_t d = 0; d < D; ++d) {
        const RepRow& row = rows[d];
        if (row.rejected) alt_reject_own[d] += 1;
        const bool corr = row.stat > null_quantiles[d];
        if (corr) alt_reject_corr[d] += 1;
        if (row.has_location) any_location[d] = 1;
        if (row.has_contributors) any_contributors[d] = 1;
        if (corr && row.has_location &&
            std::abs(static_cast<double>(row.eta - change.eta)) < loc_tol) {
          alt_located[d] += 1;
        }
        if (row.has_contributors && corr) {
          rand_sum[d] += rand_index(change.members, row.contributors, n);
        }
      }
    }
  }

  for (size_t d = 0; d < D; ++d) {
    DetectorMetrics row;
    row.label = d < plan.detectors.size() ? plan.detectors[d].label
                                          : custom[d - plan.detectors.size()].label;
    row.type1 = static_cast<double>(null_rejects[d]) / static_cast<double>(R);
    row.null_quantile = null_quantiles[d];
    if (alt) {
      row.power_raw = static_cast<double>(alt_reject_own[d]) / static_cast<double>(R);
      row.size_corrected_power =
          static_cast<double>(alt_reject_corr[d]) / static_cast<double>(R);
      if (any_location[d]) {
        row.location_accuracy = static_cast<double>(alt_located[d]) / static_cast<double>(R);
      }
      if (any_contributors[d]) {
        row.rand_index = rand_sum[d] / static_cast<double>(R);
      }
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

// --------------------------------------------------------------- reporting

namespace {

std::string cell(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string metrics_to_csv(const ExperimentResult& result) {
  std::string out;
  if (result.plan.mode == ExperimentPlan::Mode::multi) {
    long max_nhat = 5;
    for (const DetectorMetrics& row : result.rows) {
      for (const auto& [k, v] : row.nhat_histogram) max_nhat = std::max(max_nhat, k);
    }
    out += "detector";
    for (long k = 0; k <= max_nhat; ++k) out += ",nhat" + std::to_string(k);
    for (size_t r = 0; r < result.plan.signal.change_points.size(); ++r) {
      out += ",eta" + std::to_string(r + 1) + "_accuracy";
    }
    out += "\n";
    for (const DetectorMetrics& row : result.rows) {
      out += row.label;
      for (long k = 0; k <= max_nhat; ++k) {
        const auto it = row.nhat_histogram.find(k);
        out += "," + std::to_string(it == row.nhat_histogram.end() ? 0L : it->second);
      }
      for (double a : row.eta_accuracy) out += "," + cell(a);
      out += "\n";
    }
    return out;
  }
  out += "detector,type1,power_raw,size_corrected_power,null_quantile,location_accuracy,rand_index\n";
  for (const DetectorMetrics& row : result.rows) {
    out += row.label + "," + cell(row.type1) + "," + cell(row.power_raw) + "," +
           cell(row.size_corrected_power) + "," + cell(row.null_quantile) + "," +
           cell(row.location_accuracy) + "," + cell(row.rand_index) + "\n";
  }
  return out;
}

std::string metrics_to_json(const ExperimentResult& result) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json j;
  const ExperimentPlan& plan = result.plan;
  ordered_json pj;
  switch (plan.mode) {
    case ExperimentPlan::Mode::null_size: pj["mode"] = "null"; break;
    case ExperimentPlan::Mode::single: pj["mode"] = "single"; break;
    case ExperimentPlan::Mode::multi: pj["mode"] = "multi"; break;
  }
  pj["model"] = plan.noise.model == NoiseModelSpec::Model::n1 ? "n1" : "n2";
  if (plan.noise.model == NoiseModelSpec::Model::n1) pj["rho"] = plan.noise.rho;
  else pj["rho_h"] = plan.noise.rho_h;
  pj["n"] = plan.noise.n;
  pj["T"] = plan.noise.T;
  pj["reps"] = plan.reps;
  pj["alpha"] = plan.alpha;
  pj["boot_reps"] = plan.boot_reps;
  pj["trim"] = plan.trim;
  pj["depth"] = plan.depth;
  pj["seed"] = plan.seed;
  if (!plan.signal.change_points.empty()) {
    ordered_json cps = ordered_json::array();
    for (const ChangeSpec& cp : plan.signal.change_points) {
      ordered_json c;
      c["eta"] = cp.eta;
      c["m"] = cp.m;
      c["delta"] = cp.delta;
      cps.push_back(std::move(c));
    }
    pj["change_points"] = std::move(cps);
    pj["jitter"] = plan.signal.jitter;
  }
  j["plan"] = std::move(pj);

  ordered_json rows = ordered_json::array();
  for (const DetectorMetrics& row : result.rows) {
    ordered_json r;
    r["detector"] = row.label;
    auto put = [&r](const char* key, double v) {
      if (!std::isnan(v)) r[key] = v;
    };
    put("type1", row.type1);
    put("power_raw", row.power_raw);
    put("size_corrected_power", row.size_corrected_power);
    put("null_quantile", row.null_quantile);
    put("location_accuracy", row.location_accuracy);
    put("rand_index", row.rand_index);
    if (!row.nhat_histogram.empty()) {
      ordered_json h;
      for (const auto& [k, v] : row.nhat_histogram) h[std::to_string(k)] = v;
      r["nhat_histogram"] = std::move(h);
    }
    if (!row.eta_accuracy.empty()) r["eta_accuracy"] = row.eta_accuracy;
    rows.push_back(std::move(r));
  }
  j["detectors"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace panelseg
