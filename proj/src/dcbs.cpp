// Double CUSUM binary segmentation driver, post-processing and the full
// detection pipeline.

#include "panelseg/dcbs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include <nlohmann/json.hpp>

#include "panelseg/bootstrap.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/parallel.hpp"
#include "panelseg/scaling.hpp"
#include "panelseg/version.hpp"

namespace panelseg {

namespace {

double threshold_for(const ThresholdFn& fn, long len, long level, long position, long s, long e) {
  try {
    return fn(len);
  } catch (const Error& err) {
    throw Error(err.code(), "threshold for node (" + std::to_string(level) + "," +
                                std::to_string(position) + ") window [" + std::to_string(s) +
                                ", " + std::to_string(e) + "]: " + err.what());
  }
}

std::vector<long> contributors_of(const CusumScanResult& scan) {
  std::vector<long> c(scan.order.begin(), scan.order.begin() + scan.m_hat);
  std::sort(c.begin(), c.end());
  return c;
}

}  // namespace

ChangePointReport dcbs_run(const ScaledPanel& panel, const DcMode& mode,
                           const ThresholdFn& threshold_fn, long d_T) {
  if (d_T < 0) throw DomainError("dcbs_run: trim must be >= 0");
  if (panel.T < 2 * d_T + 4) {
    throw DimensionError("dcbs_run: need T >= 2 d_T + 4 = " + std::to_string(2 * d_T + 4) +
                         ", got T = " + std::to_string(panel.T));
  }
  ChangePointReport report;
  report.n = panel.n;
  report.T = panel.T;
  report.version = PANELSEG_VERSION;

  report.tree = SegmentNode{};
  report.tree.level = 1;
  report.tree.position = 1;
  report.tree.s = 1;
  report.tree.e = panel.T;

  // Breadth-first exploration; each node is scanned once.
  std::deque<SegmentNode*> queue{&report.tree};
  while (!queue.empty()) {
    SegmentNode* node = queue.front();
    queue.pop_front();
    if (node->e - node->s + 1 < 2 * d_T + 4) {
      node->verdict = SegmentNode::Verdict::too_short;
      continue;
    }
    CusumScanResult scan = dc_scan(panel, node->s, node->e, mode, d_T);
    const long len = node->e - node->s + 1;
    const double thr =
        threshold_for(threshold_fn, len, node->level, node->position, node->s, node->e);
    node->stat = scan.stat;
    node->threshold = thr;
    if (scan.stat > thr) {
      node->verdict = SegmentNode::Verdict::split;
      node->eta = scan.b_hat;
      node->m = scan.m_hat;

      ChangePoint cp;
      cp.eta = scan.b_hat;
      cp.m = scan.m_hat;
      cp.contributors = contributors_of(scan);
      cp.stat = scan.stat;
      cp.threshold = thr;
      report.change_points.push_back(std::move(cp));

      node->children.resize(2);
      node->children[0].level = node->level + 1;
      node->children[0].position = 2 * node->position - 1;
      node->children[0].s = node->s;
      node->children[0].e = scan.b_hat;
      node->children[1].level = node->level + 1;
      node->children[1].position = 2 * node->position;
      node->children[1].s = scan.b_hat + 1;
      node->children[1].e = node->e;
      queue.push_back(&node->children[0]);
      queue.push_back(&node->children[1]);
    } else {
      node->verdict = SegmentNode::Verdict::stop;
    }
  }

  std::sort(report.change_points.begin(), report.change_points.end(),
            [](const ChangePoint& a, const ChangePoint& b) { return a.eta < b.eta; });
  return report;
}

ChangePointReport post_process(const ScaledPanel& panel, ChangePointReport report,
                               const DcMode& mode, const ThresholdFn& threshold_fn, long d_T) {
  const long T = panel.T;
  const long N = static_cast<long>(report.change_points.size());
  // Neighbour gaps always use the full recorded list (conventions eta_0 = 0,
  // eta_{N+1} = T) so a second pass recomputes identical windows.
  for (long r = 0; r < N; ++r) {
    ChangePoint& cp = report.change_points[static_cast<size_t>(r)];
    const long prev = r > 0 ? report.change_points[static_cast<size_t>(r - 1)].eta : 0;
    const long next = r + 1 < N ? report.change_points[static_cast<size_t>(r + 1)].eta : T;
    long d_r = std::min(cp.eta - prev, next - cp.eta) / 2;
    if (d_r < d_T + 2) d_r = d_T + 2;
    long lo = cp.eta - d_r;
    long hi = cp.eta + d_r;
    if (lo < 1) {
      hi = std::min<long>(T, hi + (1 - lo));
      lo = 1;
    }
    if (hi > T) {
      lo = std::max<long>(1, lo - (hi - T));
      hi = T;
    }
    CusumScanResult scan = dc_scan(panel, lo, hi, mode, d_T);
    const double thr = threshold_for(threshold_fn, hi - lo + 1, 0, r + 1, lo, hi);
    cp.survived = scan.stat > thr;
  }
  return report;
}

ChangePointReport detect(const PanelData& panel, const DetectorConfig& config) {
  validate(config);
  const long L = config.depth > 0 ? config.depth : default_tree_depth(panel.T);
  const double alpha_eff =
      config.bonferroni ? config.alpha / (std::pow(2.0, static_cast<double>(L)) - 1.0)
                        : config.alpha;

  ScalingEstimate scaling = estimate_scales(panel, L);
  std::vector<double> sigma(static_cast<size_t>(panel.n));
  for (long j = 0; j < panel.n; ++j) sigma[static_cast<size_t>(j)] = std::sqrt(scaling.sigma2[static_cast<size_t>(j)]);
  ScaledPanel scaled = standardize(panel, sigma);

  PanelData e_std(panel.n, panel.T);
  for (long j = 1; j <= panel.n; ++j) {
    const double inv = 1.0 / sigma[static_cast<size_t>(j - 1)];
    for (long t = 1; t <= panel.T; ++t) e_std.at(j, t) = scaling.residuals.at(j, t) * inv;
  }
  BootstrapEngine engine(e_std, {config.mode}, config.boot_reps, alpha_eff, config.trim,
                         config.seed, resolve_threads(config.threads));
  ThresholdFn threshold_fn = [&engine](long len) { return engine.threshold(len).quantile; };

  ChangePointReport report = dcbs_run(scaled, config.mode, threshold_fn, config.trim);
  report = post_process(scaled, std::move(report), config.mode, threshold_fn, config.trim);
  report.config = config;
  report.depth = L;
  report.alpha_effective = alpha_eff;
  report.gamma =
      config.mode.kind == DcMode::Kind::combined ? resolve_gamma(config.mode, panel.n) : 0.0;
  return report;
}

// ----------------------------------------------------------------- reporting

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json node_to_json(const SegmentNode& node) {
  ordered_json j;
  j["level"] = node.level;
  j["position"] = node.position;
  j["s"] = node.s;
  j["e"] = node.e;
  switch (node.verdict) {
    case SegmentNode::Verdict::split:
      j["verdict"] = "split";
      j["stat"] = node.stat;
      j["threshold"] = node.threshold;
      j["eta"] = node.eta;
      j["m"] = node.m;
      break;
    case SegmentNode::Verdict::stop:
      j["verdict"] = "stop";
      j["stat"] = node.stat;
      j["threshold"] = node.threshold;
      break;
    case SegmentNode::Verdict::too_short:
      j["verdict"] = "too_short";
      break;
  }
  if (!node.children.empty()) {
    ordered_json kids = ordered_json::array();
    for (const SegmentNode& c : node.children) kids.push_back(node_to_json(c));
    j["children"] = std::move(kids);
  }
  return j;
}

}  // namespace

std::string report_to_json(const ChangePointReport& report) {
  ordered_json j;
  j["version"] = report.version.empty() ? PANELSEG_VERSION : report.version;
  ordered_json cfg;
  ordered_json mode;
  if (report.config.mode.kind == DcMode::Kind::exponent) {
    mode["kind"] = "exponent";
    mode["phi"] = report.config.mode.phi;
  } else {
    mode["kind"] = "combined";
    mode["gamma"] = report.gamma > 0.0 ? report.gamma : report.config.mode.gamma;
  }
  cfg["mode"] = std::move(mode);
  cfg["alpha"] = report.config.alpha;
  cfg["alpha_effective"] = report.alpha_effective;
  cfg["boot_reps"] = report.config.boot_reps;
  cfg["trim"] = report.config.trim;
  cfg["depth"] = report.depth;
  cfg["seed"] = report.config.seed;
  cfg["bonferroni"] = report.config.bonferroni;
  j["config"] = std::move(cfg);
  j["n"] = report.n;
  j["T"] = report.T;
  ordered_json cps = ordered_json::array();
  for (const ChangePoint& cp : report.change_points) {
    ordered_json c;
    c["eta"] = cp.eta;
    c["m"] = cp.m;
    c["contributors"] = cp.contributors;
    c["stat"] = cp.stat;
    c["threshold"] = cp.threshold;
    c["survived"] = cp.survived;
    cps.push_back(std::move(c));
  }
  j["change_points"] = std::move(cps);
  j["tree"] = node_to_json(report.tree);
  return j.dump(2) + "\n";
}

}  // namespace panelseg
