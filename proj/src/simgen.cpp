#include "panelseg/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "panelseg/errors.hpp"
#include "panelseg/rng.hpp"

namespace panelseg {

namespace {

constexpr long kSpatialLags = 100;  // MA weights rho_i, i = 0..99

void validate_spec(const NoiseModelSpec& spec) {
  if (spec.n < 1 || spec.T < 1) {
    throw DomainError("gen_noise: need n >= 1 and T >= 1, got n = " + std::to_string(spec.n) +
                      ", T = " + std::to_string(spec.T));
  }
  if (spec.burn_in < 100) throw DomainError("gen_noise: burn-in must be >= 100");
  if (std::isnan(spec.noise_scale) || spec.noise_scale < 0.0) {
    throw DomainError("gen_noise: noise scale must be >= 0");
  }
  if (spec.model == NoiseModelSpec::Model::n1) {
    if (!(spec.rho > 0.0)) throw DomainError("gen_noise: model n1 needs rho > 0");
  } else {
    if (!(spec.rho_h > 0.0 && spec.rho_h < 1.0)) {
      throw DomainError("gen_noise: model n2 needs rho_h in (0, 1)");
    }
  }
}

}  // namespace

PanelData gen_noise(const NoiseModelSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  const long n = spec.n;
  const long total = spec.burn_in + spec.T;
  const bool factor = spec.model == NoiseModelSpec::Model::n2;

  const double rho_spatial = factor ? 0.2 : spec.rho;
  double sigma_v = factor ? 0.5 * std::sqrt(1.0 - spec.rho_h * spec.rho_h) : 0.1 / spec.rho;
  sigma_v *= spec.noise_scale;

  std::vector<double> w(static_cast<size_t>(kSpatialLags));
  for (long i = 0; i < kSpatialLags; ++i) {
    w[static_cast<size_t>(i)] = rho_spatial / static_cast<double>(i + 1);
  }

  // v_{c,t} for coordinates c = j - i, j = 1..n, i = 0..99 -> c in -98..n.
  const long vcount = n + kSpatialLags - 1;
  std::vector<double> v(static_cast<size_t>(vcount * total));
  {
    std::mt19937_64 rng = make_rng(seed, {stream::noise_v});
    std::normal_distribution<double> nd(0.0, 1.0);
    for (double& x : v) x = sigma_v * nd(rng);
  }

  std::vector<double> h;
  if (factor) {
    h.resize(static_cast<size_t>(total));
    std::mt19937_64 rng = make_rng(seed, {stream::noise_h});
    std::normal_distribution<double> nd(0.0, 1.0);
    for (double& x : h) x = 0.1 * spec.noise_scale * nd(rng);
  }

  PanelData out(n, spec.T);
  std::vector<double> u(static_cast<size_t>(total));
  for (long j = 1; j <= n; ++j) {
    for (long t = 0; t < total; ++t) {
      double s = 0.0;
      for (long i = 0; i < kSpatialLags; ++i) {
        // coordinate c = j - i stored at offset c + 98
        const long c = j - i + kSpatialLags - 2;
        s += w[static_cast<size_t>(i)] * v[static_cast<size_t>(c * total + t)];
      }
      u[static_cast<size_t>(t)] = s;
    }
    double e1 = 0.0, e2 = 0.0, u_prev = 0.0;
    for (long t = 0; t < total; ++t) {
      double e = 0.2 * e1 - 0.3 * e2 + u[static_cast<size_t>(t)] + 0.2 * u_prev;
      if (factor) e += spec.rho_h * h[static_cast<size_t>(t)];
      u_prev = u[static_cast<size_t>(t)];
      e2 = e1;
      e1 = e;
      if (t >= spec.burn_in) out.at(j, t - spec.burn_in + 1) = e;
    }
  }
  return out;
}

PanelData gen_signal(const SignalSpec& spec, long n, long T, std::uint64_t seed,
                     SignalTruth* truth) {
  if (n < 1 || T < 2) throw DomainError("gen_signal: need n >= 1 and T >= 2");
  if (std::isnan(spec.jitter) || spec.jitter < 0.0 || spec.jitter >= 1.0) {
    throw DomainError("gen_signal: jitter must lie in [0, 1)");
  }
  long prev_eta = 1;
  for (size_t r = 0; r < spec.change_points.size(); ++r) {
    const ChangeSpec& cp = spec.change_points[r];
    if (cp.eta <= prev_eta || cp.eta >= T) {
      throw DomainError("gen_signal: change " + std::to_string(r + 1) +
                        ": need 1 < eta_1 < ... < eta_N < T");
    }
    prev_eta = cp.eta;
    const long m = cp.pi.empty() ? cp.m : static_cast<long>(cp.pi.size());
    if (m < 1 || m > n) {
      throw DomainError("gen_signal: change " + std::to_string(r + 1) + ": need 1 <= m <= n");
    }
    if (!cp.pi.empty()) {
      for (long j : cp.pi) {
        if (j < 1 || j > n) {
          throw DomainError("gen_signal: change " + std::to_string(r + 1) +
                            ": series index " + std::to_string(j) + " outside 1.." +
                            std::to_string(n));
        }
      }
    }
    if (std::isnan(cp.delta) || cp.delta < 0.0) {
      throw DomainError("gen_signal: change " + std::to_string(r + 1) + ": delta must be >= 0");
    }
  }

  std::mt19937_64 rng = make_rng(seed, {stream::signal});
  PanelData out(n, T);
  SignalTruth local;
  std::vector<long> population(static_cast<size_t>(n));
  std::iota(population.begin(), population.end(), 1);

  for (const ChangeSpec& cp : spec.change_points) {
    RealizedChange rc;
    rc.eta = cp.eta;
    if (!cp.pi.empty()) {
      rc.members = cp.pi;
      std::sort(rc.members.begin(), rc.members.end());
      rc.members.erase(std::unique(rc.members.begin(), rc.members.end()), rc.members.end());
    } else {
      rc.members.resize(static_cast<size_t>(cp.m));
      std::sample(population.begin(), population.end(), rc.members.begin(),
                  static_cast<size_t>(cp.m), rng);
    }
    std::uniform_real_distribution<double> mag((1.0 - spec.jitter) * cp.delta,
                                               (1.0 + spec.jitter) * cp.delta);
    std::uniform_int_distribution<int> coin(0, 1);
    rc.deltas.reserve(rc.members.size());
    for (long j : rc.members) {
      double d = mag(rng);
      if (coin(rng) == 1) d = -d;
      rc.deltas.push_back(d);
      for (long t = cp.eta + 1; t <= T; ++t) out.at(j, t) += d;
    }
    local.changes.push_back(std::move(rc));
  }
  if (truth != nullptr) *truth = std::move(local);
  return out;
}

double rand_index(std::span<const long> true_set, std::span<const long> est_set, long n) {
  if (n < 1) throw DomainError("rand_index: need n >= 1");
  std::vector<char> in_true(static_cast<size_t>(n + 1), 0);
  std::vector<char> in_est(static_cast<size_t>(n + 1), 0);
  for (long j : true_set) {
    if (j < 1 || j > n) throw DomainError("rand_index: index " + std::to_string(j) + " outside 1..n");
    in_true[static_cast<size_t>(j)] = 1;
  }
  for (long j : est_set) {
    if (j < 1 || j > n) throw DomainError("rand_index: index " + std::to_string(j) + " outside 1..n");
    in_est[static_cast<size_t>(j)] = 1;
  }
  long agree = 0;
  for (long j = 1; j <= n; ++j) {
    if (in_true[static_cast<size_t>(j)] == in_est[static_cast<size_t>(j)]) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(n);
}

}  // namespace panelseg
