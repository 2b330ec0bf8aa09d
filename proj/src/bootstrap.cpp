// GDFM bootstrap: factor-number IC, dynamic-principal-component
// decomposition, shock/idiosyncratic resampling, scan-statistic thresholds.

#include "panelseg/bootstrap.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "panelseg/errors.hpp"
#include "panelseg/fft.hpp"
#include "panelseg/parallel.hpp"
#include "panelseg/rng.hpp"
#include "panelseg/scaling.hpp"

namespace panelseg {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

void validate(const DetectorConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("alpha must be in (0,1), got " + std::to_string(config.alpha));
  }
  if (config.boot_reps < 1) throw ConfigError("boot_reps must be >= 1");
  if (config.trim < 0) throw ConfigError("trim must be >= 0");
  if (config.mode.kind == DcMode::Kind::exponent &&
      !(config.mode.phi >= 0.0 && config.mode.phi <= 1.0)) {
    throw ConfigError("mode exponent phi must be in [0,1]");
  }
}

// ---------------------------------------------------------------- factor IC

FactorSelection estimate_factor_number(const PanelData& residuals) {
  const long n = residuals.n;
  const long T = residuals.T;
  if (n < 2) throw DimensionError("estimate_factor_number: need n >= 2");
  if (T < 8) throw DimensionError("estimate_factor_number: need T >= 8");
  bool all_zero = true;
  for (double v : residuals.values) {
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) throw DegenerateError("estimate_factor_number: residual panel is all zeros");

  Eigen::Map<const MatrixXd> E(residuals.values.data(), T, n);  // column j = series j
  MatrixXd S = (E.transpose() * E) / static_cast<double>(T);    // (1/T) sum_t e_t e_t^T
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S);
  if (eig.info() != Eigen::Success) throw InternalError("eigendecomposition failed");
  // eigenvalues ascending; we need the largest first
  const double C = static_cast<double>(std::min(n, T));
  long Q = static_cast<long>(std::floor(C / std::log(C)));
  if (Q > n) Q = n;
  if (Q < 0) Q = 0;

  const double trace = S.trace();
  const double penalty_unit = std::log(C) / C;
  FactorSelection sel;
  sel.ic.resize(static_cast<size_t>(Q + 1));
  double removed = 0.0;
  double best = 0.0;
  for (long k = 0; k <= Q; ++k) {
    if (k > 0) removed += eig.eigenvalues()(n - k);
    double resid = trace - removed;
    if (resid < 1e-300) resid = 1e-300;
    const double ic = std::log(resid) + static_cast<double>(k) * penalty_unit;
    sel.ic[static_cast<size_t>(k)] = ic;
    if (k == 0 || ic < best) {  // strict <: ties go to the smaller k
      best = ic;
      sel.q = k;
    }
  }
  return sel;
}

// --------------------------------------------------------- decomposition

namespace {

// Deterministic phase fix: rotate so the largest-modulus coordinate is
// real-positive (first maximum wins on ties).
void phase_fix(VectorXcd& p) {
  long best = 0;
  double best_abs = std::abs(p(0));
  for (long i = 1; i < p.size(); ++i) {
    double a = std::abs(p(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs > 0.0) p *= std::conj(p(best)) / best_abs;
}

}  // namespace

GdfmDecomposition decompose_gdfm(const PanelData& residuals, long q, long M) {
  const long n = residuals.n;
  const long T = residuals.T;
  if (T < 8) throw DimensionError("decompose_gdfm: need T >= 8");
  if (q < 0) throw DomainError("decompose_gdfm: q must be >= 0");
  {
    const double C = static_cast<double>(std::min(n, T));
    const long Q = static_cast<long>(std::floor(C / std::log(C)));
    if (q > Q) {
      throw DomainError("decompose_gdfm: q = " + std::to_string(q) + " exceeds Q = " +
                        std::to_string(Q));
    }
  }
  if (M <= 0) M = static_cast<long>(std::floor(std::sqrt(static_cast<double>(T))));

  GdfmDecomposition d;
  d.n = n;
  d.T = T;
  d.q = q;
  d.M = M;
  d.common = PanelData(n, T);
  d.idio = residuals;
  if (q == 0) return d;  // common stays zero, idio = residuals

  // Sample autocovariances Gamma(k) = (1/T) sum_t eps_{t+k} eps_t^T, k = 0..M.
  Eigen::Map<const MatrixXd> E(residuals.values.data(), T, n);  // rows = times
  std::vector<MatrixXd> gamma(static_cast<size_t>(M + 1));
  for (long k = 0; k <= M; ++k) {
    gamma[static_cast<size_t>(k)] =
        (E.bottomRows(T - k).transpose() * E.topRows(T - k)) / static_cast<double>(T);
  }

  // Dynamic PCA at every FFT frequency f = 0..T/2 (negative frequencies by
  // conjugate symmetry).  Evaluating the eigenvectors on the full grid the
  // circular filtering runs on -- rather than on a coarse 2M+1-point grid --
  // keeps the truncated lag filter derived below close to the orthogonal
  // projection, so the common and idiosyncratic parts barely overlap in
  // sample and resampling them independently nearly conserves the residual
  // panel's variance.
  const long F = T / 2;
  d.freq_response.assign(static_cast<size_t>((F + 1) * n * q), {0.0, 0.0});
  for (long f = 0; f <= F; ++f) {
    const double omega = 2.0 * M_PI * static_cast<double>(f) / static_cast<double>(T);
    MatrixXcd sigma = gamma[0].cast<std::complex<double>>();
    for (long k = 1; k <= M; ++k) {
      const double w = 1.0 - static_cast<double>(k) / static_cast<double>(M + 1);  // Bartlett
      const std::complex<double> ph(std::cos(k * omega), -std::sin(k * omega));
      sigma += w * (gamma[static_cast<size_t>(k)].cast<std::complex<double>>() * ph +
                    gamma[static_cast<size_t>(k)].transpose().cast<std::complex<double>>() *
                        std::conj(ph));
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sigma);
    if (eig.info() != Eigen::Success) throw InternalError("spectral eigendecomposition failed");
    std::complex<double>* out = d.freq_response.data() + f * n * q;
    for (long k = 0; k < q; ++k) {
      VectorXcd v = eig.eigenvectors().col(n - 1 - k);  // descending eigenvalues
      phase_fix(v);
      for (long j = 0; j < n; ++j) out[static_cast<size_t>(j * q + k)] = v(j);
    }
  }

  // Lag-domain filter b(L), truncated to -M..M: inverse transform of the
  // eigenvector field over the full FFT grid.  Real by conjugate symmetry.
  // This is the filter the common component actually runs through (below, via
  // its frequency response), not just a reporting artefact.
  const long G = 2 * M + 1;
  d.filter.assign(static_cast<size_t>(G * n * q), 0.0);
  for (long l = -M; l <= M; ++l) {
    double* bl = d.filter.data() + (l + M) * n * q;
    for (long f = 0; f < T; ++f) {
      const long fr = f <= F ? f : T - f;  // source bin; conjugate when f > F
      const double ang = 2.0 * M_PI * static_cast<double>(f) * static_cast<double>(l) /
                         static_cast<double>(T);
      const std::complex<double> ph(std::cos(ang), std::sin(ang));
      const std::complex<double>* src = d.freq_response.data() + fr * n * q;
      for (long i = 0; i < n * q; ++i) {
        const std::complex<double> b = f <= F ? src[static_cast<size_t>(i)]
                                              : std::conj(src[static_cast<size_t>(i)]);
        bl[static_cast<size_t>(i)] += (b * ph).real() / static_cast<double>(T);
      }
    }
  }

  // Shock extraction u = B(L)^H eps and common reconstruction chi = B(L)u,
  // both circular via the FFT grid.
  std::vector<std::vector<std::complex<double>>> ehat(static_cast<size_t>(n));
  for (long j = 0; j < n; ++j) {
    ehat[static_cast<size_t>(j)] =
        rfft(std::span<const double>(residuals.row(j + 1), static_cast<size_t>(T)));
  }
  std::vector<std::vector<std::complex<double>>> uhat(
      static_cast<size_t>(q), std::vector<std::complex<double>>(static_cast<size_t>(F + 1)));
  for (long f = 0; f <= F; ++f) {
    const std::complex<double>* Bf = d.freq_response.data() + f * n * q;
    for (long k = 0; k < q; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (long j = 0; j < n; ++j)
        acc += std::conj(Bf[static_cast<size_t>(j * q + k)]) * ehat[static_cast<size_t>(j)][static_cast<size_t>(f)];
      uhat[static_cast<size_t>(k)][static_cast<size_t>(f)] = acc;
    }
  }
  d.shocks = PanelData(q, T);
  for (long k = 0; k < q; ++k) {
    auto& row = uhat[static_cast<size_t>(k)];
    row[0].imag(0.0);
    if (T % 2 == 0) row[static_cast<size_t>(F)].imag(0.0);
    std::vector<double> u = irfft(row, T);
    for (long t = 1; t <= T; ++t) d.shocks.at(k + 1, t) = u[static_cast<size_t>(t - 1)];
  }

  // Replace the stored response by that of the truncated filter: common is
  // the filtered projection b(L)u, and the resampling path applies the same
  // response, so replicate and in-sample common components share one law.
  for (long f = 0; f <= F; ++f) {
    const double omega = 2.0 * M_PI * static_cast<double>(f) / static_cast<double>(T);
    std::complex<double>* out = d.freq_response.data() + f * n * q;
    std::vector<std::complex<double>> acc(static_cast<size_t>(n * q), {0.0, 0.0});
    for (long l = -M; l <= M; ++l) {
      const std::complex<double> ph(std::cos(omega * static_cast<double>(l)),
                                    -std::sin(omega * static_cast<double>(l)));
      const double* bl = d.filter.data() + (l + M) * n * q;
      for (long i = 0; i < n * q; ++i) acc[static_cast<size_t>(i)] += bl[static_cast<size_t>(i)] * ph;
    }
    for (long i = 0; i < n * q; ++i) out[static_cast<size_t>(i)] = acc[static_cast<size_t>(i)];
  }

  // chi from the shock spectrum (exactly the path resampling takes)
  for (long j = 0; j < n; ++j) {
    std::vector<std::complex<double>> chat(static_cast<size_t>(F + 1), {0.0, 0.0});
    for (long f = 0; f <= F; ++f) {
      const std::complex<double>* Bf = d.freq_response.data() + f * n * q;
      std::complex<double> acc(0.0, 0.0);
      for (long k = 0; k < q; ++k)
        acc += Bf[static_cast<size_t>(j * q + k)] * uhat[static_cast<size_t>(k)][static_cast<size_t>(f)];
      chat[static_cast<size_t>(f)] = acc;
    }
    chat[0].imag(0.0);
    if (T % 2 == 0) chat[static_cast<size_t>(F)].imag(0.0);
    std::vector<double> chi = irfft(chat, T);
    for (long t = 1; t <= T; ++t) {
      d.common.at(j + 1, t) = chi[static_cast<size_t>(t - 1)];
      d.idio.at(j + 1, t) = residuals.at(j + 1, t) - chi[static_cast<size_t>(t - 1)];
    }
  }
  return d;
}

PanelData resample_common(const GdfmDecomposition& decomp, std::mt19937_64& rng) {
  const long n = decomp.n;
  const long T = decomp.T;
  const long q = decomp.q;
  PanelData out(n, T);
  if (q == 0) return out;

  std::uniform_int_distribution<long> pick(1, T);
  PanelData u(q, T);
  for (long k = 1; k <= q; ++k)
    for (long t = 1; t <= T; ++t) u.at(k, t) = decomp.shocks.at(k, pick(rng));

  const long F = T / 2;
  std::vector<std::vector<std::complex<double>>> uhat(static_cast<size_t>(q));
  for (long k = 0; k < q; ++k) {
    uhat[static_cast<size_t>(k)] =
        rfft(std::span<const double>(u.row(k + 1), static_cast<size_t>(T)));
  }
  for (long j = 0; j < n; ++j) {
    std::vector<std::complex<double>> chat(static_cast<size_t>(F + 1), {0.0, 0.0});
    for (long f = 0; f <= F; ++f) {
      const std::complex<double>* Bf = decomp.freq_response.data() + f * n * q;
      std::complex<double> acc(0.0, 0.0);
      for (long k = 0; k < q; ++k)
        acc += Bf[static_cast<size_t>(j * q + k)] * uhat[static_cast<size_t>(k)][static_cast<size_t>(f)];
      chat[static_cast<size_t>(f)] = acc;
    }
    chat[0].imag(0.0);
    if (T % 2 == 0) chat[static_cast<size_t>(F)].imag(0.0);
    std::vector<double> chi = irfft(chat, T);
    for (long t = 1; t <= T; ++t) out.at(j + 1, t) = chi[static_cast<size_t>(t - 1)];
  }
  return out;
}

PanelData local_bootstrap_idio(const PanelData& idio, long kernel_window, std::mt19937_64& rng) {
  const long n = idio.n;
  const long T = idio.T;
  if (T < 8) throw DimensionError("local_bootstrap_idio: need T >= 8");
  long h = kernel_window;
  if (h < 0) h = std::max<long>(1, static_cast<long>(std::floor(0.05 * static_cast<double>(T))));
  if (h == 0) return idio;  // every frequency resampled from itself

  const long F = T / 2;
  std::vector<std::vector<std::complex<double>>> coef(static_cast<size_t>(n));
  for (long j = 0; j < n; ++j) {
    coef[static_cast<size_t>(j)] =
        rfft(std::span<const double>(idio.row(j + 1), static_cast<size_t>(T)));
  }
  // One draw per frequency, shared across series.
  std::vector<long> repl(static_cast<size_t>(F + 1), 0);
  for (long f = 1; f <= F; ++f) {
    const long lo = std::max<long>(1, f - h);
    const long hi = std::min<long>(F, f + h);
    std::uniform_int_distribution<long> pick(lo, hi);
    repl[static_cast<size_t>(f)] = pick(rng);
  }
  PanelData out(n, T);
  std::vector<std::complex<double>> c(static_cast<size_t>(F + 1));
  for (long j = 0; j < n; ++j) {
    const auto& src = coef[static_cast<size_t>(j)];
    c[0] = std::complex<double>(src[0].real(), 0.0);
    for (long f = 1; f <= F; ++f) c[static_cast<size_t>(f)] = src[static_cast<size_t>(repl[static_cast<size_t>(f)])];
    if (T % 2 == 0) c[static_cast<size_t>(F)].imag(0.0);  // Nyquist bin must stay real
    std::vector<double> x = irfft(c, T);
    for (long t = 1; t <= T; ++t) out.at(j + 1, t) = x[static_cast<size_t>(t - 1)];
  }
  return out;
}

// ------------------------------------------------------------------- engine

BootstrapEngine::BootstrapEngine(const PanelData& std_residuals, std::vector<DcMode> modes,
                                 long B, double alpha, long d_T, std::uint64_t seed,
                                 int threads)
    : n_(std_residuals.n),
      T_(std_residuals.T),
      B_(B),
      d_T_(d_T),
      alpha_(alpha),
      threads_(threads < 1 ? 1 : threads),
      seed_(seed),
      modes_(std::move(modes)) {
  if (B_ < 1) throw ConfigError("bootstrap needs B >= 1");
  if (!(alpha_ > 0.0 && alpha_ < 1.0)) throw ConfigError("bootstrap alpha must be in (0,1)");
  if (modes_.empty()) throw ConfigError("bootstrap needs at least one mode");
  mults_.reserve(modes_.size());
  for (const DcMode& m : modes_) mults_.push_back(mode_multipliers(n_, m));

  const long q = estimate_factor_number(std_residuals).q;
  decomp_ = decompose_gdfm(std_residuals, q);

  replicates_.resize(static_cast<size_t>(B_));
  parallel_for(B_, threads_, [&](long l) {
    auto rng_shock = make_rng(seed_, {stream::boot_shock, static_cast<std::uint64_t>(l)});
    auto rng_idio = make_rng(seed_, {stream::boot_idio, static_cast<std::uint64_t>(l)});
    PanelData idio_l = local_bootstrap_idio(decomp_.idio, -1, rng_idio);
    if (decomp_.q > 0) {
      PanelData common_l = resample_common(decomp_, rng_shock);
      for (size_t i = 0; i < idio_l.values.size(); ++i) idio_l.values[i] += common_l.values[i];
    }
    replicates_[static_cast<size_t>(l)] = PanelPrefix::build(idio_l.values.data(), n_, T_);
  });
}

const std::vector<BootstrapThreshold>& BootstrapEngine::thresholds(long window_len) const {
  if (window_len < 2 || window_len > T_) {
    throw DimensionError("bootstrap threshold: window length " + std::to_string(window_len) +
                         " outside 2..T");
  }
  if (window_len - 1 <= 2 * d_T_ + 1) {
    throw DimensionError("bootstrap threshold: window length " + std::to_string(window_len) +
                         " too short for trim " + std::to_string(d_T_));
  }
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(window_len);
    if (it != cache_.end()) return it->second;
  }

  const size_t nm = modes_.size();
  // One stat per window position per replicate; all positions of one length
  // are identically distributed, so the criterion is the quantile of the pool
  // (a single window when len = T).
  const long positions = T_ - window_len + 1;
  std::vector<std::vector<double>> stats(
      nm, std::vector<double>(static_cast<size_t>(B_ * positions)));
  parallel_for(B_, threads_, [&](long l) {
    ScanWorkspace ws;
    std::vector<ScanBest> bests(nm);
    const PanelPrefix& pp = replicates_[static_cast<size_t>(l)];
    for (long k = 0; k < positions; ++k) {
      for (size_t mi = 0; mi < nm; ++mi) bests[mi] = ScanBest{};
      scan_window(pp, 1 + k, k + window_len, d_T_, mults_, ws, bests);
      for (size_t mi = 0; mi < nm; ++mi)
        stats[mi][static_cast<size_t>(l * positions + k)] = bests[mi].stat;
    }
  });

  const long P = B_ * positions;
  std::vector<BootstrapThreshold> out(nm);
  for (size_t mi = 0; mi < nm; ++mi) {
    BootstrapThreshold& bt = out[mi];
    bt.window_len = window_len;
    bt.alpha = alpha_;
    bt.B = B_;
    bt.replicate_stats = stats[mi];
    std::vector<double> sorted = stats[mi];
    std::sort(sorted.begin(), sorted.end());
    long rank = static_cast<long>(std::ceil((1.0 - alpha_) * static_cast<double>(P)));
    if (rank < 1) rank = 1;
    if (rank > P) rank = P;
    bt.quantile = sorted[static_cast<size_t>(rank - 1)];
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(window_len, std::move(out));
  (void)inserted;
  return it->second;
}

BootstrapThreshold bootstrap_threshold(const PanelData& panel, const DetectorConfig& config,
                                       long window_len) {
  validate(config);
  if (window_len <= 0) window_len = panel.T;
  if (window_len > panel.T) throw DimensionError("window length exceeds T");
  ScalingEstimate scaling = estimate_scales(panel, config.depth);
  PanelData e_std(panel.n, panel.T);
  for (long j = 1; j <= panel.n; ++j) {
    const double inv = 1.0 / std::sqrt(scaling.sigma2[static_cast<size_t>(j - 1)]);
    for (long t = 1; t <= panel.T; ++t) e_std.at(j, t) = scaling.residuals.at(j, t) * inv;
  }
  BootstrapEngine engine(e_std, {config.mode}, config.boot_reps, config.alpha, config.trim,
                         config.seed, resolve_threads(config.threads));
  return engine.threshold(window_len);
}

}  // namespace panelseg
