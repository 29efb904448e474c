// Exact sampling of fractional Brownian motion plus path-regularity
// diagnostics (Hölder seminorm, max increment ratio).
//
// Default sampler: circulant embedding of the increment (fGn) covariance,
// padded to a power-of-two length and diagonalized by FFT. Exact in
// distribution whenever the embedding is nonnegative definite; otherwise
// falls back to a dense Cholesky factorization of the increment covariance.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsde/fft.hpp"
#include "fsde/grid.hpp"
#include "fsde/rng.hpp"

namespace fsde {

struct HurstParameter {
  double value;

  explicit HurstParameter(double h) : value(h) {
    if (!(h > 0.0 && h < 1.0))
      throw std::invalid_argument("Hurst parameter must lie in (0, 1), got " + std::to_string(h));
  }

  // the solver theory needs H > 1/2; smaller values are allowed for
  // statistical diagnostics only and are flagged
  bool diagnostic_only() const { return value <= 0.5; }
};

enum class FbmMethod { circulant_embedding, cholesky };

inline const char* to_string(FbmMethod m) {
  return m == FbmMethod::circulant_embedding ? "circulant_embedding" : "cholesky";
}

inline FbmMethod fbm_method_from_string(const std::string& s) {
  if (s == "circulant_embedding" || s == "circulant") return FbmMethod::circulant_embedding;
  if (s == "cholesky") return FbmMethod::cholesky;
  throw std::invalid_argument("unknown fbm method: " + s);
}

// covariance of fBm: E[B_s B_t] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2
inline double fbm_covariance(double s, double t, HurstParameter H) {
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("fbm_covariance: times must be >= 0");
  const double twoH = 2.0 * H.value;
  return 0.5 * (std::pow(t, twoH) + std::pow(s, twoH) - std::pow(std::abs(t - s), twoH));
}

struct FbmPath {
  HurstParameter hurst{0.75};
  double t0 = 0.0;
  double T = 1.0;
  std::size_t n_steps = 1;
  std::vector<double> values;  // n_steps+1 entries, values[0] == 0
  std::uint64_t seed = 0;
  FbmMethod method = FbmMethod::circulant_embedding;
  bool used_fallback = false;

  double step() const { return (T - t0) / static_cast<double>(n_steps); }
  double time_at(std::size_t k) const { return t0 + step() * static_cast<double>(k); }

  GridFunction to_grid() const {
    GridFunction g(t0, T, n_steps, 1);
    g.raw() = values;
    return g;
  }

  GridFunction::Metadata metadata() const {
    return {{"hurst", std::to_string(hurst.value)},
            {"seed", std::to_string(seed)},
            {"method", std::string(to_string(method)) + (used_fallback ? "+fallback" : "")},
            {"n_steps", std::to_string(n_steps)}};
  }
};

class EmbeddingError : public std::runtime_error {
 public:
  EmbeddingError(double min_eig, std::string what)
      : std::runtime_error(std::move(what)), min_eigenvalue(min_eig) {}
  double min_eigenvalue;
};

namespace detail {

// fGn autocovariance at integer lag k for step h
inline double fgn_autocov(std::size_t k, double H, double h) {
  const double twoH = 2.0 * H;
  const double kk = static_cast<double>(k);
  return 0.5 * std::pow(h, twoH) *
         (std::pow(kk + 1.0, twoH) - 2.0 * std::pow(kk, twoH) +
          std::pow(std::abs(kk - 1.0), twoH));
}

// circulant eigenvalues for a stationary autocovariance gamma(0..m/2),
// extended symmetrically to length m (power of two)
inline std::vector<double> circulant_eigenvalues(const std::vector<double>& gamma_half,
                                                 std::size_t m) {
  std::vector<std::complex<double>> c(m);
  for (std::size_t j = 0; j <= m / 2; ++j) c[j] = gamma_half[j];
  for (std::size_t j = m / 2 + 1; j < m; ++j) c[j] = gamma_half[m - j];
  fft(c, -1);
  std::vector<double> lam(m);
  for (std::size_t j = 0; j < m; ++j) lam[j] = c[j].real();
  return lam;
}

// Draws one stationary Gaussian increment vector of length n with the given
// autocovariance, via the circulant embedding spectrum. Negative eigenvalues
// above -tol*max are clipped to zero; below that an EmbeddingError is thrown.
inline std::vector<double> sample_stationary_circulant(const std::vector<double>& autocov_n,
                                                       std::size_t n, std::uint64_t seed,
                                                       double neg_tol = 1e-9) {
  const std::size_t m = next_pow2(2 * n);
  std::vector<double> gamma_half(m / 2 + 1);
  // autocov_n holds lags 0..n; extend with the same law if short
  for (std::size_t j = 0; j <= m / 2; ++j)
    gamma_half[j] = (j < autocov_n.size()) ? autocov_n[j] : 0.0;
  auto lam = circulant_eigenvalues(gamma_half, m);
  double lam_max = *std::max_element(lam.begin(), lam.end());
  double lam_min = *std::min_element(lam.begin(), lam.end());
  if (lam_min < -neg_tol * std::max(lam_max, 1e-300)) {
    throw EmbeddingError(lam_min, "circulant embedding not nonnegative definite (min eigenvalue " +
                                      std::to_string(lam_min) + ")");
  }
  for (auto& l : lam) l = std::max(l, 0.0);

  Rng rng(seed);
  std::vector<double> z(m);
  for (auto& v : z) v = rng.gauss();

  std::vector<std::complex<double>> a(m);
  const double inv_sqrt2 = 0.70710678118654752440;
  a[0] = std::sqrt(lam[0]) * z[0];
  a[m / 2] = std::sqrt(lam[m / 2]) * z[m / 2];
  for (std::size_t k = 1; k < m / 2; ++k) {
    std::complex<double> xi(z[k] * inv_sqrt2, z[m / 2 + k] * inv_sqrt2);
    a[k] = std::sqrt(lam[k]) * xi;
    a[m - k] = std::conj(a[k]);
  }
  fft(a, +1);  // unscaled inverse
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<double> inc(n);
  for (std::size_t j = 0; j < n; ++j) inc[j] = a[j].real() * scale;
  return inc;
}

inline std::vector<double> fgn_autocov_seq(std::size_t upto, double H, double h) {
  std::vector<double> g(upto + 1);
  for (std::size_t k = 0; k <= upto; ++k) g[k] = fgn_autocov(k, H, h);
  return g;
}

constexpr std::size_t kCholeskyMaxSteps = 4096;

inline std::vector<double> sample_fgn_cholesky(double H, double h, std::size_t n,
                                               std::uint64_t seed) {
  if (n > kCholeskyMaxSteps)
    throw std::invalid_argument("cholesky sampler limited to n <= 4096 steps");
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double v = fgn_autocov(i - j, H, h);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("cholesky factorization of fGn covariance failed");
  Rng rng(seed);
  Eigen::VectorXd z(n);
  for (std::size_t i = 0; i < n; ++i) z(i) = rng.gauss();
  Eigen::VectorXd inc = llt.matrixL() * z;
  return std::vector<double>(inc.data(), inc.data() + n);
}

}  // namespace detail

// Exact fBm sample on a uniform grid over [t0, T]. Deterministic in
// (H, t0, T, n_steps, seed, method).
inline FbmPath sample_fbm(HurstParameter H, double t0, double T, std::size_t n_steps,
                          std::uint64_t seed,
                          FbmMethod method = FbmMethod::circulant_embedding,
                          bool allow_fallback = true) {
  if (n_steps < 1) throw std::invalid_argument("sample_fbm: need n_steps >= 1");
  if (!(T > t0)) throw std::invalid_argument("sample_fbm: need T > t0");
  const double h = (T - t0) / static_cast<double>(n_steps);

  FbmPath path;
  path.hurst = H;
  path.t0 = t0;
  path.T = T;
  path.n_steps = n_steps;
  path.seed = seed;
  path.method = method;

  std::vector<double> inc;
  if (method == FbmMethod::circulant_embedding) {
    try {
      const std::size_t m = detail::next_pow2(2 * n_steps);
      inc = detail::sample_stationary_circulant(
          detail::fgn_autocov_seq(m / 2, H.value, h), n_steps, seed);
    } catch (const EmbeddingError&) {
      if (!allow_fallback) throw;
      inc = detail::sample_fgn_cholesky(H.value, h, n_steps, seed);
      path.used_fallback = true;
    }
  } else {
    inc = detail::sample_fgn_cholesky(H.value, h, n_steps, seed);
  }

  path.values.assign(n_steps + 1, 0.0);
  for (std::size_t k = 0; k < n_steps; ++k) path.values[k + 1] = path.values[k] + inc[k];
  return path;
}

enum class HolderMode { exact, dyadic };

// sup over grid pairs r < s of |f(s)-f(r)| / (s-r)^mu. Exact mode enumerates
// all O(n^2) pairs; dyadic mode restricts to power-of-two index gaps.
inline double holder_seminorm(const GridFunction& f, double mu,
                              HolderMode mode = HolderMode::exact) {
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("holder_seminorm: need 0 < mu < 1");
  if (!f.all_finite()) throw std::invalid_argument("holder_seminorm: non-finite values");
  const std::size_t n = f.n_steps();
  const int d = f.dim();
  const double h = f.step();
  std::vector<double> wpow(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) wpow[k] = std::pow(static_cast<double>(k) * h, -mu);
  double best = 0.0;
  auto visit = [&](std::size_t i, std::size_t j) {
    double s2 = 0.0;
    for (int c = 0; c < d; ++c) {
      double dv = f.at(j, c) - f.at(i, c);
      s2 += dv * dv;
    }
    double v = std::sqrt(s2) * wpow[j - i];
    if (v > best) best = v;
  };
  if (mode == HolderMode::exact) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j) visit(i, j);
  } else {
    for (std::size_t gap = 1; gap <= n; gap <<= 1)
      for (std::size_t i = 0; i + gap <= n; ++i) visit(i, i + gap);
  }
  return best;
}

// max over grid steps of |increment| / h. For fBm this grows like h^{H-1}
// under refinement, the finite-grid face of the a.s. unbounded difference
// quotients of the driver.
inline double roughness_diagnostic(const FbmPath& path) {
  if (path.n_steps < 2) throw std::invalid_argument("roughness_diagnostic: need n_steps >= 2");
  const double h = path.step();
  double best = 0.0;
  for (std::size_t k = 0; k < path.n_steps; ++k)
    best = std::max(best, std::abs(path.values[k + 1] - path.values[k]) / h);
  return best;
}

inline double roughness_diagnostic(const GridFunction& f) {
  const double h = f.step();
  double best = 0.0;
  for (std::size_t k = 0; k < f.n_steps(); ++k) {
    double s2 = 0.0;
    for (int c = 0; c < f.dim(); ++c) {
      double dv = f.at(k + 1, c) - f.at(k, c);
      s2 += dv * dv;
    }
    best = std::max(best, std::sqrt(s2) / h);
  }
  return best;
}

}  // namespace fsde
