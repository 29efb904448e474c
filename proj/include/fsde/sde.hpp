// Pathwise Euler scheme for SDEs driven by a sampled fBm path, the geometric
// closed form used as an oracle, and step-refinement studies.
//
// The scheme is the explicit left-point rule
//   X_{k+1} = X_k + b(t_k, X_k) h + sigma(t_k, X_k) dB_k,
// whose noise sums converge to the generalized Stieltjes integral in the
// Young regime; a consistency check against the fractional-derivative
// integral lives in the test suite.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsde/coeff.hpp"
#include "fsde/fbm.hpp"
#include "fsde/frac.hpp"
#include "fsde/grid.hpp"

namespace fsde {

class BlowupError : public std::runtime_error {
 public:
  BlowupError(double time, double magnitude)
      : std::runtime_error("solution blew up at t = " + std::to_string(time) +
                           " (|X| = " + std::to_string(magnitude) + ")"),
        time(time), magnitude(magnitude) {}
  double time;
  double magnitude;
};

struct SolutionDiagnostics {
  double max_step_increment = 0.0;
  double lambda_alpha_driver = 0.0;
};

struct SolutionPath {
  std::vector<double> x0;
  double t = 0.0;
  double T = 1.0;
  GridFunction values;
  std::uint64_t driver_seed = 0;
  double driver_hurst = 0.75;
  double alpha_used = 0.375;
  SolutionDiagnostics diagnostics;
};

namespace detail {

constexpr double kBlowupGuard = 1e12;

// Lambda_alpha of the driver is an O(n^2) statistic; for reporting purposes
// it is evaluated on the driver coarsened to at most this many steps.
constexpr std::size_t kLambdaDiagnosticMaxSteps = 512;

inline double driver_lambda_diagnostic(const GridFunction& driver, double alpha) {
  std::size_t stride = 1;
  while (driver.n_steps() / stride > kLambdaDiagnosticMaxSteps && driver.n_steps() % (stride * 2) == 0)
    stride *= 2;
  return lambda_alpha(driver.coarsen(stride), FracOrder(alpha));
}

}  // namespace detail

// Explicit Euler solve on the driver's grid restricted to [t, T].
// alpha is only used for the reported diagnostics; when absent it is the
// midpoint of (1-H, 1/2).
inline SolutionPath solve_euler(const CoefficientField& cf, std::span<const double> x0, double t,
                                double T, const FbmPath& driver,
                                std::optional<double> alpha = std::nullopt,
                                bool with_diagnostics = true) {
  if (static_cast<int>(x0.size()) != cf.d)
    throw std::invalid_argument("solve_euler: x0 dimension mismatch");
  if (!(T > t)) throw std::invalid_argument("solve_euler: need T > t");
  GridFunction dg = driver.to_grid();
  const std::size_t ia = dg.index_of(t), ib = dg.index_of(T);
  if (ib <= ia) throw std::invalid_argument("solve_euler: driver does not cover [t, T]");
  const double h = dg.step();
  const std::size_t n = ib - ia;

  SolutionPath sol;
  sol.x0.assign(x0.begin(), x0.end());
  sol.t = t;
  sol.T = T;
  sol.values = GridFunction(t, T, n, cf.d);
  sol.driver_seed = driver.seed;
  sol.driver_hurst = driver.hurst.value;
  sol.alpha_used = alpha ? *alpha : 0.5 * ((1.0 - driver.hurst.value) + 0.5);

  std::vector<double> x(x0.begin(), x0.end());
  for (int c = 0; c < cf.d; ++c) sol.values.at(0, c) = x[c];
  double max_inc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = dg.time_at(ia + k);
    const double dB = driver.values[ia + k + 1] - driver.values[ia + k];
    auto [bv, sv] = eval_field(cf, tk, x);
    double inc2 = 0.0;
    for (int c = 0; c < cf.d; ++c) {
      const double dx = bv[c] * h + sv[c] * dB;
      x[c] += dx;
      inc2 += dx * dx;
      sol.values.at(k + 1, c) = x[c];
    }
    max_inc = std::max(max_inc, std::sqrt(inc2));
    double mag = 0.0;
    for (double v : x) mag += v * v;
    mag = std::sqrt(mag);
    if (!(mag < detail::kBlowupGuard)) throw BlowupError(dg.time_at(ia + k + 1), mag);
  }
  sol.diagnostics.max_step_increment = max_inc;
  if (with_diagnostics) {
    GridFunction window = dg.restrict_to(ia, ib);
    sol.diagnostics.lambda_alpha_driver =
        detail::driver_lambda_diagnostic(window, sol.alpha_used);
  }
  return sol;
}

// X(s) = x0 * exp(lambda * B(s)), the pathwise solution of dX = lambda X dB
// (chain rule of the pathwise calculus, d = 1).
inline SolutionPath exact_geometric(const FbmPath& driver, double lambda, double x0) {
  SolutionPath sol;
  sol.x0 = {x0};
  sol.t = driver.t0;
  sol.T = driver.T;
  sol.values = GridFunction(driver.t0, driver.T, driver.n_steps, 1);
  sol.driver_seed = driver.seed;
  sol.driver_hurst = driver.hurst.value;
  for (std::size_t k = 0; k <= driver.n_steps; ++k)
    sol.values.at(k, 0) = x0 * std::exp(lambda * driver.values[k]);
  return sol;
}

struct RateReport {
  std::vector<std::size_t> levels;
  std::vector<double> sup_errors;  // against the finest level, at shared nodes
  double fitted_order = 0.0;
  bool exact = false;  // all errors at rounding level
};

// Refinement study on one driver path: the finest level is sampled once and
// restricted (exactly, by node subsampling) to each coarser level.
inline RateReport convergence_study(const CoefficientField& cf, std::span<const double> x0,
                                    double t, double T, HurstParameter H, std::uint64_t seed,
                                    const std::vector<std::size_t>& levels) {
  if (levels.size() < 2) throw std::invalid_argument("convergence_study: need at least 2 levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1])
      throw std::invalid_argument("convergence_study: levels must be strictly increasing");
    if (levels[i] % levels[i - 1] != 0)
      throw std::invalid_argument("convergence_study: levels must be nested (each divides the next)");
  }
  const std::size_t nf = levels.back();
  FbmPath fine = sample_fbm(H, t, T, nf, seed);
  SolutionPath ref = solve_euler(cf, x0, t, T, fine, std::nullopt, false);

  RateReport rep;
  rep.levels = levels;
  double ref_scale = 0.0;
  for (double v : ref.values.raw()) ref_scale = std::max(ref_scale, std::abs(v));

  for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
    const std::size_t n = levels[li];
    const std::size_t stride = nf / n;
    FbmPath coarse = fine;
    coarse.n_steps = n;
    coarse.values.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) coarse.values[k] = fine.values[k * stride];
    SolutionPath sol = solve_euler(cf, x0, t, T, coarse, std::nullopt, false);
    double err = 0.0;
    for (std::size_t k = 0; k <= n; ++k)
      for (int c = 0; c < cf.d; ++c)
        err = std::max(err, std::abs(sol.values.at(k, c) - ref.values.at(k * stride, c)));
    rep.sup_errors.push_back(err);
  }
  rep.sup_errors.push_back(0.0);  // finest vs itself

  rep.exact = true;
  for (std::size_t li = 0; li + 1 < levels.size(); ++li)
    if (rep.sup_errors[li] > 1e-13 * std::max(1.0, ref_scale)) rep.exact = false;

  if (!rep.exact) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
      if (rep.sup_errors[li] <= 0.0) continue;
      const double xl = std::log(static_cast<double>(levels[li]));
      const double yl = std::log(rep.sup_errors[li]);
      sx += xl; sy += yl; sxx += xl * xl; sxy += xl * yl;
      ++m;
    }
    if (m >= 2) rep.fitted_order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return rep;
}

}  // namespace fsde
