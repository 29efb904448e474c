// Monte Carlo experiments tying the deterministic checker verdicts to
// empirical path behavior: set viability, positivity, and coupled comparison
// runs, plus the two-sided integral-bound diagnostic used on tangent-set
// remainder processes.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsde/check.hpp"
#include "fsde/coeff.hpp"
#include "fsde/constraint.hpp"
#include "fsde/fbm.hpp"
#include "fsde/frac.hpp"
#include "fsde/parallel.hpp"
#include "fsde/sde.hpp"

namespace fsde {

enum class ExperimentKind { viability, positivity, comparison };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::viability: return "viability";
    case ExperimentKind::positivity: return "positivity";
    case ExperimentKind::comparison: return "comparison";
  }
  return "?";
}

struct X0Policy {
  enum class Mode { fixed, boundary_uniform } mode = Mode::fixed;
  std::vector<double> value;  // fixed mode

  static X0Policy fixed(std::vector<double> v) { return {Mode::fixed, std::move(v)}; }
  static X0Policy boundary_uniform() { return {Mode::boundary_uniform, {}}; }
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::viability;
  HurstParameter hurst{0.75};
  double t = 0.0;
  double T = 1.0;
  std::size_t n_steps = 1024;
  std::size_t n_paths = 100;
  std::uint64_t master_seed = 1;
  CoefficientField cf;
  std::optional<CoefficientField> cf2;  // comparison only
  ConstraintSet constraint = ConstraintSet::ball(1.0, 1);
  double membership_tol = 0.05;
  X0Policy x0 = X0Policy::fixed({0.0});
  std::vector<double> y0;               // comparison start of the second equation
  std::optional<double> alpha;          // diagnostics order; default midpoint
  FbmMethod method = FbmMethod::circulant_embedding;
  // checker resolution
  std::size_t checker_time_points = 11;
  std::size_t checker_boundary_samples = 256;
  double checker_tol = -1.0;

  void validate() const {
    if (n_paths < 1) throw std::invalid_argument("experiment: need n_paths >= 1");
    if (!(membership_tol > 0.0)) throw std::invalid_argument("experiment: need membership_tol > 0");
    if (!(T > t)) throw std::invalid_argument("experiment: need T > t");
    if (kind == ExperimentKind::comparison) {
      if (!cf2) throw std::invalid_argument("comparison experiment needs a second field");
      if (cf.d != 1 || cf2->d != 1)
        throw std::invalid_argument("comparison experiment needs scalar fields");
      if (x0.mode != X0Policy::Mode::fixed || y0.size() != 1)
        throw std::invalid_argument("comparison experiment needs fixed x0 and y0");
      if (x0.value[0] > y0[0])
        throw std::invalid_argument("comparison experiment needs x0 <= y0");
    }
    if (kind == ExperimentKind::positivity && constraint.kind != ConstraintKind::half_line)
      throw std::invalid_argument("positivity experiment needs the half-line constraint");
  }
};

struct PathSummary {
  std::uint64_t seed = 0;
  double excursion = 0.0;
  bool violated = false;
  bool blowup = false;
};

struct LambdaStats {
  double min = 0.0, mean = 0.0, max = 0.0;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::viability;
  std::size_t n_paths = 0;
  double violation_fraction = 0.0;
  std::size_t n_blowups = 0;
  double max_excursion = 0.0;  // worst signed distance outside K over all paths
  std::vector<PathSummary> per_path;
  LambdaStats lambda_alpha_stats;
  CheckReport checker;
  std::uint64_t master_seed = 0;
  double membership_tol = 0.0;
};

namespace detail {

inline CheckReport run_matching_checker(const ExperimentConfig& cfg) {
  auto t_grid = uniform_time_grid(cfg.t, cfg.T, cfg.checker_time_points);
  if (cfg.kind == ExperimentKind::comparison) {
    auto z_grid = uniform_time_grid(-2.0, 2.0, 41);
    return check_comparison(cfg.cf, *cfg.cf2, t_grid, z_grid, cfg.checker_tol);
  }
  return check_constraint(cfg.cf, cfg.constraint, t_grid, cfg.checker_boundary_samples,
                          cfg.checker_tol);
}

inline ExperimentReport aggregate(const ExperimentConfig& cfg, std::vector<PathSummary> paths,
                                  std::vector<double> lambdas, CheckReport checker) {
  ExperimentReport rep;
  rep.kind = cfg.kind;
  rep.n_paths = cfg.n_paths;
  rep.master_seed = cfg.master_seed;
  rep.membership_tol = cfg.membership_tol;
  rep.checker = std::move(checker);
  rep.per_path = std::move(paths);
  std::size_t violations = 0;
  double worst = 0.0;
  for (const auto& p : rep.per_path) {
    if (p.violated) ++violations;
    if (p.blowup) ++rep.n_blowups;
    else worst = std::max(worst, p.excursion);
  }
  rep.violation_fraction =
      static_cast<double>(violations) / static_cast<double>(rep.per_path.size());
  rep.max_excursion = worst;
  if (!lambdas.empty()) {
    rep.lambda_alpha_stats.min = *std::min_element(lambdas.begin(), lambdas.end());
    rep.lambda_alpha_stats.max = *std::max_element(lambdas.begin(), lambdas.end());
    double s = 0.0;
    for (double v : lambdas) s += v;
    rep.lambda_alpha_stats.mean = s / static_cast<double>(lambdas.size());
  }
  return rep;
}

}  // namespace detail

// Viability run: per path, sample a driver with a derived seed, solve, and
// measure the worst signed distance to the constraint set along the path.
// Blown-up paths count as violations and are reported separately.
inline ExperimentReport run_viability(const ExperimentConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  CheckReport checker = detail::run_matching_checker(cfg);
  std::vector<PathSummary> paths(cfg.n_paths);
  std::vector<double> lambdas(cfg.n_paths, 0.0);
  const double alpha =
      cfg.alpha ? *cfg.alpha : 0.5 * ((1.0 - cfg.hurst.value) + 0.5);
  parallel_for(cfg.n_paths, threads, [&](std::size_t i) {
    PathSummary ps;
    ps.seed = mix_seed(cfg.master_seed, i);
    FbmPath driver = sample_fbm(cfg.hurst, cfg.t, cfg.T, cfg.n_steps, ps.seed, cfg.method);
    std::vector<double> x0 = (cfg.x0.mode == X0Policy::Mode::fixed)
                                 ? cfg.x0.value
                                 : cfg.constraint.boundary_point(i, cfg.n_paths);
    try {
      SolutionPath sol = solve_euler(cfg.cf, x0, cfg.t, cfg.T, driver, alpha);
      lambdas[i] = sol.diagnostics.lambda_alpha_driver;
      double worst = 0.0;
      std::vector<double> xk(cfg.cf.d);
      for (std::size_t k = 0; k <= sol.values.n_steps(); ++k) {
        for (int c = 0; c < cfg.cf.d; ++c) xk[c] = sol.values.at(k, c);
        worst = std::max(worst, cfg.constraint.excursion(xk));
      }
      ps.excursion = worst;
      ps.violated = worst > cfg.membership_tol;
    } catch (const BlowupError&) {
      ps.blowup = true;
      ps.violated = true;
      ps.excursion = std::numeric_limits<double>::infinity();
    }
    paths[i] = ps;
  });
  return detail::aggregate(cfg, std::move(paths), std::move(lambdas), std::move(checker));
}

inline ExperimentReport run_positivity(const ExperimentConfig& cfg, unsigned threads = 1) {
  if (cfg.kind != ExperimentKind::positivity)
    throw std::invalid_argument("run_positivity: config kind mismatch");
  return run_viability(cfg, threads);
}

// Comparison run: both equations consume the same realized driver path
// (coupling); the excursion is max over the grid of X - Y.
inline ExperimentReport run_comparison(const ExperimentConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::comparison)
    throw std::invalid_argument("run_comparison: config kind mismatch");
  CheckReport checker = detail::run_matching_checker(cfg);
  std::vector<PathSummary> paths(cfg.n_paths);
  std::vector<double> lambdas(cfg.n_paths, 0.0);
  const double alpha =
      cfg.alpha ? *cfg.alpha : 0.5 * ((1.0 - cfg.hurst.value) + 0.5);
  parallel_for(cfg.n_paths, threads, [&](std::size_t i) {
    PathSummary ps;
    ps.seed = mix_seed(cfg.master_seed, i);
    FbmPath driver = sample_fbm(cfg.hurst, cfg.t, cfg.T, cfg.n_steps, ps.seed, cfg.method);
    try {
      SolutionPath X = solve_euler(cfg.cf, cfg.x0.value, cfg.t, cfg.T, driver, alpha);
      SolutionPath Y = solve_euler(*cfg.cf2, cfg.y0, cfg.t, cfg.T, driver, alpha, false);
      lambdas[i] = X.diagnostics.lambda_alpha_driver;
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k <= X.values.n_steps(); ++k)
        worst = std::max(worst, X.values.at(k, 0) - Y.values.at(k, 0));
      ps.excursion = std::max(0.0, worst);
      ps.violated = worst > cfg.membership_tol;
    } catch (const BlowupError&) {
      ps.blowup = true;
      ps.violated = true;
      ps.excursion = std::numeric_limits<double>::infinity();
    }
    paths[i] = ps;
  });
  return detail::aggregate(cfg, std::move(paths), std::move(lambdas), std::move(checker));
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
  switch (cfg.kind) {
    case ExperimentKind::viability: return run_viability(cfg, threads);
    case ExperimentKind::positivity: return run_positivity(cfg, threads);
    case ExperimentKind::comparison: return run_comparison(cfg, threads);
  }
  throw std::logic_error("unreachable");
}

// Two-sided bound diagnostic for remainder processes U (drift) and V (noise)
// vanishing at the window start:
//   (a) |int_tau^s U dr|     <= D_R (s-t)^{1-a} (s-tau)
//   (b) |int_tau^s V dB|     <= C(a,beta) D~_R Lambda_a(B) (s-t)^{m} (s-tau)^{1-a}
// with m = min{beta, 1-a}. D_R and D~_R are the empirical Holder seminorms of
// U and V at the matching orders; C(a,beta) = 1/(1-a) + 1/(q(q+1)) with
// q = min{beta - a, 1 - 2a} follows the chain of estimates the bound is
// built from. Reported: the worst lhs/rhs ratio over a (tau, s) grid.
struct Lemma41Report {
  double max_ratio_a = 0.0;
  double max_ratio_b = 0.0;
  double holder_U = 0.0;       // D_R
  double holder_V = 0.0;       // D~_R
  double lambda_driver = 0.0;  // Lambda_a(B) on the window
  double chain_constant = 0.0; // C(a,beta)
  std::size_t grid_points = 0;
};

inline Lemma41Report lemma41_diagnostic(const GridFunction& U, const GridFunction& V,
                                        const FbmPath& driver, FracOrder alpha, double t,
                                        double h_bar, double beta = 1.0,
                                        std::size_t grid_points = 50) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("lemma41: need 0 < beta <= 1");
  const double a = alpha.alpha;
  GridFunction B = driver.to_grid();
  if (!U.same_grid(B) || !V.same_grid(B))
    throw std::invalid_argument("lemma41: U, V and driver must share one grid");
  const std::size_t i0 = B.index_of(t), i1 = B.index_of(t + h_bar);
  if (i1 <= i0) throw std::invalid_argument("lemma41: empty window");
  for (int c = 0; c < U.dim(); ++c)
    if (std::abs(U.at(i0, c)) > 1e-12 || std::abs(V.at(i0, c)) > 1e-12)
      throw std::invalid_argument("lemma41: U and V must vanish at the window start");
  if (U.dim() != 1 || V.dim() != 1)
    throw std::invalid_argument("lemma41: scalar processes expected");

  const double h = B.step();
  Lemma41Report rep;
  const double m_exp = std::min(beta, 1.0 - a);
  GridFunction Uw = U.restrict_to(i0, i1);
  GridFunction Vw = V.restrict_to(i0, i1);
  GridFunction Bw = B.restrict_to(i0, i1);
  rep.holder_U = holder_seminorm(Uw, 1.0 - a);
  rep.holder_V = holder_seminorm(Vw, m_exp);
  rep.lambda_driver = lambda_alpha(Bw, alpha);
  const double q = std::min(beta - a, 1.0 - 2.0 * a);
  if (!(q > 0.0)) throw std::invalid_argument("lemma41: need alpha < min{beta, 1/2}");
  rep.chain_constant = 1.0 / (1.0 - a) + 1.0 / (q * (q + 1.0));
  rep.grid_points = grid_points;

  // prefix sums: trapezoid for int U dr, left-point for int V dB
  const std::size_t n = i1 - i0;
  std::vector<double> preU(n + 1, 0.0), preV(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    preU[k + 1] = preU[k] + 0.5 * h * (Uw.at(k, 0) + Uw.at(k + 1, 0));
    preV[k + 1] = preV[k] + Vw.at(k, 0) * (Bw.at(k + 1, 0) - Bw.at(k, 0));
  }

  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < grid_points; ++j)
    idx.push_back(j * n / (grid_points - 1));
  for (std::size_t ii = 0; ii < idx.size(); ++ii) {
    for (std::size_t jj = ii + 1; jj < idx.size(); ++jj) {
      const std::size_t tau = idx[ii], s = idx[jj];
      if (s <= tau) continue;
      const double st = static_cast<double>(s) * h;       // s - t
      const double stau = static_cast<double>(s - tau) * h;
      const double lhs_a = std::abs(preU[s] - preU[tau]);
      const double rhs_a = rep.holder_U * std::pow(st, 1.0 - a) * stau;
      if (rhs_a > 0.0) rep.max_ratio_a = std::max(rep.max_ratio_a, lhs_a / rhs_a);
      const double lhs_b = std::abs(preV[s] - preV[tau]);
      const double rhs_b = rep.chain_constant * rep.holder_V * rep.lambda_driver *
                           std::pow(st, m_exp) * std::pow(stau, 1.0 - a);
      if (rhs_b > 0.0) rep.max_ratio_b = std::max(rep.max_ratio_b, lhs_b / rhs_b);
    }
  }
  return rep;
}

}  // namespace fsde
