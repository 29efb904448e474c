// Deterministic condition checkers for the constraint-set catalog. Every
// checker is a falsifier over finite samples: FAIL carries witnesses, PASS
// means no violation was found at the sampled resolution.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fsde/coeff.hpp"
#include "fsde/constraint.hpp"

namespace fsde {

struct CheckWitness {
  double t = 0.0;
  std::vector<double> x;
  std::string clause;
  double lhs = 0.0;
};

struct CheckReport {
  bool pass = true;
  double tolerance = 0.0;
  std::vector<CheckWitness> witnesses;  // capped; n_violations counts all
  std::size_t n_checked = 0;
  std::size_t n_violations = 0;
  static constexpr std::size_t kMaxWitnesses = 32;
  static constexpr const char* kNote =
      "falsifier semantics: PASS means no violation found at the sampled resolution";

  void record(double t, std::span<const double> x, const std::string& clause, double lhs) {
    pass = false;
    ++n_violations;
    if (witnesses.size() < kMaxWitnesses)
      witnesses.push_back({t, {x.begin(), x.end()}, clause, lhs});
  }
};

// default absolute tolerance for equality clauses: tight for analytic catalog
// fields, looser for parsed expression fields
inline double default_check_tol(const CoefficientField& cf) {
  return cf.catalog_exact ? 1e-9 : 1e-7;
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// sphere |x| = rho: <x, b> = 0 and <x, sigma> = 0 on the whole set
inline CheckReport check_sphere(const CoefficientField& cf, double rho,
                                const std::vector<double>& t_grid, std::size_t boundary_samples,
                                double tol = -1.0) {
  if (tol < 0.0) tol = default_check_tol(cf);
  CheckReport rep;
  rep.tolerance = tol;
  auto K = ConstraintSet::sphere(rho, cf.d);
  auto pts = K.boundary_sample(boundary_samples);
  for (double t : t_grid) {
    for (const auto& x : pts) {
      auto [bv, sv] = eval_field(cf, t, x);
      ++rep.n_checked;
      const double xb = detail::dot(x, bv);
      const double xs = detail::dot(x, sv);
      if (std::abs(xb) > tol) rep.record(t, x, "<x,b> = 0", xb);
      if (std::abs(xs) > tol) rep.record(t, x, "<x,sigma> = 0", xs);
    }
  }
  return rep;
}

// closed ball |x| <= rho: <x, b> <= 0 and <x, sigma> = 0 on the boundary
inline CheckReport check_ball(const CoefficientField& cf, double rho,
                              const std::vector<double>& t_grid, std::size_t boundary_samples,
                              double tol = -1.0) {
  if (tol < 0.0) tol = default_check_tol(cf);
  CheckReport rep;
  rep.tolerance = tol;
  auto K = ConstraintSet::ball(rho, cf.d);
  auto pts = K.boundary_sample(boundary_samples);
  for (double t : t_grid) {
    for (const auto& x : pts) {
      auto [bv, sv] = eval_field(cf, t, x);
      ++rep.n_checked;
      const double xb = detail::dot(x, bv);
      const double xs = detail::dot(x, sv);
      if (xb > tol) rep.record(t, x, "<x,b> <= 0", xb);
      if (std::abs(xs) > tol) rep.record(t, x, "<x,sigma> = 0", xs);
    }
  }
  return rep;
}

// annulus r <= |x| <= R: outward clause on the outer shell, inward on the
// inner shell, noise orthogonal on both
inline CheckReport check_annulus(const CoefficientField& cf, double r_in, double r_out,
                                 const std::vector<double>& t_grid, std::size_t boundary_samples,
                                 double tol = -1.0) {
  if (tol < 0.0) tol = default_check_tol(cf);
  CheckReport rep;
  rep.tolerance = tol;
  auto K = ConstraintSet::annulus(r_in, r_out, cf.d);
  auto pts = K.boundary_sample(boundary_samples);
  for (double t : t_grid) {
    for (const auto& x : pts) {
      double radius = 0.0;
      for (double v : x) radius += v * v;
      radius = std::sqrt(radius);
      const bool outer = radius > 0.5 * (r_in + r_out);
      auto [bv, sv] = eval_field(cf, t, x);
      ++rep.n_checked;
      const double xb = detail::dot(x, bv);
      const double xs = detail::dot(x, sv);
      if (outer) {
        if (xb > tol) rep.record(t, x, "outer shell: <x,b> <= 0", xb);
      } else {
        if (xb < -tol) rep.record(t, x, "inner shell: <x,b> >= 0", xb);
      }
      if (std::abs(xs) > tol)
        rep.record(t, x, outer ? "outer shell: <x,sigma> = 0" : "inner shell: <x,sigma> = 0", xs);
    }
  }
  return rep;
}

// half line [0, inf), d = 1: b(t,0) >= 0 and sigma(t,0) = 0
inline CheckReport check_positivity(const CoefficientField& cf, const std::vector<double>& t_grid,
                                    double tol = -1.0) {
  if (cf.d != 1) throw std::invalid_argument("check_positivity: needs a one-dimensional field");
  if (tol < 0.0) tol = default_check_tol(cf);
  CheckReport rep;
  rep.tolerance = tol;
  const std::vector<double> zero{0.0};
  for (double t : t_grid) {
    auto [bv, sv] = eval_field(cf, t, zero);
    ++rep.n_checked;
    if (bv[0] < -tol) rep.record(t, zero, "b(t,0) >= 0", bv[0]);
    if (std::abs(sv[0]) > tol) rep.record(t, zero, "sigma(t,0) = 0", sv[0]);
  }
  return rep;
}

// comparison of two scalar equations: b1(t,z) <= b2(t,z), sigma1 = sigma2
inline CheckReport check_comparison(const CoefficientField& cf1, const CoefficientField& cf2,
                                    const std::vector<double>& t_grid,
                                    const std::vector<double>& z_grid, double tol = -1.0) {
  if (cf1.d != 1 || cf2.d != 1)
    throw std::invalid_argument("check_comparison: needs one-dimensional fields");
  if (tol < 0.0) tol = std::max(default_check_tol(cf1), default_check_tol(cf2));
  CheckReport rep;
  rep.tolerance = tol;
  for (double t : t_grid) {
    for (double z : z_grid) {
      const std::vector<double> x{z};
      auto [b1, s1] = eval_field(cf1, t, x);
      auto [b2, s2] = eval_field(cf2, t, x);
      ++rep.n_checked;
      if (b1[0] > b2[0] + tol) rep.record(t, x, "b1(t,z) <= b2(t,z)", b1[0] - b2[0]);
      const double ds = s1[0] - s2[0];
      if (std::abs(ds) > tol) rep.record(t, x, "sigma1(t,z) = sigma2(t,z)", ds);
    }
  }
  return rep;
}

// dispatch a constraint to its matching condition checker
inline CheckReport check_constraint(const CoefficientField& cf, const ConstraintSet& K,
                                    const std::vector<double>& t_grid,
                                    std::size_t boundary_samples, double tol = -1.0) {
  switch (K.kind) {
    case ConstraintKind::sphere: return check_sphere(cf, K.rho, t_grid, boundary_samples, tol);
    case ConstraintKind::ball: return check_ball(cf, K.rho, t_grid, boundary_samples, tol);
    case ConstraintKind::annulus:
      return check_annulus(cf, K.r_in, K.r_out, t_grid, boundary_samples, tol);
    case ConstraintKind::half_line: return check_positivity(cf, t_grid, tol);
    case ConstraintKind::comparison_cone:
      throw std::invalid_argument("comparison_cone needs two coefficient fields; use check_comparison");
  }
  throw std::logic_error("unreachable");
}

inline std::vector<double> uniform_time_grid(double t0, double t1, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = (n == 1) ? t0 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

}  // namespace fsde
