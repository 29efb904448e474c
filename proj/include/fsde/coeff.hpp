// Coefficient fields (b, sigma): declaration, evaluation, finite-difference
// Jacobian, and a sampling-based audit of the regularity assumptions that the
// solvability theory needs. The audit is a falsifier: it produces empirical
// lower bounds for the constants and exponent fits, never a proof.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsde/expr.hpp"
#include "fsde/frac.hpp"
#include "fsde/rng.hpp"

namespace fsde {

struct Regularity {
  double M0 = 0.0;    // sigma space/time constant
  double L0 = 0.0;    // b linear-growth constant
  double LR = 0.0;    // b local Lipschitz constant
  double MR = 0.0;    // grad sigma Holder constant
  double beta = 1.0;  // sigma time exponent
  double delta = 1.0; // grad sigma space exponent
  double mu = 1.0;    // b time exponent
};

struct CoefficientField {
  int d = 1;
  std::vector<Expr> b;
  std::vector<Expr> sigma;
  std::vector<std::string> b_src;
  std::vector<std::string> sigma_src;
  bool catalog_exact = false;   // built from the analytic catalog, not parsed text
  std::string catalog_name;
  Regularity regularity;
};

inline CoefficientField make_coefficients(int d, const std::vector<std::string>& b_text,
                                          const std::vector<std::string>& sigma_text) {
  if (d < 1) throw std::invalid_argument("coefficients: need d >= 1");
  if (static_cast<int>(b_text.size()) != d || static_cast<int>(sigma_text.size()) != d)
    throw std::invalid_argument("coefficients: b and sigma need exactly d entries");
  CoefficientField cf;
  cf.d = d;
  cf.b_src = b_text;
  cf.sigma_src = sigma_text;
  for (const auto& s : b_text) cf.b.push_back(parse_expression(s));
  for (const auto& s : sigma_text) cf.sigma.push_back(parse_expression(s));
  return cf;
}

// b = f x + f1, sigma = g x + g1 (scalar linear family)
inline CoefficientField make_linear(double f, double f1, double g, double g1) {
  CoefficientField cf;
  cf.d = 1;
  cf.catalog_exact = true;
  cf.catalog_name = "linear";
  cf.b.push_back(Expr::binary(ExprKind::add,
                              Expr::binary(ExprKind::mul, Expr::constant(f), Expr::x(0)),
                              Expr::constant(f1)));
  cf.sigma.push_back(Expr::binary(ExprKind::add,
                                  Expr::binary(ExprKind::mul, Expr::constant(g), Expr::x(0)),
                                  Expr::constant(g1)));
  cf.b_src = {print_expression(cf.b[0])};
  cf.sigma_src = {print_expression(cf.sigma[0])};
  return cf;
}

// planar rotation field: b = sigma = (-x2, x1)
inline CoefficientField make_rotation() {
  CoefficientField cf;
  cf.d = 2;
  cf.catalog_exact = true;
  cf.catalog_name = "rotation";
  cf.b = {Expr::unary(ExprKind::neg, Expr::x(1)), Expr::x(0)};
  cf.sigma = cf.b;
  cf.b_src = {"-x2", "x1"};
  cf.sigma_src = {"-x2", "x1"};
  return cf;
}

inline CoefficientField make_logistic() {
  CoefficientField cf;
  cf.d = 1;
  cf.catalog_exact = true;
  cf.catalog_name = "logistic";
  cf.b.push_back(Expr::binary(ExprKind::mul, Expr::x(0),
                              Expr::binary(ExprKind::sub, Expr::constant(1.0), Expr::x(0))));
  cf.sigma.push_back(Expr::x(0));
  cf.b_src = {"x1*(1 - x1)"};
  cf.sigma_src = {"x1"};
  return cf;
}

inline std::vector<double> eval_component_list(const std::vector<Expr>& exprs, double t,
                                               std::span<const double> x, const char* which) {
  std::vector<double> out(exprs.size());
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    try {
      out[i] = eval_expression(exprs[i], t, x);
    } catch (const EvalError& e) {
      throw EvalError(std::string(which) + " component " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

inline std::pair<std::vector<double>, std::vector<double>> eval_field(
    const CoefficientField& cf, double t, std::span<const double> x) {
  if (static_cast<int>(x.size()) != cf.d)
    throw std::invalid_argument("eval_field: x has dimension " + std::to_string(x.size()) +
                                ", field expects " + std::to_string(cf.d));
  return {eval_component_list(cf.b, t, x, "b"), eval_component_list(cf.sigma, t, x, "sigma")};
}

inline std::vector<double> eval_b(const CoefficientField& cf, double t,
                                  std::span<const double> x) {
  return eval_component_list(cf.b, t, x, "b");
}

inline std::vector<double> eval_sigma(const CoefficientField& cf, double t,
                                      std::span<const double> x) {
  return eval_component_list(cf.sigma, t, x, "sigma");
}

// central finite-difference Jacobian of sigma, row-major (i,j) = d sigma^i / d x_j
inline std::vector<double> grad_sigma(const CoefficientField& cf, double t,
                                      std::span<const double> x, double h_fd) {
  if (!(h_fd > 0.0)) throw std::invalid_argument("grad_sigma: need h_fd > 0");
  const int d = cf.d;
  std::vector<double> J(static_cast<std::size_t>(d) * d);
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h_fd;
    xm[j] = x[j] - h_fd;
    auto sp = eval_sigma(cf, t, xp);
    auto sm = eval_sigma(cf, t, xm);
    for (int i = 0; i < d; ++i) J[static_cast<std::size_t>(i) * d + j] = (sp[i] - sm[i]) / (2.0 * h_fd);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

struct AuditBox {
  std::vector<double> lo, hi;  // spatial box, one entry per dimension
  double t0 = 0.0;
  double t1 = 1.0;
};

struct AuditWitness {
  double t = 0.0, s = 0.0;
  std::vector<double> x, y;
  double ratio = 0.0;
};

struct ConditionCheck {
  std::string name;
  bool warn = false;
  std::string detail;
  AuditWitness witness;
};

struct RegularityReport {
  Regularity fitted;
  std::vector<ConditionCheck> conditions;
  std::size_t n_samples = 0;

  bool any_warn() const {
    for (const auto& c : conditions)
      if (c.warn) return true;
    return false;
  }

  // exponents passed downstream carry a 0.9 safety factor on the fits
  static constexpr double kExponentSafety = 0.9;
  double safe_beta() const { return std::min(1.0, fitted.beta * kExponentSafety); }
  double safe_delta() const { return std::min(1.0, fitted.delta * kExponentSafety); }
};

namespace detail {

inline double vec_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double vec_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// envelope exponent fit: bin log separation, regress log of the per-bin max
// difference. Degenerate data (everything ~0) reports exponent 1.
inline double envelope_exponent(const std::vector<std::pair<double, double>>& sep_diff) {
  constexpr int kBins = 10;
  double lo = 1e300, hi = -1e300;
  for (const auto& [sep, diff] : sep_diff) {
    if (sep <= 0.0) continue;
    lo = std::min(lo, std::log(sep));
    hi = std::max(hi, std::log(sep));
  }
  if (!(hi > lo)) return 1.0;
  std::vector<double> bin_max(kBins, 0.0);
  for (const auto& [sep, diff] : sep_diff) {
    if (sep <= 0.0) continue;
    int b = std::min(kBins - 1, static_cast<int>((std::log(sep) - lo) / (hi - lo) * kBins));
    bin_max[b] = std::max(bin_max[b], diff);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int b = 0; b < kBins; ++b) {
    if (bin_max[b] < 1e-13) continue;
    double xc = lo + (b + 0.5) * (hi - lo) / kBins;
    double yc = std::log(bin_max[b]);
    sx += xc; sy += yc; sxx += xc * xc; sxy += xc * yc;
    ++m;
  }
  if (m < 3) return 1.0;
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return std::clamp(slope, 0.05, 1.0);
}

}  // namespace detail

// Monte Carlo regularity audit over the box. Deterministic in (cf, box,
// n_samples, seed); the sample stream is a prefix sequence, so every fitted
// constant is nondecreasing in n_samples.
inline RegularityReport audit_regularity(const CoefficientField& cf, const AuditBox& box,
                                         std::size_t n_samples, std::uint64_t seed = 20240901) {
  const int d = cf.d;
  if (static_cast<int>(box.lo.size()) != d || static_cast<int>(box.hi.size()) != d)
    throw std::invalid_argument("audit_regularity: box dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (!(box.hi[i] > box.lo[i])) throw std::invalid_argument("audit_regularity: empty box");
  if (n_samples < 8) throw std::invalid_argument("audit_regularity: need at least 8 samples");

  RegularityReport rep;
  rep.n_samples = n_samples;

  const double h_fd = 1e-5;
  double m0_space = 0.0, l0 = 0.0, lr_space = 0.0;
  AuditWitness w_m0, w_l0, w_lr, w_grad;
  std::vector<std::pair<double, double>> sigma_time, b_time, grad_space;
  // (separation, ratio) pairs for the divergence check on the space Lipschitz ratio
  std::vector<std::pair<double, double>> sigma_space_ratios;
  double mr = 0.0;

  std::vector<double> x(d), y(d);
  for (std::size_t k = 0; k < n_samples; ++k) {
    Rng rng(mix_seed(seed, k));
    const double t1 = box.t0 + (box.t1 - box.t0) * rng.uniform01();
    const double t2 = box.t0 + (box.t1 - box.t0) * rng.uniform01();
    for (int i = 0; i < d; ++i) {
      x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform01();
      y[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform01();
    }
    try {
      auto s_x1 = eval_sigma(cf, t1, x);
      auto s_y1 = eval_sigma(cf, t1, y);
      auto s_x2 = eval_sigma(cf, t2, x);
      auto b_x1 = eval_b(cf, t1, x);
      auto b_y1 = eval_b(cf, t1, y);
      auto b_x2 = eval_b(cf, t2, x);
      auto g_x1 = grad_sigma(cf, t1, x, h_fd);
      auto g_y1 = grad_sigma(cf, t1, y, h_fd);

      const double dxy = detail::vec_dist(x, y);
      const double dt = std::abs(t1 - t2);
      if (dxy > 1e-12) {
        const double r = detail::vec_dist(s_x1, s_y1) / dxy;
        sigma_space_ratios.emplace_back(dxy, r);
        if (r > m0_space) {
          m0_space = r;
          w_m0 = {t1, t1, x, y, r};
        }
        const double rb = detail::vec_dist(b_x1, b_y1) / dxy;
        if (rb > lr_space) {
          lr_space = rb;
          w_lr = {t1, t1, x, y, rb};
        }
        const double rg = detail::vec_dist(g_x1, g_y1);
        grad_space.emplace_back(dxy, rg);
      }
      if (dt > 1e-12) {
        sigma_time.emplace_back(dt, detail::vec_dist(s_x1, s_x2));
        b_time.emplace_back(dt, detail::vec_dist(b_x1, b_x2));
      }
      const double growth = detail::vec_norm(b_x1) / (1.0 + detail::vec_norm(x));
      if (growth > l0) {
        l0 = growth;
        w_l0 = {t1, t1, x, x, growth};
      }
    } catch (const EvalError&) {
      // unevaluable sample points are skipped; the audit is a falsifier
      continue;
    }
  }

  rep.fitted.beta = detail::envelope_exponent(sigma_time);
  rep.fitted.mu = detail::envelope_exponent(b_time);
  rep.fitted.delta = detail::envelope_exponent(grad_space);
  rep.fitted.L0 = l0;
  rep.fitted.LR = lr_space;

  double m0_time = 0.0;
  for (const auto& [dt, diff] : sigma_time)
    m0_time = std::max(m0_time, diff / std::pow(dt, rep.fitted.beta));
  rep.fitted.M0 = std::max(m0_space, m0_time);
  for (const auto& [dxy, diff] : grad_space)
    mr = std::max(mr, diff / std::pow(dxy, rep.fitted.delta));
  rep.fitted.MR = mr;

  // divergence detection on the space Lipschitz ratio of sigma
  {
    ConditionCheck c;
    c.name = "sigma_space_lipschitz";
    std::vector<double> seps;
    for (const auto& [s, r] : sigma_space_ratios) seps.push_back(s);
    std::sort(seps.begin(), seps.end());
    if (!seps.empty()) {
      const double q25 = seps[seps.size() / 4];
      const double q50 = seps[seps.size() / 2];
      double rmax_small = 0.0, rmax_large = 0.0;
      for (const auto& [s, r] : sigma_space_ratios) {
        if (s <= q25) rmax_small = std::max(rmax_small, r);
        if (s >= q50) rmax_large = std::max(rmax_large, r);
      }
      c.warn = rmax_small > 5.0 * std::max(rmax_large, 1e-12);
      std::ostringstream os;
      os << "max ratio " << m0_space << " (small-separation max " << rmax_small << ")";
      c.detail = os.str();
    }
    c.witness = w_m0;
    rep.conditions.push_back(std::move(c));
  }
  {
    ConditionCheck c;
    c.name = "sigma_time_holder";
    c.warn = rep.fitted.beta < 0.1;
    c.detail = "fitted beta " + std::to_string(rep.fitted.beta);
    rep.conditions.push_back(std::move(c));
  }
  {
    ConditionCheck c;
    c.name = "grad_sigma_holder";
    c.warn = rep.fitted.delta < 0.1;
    c.detail = "fitted delta " + std::to_string(rep.fitted.delta) + ", M_R " + std::to_string(mr);
    c.witness = w_grad;
    rep.conditions.push_back(std::move(c));
  }
  {
    ConditionCheck c;
    c.name = "b_growth";
    c.detail = "fitted L0 " + std::to_string(l0);
    c.witness = w_l0;
    rep.conditions.push_back(std::move(c));
  }
  {
    ConditionCheck c;
    c.name = "b_local_lipschitz";
    c.detail = "fitted L_R " + std::to_string(lr_space) + ", mu " + std::to_string(rep.fitted.mu);
    c.witness = w_lr;
    rep.conditions.push_back(std::move(c));
  }
  return rep;
}

// alpha_0 = min{1/2, beta, delta/(1+delta)}
inline double alpha_zero(double beta, double delta) {
  if (!(beta > 0.0 && beta <= 1.0) || !(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("alpha_zero: need 0 < beta, delta <= 1");
  return std::min({0.5, beta, delta / (1.0 + delta)});
}

// midpoint of the admissible interval (1-H, alpha_0)
inline FracOrder default_alpha(double hurst, double alpha0) {
  const double lo = 1.0 - hurst;
  if (!(lo < alpha0)) {
    std::ostringstream os;
    os << "no admissible fractional order: requires 1 - H < alpha_0 but 1 - H = " << lo
       << " and alpha_0 = " << alpha0 << " (coefficients too rough for this Hurst index)";
    throw std::invalid_argument(os.str());
  }
  return FracOrder(0.5 * (lo + alpha0));
}

}  // namespace fsde
