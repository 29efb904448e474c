// Constraint-set catalog: membership, signed excursion outside the set, and
// deterministic low-discrepancy boundary samplers.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsde/rng.hpp"

namespace fsde {

enum class ConstraintKind { sphere, ball, annulus, half_line, comparison_cone };

inline const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::sphere: return "sphere";
    case ConstraintKind::ball: return "ball";
    case ConstraintKind::annulus: return "annulus";
    case ConstraintKind::half_line: return "half_line";
    case ConstraintKind::comparison_cone: return "comparison_cone";
  }
  return "?";
}

namespace detail {

inline double van_der_corput(std::uint64_t k) {
  double v = 0.0, base = 0.5;
  for (++k; k > 0; k >>= 1, base *= 0.5)
    if (k & 1) v += base;
  return v;
}

// deterministic point on the unit sphere S^{d-1}; golden-angle for d = 2,
// Fibonacci lattice for d = 3, hashed Gaussian directions above that
inline std::vector<double> unit_sphere_point(int d, std::uint64_t k, std::uint64_t n_total = 0) {
  if (d == 1) return {k % 2 == 0 ? 1.0 : -1.0};
  if (d == 2) {
    const double golden = 2.39996322972865332;  // 2*pi*(1 - 1/phi)
    const double th = golden * static_cast<double>(k);
    return {std::cos(th), std::sin(th)};
  }
  if (d == 3 && n_total > 0) {
    const double golden = 2.39996322972865332;
    const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(n_total);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = golden * static_cast<double>(k);
    return {r * std::cos(th), r * std::sin(th), z};
  }
  Rng rng(mix_seed(0x5f3759df, k));
  std::vector<double> v(d);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
      v[i] = rng.gauss();
      norm2 += v[i] * v[i];
    }
  } while (norm2 < 1e-12);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& vi : v) vi *= inv;
  return v;
}

}  // namespace detail

struct ConstraintSet {
  ConstraintKind kind = ConstraintKind::ball;
  int d = 1;
  double rho = 1.0;              // sphere / ball radius
  double r_in = 0.0, r_out = 1.0;  // annulus radii

  static ConstraintSet sphere(double rho, int d) {
    if (!(rho > 0.0)) throw std::invalid_argument("sphere: need rho > 0");
    return {ConstraintKind::sphere, d, rho, 0.0, 0.0};
  }
  static ConstraintSet ball(double rho, int d) {
    if (!(rho > 0.0)) throw std::invalid_argument("ball: need rho > 0");
    return {ConstraintKind::ball, d, rho, 0.0, 0.0};
  }
  static ConstraintSet annulus(double r_in, double r_out, int d) {
    if (!(0.0 < r_in && r_in < r_out)) throw std::invalid_argument("annulus: need 0 < r < R");
    return {ConstraintKind::annulus, d, 0.0, r_in, r_out};
  }
  static ConstraintSet half_line() { return {ConstraintKind::half_line, 1, 0.0, 0.0, 0.0}; }
  static ConstraintSet comparison_cone() {
    return {ConstraintKind::comparison_cone, 2, 0.0, 0.0, 0.0};
  }

  // signed distance outside the set (0 when x is a member)
  double excursion(std::span<const double> x) const {
    double r = 0.0;
    for (double v : x) r += v * v;
    r = std::sqrt(r);
    switch (kind) {
      case ConstraintKind::sphere: return std::abs(r - rho);
      case ConstraintKind::ball: return std::max(0.0, r - rho);
      case ConstraintKind::annulus: return std::max({0.0, r_in - r, r - r_out});
      case ConstraintKind::half_line: return std::max(0.0, -x[0]);
      case ConstraintKind::comparison_cone: return std::max(0.0, x[0] - x[1]);
    }
    return 0.0;
  }

  bool contains(std::span<const double> x, double tol) const { return excursion(x) <= tol; }

  // k-th deterministic boundary point; n_total shapes lattice samplers
  std::vector<double> boundary_point(std::uint64_t k, std::uint64_t n_total = 0) const {
    switch (kind) {
      case ConstraintKind::sphere:
      case ConstraintKind::ball: {
        auto u = detail::unit_sphere_point(d, k, n_total);
        for (auto& v : u) v *= rho;
        return u;
      }
      case ConstraintKind::annulus: {
        auto u = detail::unit_sphere_point(d, k / 2, n_total ? n_total / 2 : 0);
        const double radius = (k % 2 == 0) ? r_out : r_in;
        for (auto& v : u) v *= radius;
        return u;
      }
      case ConstraintKind::half_line:
        return {0.0};
      case ConstraintKind::comparison_cone: {
        // boundary is the diagonal; spread points over [-2, 2]
        const double z = -2.0 + 4.0 * detail::van_der_corput(k);
        return {z, z};
      }
    }
    return {};
  }

  std::vector<std::vector<double>> boundary_sample(std::size_t n) const {
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    for (std::size_t k = 0; k < n; ++k) pts.push_back(boundary_point(k, n));
    return pts;
  }
};

}  // namespace fsde
