// Transform maps phi with analytic Jacobian and right inverse on a radial
// band, the push-forward of coefficient pairs through phi, and a sampling
// verifier for the right-inverse regularity bounds.
#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsde/check.hpp"
#include "fsde/coeff.hpp"
#include "fsde/constraint.hpp"

namespace fsde {

// Row-major dense matrix, minimal surface for the small sizes used here.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  Mat mul(const Mat& o) const {
    Mat out(rows, o.cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k)
        for (int j = 0; j < o.cols; ++j) out(i, j) += (*this)(i, k) * o(k, j);
    return out;
  }

  std::vector<double> mulvec(std::span<const double> v) const {
    std::vector<double> out(rows, 0.0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

  double frobenius() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
  }
};

struct TransformMap {
  std::string name;
  int d_in = 1, d_out = 1;
  std::function<std::vector<double>(std::span<const double>)> phi;
  std::function<Mat(std::span<const double>)> jacobian;       // d_out x d_in
  std::function<Mat(std::span<const double>)> right_inverse;  // d_in x d_out
  double band_lo = 0.0, band_hi = 1.0;  // validity band on |x|
  double bound_M = 0.0;                 // |[phi'+]'| <= M on the band
  double bound_L = 0.0;                 // Lipschitz constant of [phi'+]'

  bool in_band(std::span<const double> x, double eps = 0.0) const {
    double r = 0.0;
    for (double v : x) r += v * v;
    r = std::sqrt(r);
    return r >= band_lo + eps && r <= band_hi - eps;
  }
};

// phi(x) = |x|^2 with right inverse x / (2|x|^2) on a band away from the
// origin. For a positive band floor a the analytic bounds are
// |[phi'+]'| = sqrt(d)/(2 r^2) <= sqrt(d)/(2 a^2) and the Lipschitz constant
// sqrt(3d-2)/a^3. A band touching 0 keeps the reference-band bounds, which
// the verifier then falsifies near the origin.
inline TransformMap squared_norm_map(int d, double band_lo = 0.25, double band_hi = 4.0) {
  if (!(band_hi > band_lo) || band_lo < 0.0)
    throw std::invalid_argument("squared_norm_map: bad band");
  TransformMap m;
  m.name = "squared_norm";
  m.d_in = d;
  m.d_out = 1;
  m.band_lo = band_lo;
  m.band_hi = band_hi;
  const double a_ref = band_lo > 0.0 ? band_lo : 0.25;
  m.bound_M = 1.02 * std::sqrt(static_cast<double>(d)) / (2.0 * a_ref * a_ref);
  m.bound_L = 1.02 * std::sqrt(3.0 * d - 2.0) / (a_ref * a_ref * a_ref);
  m.phi = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::vector<double>{s};
  };
  m.jacobian = [d](std::span<const double> x) {
    Mat J(1, d);
    for (int j = 0; j < d; ++j) J(0, j) = 2.0 * x[j];
    return J;
  };
  m.right_inverse = [d](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    if (s == 0.0) throw std::domain_error("squared_norm right inverse undefined at x = 0");
    Mat P(d, 1);
    for (int i = 0; i < d; ++i) P(i, 0) = x[i] / (2.0 * s);
    return P;
  };
  return m;
}

// phi(x, y) = y - x; phi' = (-1, 1), right inverse (1/2)(-1, 1)^T everywhere.
inline TransformMap difference_map(double band_lo = 0.0, double band_hi = 8.0) {
  TransformMap m;
  m.name = "difference";
  m.d_in = 2;
  m.d_out = 1;
  m.band_lo = band_lo;
  m.band_hi = band_hi;
  m.bound_M = 0.01;  // derivative of the right inverse vanishes identically
  m.bound_L = 0.01;
  m.phi = [](std::span<const double> z) { return std::vector<double>{z[1] - z[0]}; };
  m.jacobian = [](std::span<const double>) {
    Mat J(1, 2);
    J(0, 0) = -1.0;
    J(0, 1) = 1.0;
    return J;
  };
  m.right_inverse = [](std::span<const double>) {
    Mat P(2, 1);
    P(0, 0) = -0.5;
    P(1, 0) = 0.5;
    return P;
  };
  return m;
}

// (phi'(x) b(t,x), phi'(x) sigma(t,x)); x must lie in the band shrunk by eps.
// eps < 0 selects the default margin 0.1*(band width).
inline std::pair<std::vector<double>, std::vector<double>> pushforward_pair(
    const TransformMap& map, double t, std::span<const double> x, const CoefficientField& cf,
    double eps = -1.0) {
  if (static_cast<int>(x.size()) != map.d_in || cf.d != map.d_in)
    throw std::invalid_argument("pushforward_pair: dimension mismatch");
  if (eps < 0.0) eps = 0.1 * (map.band_hi - map.band_lo);
  if (!map.in_band(x, eps))
    throw std::domain_error("pushforward_pair: |x| outside validity band [" +
                            std::to_string(map.band_lo + eps) + ", " +
                            std::to_string(map.band_hi - eps) + "]");
  auto [bv, sv] = eval_field(cf, t, x);
  Mat J = map.jacobian(x);
  return {J.mulvec(bv), J.mulvec(sv)};
}

namespace detail {

// finite-difference derivative tensor of the right inverse, returned as the
// Frobenius norm over all (i, j, k) entries
inline double right_inverse_derivative_norm(const TransformMap& map, std::span<const double> x,
                                            double fd_step, Mat* tensor_flat = nullptr) {
  const int d = map.d_in;
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  double sum2 = 0.0;
  Mat flat(d * map.d_out, d);
  for (int k = 0; k < d; ++k) {
    xp[k] = x[k] + fd_step;
    xm[k] = x[k] - fd_step;
    Mat Pp = map.right_inverse(xp);
    Mat Pm = map.right_inverse(xm);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < map.d_out; ++j) {
        const double dv = (Pp(i, j) - Pm(i, j)) / (2.0 * fd_step);
        sum2 += dv * dv;
        flat(i * map.d_out + j, k) = dv;
      }
    xp[k] = x[k];
    xm[k] = x[k];
  }
  if (tensor_flat) *tensor_flat = std::move(flat);
  return std::sqrt(sum2);
}

}  // namespace detail

// Samples the band and checks, pointwise: phi' phi'+ = I (to 1e-10), the
// finite-difference bound |[phi'+]'| <= M, and pairwise Lipschitz ratios of
// [phi'+]' against L. Falsifier semantics as in the other checkers.
inline CheckReport verify_class_H(const TransformMap& map, std::size_t n_samples,
                                  double fd_step = 1e-6) {
  if (!(map.band_hi > map.band_lo)) throw std::invalid_argument("verify_class_H: empty band");
  CheckReport rep;
  rep.tolerance = 1e-10;
  const double bound_slack = 1.005;  // absorbs finite-difference truncation

  std::vector<double> prev_x;
  Mat prev_tensor;
  bool have_prev = false;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double radius =
        map.band_lo + (map.band_hi - map.band_lo) * detail::van_der_corput(k);
    auto x = detail::unit_sphere_point(map.d_in, k);
    for (auto& v : x) v *= radius;
    ++rep.n_checked;

    try {
      Mat J = map.jacobian(x);
      Mat P = map.right_inverse(x);
      Mat JP = J.mul(P);
      double dev2 = 0.0;
      for (int i = 0; i < map.d_out; ++i)
        for (int j = 0; j < map.d_out; ++j) {
          const double target = (i == j) ? 1.0 : 0.0;
          dev2 += (JP(i, j) - target) * (JP(i, j) - target);
        }
      const double dev = std::sqrt(dev2);
      if (dev > 1e-10) rep.record(0.0, x, "phi' phi'+ = I", dev);

      Mat tensor;
      const double dnorm = detail::right_inverse_derivative_norm(map, x, fd_step, &tensor);
      if (dnorm > map.bound_M * bound_slack + 1e-8)
        rep.record(0.0, x, "|[phi'+]'| <= M", dnorm);

      if (have_prev) {
        double dist2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
          dist2 += (x[i] - prev_x[i]) * (x[i] - prev_x[i]);
        const double dist = std::sqrt(dist2);
        if (dist > 1e-9) {
          double dd2 = 0.0;
          for (std::size_t i = 0; i < tensor.a.size(); ++i)
            dd2 += (tensor.a[i] - prev_tensor.a[i]) * (tensor.a[i] - prev_tensor.a[i]);
          const double ratio = std::sqrt(dd2) / dist;
          if (ratio > map.bound_L * bound_slack + 1e-6)
            rep.record(0.0, x, "[phi'+]' Lipschitz <= L", ratio);
        }
      }
      prev_x = x;
      prev_tensor = std::move(tensor);
      have_prev = true;
    } catch (const std::domain_error& e) {
      rep.record(0.0, x, std::string("right inverse undefined: ") + e.what(), 0.0);
      have_prev = false;
    }
  }
  return rep;
}

// y = (4/pi) arctan(x) - 1 maps [0, inf) onto [-1, 1)
inline double arctan_rescale(double x) {
  if (x < 0.0) throw std::domain_error("arctan_rescale: needs x >= 0");
  return 4.0 / 3.14159265358979323846 * std::atan(x) - 1.0;
}

inline double arctan_rescale_inverse(double y) {
  if (y < -1.0 || y >= 1.0)
    throw std::domain_error("arctan_rescale_inverse: needs y in [-1, 1)");
  return std::tan(3.14159265358979323846 * 0.25 * (y + 1.0));
}

}  // namespace fsde
