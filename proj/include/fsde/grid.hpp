// GridFunction: an R^d-valued function sampled on a uniform time grid.
// Carrier type for drivers, integrands, solution paths and norm machinery.
#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fsde {

class GridFunction {
 public:
  GridFunction() = default;

  GridFunction(double t0, double T, std::size_t n_steps, int dim)
      : t0_(t0), T_(T), n_(n_steps), d_(dim),
        values_((n_steps + 1) * static_cast<std::size_t>(dim), 0.0) {
    if (!(T > t0)) throw std::invalid_argument("GridFunction: T must exceed t0");
    if (n_steps < 1) throw std::invalid_argument("GridFunction: need n_steps >= 1");
    if (dim < 1) throw std::invalid_argument("GridFunction: need dim >= 1");
  }

  // scalar function from a value array (size n+1)
  static GridFunction from_values(double t0, double T, std::vector<double> v) {
    if (v.size() < 2) throw std::invalid_argument("GridFunction: need at least 2 nodes");
    GridFunction g(t0, T, v.size() - 1, 1);
    g.values_ = std::move(v);
    return g;
  }

  double t0() const { return t0_; }
  double T() const { return T_; }
  std::size_t n_steps() const { return n_; }
  int dim() const { return d_; }
  double step() const { return (T_ - t0_) / static_cast<double>(n_); }
  double time_at(std::size_t k) const { return t0_ + step() * static_cast<double>(k); }

  double& at(std::size_t node, int comp) { return values_[node * d_ + comp]; }
  double at(std::size_t node, int comp) const { return values_[node * d_ + comp]; }
  const std::vector<double>& raw() const { return values_; }
  std::vector<double>& raw() { return values_; }

  // single component as a contiguous vector
  std::vector<double> component(int comp) const {
    std::vector<double> out(n_ + 1);
    for (std::size_t k = 0; k <= n_; ++k) out[k] = values_[k * d_ + comp];
    return out;
  }

  // nearest grid index for a time value; throws if off-grid
  std::size_t index_of(double t, double tol_factor = 1e-9) const {
    double h = step();
    double pos = (t - t0_) / h;
    double rounded = std::round(pos);
    if (std::abs(pos - rounded) > tol_factor * (1.0 + std::abs(pos)) * 1e3 ||
        rounded < -0.5 || rounded > static_cast<double>(n_) + 0.5) {
      std::ostringstream os;
      os << "time " << t << " is not a grid node of [" << t0_ << "," << T_ << "]/" << n_;
      throw std::invalid_argument(os.str());
    }
    return static_cast<std::size_t>(rounded);
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool same_grid(const GridFunction& other, double tol = 1e-12) const {
    return n_ == other.n_ && std::abs(t0_ - other.t0_) <= tol &&
           std::abs(T_ - other.T_) <= tol;
  }

  // keep every stride-th node; stride must divide n_steps
  GridFunction coarsen(std::size_t stride) const {
    if (stride == 0 || n_ % stride != 0)
      throw std::invalid_argument("coarsen: stride must divide n_steps");
    GridFunction out(t0_, T_, n_ / stride, d_);
    for (std::size_t k = 0; k <= n_ / stride; ++k)
      for (int c = 0; c < d_; ++c) out.at(k, c) = at(k * stride, c);
    return out;
  }

  GridFunction restrict_to(std::size_t a, std::size_t b) const {
    if (b <= a || b > n_) throw std::invalid_argument("restrict_to: bad node range");
    GridFunction out(time_at(a), time_at(b), b - a, d_);
    for (std::size_t k = a; k <= b; ++k)
      for (int c = 0; c < d_; ++c) out.at(k - a, c) = at(k, c);
    return out;
  }

  using Metadata = std::vector<std::pair<std::string, std::string>>;

  // CSV layout: '#'-prefixed metadata lines, a header row, one row per node.
  // Scalar functions use header "t,value", vector ones "t,x1,..,xd".
  void write_csv(std::ostream& os, const Metadata& meta = {}) const;
  void write_csv_file(const std::string& path, const Metadata& meta = {}) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(f, meta);
  }
  static GridFunction read_csv(std::istream& is, Metadata* meta = nullptr);
  static GridFunction read_csv_file(const std::string& path, Metadata* meta = nullptr) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return read_csv(f, meta);
  }

 private:
  double t0_ = 0.0;
  double T_ = 1.0;
  std::size_t n_ = 1;
  int d_ = 1;
  std::vector<double> values_;
};

namespace detail {
inline void format_double(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}
}  // namespace detail

inline void GridFunction::write_csv(std::ostream& os, const Metadata& meta) const {
  for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
  if (d_ == 1) {
    os << "t,value\n";
  } else {
    os << "t";
    for (int c = 1; c <= d_; ++c) os << ",x" << c;
    os << "\n";
  }
  for (std::size_t k = 0; k <= n_; ++k) {
    detail::format_double(os, time_at(k));
    for (int c = 0; c < d_; ++c) {
      os << ",";
      detail::format_double(os, at(k, c));
    }
    os << "\n";
  }
}

inline GridFunction GridFunction::read_csv(std::istream& is, Metadata* meta) {
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (meta) {
        auto body = line.substr(1);
        auto eq = body.find('=');
        if (eq != std::string::npos) {
          auto key = body.substr(0, eq);
          auto ws = key.find_first_not_of(' ');
          key = (ws == std::string::npos) ? "" : key.substr(ws);
          if (auto e = key.find_last_not_of(' '); e != std::string::npos) key = key.substr(0, e + 1);
          meta->emplace_back(key, body.substr(eq + 1));
        }
      }
      continue;
    }
    if (!header_seen) {  // header row
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() < 2) throw std::runtime_error("csv row needs t plus at least one value");
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw std::runtime_error("csv needs at least 2 data rows");
  int d = static_cast<int>(rows.front().size()) - 1;
  GridFunction g(rows.front()[0], rows.back()[0], rows.size() - 1, d);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (static_cast<int>(rows[k].size()) - 1 != d)
      throw std::runtime_error("csv rows have inconsistent arity");
    for (int c = 0; c < d; ++c) g.at(k, c) = rows[k][c + 1];
  }
  return g;
}

}  // namespace fsde
