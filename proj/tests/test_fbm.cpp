#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

#include "fsde/fbm.hpp"
#include "fsde/parallel.hpp"
#include "oracles.hpp"

using namespace fsde;
using Catch::Approx;

TEST_CASE("HurstParameter validation and diagnostic flag") {
  CHECK_THROWS_AS(HurstParameter(0.0), std::invalid_argument);
  CHECK_THROWS_AS(HurstParameter(1.0), std::invalid_argument);
  CHECK_THROWS_AS(HurstParameter(1.5), std::invalid_argument);
  CHECK(HurstParameter(0.75).diagnostic_only() == false);
  CHECK(HurstParameter(0.5).diagnostic_only() == true);
  CHECK(HurstParameter(0.3).diagnostic_only() == true);
}

TEST_CASE("fbm_covariance closed form") {
  CHECK(fbm_covariance(1.0, 1.0, HurstParameter(0.75)) == Approx(1.0));
  CHECK(fbm_covariance(1.0, 2.0, HurstParameter(0.5)) == Approx(1.0));
  // 0.5 * (1 + 2^{1.5} - 1) = sqrt(2)
  CHECK(fbm_covariance(1.0, 2.0, HurstParameter(0.75)) == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(fbm_covariance(0.3, 0.8, HurstParameter(0.6)) ==
        Approx(fbm_covariance(0.8, 0.3, HurstParameter(0.6))));
  CHECK_THROWS_AS(fbm_covariance(-1.0, 1.0, HurstParameter(0.75)), std::invalid_argument);
}

TEST_CASE("sample_fbm basics: start at zero, determinism") {
  auto p = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 200, 42);
  REQUIRE(p.values.size() == 201);
  CHECK(p.values[0] == 0.0);
  auto q = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 200, 42);
  CHECK(p.values == q.values);  // bit identical
  auto r = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 200, 43);
  CHECK(p.values != r.values);
}

TEST_CASE("H=0.5 increments behave like Brownian noise") {
  const std::size_t n = 10000;
  auto p = sample_fbm(HurstParameter(0.5), 0.0, 1.0, n, 7);
  const double h = p.step();
  double mean = 0.0, var = 0.0;
  std::vector<double> inc(n);
  for (std::size_t k = 0; k < n; ++k) inc[k] = p.values[k + 1] - p.values[k];
  for (double v : inc) mean += v;
  mean /= n;
  for (double v : inc) var += (v - mean) * (v - mean);
  var /= (n - 1);
  CHECK(var / h > 0.9);
  CHECK(var / h < 1.1);
  // lag-1 autocorrelation
  double acf = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) acf += (inc[k] - mean) * (inc[k + 1] - mean);
  acf /= (n - 1) * var;
  CHECK(std::abs(acf) < 0.05);
}

TEST_CASE("variance of B_1 matches T^{2H} over Monte Carlo") {
  for (double H : {0.6, 0.9}) {
    double s = 0.0, s2 = 0.0;
    const int N = 800;
    for (int i = 0; i < N; ++i) {
      auto p = sample_fbm(HurstParameter(H), 0.0, 1.0, 128, mix_seed(555, i));
      s += p.values.back();
      s2 += p.values.back() * p.values.back();
    }
    const double var = (s2 - s * s / N) / (N - 1);
    CHECK(var > 0.9);
    CHECK(var < 1.1);
  }
}

TEST_CASE("covariance fidelity at interior pairs") {
  const int N = 2000;
  for (double H : {0.6, 0.75, 0.9}) {
    std::vector<double> b25(N), b50(N), b100(N);
    for (int i = 0; i < N; ++i) {
      auto p = sample_fbm(HurstParameter(H), 0.0, 1.0, 256, mix_seed(777, i));
      b25[i] = p.values[64];
      b50[i] = p.values[128];
      b100[i] = p.values[256];
    }
    auto cov = [&](const std::vector<double>& a, const std::vector<double>& b) {
      double ma = std::accumulate(a.begin(), a.end(), 0.0) / N;
      double mb = std::accumulate(b.begin(), b.end(), 0.0) / N;
      double c = 0.0;
      for (int i = 0; i < N; ++i) c += (a[i] - ma) * (b[i] - mb);
      return c / (N - 1);
    };
    const HurstParameter hp(H);
    CHECK(cov(b25, b50) == Approx(fbm_covariance(0.25, 0.5, hp)).epsilon(0.10));
    CHECK(cov(b50, b100) == Approx(fbm_covariance(0.5, 1.0, hp)).epsilon(0.10));
    CHECK(cov(b100, b100) == Approx(fbm_covariance(1.0, 1.0, hp)).epsilon(0.10));
  }
}

TEST_CASE("circulant and cholesky samplers agree in distribution") {
  const int N = 2000;
  std::vector<double> bt_circ(N), bt_chol(N);
  for (int i = 0; i < N; ++i) {
    bt_circ[i] = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 128, mix_seed(888, i),
                            FbmMethod::circulant_embedding)
                     .values.back();
    bt_chol[i] = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 128, mix_seed(999, i),
                            FbmMethod::cholesky)
                     .values.back();
  }
  CHECK(oracle::ks_two_sample_pvalue(bt_circ, bt_chol) > 0.01);
}

TEST_CASE("embedding failure reports the offending eigenvalue") {
  // a synthetic autocovariance that no circulant embedding accepts
  std::vector<double> autocov{0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  try {
    fsde::detail::sample_stationary_circulant(autocov, 4, 1);
    FAIL("expected EmbeddingError");
  } catch (const EmbeddingError& e) {
    CHECK(e.min_eigenvalue < 0.0);
  }
}

TEST_CASE("cholesky guard on problem size") {
  CHECK_THROWS_AS(sample_fbm(HurstParameter(0.75), 0.0, 1.0, 5000, 1, FbmMethod::cholesky),
                  std::invalid_argument);
}

TEST_CASE("holder_seminorm: constants, linear, homogeneity") {
  GridFunction c(0.0, 1.0, 16, 1);
  for (std::size_t k = 0; k <= 16; ++k) c.at(k, 0) = 3.3;
  CHECK(holder_seminorm(c, 0.4) == Approx(0.0).margin(1e-15));

  // f(t) = t on a 4-step grid with mu = 1/2: the sup over the 10 pairs is
  // (s-r)^{1/2}, maximized at the full span, value 1
  GridFunction f(0.0, 1.0, 4, 1);
  for (std::size_t k = 0; k <= 4; ++k) f.at(k, 0) = f.time_at(k);
  CHECK(holder_seminorm(f, 0.5) == Approx(1.0).epsilon(1e-12));

  GridFunction g(0.0, 1.0, 64, 1);
  for (std::size_t k = 0; k <= 64; ++k) g.at(k, 0) = std::sin(5.0 * g.time_at(k));
  GridFunction g2(0.0, 1.0, 64, 1);
  for (std::size_t k = 0; k <= 64; ++k) g2.at(k, 0) = -2.5 * g.at(k, 0);
  CHECK(holder_seminorm(g2, 0.3) == Approx(2.5 * holder_seminorm(g, 0.3)).epsilon(1e-12));

  CHECK_THROWS_AS(holder_seminorm(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(holder_seminorm(g, 1.0), std::invalid_argument);
}

TEST_CASE("holder_seminorm dyadic approximation lower-bounds the exact sup") {
  auto p = sample_fbm(HurstParameter(0.7), 0.0, 1.0, 512, 11);
  GridFunction B = p.to_grid();
  const double exact = holder_seminorm(B, 0.6, HolderMode::exact);
  const double dyadic = holder_seminorm(B, 0.6, HolderMode::dyadic);
  CHECK(dyadic <= exact + 1e-14);
  CHECK(dyadic > 0.5 * exact);
}

TEST_CASE("empirical Holder seminorm at order H - 0.1 stays bounded under refinement") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const double base =
        holder_seminorm(sample_fbm(HurstParameter(0.75), 0.0, 1.0, 256, seed).to_grid(), 0.65);
    const double fine =
        holder_seminorm(sample_fbm(HurstParameter(0.75), 0.0, 1.0, 2048, seed).to_grid(), 0.65);
    CHECK(fine < 4.0 * base + 2.0);
  }
}

TEST_CASE("roughness_diagnostic: trivial inputs") {
  FbmPath flat;
  flat.n_steps = 8;
  flat.t0 = 0.0;
  flat.T = 1.0;
  flat.values.assign(9, 0.0);
  CHECK(roughness_diagnostic(flat) == 0.0);

  GridFunction line(0.0, 1.0, 16, 1);
  for (std::size_t k = 0; k <= 16; ++k) line.at(k, 0) = line.time_at(k);
  CHECK(roughness_diagnostic(line) == Approx(1.0).epsilon(1e-12));
  GridFunction line4(0.0, 1.0, 64, 1);
  for (std::size_t k = 0; k <= 64; ++k) line4.at(k, 0) = line4.time_at(k);
  CHECK(roughness_diagnostic(line4) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("roughness diagnostic grows like h^{H-1}") {
  const double H = 0.75;
  std::vector<double> log_invh, log_stat;
  for (std::size_t n : {256, 1024, 4096}) {
    double mean_log = 0.0;
    const int N = 20;
    for (int i = 0; i < N; ++i) {
      auto p = sample_fbm(HurstParameter(H), 0.0, 1.0, n, mix_seed(31337, 100 * n + i));
      mean_log += std::log(roughness_diagnostic(p));
    }
    log_stat.push_back(mean_log / N);
    log_invh.push_back(std::log(static_cast<double>(n)));
  }
  const double slope = oracle::fit_slope(log_invh, log_stat);
  CHECK(slope > 0.05);
  CHECK(slope < 0.45);
}

TEST_CASE("csv export and import round trip") {
  auto p = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 32, 5);
  std::ostringstream os;
  p.to_grid().write_csv(os, p.metadata());
  const std::string text = os.str();
  CHECK(text.find("# hurst=0.75") != std::string::npos);
  CHECK(text.find("# seed=5") != std::string::npos);
  CHECK(text.find("t,value") != std::string::npos);

  std::istringstream is(text);
  GridFunction::Metadata meta;
  GridFunction g = GridFunction::read_csv(is, &meta);
  REQUIRE(g.n_steps() == 32);
  for (std::size_t k = 0; k <= 32; ++k)
    CHECK(g.at(k, 0) == p.values[k]);  // %.17g round-trips doubles exactly
  bool saw_method = false;
  for (auto& [k, v] : meta)
    if (k == "method") saw_method = true;
  CHECK(saw_method);
}

TEST_CASE("sampler is safe under concurrent invocation") {
  std::vector<std::vector<double>> out(8);
  parallel_for(8, 4, [&](std::size_t i) {
    out[i] = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 128, 42).values;
  });
  for (int i = 1; i < 8; ++i) CHECK(out[i] == out[0]);
}
