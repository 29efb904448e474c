#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fsde/frac.hpp"
#include "fsde/sde.hpp"
#include "oracles.hpp"

using namespace fsde;
using Catch::Approx;

TEST_CASE("constant drift, zero noise: scheme is exact") {
  auto cf = make_coefficients(1, {"1"}, {"0"});
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 256, 1);
  auto sol = solve_euler(cf, std::vector<double>{0.0}, 0.0, 1.0, driver);
  CHECK(sol.values.at(256, 0) == Approx(1.0).margin(1e-13));
  CHECK(sol.values.at(128, 0) == Approx(0.5).margin(1e-13));
}

TEST_CASE("additive noise: exact telescoping at grid nodes") {
  auto cf = make_coefficients(1, {"0"}, {"2"});
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 512, 9);
  auto sol = solve_euler(cf, std::vector<double>{2.0}, 0.0, 1.0, driver);
  for (std::size_t k = 0; k <= 512; ++k)
    CHECK(sol.values.at(k, 0) == Approx(2.0 + 2.0 * driver.values[k]).margin(1e-12));
}

TEST_CASE("solution starts at x0 and shares the driver grid") {
  auto cf = make_coefficients(2, {"-x2", "x1"}, {"-x2", "x1"});
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 128, 3);
  auto sol = solve_euler(cf, std::vector<double>{1.0, 0.0}, 0.0, 1.0, driver);
  CHECK(sol.values.at(0, 0) == 1.0);
  CHECK(sol.values.at(0, 1) == 0.0);
  CHECK(sol.values.n_steps() == 128);
  CHECK(sol.diagnostics.max_step_increment > 0.0);
  CHECK(sol.diagnostics.lambda_alpha_driver > 0.0);
}

TEST_CASE("driver coupling: identical inputs give bit-identical solves") {
  auto cf = make_coefficients(1, {"sin(x1)"}, {"x1"});
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 256, 17);
  auto a = solve_euler(cf, std::vector<double>{0.5}, 0.0, 1.0, driver);
  auto b = solve_euler(cf, std::vector<double>{0.5}, 0.0, 1.0, driver);
  CHECK(a.values.raw() == b.values.raw());
}

TEST_CASE("blow-up guard reports the failure time") {
  // dX = X^3 dt from a large start explodes quickly
  auto cf = make_coefficients(1, {"x1^3"}, {"0"});
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 4096, 5);
  try {
    solve_euler(cf, std::vector<double>{50.0}, 0.0, 1.0, driver);
    FAIL("expected BlowupError");
  } catch (const BlowupError& e) {
    CHECK(e.time > 0.0);
    CHECK(e.time <= 1.0);
    CHECK(e.magnitude >= 1e12);
  }
}

TEST_CASE("exact_geometric trivial cases") {
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 64, 2);
  auto flat = exact_geometric(driver, 0.0, 3.0);
  for (std::size_t k = 0; k <= 64; ++k) CHECK(flat.values.at(k, 0) == Approx(3.0));
  auto zero = exact_geometric(driver, 1.0, 0.0);
  for (std::size_t k = 0; k <= 64; ++k) CHECK(zero.values.at(k, 0) == 0.0);
}

TEST_CASE("euler converges to the geometric closed form") {
  auto cf = make_coefficients(1, {"0"}, {"x1"});
  const std::size_t n = 1 << 12;
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, n, 5);
  auto sol = solve_euler(cf, std::vector<double>{1.0}, 0.0, 1.0, driver, 0.375, false);
  auto oracle_path = exact_geometric(driver, 1.0, 1.0);
  double sup = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    sup = std::max(sup, std::abs(sol.values.at(k, 0) - oracle_path.values.at(k, 0)));
  CHECK(sup < 5e-2);

  // refinement cuts the error
  auto coarse_driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 1 << 8, 5);
  auto coarse = solve_euler(cf, std::vector<double>{1.0}, 0.0, 1.0, coarse_driver, 0.375, false);
  auto coarse_oracle = exact_geometric(coarse_driver, 1.0, 1.0);
  double sup_coarse = 0.0;
  for (std::size_t k = 0; k <= (1 << 8); ++k)
    sup_coarse =
        std::max(sup_coarse, std::abs(coarse.values.at(k, 0) - coarse_oracle.values.at(k, 0)));
  CHECK(sup < sup_coarse);
}

TEST_CASE("noise sum is consistent with the generalized Stieltjes integral") {
  // freeze the realized integrand s -> sigma(s, X_s) after the solve and
  // integrate it against the driver through the fractional machinery
  auto cf = make_coefficients(1, {"0"}, {"x1"});
  const std::size_t n = 1 << 12;
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, n, 5);
  auto sol = solve_euler(cf, std::vector<double>{1.0}, 0.0, 1.0, driver, 0.375, false);

  GridFunction integrand(0.0, 1.0, n, 1);
  for (std::size_t k = 0; k <= n; ++k) integrand.at(k, 0) = sol.values.at(k, 0);
  const double via_frac =
      stieltjes_integral_scalar(integrand, driver.to_grid(), FracOrder(0.375), 0.0, 1.0);
  double noise_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    noise_sum += sol.values.at(k, 0) * (driver.values[k + 1] - driver.values[k]);
  CHECK(via_frac == Approx(noise_sum).epsilon(2e-2));
}

TEST_CASE("convergence_study: exact cases and validation") {
  auto drift_only = make_coefficients(1, {"1"}, {"0"});
  auto rep = convergence_study(drift_only, std::vector<double>{0.0}, 0.0, 1.0,
                               HurstParameter(0.75), 21, {256, 512, 1024});
  CHECK(rep.exact);

  auto additive = make_coefficients(1, {"0"}, {"1"});
  auto rep2 = convergence_study(additive, std::vector<double>{0.0}, 0.0, 1.0,
                                HurstParameter(0.75), 21, {256, 512, 1024});
  CHECK(rep2.exact);

  CHECK_THROWS_AS(convergence_study(additive, std::vector<double>{0.0}, 0.0, 1.0,
                                    HurstParameter(0.75), 21, {512, 256}),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_study(additive, std::vector<double>{0.0}, 0.0, 1.0,
                                    HurstParameter(0.75), 21, {256, 384}),
                  std::invalid_argument);
}

TEST_CASE("convergence_study: geometric case has a positive fitted order") {
  auto cf = make_coefficients(1, {"0"}, {"x1"});
  auto rep = convergence_study(cf, std::vector<double>{1.0}, 0.0, 1.0, HurstParameter(0.75), 5,
                               {256, 512, 1024, 2048, 4096});
  CHECK_FALSE(rep.exact);
  CHECK(rep.fitted_order >= 0.35);
}

TEST_CASE("driver coarsening is exact node restriction") {
  auto fine = sample_fbm(HurstParameter(0.75), 0.0, 1.0, 1024, 99);
  GridFunction g = fine.to_grid();
  auto coarse = g.coarsen(4);
  REQUIRE(coarse.n_steps() == 256);
  for (std::size_t k = 0; k <= 256; ++k) CHECK(coarse.at(k, 0) == g.at(4 * k, 0));
  CHECK_THROWS_AS(g.coarsen(3), std::invalid_argument);
}
