#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fsde/json_io.hpp"
#include "fsde/mc.hpp"

using namespace fsde;
using Catch::Approx;

namespace {

ExperimentConfig sphere_rotation_config(std::size_t n_steps = 1 << 10, std::size_t n_paths = 20) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::viability;
  cfg.hurst = HurstParameter(0.75);
  cfg.n_steps = n_steps;
  cfg.n_paths = n_paths;
  cfg.master_seed = 4242;
  cfg.cf = make_rotation();
  cfg.constraint = ConstraintSet::sphere(1.0, 2);
  cfg.membership_tol = 0.05;
  cfg.x0 = X0Policy::fixed({1.0, 0.0});
  return cfg;
}

}  // namespace

TEST_CASE("viability run: rotation on the sphere stays put") {
  auto cfg = sphere_rotation_config();
  auto rep = run_viability(cfg);
  CHECK(rep.checker.pass);
  CHECK(rep.violation_fraction == 0.0);
  CHECK(rep.max_excursion < 0.05);
  CHECK(rep.n_blowups == 0);
  CHECK(rep.per_path.size() == 20);
  CHECK(rep.lambda_alpha_stats.max >= rep.lambda_alpha_stats.mean);
  CHECK(rep.lambda_alpha_stats.mean >= rep.lambda_alpha_stats.min);
  CHECK(rep.lambda_alpha_stats.min > 0.0);
}

TEST_CASE("viability run: outward drift exits the ball from the boundary") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::viability;
  cfg.hurst = HurstParameter(0.75);
  cfg.n_steps = 512;
  cfg.n_paths = 40;
  cfg.master_seed = 7;
  cfg.cf = make_coefficients(2, {"x1", "x2"}, {"0", "0"});
  cfg.constraint = ConstraintSet::ball(1.0, 2);
  cfg.membership_tol = 0.05;
  cfg.x0 = X0Policy::boundary_uniform();
  auto rep = run_viability(cfg);
  CHECK_FALSE(rep.checker.pass);
  CHECK(rep.violation_fraction >= 0.95);
}

TEST_CASE("viability run: no noise and strict inward drift never exits") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::viability;
  cfg.hurst = HurstParameter(0.75);
  cfg.n_steps = 256;
  cfg.n_paths = 10;
  cfg.master_seed = 99;
  cfg.cf = make_coefficients(2, {"-x1", "-x2"}, {"0", "0"});
  cfg.constraint = ConstraintSet::ball(1.0, 2);
  cfg.membership_tol = 1e-9;
  cfg.x0 = X0Policy::fixed({0.6, 0.0});
  auto rep = run_viability(cfg);
  CHECK(rep.violation_fraction == 0.0);
  CHECK(rep.max_excursion == 0.0);
}

TEST_CASE("positivity run: passing and failing configurations") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::positivity;
  cfg.hurst = HurstParameter(0.75);
  cfg.n_steps = 1 << 10;
  cfg.n_paths = 60;
  cfg.master_seed = 555;
  cfg.cf = make_coefficients(1, {"1 - x1"}, {"x1"});
  cfg.constraint = ConstraintSet::half_line();
  cfg.membership_tol = 1e-3;
  cfg.x0 = X0Policy::fixed({0.5});
  auto rep = run_positivity(cfg);
  CHECK(rep.checker.pass);
  CHECK(rep.violation_fraction == 0.0);

  cfg.cf = make_coefficients(1, {"0"}, {"1"});
  cfg.x0 = X0Policy::fixed({0.01});
  auto rep2 = run_positivity(cfg);
  CHECK_FALSE(rep2.checker.pass);
  CHECK(rep2.violation_fraction >= 0.5);
}

TEST_CASE("positivity run: zero is a fixed point of multiplicative noise") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::positivity;
  cfg.hurst = HurstParameter(0.75);
  cfg.n_steps = 256;
  cfg.n_paths = 10;
  cfg.master_seed = 1;
  cfg.cf = make_coefficients(1, {"0"}, {"x1"});
  cfg.constraint = ConstraintSet::half_line();
  cfg.membership_tol = 1e-9;
  cfg.x0 = X0Policy::fixed({0.0});
  auto rep = run_positivity(cfg);
  CHECK(rep.violation_fraction == 0.0);
  CHECK(rep.max_excursion == 0.0);
}

TEST_CASE("comparison run: ordered drifts with common noise never cross") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::comparison;
  cfg.hurst = HurstParameter(0.75);
  cfg.n_steps = 1 << 10;
  cfg.n_paths = 60;
  cfg.master_seed = 31;
  cfg.cf = make_coefficients(1, {"-x1"}, {"x1"});
  cfg.cf2 = make_coefficients(1, {"-x1 + 1"}, {"x1"});
  cfg.constraint = ConstraintSet::comparison_cone();
  cfg.membership_tol = 1e-6;
  cfg.x0 = X0Policy::fixed({1.0});
  cfg.y0 = {1.0};
  auto rep = run_comparison(cfg);
  CHECK(rep.checker.pass);
  CHECK(rep.violation_fraction == 0.0);

  // mismatched noise crosses on most paths
  cfg.cf = make_coefficients(1, {"0"}, {"1"});
  cfg.cf2 = make_coefficients(1, {"0"}, {"2"});
  cfg.x0 = X0Policy::fixed({0.0});
  cfg.y0 = {0.01};
  auto rep2 = run_comparison(cfg);
  CHECK_FALSE(rep2.checker.pass);
  CHECK(rep2.violation_fraction >= 0.5);
}

TEST_CASE("comparison coupling: identical equations give exactly zero difference") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::comparison;
  cfg.hurst = HurstParameter(0.75);
  cfg.n_steps = 512;
  cfg.n_paths = 12;
  cfg.master_seed = 77;
  cfg.cf = make_coefficients(1, {"sin(x1)"}, {"x1"});
  cfg.cf2 = cfg.cf;
  cfg.constraint = ConstraintSet::comparison_cone();
  cfg.membership_tol = 1e-12;
  cfg.x0 = X0Policy::fixed({0.7});
  cfg.y0 = {0.7};
  auto rep = run_comparison(cfg);
  CHECK(rep.violation_fraction == 0.0);
  for (const auto& p : rep.per_path) CHECK(p.excursion == 0.0);
}

TEST_CASE("reports are reproducible and thread-count independent") {
  auto cfg = sphere_rotation_config(512, 16);
  auto r1 = run_viability(cfg, 1);
  auto r2 = run_viability(cfg, 4);
  auto r3 = run_viability(cfg, 1);
  REQUIRE(r1.per_path.size() == r2.per_path.size());
  for (std::size_t i = 0; i < r1.per_path.size(); ++i) {
    CHECK(r1.per_path[i].seed == r2.per_path[i].seed);
    CHECK(r1.per_path[i].excursion == r2.per_path[i].excursion);  // bitwise
    CHECK(r1.per_path[i].excursion == r3.per_path[i].excursion);
  }
  CHECK(to_json(r1).dump() == to_json(r2).dump());
}

TEST_CASE("violation fraction counts per-path sup-excursions against the tolerance") {
  auto cfg = sphere_rotation_config(256, 8);
  cfg.membership_tol = 1e-12;  // every path trips on discretization drift
  auto rep = run_viability(cfg);
  CHECK(rep.violation_fraction == 1.0);
  std::size_t violated = 0;
  for (const auto& p : rep.per_path)
    if (p.violated) ++violated;
  CHECK(rep.violation_fraction ==
        Approx(static_cast<double>(violated) / rep.per_path.size()));
}

TEST_CASE("blow-ups are flagged separately and counted as violations") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::viability;
  cfg.hurst = HurstParameter(0.75);
  cfg.n_steps = 2048;
  cfg.n_paths = 4;
  cfg.master_seed = 5;
  cfg.cf = make_coefficients(1, {"x1^3"}, {"0"});
  cfg.constraint = ConstraintSet::ball(1e6, 1);
  cfg.membership_tol = 1.0;
  cfg.x0 = X0Policy::fixed({50.0});
  auto rep = run_viability(cfg);
  CHECK(rep.n_blowups == 4);
  CHECK(rep.violation_fraction == 1.0);
  for (const auto& p : rep.per_path) CHECK(p.blowup);
}

TEST_CASE("monotone resolution: passing config excursions shrink as steps double") {
  auto coarse = sphere_rotation_config(512, 10);
  auto fine = sphere_rotation_config(1024, 10);
  auto rc = run_viability(coarse);
  auto rf = run_viability(fine);
  CHECK(rf.max_excursion < 2.0 * rc.max_excursion + 1e-6);
}

TEST_CASE("lemma41 diagnostic: zero remainder gives zero ratio") {
  const std::size_t n = 256;
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, n, 3);
  GridFunction U(0.0, 1.0, n, 1), V(0.0, 1.0, n, 1);
  auto rep = lemma41_diagnostic(U, V, driver, FracOrder(0.3), 0.0, 1.0);
  CHECK(rep.max_ratio_a == 0.0);
  CHECK(rep.max_ratio_b == 0.0);
}

TEST_CASE("lemma41 diagnostic: power drift envelope is tight") {
  const std::size_t n = 512;
  const double a = 0.3;
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, n, 11);
  GridFunction U(0.0, 1.0, n, 1), V(0.0, 1.0, n, 1);
  for (std::size_t k = 0; k <= n; ++k)
    U.at(k, 0) = std::pow(U.time_at(k), 1.0 - a);
  auto rep = lemma41_diagnostic(U, V, driver, FracOrder(a), 0.0, 1.0);
  CHECK(rep.holder_U == Approx(1.0).epsilon(1e-9));
  CHECK(rep.max_ratio_a <= 1.0 + 1e-6);
  CHECK(rep.max_ratio_a > 0.5);
}

TEST_CASE("lemma41 diagnostic: fBm increment noise stays within the bound") {
  const std::size_t n = 512;
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, n, 42);
  GridFunction U(0.0, 1.0, n, 1), V(0.0, 1.0, n, 1);
  for (std::size_t k = 0; k <= n; ++k) V.at(k, 0) = driver.values[k] - driver.values[0];
  auto rep = lemma41_diagnostic(U, V, driver, FracOrder(0.3), 0.0, 1.0);
  CHECK(rep.max_ratio_b <= 1.1);
  CHECK(rep.lambda_driver > 0.0);
  CHECK(rep.chain_constant > 1.0);
}

TEST_CASE("lemma41 diagnostic rejects remainders not vanishing at the start") {
  const std::size_t n = 64;
  auto driver = sample_fbm(HurstParameter(0.75), 0.0, 1.0, n, 3);
  GridFunction U(0.0, 1.0, n, 1), V(0.0, 1.0, n, 1);
  for (std::size_t k = 0; k <= n; ++k) U.at(k, 0) = 1.0;
  CHECK_THROWS_AS(lemma41_diagnostic(U, V, driver, FracOrder(0.3), 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("experiment report JSON carries the checker verdict") {
  auto cfg = sphere_rotation_config(256, 4);
  auto rep = run_viability(cfg);
  json j = to_json(rep);
  CHECK(j.at("experiment") == "viability");
  CHECK(j.at("checker").at("verdict") == "PASS");
  CHECK(j.at("violation_fraction").get<double>() == 0.0);
  CHECK(j.contains("lambda_alpha_stats"));
}

TEST_CASE("run config validation catches bad shapes") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::comparison;
  cfg.cf = make_coefficients(1, {"0"}, {"0"});
  cfg.x0 = X0Policy::fixed({0.0});
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // missing cf2
  cfg.cf2 = cfg.cf;
  cfg.y0 = {-1.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // y0 < x0
}
