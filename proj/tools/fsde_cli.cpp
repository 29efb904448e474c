// fsde: sampling, integration, solving and Monte Carlo experiment driver.
//
// Subcommands: generate-fbm, integrate, solve, check, run, convergence.
// Exit codes: 0 success / checker PASS, 1 runtime failure, 2 usage or config
// error, 3 checker FAIL.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fsde/fsde.hpp"

namespace fs = std::filesystem;
using fsde::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCheckFail = 3;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw fsde::ConfigError("cannot open config file: " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw fsde::ConfigError("JSON parse error at byte " + std::to_string(e.byte) + ": " +
                            e.what());
  }
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// timestamped run directory; never reuses an existing one
fs::path fresh_run_dir(const fs::path& base, const std::string& hash8) {
  fs::create_directories(base);
  const std::string stamp = utc_stamp();
  fs::path dir = base / (stamp + "-" + hash8);
  int k = 2;
  while (fs::exists(dir)) dir = base / (stamp + "-" + hash8 + "-" + std::to_string(k++));
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

int cmd_generate_fbm(double hurst, double t0, double T, std::size_t steps, std::uint64_t seed,
                     const std::string& method, const std::string& out) {
  fsde::HurstParameter H(hurst);
  auto path = fsde::sample_fbm(H, t0, T, steps, seed, fsde::fbm_method_from_string(method));
  auto meta = path.metadata();
  if (H.diagnostic_only()) {
    meta.emplace_back("hurst_regime", "diagnostic_only");
    std::cerr << "note: H <= 1/2 is supported for diagnostics only\n";
  }
  path.to_grid().write_csv_file(out, meta);
  std::cout << "H=" << hurst << " n=" << steps << " seed=" << seed
            << " B_T=" << fmt_double(path.values.back()) << " -> " << out << "\n";
  return kExitOk;
}

int cmd_integrate(const std::string& f_path, const std::string& g_path, double alpha,
                  std::optional<double> from, std::optional<double> to) {
  fsde::GridFunction::Metadata meta_g;
  auto f = fsde::GridFunction::read_csv_file(f_path);
  auto g = fsde::GridFunction::read_csv_file(g_path, &meta_g);
  for (const auto& [k, v] : meta_g) {
    if (k == "hurst") {
      const double H = std::stod(v);
      if (H > 0.5 && !(alpha > 1.0 - H))
        throw fsde::ConfigError("alpha must exceed 1 - H = " + fmt_double(1.0 - H) +
                                " for this driver");
    }
  }
  const double a = from.value_or(f.t0());
  const double b = to.value_or(f.T());
  auto v = fsde::stieltjes_integral(f, g, fsde::FracOrder(alpha), a, b);
  json out{{"integral", v}, {"alpha", alpha}, {"from", a}, {"to", b}};
  std::cout << out.dump() << "\n";
  return kExitOk;
}

int cmd_solve(const std::string& config_path, const std::string& out) {
  auto rc = fsde::run_config_from_json(load_config(config_path));
  auto& e = rc.experiment;
  if (e.x0.mode != fsde::X0Policy::Mode::fixed)
    throw fsde::ConfigError("solve needs a fixed x0");
  auto driver = fsde::sample_fbm(e.hurst, e.t, e.T, e.n_steps, e.master_seed, e.method);
  auto sol = fsde::solve_euler(e.cf, e.x0.value, e.t, e.T, driver,
                               e.alpha ? *e.alpha : std::optional<double>{});
  fsde::GridFunction::Metadata meta;
  for (std::size_t i = 0; i < e.cf.b_src.size(); ++i)
    meta.emplace_back("b" + std::to_string(i + 1), e.cf.b_src[i]);
  for (std::size_t i = 0; i < e.cf.sigma_src.size(); ++i)
    meta.emplace_back("sigma" + std::to_string(i + 1), e.cf.sigma_src[i]);
  meta.emplace_back("hurst", std::to_string(e.hurst.value));
  meta.emplace_back("seed", std::to_string(e.master_seed));
  meta.emplace_back("alpha_used", std::to_string(sol.alpha_used));
  sol.values.write_csv_file(out, meta);
  std::cout << "solved on [" << e.t << "," << e.T << "] n=" << e.n_steps << " X_T=(";
  for (int c = 0; c < e.cf.d; ++c)
    std::cout << (c ? "," : "") << fmt_double(sol.values.at(sol.values.n_steps(), c));
  std::cout << ") lambda_alpha=" << fmt_double(sol.diagnostics.lambda_alpha_driver) << " -> "
            << out << "\n";
  return kExitOk;
}

fsde::CheckReport run_checker_for(const fsde::ExperimentConfig& e) {
  auto t_grid = fsde::uniform_time_grid(e.t, e.T, e.checker_time_points);
  if (e.constraint.kind == fsde::ConstraintKind::comparison_cone) {
    if (!e.cf2) throw fsde::ConfigError("comparison checker needs \"coefficients2\"");
    auto z_grid = fsde::uniform_time_grid(-2.0, 2.0, 41);
    return fsde::check_comparison(e.cf, *e.cf2, t_grid, z_grid, e.checker_tol);
  }
  return fsde::check_constraint(e.cf, e.constraint, t_grid, e.checker_boundary_samples,
                                e.checker_tol);
}

int cmd_check(const std::string& config_path) {
  auto rc = fsde::run_config_from_json(load_config(config_path));
  auto rep = run_checker_for(rc.experiment);
  std::cout << fsde::to_json(rep).dump(2) << "\n";
  return rep.pass ? kExitOk : kExitCheckFail;
}

std::string paths_csv(const fsde::ExperimentReport& rep) {
  std::string s = "seed,excursion,violated,blowup\n";
  char buf[96];
  for (const auto& p : rep.per_path) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%d,%d\n",
                  static_cast<unsigned long long>(p.seed), p.excursion, p.violated ? 1 : 0,
                  p.blowup ? 1 : 0);
    s += buf;
  }
  return s;
}

int cmd_run(const std::string& config_path, unsigned threads, bool dry_run,
            const std::string& out_dir_override) {
  json cfg_json = load_config(config_path);
  auto rc = fsde::run_config_from_json(cfg_json);
  auto& e = rc.experiment;
  const std::string hash = fsde::config_hash(cfg_json);
  if (!out_dir_override.empty()) rc.output_dir = out_dir_override;

  if (dry_run) {
    json plan{{"experiment", fsde::to_string(e.kind)},
              {"hurst", e.hurst.value},
              {"n_steps", e.n_steps},
              {"n_paths", e.n_paths},
              {"master_seed", e.master_seed},
              {"constraint", fsde::to_string(e.constraint.kind)},
              {"membership_tol", e.membership_tol},
              {"config_hash", hash},
              {"output_dir", rc.output_dir}};
    std::cout << plan.dump(2) << "\n";
    return kExitOk;
  }

  auto rep = fsde::run_experiment(e, threads);
  const fs::path dir = fresh_run_dir(rc.output_dir, hash.substr(0, 8));

  json provenance{{"tool", "fsde"},
                  {"version", kVersion},
                  {"config_hash", hash},
                  {"master_seed", e.master_seed},
                  {"seed_scheme", "splitmix64(master_seed, path_index)"},
                  {"config", cfg_json}};
  write_text(dir / "report.json", fsde::to_json(rep).dump(2) + "\n");
  write_text(dir / "paths.csv", paths_csv(rep));
  write_text(dir / "provenance.json", provenance.dump(2) + "\n");

  std::cout << "verdict=" << (rep.checker.pass ? "PASS" : "FAIL")
            << " violation_fraction=" << fmt_double(rep.violation_fraction)
            << " max_excursion=" << fmt_double(rep.max_excursion) << " blowups=" << rep.n_blowups
            << " -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_convergence(const std::string& config_path, const std::string& levels_text,
                    const std::string& out_csv) {
  auto rc = fsde::run_config_from_json(load_config(config_path));
  auto& e = rc.experiment;
  std::vector<std::size_t> levels;
  {
    std::stringstream ss(levels_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      levels.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
  }
  if (levels.size() < 3)
    throw fsde::ConfigError("convergence: need at least 3 levels for a fit, got " +
                            std::to_string(levels.size()));
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1] || levels[i] % levels[i - 1] != 0)
      throw fsde::ConfigError("convergence: levels must be nested and increasing");
  if (e.x0.mode != fsde::X0Policy::Mode::fixed)
    throw fsde::ConfigError("convergence needs a fixed x0");

  auto rep = fsde::convergence_study(e.cf, e.x0.value, e.t, e.T, e.hurst, e.master_seed, levels);
  std::string csv = "level,error\n";
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    std::printf("level %8zu  sup-error %.6e\n", rep.levels[i], rep.sup_errors[i]);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", rep.levels[i], rep.sup_errors[i]);
    csv += buf;
  }
  if (rep.exact)
    std::printf("exact (errors at rounding level)\n");
  else
    std::printf("fitted order %.3f\n", rep.fitted_order);
  if (!out_csv.empty()) write_text(out_csv, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pathwise fBm calculus, viability checkers and Monte Carlo experiments"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  unsigned threads = fsde::default_thread_count();
  bool dry_run = false;
  std::string out_dir_override;

  auto* gen = app.add_subcommand("generate-fbm", "sample one fBm path to CSV");
  double g_hurst = 0.75, g_t0 = 0.0, g_T = 1.0;
  std::size_t g_steps = 1024;
  std::uint64_t g_seed = 1;
  std::string g_method = "circulant_embedding", g_out;
  gen->add_option("--hurst", g_hurst, "Hurst parameter in (0,1)")->required();
  gen->add_option("--steps", g_steps, "number of grid steps")->required();
  gen->add_option("--seed", g_seed, "RNG seed")->required();
  gen->add_option("--out", g_out, "output CSV path")->required();
  gen->add_option("--t0", g_t0, "start time");
  gen->add_option("--T", g_T, "end time");
  gen->add_option("--method", g_method, "circulant_embedding or cholesky");

  auto* integ = app.add_subcommand("integrate", "generalized Stieltjes integral of f against g");
  std::string i_f, i_g;
  double i_alpha = 0.3;
  std::optional<double> i_from, i_to;
  integ->add_option("--f", i_f, "integrand CSV")->required();
  integ->add_option("--g", i_g, "integrator CSV")->required();
  integ->add_option("--alpha", i_alpha, "fractional order in (0, 1/2)")->required();
  integ->add_option("--from", i_from, "lower limit (default: grid start)");
  integ->add_option("--to", i_to, "upper limit (default: grid end)");

  auto* solve = app.add_subcommand("solve", "Euler solve of the configured equation");
  std::string s_config, s_out = "solution.csv";
  solve->add_option("--config", s_config, "run configuration JSON")->required();
  solve->add_option("--out", s_out, "output CSV path");

  auto* check = app.add_subcommand("check", "deterministic viability conditions");
  std::string c_config;
  check->add_option("--config", c_config, "run configuration JSON")->required();

  auto* run = app.add_subcommand("run", "checker plus Monte Carlo experiment");
  std::string r_config;
  run->add_option("--config", r_config, "run configuration JSON")->required();
  run->add_option("--threads", threads, "worker threads (results are thread-count independent)");
  run->add_flag("--dry-run", dry_run, "validate config and print the plan, write nothing");
  run->add_option("--out-dir", out_dir_override, "override the configured output directory");

  auto* conv = app.add_subcommand("convergence", "step-refinement study on one driver path");
  std::string v_config, v_levels, v_out;
  conv->add_option("--config", v_config, "run configuration JSON")->required();
  conv->add_option("--levels", v_levels, "comma list of nested step counts")->required();
  conv->add_option("--out", v_out, "optional CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate_fbm(g_hurst, g_t0, g_T, g_steps, g_seed, g_method, g_out);
    if (integ->parsed()) return cmd_integrate(i_f, i_g, i_alpha, i_from, i_to);
    if (solve->parsed()) return cmd_solve(s_config, s_out);
    if (check->parsed()) return cmd_check(c_config);
    if (run->parsed()) return cmd_run(r_config, threads, dry_run, out_dir_override);
    if (conv->parsed()) return cmd_convergence(v_config, v_levels, v_out);
  } catch (const fsde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
