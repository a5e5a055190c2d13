// fbm_cli: batch experiment runner for the fractional binary market library.
//
// Subcommands: coeffs, critical, census, aa1, verify, variance.
// Every run writes CSV artifacts plus a run.json record into --out DIR.
// Exit codes: 0 success, 2 invalid parameters, 3 a verification subcommand
// found a violation.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbm/arbitrage.hpp"
#include "fbm/asymptotics.hpp"
#include "fbm/coefficients.hpp"
#include "fbm/io.hpp"
#include "fbm/market.hpp"
#include "fbm/strategy.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct Config {
  std::string subcommand;
  double H = 0.75;
  double sigma = 1.0;
  double s0 = 1.0;
  int N = 0;
  std::string N_grid;
  double gamma = 0.0;
  double lambda = -1.0;
  double p = 1.25;
  int n_max = 0;
  double quad_tol = 1e-10;
  std::uint64_t mc_samples = 100000;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = ".";
};

nlohmann::json config_json(const Config& c) {
  return nlohmann::json{
      {"subcommand", c.subcommand}, {"H", c.H},
      {"sigma", c.sigma},           {"s0", c.s0},
      {"N", c.N},                   {"N_grid", c.N_grid},
      {"gamma", c.gamma},           {"lambda", c.lambda},
      {"p", c.p},                   {"n_max", c.n_max},
      {"quad_tol", c.quad_tol},     {"mc_samples", c.mc_samples},
      {"seed", c.seed},             {"threads", c.threads},
      {"out", c.out}};
}

void add_common_flags(CLI::App* cmd, Config& c) {
  cmd->add_option("--H", c.H, "Hurst exponent, in (0.5, 1)");
  cmd->add_option("--sigma", c.sigma, "volatility scale, > 0");
  cmd->add_option("--s0", c.s0, "initial stock price, > 0");
  cmd->add_option("--N", c.N, "number of steps");
  cmd->add_option("--N-grid", c.N_grid, "grid 'a:b:step', 'dyadic:a:b' or 'n'");
  cmd->add_option("--gamma", c.gamma, "shorting-time fraction, in (0, 1)");
  cmd->add_option("--lambda", c.lambda, "proportional transaction cost, in [0, 1]");
  cmd->add_option("--p", c.p, "cost decay exponent for the aa1 schedule, > H");
  cmd->add_option("--n-max", c.n_max, "largest coefficient row to tabulate");
  cmd->add_option("--quad-tol", c.quad_tol, "quadrature tolerance");
  cmd->add_option("--mc-samples", c.mc_samples, "Monte Carlo sample count");
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--threads", c.threads, "worker threads (0 = hardware)");
  cmd->add_option("--out", c.out, "output directory");
}

int effective_threads(const Config& c) {
  if (const char* env = std::getenv("FBM_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return c.threads;
}

std::chrono::steady_clock::time_point g_start;

void write_run_record(const Config& c, const nlohmann::json& derived) {
  double wall_seconds = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - g_start).count();
  nlohmann::json rec{{"config", config_json(c)},
                     {"tool_version", kToolVersion},
                     {"wall_time_seconds", wall_seconds},
                     {"derived_constants", derived}};
  std::ofstream f(std::filesystem::path(c.out) / "run.json", std::ios::binary);
  if (!f) throw std::runtime_error("cannot open run.json for writing");
  f << rec.dump(2) << '\n';
}

nlohmann::json table_constants(const fbm::CoeffTable& t) {
  return nlohmann::json{{"H", t.params.H},       {"sigma", t.params.sigma},
                        {"n_max", t.n_max},       {"quad_tol", t.quad_tol},
                        {"c_H", t.c_H},           {"c_star", t.c_star},
                        {"g_limit", t.g_limit},   {"c_X", t.c_X}};
}

std::vector<int> resolve_grid(const Config& c) {
  if (!c.N_grid.empty()) return fbm::parse_n_grid(c.N_grid);
  if (c.N > 0) return {c.N};
  throw std::invalid_argument("either --N or --N-grid is required");
}

int run_coeffs(const Config& c) {
  fbm::HurstParams p(c.H, c.sigma);
  int n_max = c.n_max > 0 ? c.n_max : 64;
  auto t = fbm::build_coeff_table(n_max, p, c.quad_tol, effective_threads(c));

  fbm::CsvWriter jw({"n", "i", "j"});
  for (int n = 2; n <= t.n_max; ++n)
    for (int i = 1; i < n; ++i) {
      auto r = jw.row();
      r.col(n).col(i).col(t.j(n, i));
      jw.append(std::move(r));
    }
  jw.write((std::filesystem::path(c.out) / "coeffs.csv").string());

  fbm::CsvWriter gw({"n", "g"});
  for (int n = 1; n <= t.n_max; ++n) {
    auto r = gw.row();
    r.col(n).col(t.g(n));
    gw.append(std::move(r));
  }
  gw.write((std::filesystem::path(c.out) / "g.csv").string());
  write_run_record(c, table_constants(t));
  return 0;
}

int run_critical(const Config& c) {
  fbm::HurstParams p(c.H, c.sigma);
  auto grid = resolve_grid(c);
  int n_max = c.n_max;
  for (int n : grid) n_max = std::max(n_max, n);
  auto t = std::make_shared<const fbm::CoeffTable>(
      fbm::build_coeff_table(n_max, p, c.quad_tol, effective_threads(c)));
  double gamma = c.gamma > 0.0 ? c.gamma : 0.25;

  fbm::CsvWriter w({"N", "lambda_phi_NN", "lambda_psi", "lowbd",
                    "exact_one_step", "nH"});
  auto nh = fbm::find_n_H(*t, t->n_max);
  double min_rate = std::numeric_limits<double>::infinity();
  for (int N : grid) {
    fbm::MarketModel m(t, N, c.s0);
    double lpsi = 0.0;
    try {
      lpsi = fbm::lambda_psi(m, gamma).lambda;
    } catch (const std::exception&) {
      lpsi = 0.0;  // no certified decrease run at this (gamma, N)
    }
    if (lpsi > 0.0 && lpsi < 1.0)
      min_rate = std::min(min_rate, -std::log1p(-lpsi) / std::sqrt(double(N)));
    auto r = w.row();
    r.col(N)
        .col(fbm::lambda_phi(m, N))
        .col(lpsi)
        .col(fbm::lower_bound_lowbd(m))
        .col(fbm::exact_one_step_critical(m))
        .col(nh ? *nh : 0);
    w.append(std::move(r));
  }
  w.write((std::filesystem::path(c.out) / "thresholds.csv").string());

  nlohmann::json derived = table_constants(*t);
  derived["gamma"] = gamma;
  derived["min_psi_rate_constant"] =
      std::isfinite(min_rate) ? min_rate : 0.0;
  auto gc = fbm::gamma_constants(p, gamma);
  derived["P_gamma"] = gc.P_gamma;
  derived["N0_gamma"] = gc.N0_gamma;
  write_run_record(c, derived);
  return 0;
}

int run_census(const Config& c) {
  fbm::HurstParams p(c.H, c.sigma);
  auto grid = resolve_grid(c);
  int n_max = c.n_max;
  for (int n : grid) n_max = std::max(n_max, n);
  n_max = std::max(n_max, 2);
  auto t = fbm::build_coeff_table(n_max, p, c.quad_tol, effective_threads(c));

  fbm::CsvWriter w({"n", "method", "count_u", "count_d", "ratio", "ci_low",
                    "ci_high", "samples", "seed"});
  auto est = fbm::nu_H_estimate(t, grid, c.mc_samples, c.seed);
  for (const auto& cr : est.levels) {
    auto r = w.row();
    r.col(cr.n)
        .col(std::string(cr.method == fbm::CensusMethod::exhaustive
                             ? "exhaustive"
                             : "monte_carlo"))
        .col(cr.count_u)
        .col(cr.count_d)
        .col(cr.ratio)
        .col(cr.ci_low)
        .col(cr.ci_high)
        .col(cr.samples)
        .col(cr.seed);
    w.append(std::move(r));
  }
  w.write((std::filesystem::path(c.out) / "census.csv").string());

  nlohmann::json derived = table_constants(t);
  derived["nu_hat"] = est.nu_hat;
  write_run_record(c, derived);
  return 0;
}

int run_aa1(const Config& c) {
  fbm::HurstParams p(c.H, c.sigma);
  int n_max = c.n_max > 0 ? c.n_max : 64;
  auto t = fbm::build_coeff_table(n_max, p, c.quad_tol, effective_threads(c));
  std::vector<int> grid = c.N_grid.empty() && c.N == 0
                              ? fbm::parse_n_grid("dyadic:64:16384")
                              : resolve_grid(c);
  auto rep = fbm::aa1_verify(t, c.s0, fbm::aa1_schedule(c.H, c.p, grid));

  fbm::CsvWriter w({"N", "lambda_N", "q_N", "c_N", "C_N", "profit_prob_num",
                    "profit_prob_den", "admissible"});
  for (const auto& row : rep.rows) {
    fbm::DyadicProb prob = row.profit_probability;
    prob.normalize();
    auto r = w.row();
    r.col(row.N)
        .col(row.lambda_N)
        .col(row.q_N)
        .col(row.c_N)
        .col(row.C_N)
        .col(prob.num)
        .col(std::string("2^" + std::to_string(prob.log2_den)))
        .col(row.admissible ? 1 : 0);
    w.append(std::move(r));
  }
  w.write((std::filesystem::path(c.out) / "aa1.csv").string());

  nlohmann::json derived = table_constants(t);
  derived["n_H"] = rep.n_H;
  derived["slope_c"] = rep.slope_c;
  derived["slope_C"] = rep.slope_C;
  write_run_record(c, derived);
  bool all_ok = true;
  for (const auto& row : rep.rows) all_ok = all_ok && row.admissible;
  return all_ok ? 0 : 3;
}

int run_verify(const Config& c) {
  fbm::HurstParams p(c.H, c.sigma);
  if (c.N <= 0) throw std::invalid_argument("verify: --N is required");
  if (c.lambda < 0.0 || c.lambda >= 1.0)
    throw std::invalid_argument("verify: --lambda in [0, 1) is required");
  int n_max = std::max(c.n_max, c.N);
  auto t = std::make_shared<const fbm::CoeffTable>(
      fbm::build_coeff_table(n_max, p, c.quad_tol, effective_threads(c)));
  fbm::MarketModel m(t, c.N, c.s0);

  fbm::Strategy s = c.gamma > 0.0
                        ? fbm::gamma_strategy(m, c.lambda, c.gamma)
                        : fbm::sottinen_strategy(
                              m, c.lambda,
                              fbm::find_n_H(*t, t->n_max).value_or(c.N));
  auto cert = fbm::verify_arbitrage_exhaustive(m, s, c.lambda);

  fbm::DyadicProb prob = cert.profit_probability;
  prob.normalize();
  nlohmann::json derived = table_constants(*t);
  derived["certificate"] = nlohmann::json{
      {"lambda", cert.lambda},
      {"min_terminal_value", cert.min_terminal_value},
      {"profit_probability", prob.str()},
      {"witness_path", cert.witness_path.str()},
      {"self_financing_pass", cert.self_financing_pass},
      {"is_arbitrage", cert.is_arbitrage},
      {"nodes_visited", cert.nodes_visited}};
  write_run_record(c, derived);
  return cert.is_arbitrage ? 0 : 3;
}

int run_variance(const Config& c) {
  fbm::HurstParams p(c.H, c.sigma);
  auto grid = resolve_grid(c);
  fbm::CsvWriter w({"N", "V"});
  for (int N : grid) {
    auto r = w.row();
    r.col(N).col(fbm::variance_scaling(p, N, c.quad_tol, effective_threads(c)));
    w.append(std::move(r));
  }
  w.write((std::filesystem::path(c.out) / "variance.csv").string());
  nlohmann::json derived{{"H", c.H}, {"sigma", c.sigma},
                         {"sigma_sq", c.sigma * c.sigma}};
  write_run_record(c, derived);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional binary market analysis toolkit"};
  app.require_subcommand(1);
  Config c;
  for (const char* name :
       {"coeffs", "critical", "census", "aa1", "verify", "variance"}) {
    auto* cmd = app.add_subcommand(name);
    add_common_flags(cmd, c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  c.subcommand = app.get_subcommands().front()->get_name();
  g_start = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    std::filesystem::create_directories(c.out);
    if (c.subcommand == "coeffs") rc = run_coeffs(c);
    else if (c.subcommand == "critical") rc = run_critical(c);
    else if (c.subcommand == "census") rc = run_census(c);
    else if (c.subcommand == "aa1") rc = run_aa1(c);
    else if (c.subcommand == "verify") rc = run_verify(c);
    else if (c.subcommand == "variance") rc = run_variance(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
