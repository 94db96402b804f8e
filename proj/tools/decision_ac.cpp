// Command-line front end: experiment sweeps, bandit trajectories and self-checks.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dac/bandits.hpp"
#include "dac/experiment.hpp"
#include "dac/verification.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::string> env, representation, critic, actor_param, actor_features, critic_features;
  std::optional<std::string> q_mode, step_mode, output;
  std::optional<double> eta, c, actor_tol, critic_tol;
  std::optional<int> T, m_a, m_c;
  std::vector<std::uint64_t> seeds;
  int threads = 0;
  std::string summary;
  bool wall_time = false;
};

int do_run(const RunArgs& a) {
  dac::SweepConfig sweep = a.config.empty() ? dac::SweepConfig{} : dac::load_sweep_config(a.config);
  dac::ExperimentConfig& b = sweep.base;
  // Command-line values replace both the scalar and any list given in the file.
  if (a.env) { b.env = *a.env; sweep.envs.clear(); }
  if (a.representation) { b.representation = dac::parse_representation(*a.representation); sweep.representations.clear(); }
  if (a.critic) { b.critic = dac::parse_critic_kind(*a.critic); sweep.critics.clear(); }
  if (a.critic_features) { b.critic_features = *a.critic_features; sweep.critic_features.clear(); }
  if (a.eta) { b.eta = *a.eta; sweep.etas.clear(); }
  if (a.c) { b.c = *a.c; sweep.cs.clear(); }
  if (a.actor_param) b.actor_param = dac::parse_actor_param(*a.actor_param);
  if (a.actor_features) b.actor_features = *a.actor_features;
  if (a.q_mode) b.q_mode = dac::parse_q_mode(*a.q_mode);
  if (a.step_mode) b.step_mode = dac::parse_step_mode(*a.step_mode);
  if (a.actor_tol) b.actor_tol = *a.actor_tol;
  if (a.critic_tol) b.critic_tol = *a.critic_tol;
  if (a.T) b.T = *a.T;
  if (a.m_a) b.m_a = *a.m_a;
  if (a.m_c) b.m_c = *a.m_c;
  if (!a.seeds.empty()) b.seeds = a.seeds;
  if (a.output) b.output = *a.output;
  if (a.wall_time) b.record_wall_time = true;

  const auto cells = dac::expand_sweep(sweep);
  for (const auto& cell : cells) cell.validate();
  std::cerr << "running " << cells.size() << " cell(s) x " << b.seeds.size() << " seed(s)\n";
  const dac::RunLog log = dac::run_sweep(cells, a.threads);

  if (b.output.empty() || b.output == "-") {
    dac::write_csv(std::cout, log.records);
  } else {
    std::ofstream out(b.output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + b.output);
    dac::write_csv(out, log.records);
    std::cerr << "wrote " << log.records.size() << " records to " << b.output << "\n";
  }
  int halvings = 0;
  for (const auto& r : log.records) halvings += r.c_halvings;
  if (halvings > 0) std::cerr << "note: c was halved " << halvings << " time(s) to keep the softmax critic loss defined\n";

  if (!a.summary.empty()) {
    std::ofstream out(a.summary);
    if (!out) throw std::runtime_error("cannot open summary file " + a.summary);
    const std::vector<std::string> keys = {"env", "representation", "critic", "d", "eta", "c"};
    out << "env,representation,critic,d,eta,c,iter,n,mean_J,ci_low,ci_high\n";
    for (const auto& row : dac::aggregate(log.records, keys)) {
      for (const auto& k : row.key) out << k << ",";
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", row.iter, row.n, row.mean, row.ci_low,
                    row.ci_high);
      out << buf;
    }
  }
  return 0;
}

struct BanditArgs {
  std::string scenario = "linear-critic";
  std::string critic = "da";
  int T = 200;
  std::optional<double> p0, eta, c;
  double eps = 0.75;
  std::string tie_break = "prefer_h0";
  double r1 = 2.0, r2 = 1.0, x1 = -2.0, x2 = 1.0;
  std::string output;
};

int do_bandit(const BanditArgs& a) {
  std::vector<dac::BanditStep> steps;
  if (a.scenario == "hypothesis") {
    dac::HypothesisBandit sc;
    sc.eps = a.eps;
    if (a.p0) sc.p0 = *a.p0;
    if (a.eta) sc.eta = *a.eta;
    if (a.c) sc.c = *a.c;
    sc.tie_break = dac::parse_tie_break(a.tie_break);
    steps = dac::run_hypothesis_bandit(sc, dac::parse_bandit_critic(a.critic), a.T);
  } else if (a.scenario == "linear-critic" || a.scenario == "two-arm") {
    dac::LinearCriticBandit sc;
    sc.r1 = a.r1;
    sc.r2 = a.r2;
    sc.x1 = a.x1;
    sc.x2 = a.x2;
    if (a.p0) sc.p0 = *a.p0;
    if (a.eta) sc.eta = *a.eta;
    if (a.c) sc.c = *a.c;
    steps = a.scenario == "two-arm" ? dac::run_general_two_arm(sc, a.T)
                                    : dac::run_linear_critic_bandit(sc, dac::parse_bandit_critic(a.critic), a.T);
  } else {
    throw std::invalid_argument("unknown scenario '" + a.scenario + "' (expected linear-critic|hypothesis|two-arm)");
  }
  if (a.output.empty() || a.output == "-") {
    dac::write_bandit_csv(std::cout, steps);
  } else {
    std::ofstream out(a.output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + a.output);
    dac::write_bandit_csv(out, steps);
  }
  return 0;
}

int do_verify(bool full, std::uint64_t seed) {
  std::vector<dac::SuiteResult> results;
  if (full) {
    results = {dac::linear_critic_bandit_suite(),
               dac::hypothesis_bandit_suite(),
               dac::general_two_arm_suite(100, seed),
               dac::lower_bound_suite(dac::Representation::direct, 1000, seed),
               dac::lower_bound_suite(dac::Representation::softmax, 1000, seed + 1),
               dac::gradient_suite(200, seed),
               dac::lemma_suite(1000, seed),
               dac::closed_form_consistency_suite(40, seed)};
  } else {
    results = dac::run_quick_suites(seed);
  }
  bool all = true;
  std::printf("%-36s %-6s %9s  %s\n", "suite", "result", "seconds", "detail");
  for (const auto& r : results) {
    std::printf("%-36s %-6s %9.3f  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-aware actor-critic toolkit for finite MDPs"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment sweep and write per-iteration CSV logs");
  run_cmd->add_option("--config", run.config, "JSON configuration file")->check(CLI::ExistingFile);
  run_cmd->add_option("--env", run.env, "cliff | frozenlake | bandit");
  run_cmd->add_option("--representation", run.representation, "direct | softmax");
  run_cmd->add_option("--critic", run.critic, "da | td | advtd | euclid");
  run_cmd->add_option("--actor-param", run.actor_param, "tabular | linear");
  run_cmd->add_option("--actor-features", run.actor_features, "feature preset for the linear actor");
  run_cmd->add_option("--critic-features", run.critic_features, "feature preset for the critic, or tabular");
  run_cmd->add_option("--q-mode", run.q_mode, "exact | monte_carlo");
  run_cmd->add_option("--step-mode", run.step_mode, "eta | surrogate (tabular actor step)");
  run_cmd->add_option("--eta", run.eta, "functional step size");
  run_cmd->add_option("--c", run.c, "critic trade-off parameter");
  run_cmd->add_option("--T", run.T, "outer iterations");
  run_cmd->add_option("--ma", run.m_a, "actor inner iterations");
  run_cmd->add_option("--mc", run.m_c, "critic inner iterations");
  run_cmd->add_option("--actor-tol", run.actor_tol, "actor gradient-norm tolerance");
  run_cmd->add_option("--critic-tol", run.critic_tol, "critic gradient-norm tolerance (0 = default)");
  run_cmd->add_option("--seeds", run.seeds, "seed list");
  run_cmd->add_option("--out", run.output, "CSV output path ('-' for stdout)");
  run_cmd->add_option("--threads", run.threads, "worker threads (0 = hardware concurrency)");
  run_cmd->add_option("--summary", run.summary, "also write per-iteration mean and 95% interval of J");
  run_cmd->add_flag("--wall-time", run.wall_time, "record wall-clock milliseconds (breaks byte-identical reruns)");

  BanditArgs bandit;
  auto* bandit_cmd = app.add_subcommand("bandit", "Run an analytic two-armed bandit and write its trajectory as CSV");
  bandit_cmd->add_option("--scenario", bandit.scenario, "linear-critic | hypothesis | two-arm")->capture_default_str();
  bandit_cmd->add_option("--critic", bandit.critic, "td | da (linear-critic), advtd | da (hypothesis)")->capture_default_str();
  bandit_cmd->add_option("--T", bandit.T, "iterations")->capture_default_str();
  bandit_cmd->add_option("--p0", bandit.p0, "initial probability of arm 1");
  bandit_cmd->add_option("--eta", bandit.eta, "actor step size");
  bandit_cmd->add_option("--c", bandit.c, "critic trade-off parameter");
  bandit_cmd->add_option("--eps", bandit.eps, "hypothesis offset in (1/2, 1)")->capture_default_str();
  bandit_cmd->add_option("--tie-break", bandit.tie_break, "prefer_h0 | prefer_h1")->capture_default_str();
  bandit_cmd->add_option("--r1", bandit.r1, "reward of arm 1")->capture_default_str();
  bandit_cmd->add_option("--r2", bandit.r2, "reward of arm 2")->capture_default_str();
  bandit_cmd->add_option("--x1", bandit.x1, "feature of arm 1")->capture_default_str();
  bandit_cmd->add_option("--x2", bandit.x2, "feature of arm 2")->capture_default_str();
  bandit_cmd->add_option("--out", bandit.output, "CSV output path ('-' for stdout)");

  bool full = false;
  std::uint64_t seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "Run the randomized self-check suites and print a pass/fail table");
  verify_cmd->add_flag("--full", full, "run at acceptance scale instead of the quick scale");
  verify_cmd->add_option("--seed", seed, "base seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return do_run(run);
    if (*bandit_cmd) return do_bandit(bandit);
    if (*verify_cmd) return do_verify(full, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
