#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dac/actor.hpp"
#include "dac/critic.hpp"
#include "dac/optim.hpp"

namespace dac {

enum class ActorParam { tabular, linear };
enum class QMode { exact, monte_carlo };

std::string to_string(ActorParam p);
std::string to_string(QMode m);
ActorParam parse_actor_param(const std::string& name);
QMode parse_q_mode(const std::string& name);

/// One experiment cell. A cell runs every seed in `seeds`.
struct ExperimentConfig {
  std::string env = "cliff";
  Representation representation = Representation::direct;
  CriticKind critic = CriticKind::da;
  ActorParam actor_param = ActorParam::linear;
  /// Feature preset for the linear actor (ignored when tabular). Empty selects "<env>-d60",
  /// or one-hot features for the bandit.
  std::string actor_features;
  /// Feature preset for the critic, or "tabular" for one-hot features. Empty selects
  /// "cliff-d80", "frozenlake-d100", or "bandit-linear" for the bandit.
  std::string critic_features;
  double eta = 0.1;
  double c = 0.01;
  int T = 150;
  int m_a = 1000;
  int m_c = 1000;
  double actor_tol = 1e-3;
  /// Critic gradient tolerance; 0 selects 1e-6 for direct and 1e-8 for softmax.
  double critic_tol = 0.0;
  QMode q_mode = QMode::exact;
  int mc_num_samples = 10;
  int mc_rollout_len = 50;
  std::vector<std::uint64_t> seeds{0};
  std::string output;
  StepMode step_mode = StepMode::eta;
  Centering centering = Centering::policy_weighted;
  /// When true every Armijo search starts at the maximum step; when false it starts just above
  /// the last accepted step (still capped at the maximum), which is far cheaper on long runs.
  bool restart_line_search = false;
  /// When false the wall_ms column is written as 0 so reruns produce identical bytes.
  bool record_wall_time = false;
  /// When false the improvement-condition columns are skipped (written as 0).
  bool log_improvement = true;

  /// Throws std::invalid_argument describing the first invalid field.
  void validate() const;
  double resolved_critic_tol() const;
};

struct RunRecord {
  std::string env;
  std::string representation;
  std::string critic;
  int d = 0;
  double eta = 0.0;
  double c = 0.0;
  std::uint64_t seed = 0;
  int iter = 0;
  double J = 0.0;
  double critic_loss = 0.0;
  double grad_norm = 0.0;
  double stationarity = 0.0;
  double impr_lhs = 0.0;
  double impr_rhs = 0.0;
  double wall_ms = 0.0;
  /// Number of times c was halved by the critic for this record (not written to CSV).
  int c_halvings = 0;
};

struct RunLog {
  std::vector<RunRecord> records;
};

/// Runs one seed of a cell: records t = 0..T, each holding J(pi_t) and the critic fitted at pi_t.
RunLog run_single(const ExperimentConfig& config, std::uint64_t seed);
/// Runs every seed of a cell in order.
RunLog run_experiment(const ExperimentConfig& config);

/// Sweep over lists of values; every combination forms a cell.
struct SweepConfig {
  ExperimentConfig base;
  std::vector<std::string> envs;
  std::vector<Representation> representations;
  std::vector<CriticKind> critics;
  std::vector<std::string> critic_features;
  std::vector<double> etas;
  std::vector<double> cs;
};

std::vector<ExperimentConfig> expand_sweep(const SweepConfig& sweep);
/// Runs every (cell, seed) pair on `threads` workers and returns records in cell/seed order.
RunLog run_sweep(const std::vector<ExperimentConfig>& cells, int threads = 0);

/// Parses a JSON configuration. Scalar or list values are accepted for env, representation,
/// critic, critic_features, eta and c.
SweepConfig parse_sweep_config(const std::string& json_text);
SweepConfig load_sweep_config(const std::string& path);

extern const std::vector<std::string> kCsvColumns;
void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_csv(std::istream& in);

struct SummaryRow {
  std::vector<std::string> key;
  int iter = 0;
  int n = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Per-iteration mean of J and normal-approximation 95% interval
/// mean +- 1.96 s / sqrt(n), where s is the sample standard deviation across records.
/// Valid keys: env, representation, critic, d, eta, c.
std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records,
                                  const std::vector<std::string>& group_keys);

}  // namespace dac
