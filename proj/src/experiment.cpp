#include "dac/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <json.hpp>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dac/diagnostics.hpp"
#include "dac/environments.hpp"

namespace dac {

std::string to_string(ActorParam p) { return p == ActorParam::tabular ? "tabular" : "linear"; }
std::string to_string(QMode m) { return m == QMode::exact ? "exact" : "monte_carlo"; }

ActorParam parse_actor_param(const std::string& name) {
  if (name == "tabular") return ActorParam::tabular;
  if (name == "linear") return ActorParam::linear;
  throw std::invalid_argument("unknown actor parameterization '" + name + "' (expected tabular|linear)");
}

QMode parse_q_mode(const std::string& name) {
  if (name == "exact") return QMode::exact;
  if (name == "monte_carlo") return QMode::monte_carlo;
  throw std::invalid_argument("unknown q_mode '" + name + "' (expected exact|monte_carlo)");
}

namespace {

constexpr const char* kTabularFeatures = "tabular";
constexpr const char* kBanditLinearFeatures = "bandit-linear";

// The two-arm bandit used by the experiment runner: rewards (2, 1), critic feature (-2, 1).
constexpr double kBanditR1 = 2.0;
constexpr double kBanditR2 = 1.0;

struct Problem {
  TabularMdp mdp;
  std::vector<GridCoord> coords;
};

Problem make_problem(const std::string& env) {
  if (env == "bandit") return {build_two_arm_bandit(kBanditR1, kBanditR2), {}};
  GridWorld world = make_environment(env);
  return {std::move(world.mdp), std::move(world.state_coords)};
}

std::shared_ptr<const FeatureMatrix> make_features(const std::string& preset, const std::string& env,
                                                   const Problem& problem) {
  const int S = problem.mdp.num_states();
  const int A = problem.mdp.num_actions();
  if (preset == kTabularFeatures) {
    return std::make_shared<const FeatureMatrix>(FeatureMatrix::one_hot(S, A));
  }
  if (preset == kBanditLinearFeatures) {
    if (env != "bandit") throw std::invalid_argument("bandit-linear features need env=bandit");
    Matrix X(2, 1);
    X << -2.0, 1.0;
    return std::make_shared<const FeatureMatrix>(FeatureMatrix::from_dense(1, 2, X));
  }
  const FeaturePreset& p = feature_preset(preset);
  if (p.env != env) {
    throw std::invalid_argument("feature preset '" + preset + "' belongs to env '" + p.env + "'");
  }
  return std::make_shared<const FeatureMatrix>(
      build_feature_matrix(TileCoding(p.spec), problem.coords, A));
}

std::string resolved_actor_features(const ExperimentConfig& c) {
  if (!c.actor_features.empty()) return c.actor_features;
  return c.env == "bandit" ? std::string(kTabularFeatures) : c.env + "-d60";
}

std::string resolved_critic_features(const ExperimentConfig& c) {
  if (!c.critic_features.empty()) return c.critic_features;
  if (c.env == "bandit") return kBanditLinearFeatures;
  // Frozen Lake has no 80-dimensional preset; its most expressive one is used instead.
  return c.env == "frozenlake" ? "frozenlake-d100" : c.env + "-d80";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

DirectPolicy random_simplex_policy(int S, int A, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Table p(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) p(s, a) = expo(rng);
    p.row(s) /= p.row(s).sum();
  }
  return DirectPolicy(std::move(p)).floored();
}

}  // namespace

double ExperimentConfig::resolved_critic_tol() const {
  if (critic_tol > 0.0) return critic_tol;
  return representation == Representation::direct ? 1e-6 : 1e-8;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (env != "cliff" && env != "frozenlake" && env != "bandit") {
    fail("env must be cliff, frozenlake or bandit");
  }
  if (!(eta > 0.0)) fail("eta must be positive");
  if (!(c > 0.0)) fail("c must be positive");
  if (T < 1) fail("T must be >= 1");
  if (m_a < 1) fail("m_a must be >= 1");
  if (m_c < 1) fail("m_c must be >= 1");
  if (!(actor_tol >= 0.0)) fail("actor_tol must be non-negative");
  if (!(critic_tol >= 0.0)) fail("critic_tol must be non-negative");
  if (q_mode == QMode::monte_carlo && (mc_num_samples < 1 || mc_rollout_len < 1)) {
    fail("monte carlo settings must be >= 1");
  }
  if (seeds.empty()) fail("seeds must not be empty");
  if (critic == CriticKind::euclid && representation != Representation::softmax) {
    fail("the euclid critic requires the softmax representation");
  }
  const Problem problem = make_problem(env);
  try {
    make_features(resolved_critic_features(*this), env, problem);
    if (actor_param == ActorParam::linear) make_features(resolved_actor_features(*this), env, problem);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

RunLog run_single(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const Problem problem = make_problem(config.env);
  const TabularMdp& mdp = problem.mdp;
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const auto critic_features = make_features(resolved_critic_features(config), config.env, problem);
  const CriticLoss loss = critic_loss_for(config.critic, config.representation);
  const MirrorKind kind = config.representation == Representation::direct ? MirrorKind::neg_entropy
                                                                          : MirrorKind::log_sum_exp;

  std::mt19937_64 rng(derive_seed(seed, 0));
  std::unique_ptr<LinearPolicyParams> params;
  std::unique_ptr<DirectPolicy> tabular;
  if (config.actor_param == ActorParam::linear) {
    auto features = make_features(resolved_actor_features(config), config.env, problem);
    std::normal_distribution<double> normal(0.0, 0.1);
    Vector theta(features->dim());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = normal(rng);
    params = std::make_unique<LinearPolicyParams>(std::move(theta), std::move(features));
  } else {
    tabular = std::make_unique<DirectPolicy>(random_simplex_policy(S, A, rng));
  }

  ArmijoOptions armijo;
  armijo.reset_step = config.restart_line_search;
  CriticOptions critic_opts;
  critic_opts.max_iters = config.m_c;
  critic_opts.grad_tol = config.resolved_critic_tol();
  critic_opts.centering = config.centering;
  critic_opts.armijo = armijo;

  CriticModel critic(Vector::Zero(critic_features->dim()), critic_features);
  RunLog log;
  log.records.reserve(static_cast<std::size_t>(config.T) + 1);

  for (int t = 0; t <= config.T; ++t) {
    const auto start = Clock::now();
    const DirectPolicy pi_t = params ? params->policy() : *tabular;
    const OccupancySolution sol = solve_policy(mdp, pi_t);
    const Table q_target =
        config.q_mode == QMode::exact
            ? sol.q
            : mc_estimate_q(mdp, pi_t, config.mc_rollout_len, config.mc_num_samples,
                            derive_seed(seed, static_cast<std::uint64_t>(t) + 1));
    const CriticTarget target(q_target, pi_t, sol.d);

    double c_used = config.c;
    int halvings = 0;
    switch (loss) {
      case CriticLoss::td: critic = critic.with_omega(solve_td(target, *critic_features)); break;
      case CriticLoss::adv_td:
      case CriticLoss::euclidean_softmax:
        critic = critic.with_omega(solve_adv_td(target, *critic_features, config.centering));
        break;
      case CriticLoss::da_direct:
      case CriticLoss::da_softmax: {
        const CriticFit fit = minimize_critic(loss, critic, target, config.c, critic_opts);
        critic = fit.model;
        c_used = fit.c_used;
        halvings = fit.c_halvings;
        break;
      }
    }
    const LossEval critic_eval = evaluate_critic_loss(loss, critic, target, c_used, config.centering);
    const Table q_hat = critic.predict_q();
    const Table estimate = config.representation == Representation::direct
                               ? q_hat
                               : center(q_hat, pi_t.probs(), config.centering);

    RunRecord rec;
    rec.env = config.env;
    rec.representation = to_string(config.representation);
    rec.critic = to_string(config.critic);
    rec.d = critic_features->dim();
    rec.eta = config.eta;
    rec.c = config.c;
    rec.seed = seed;
    rec.iter = t;
    rec.J = sol.j;
    rec.critic_loss = critic_eval.value;
    rec.grad_norm = critic_eval.gradient.norm();
    rec.c_halvings = halvings;
    const Vector w = sol.d / sol.d.sum();
    rec.stationarity = stationarity_measure(pi_t, estimate, config.eta, c_used, MirrorMap(kind, w));
    if (config.log_improvement) {
      const ImprovementCheck check = check_improvement_condition(
          sol, pi_t, estimate, kind, params ? &params->features() : nullptr);
      rec.impr_lhs = check.lhs;
      rec.impr_rhs = check.rhs;
    }

    if (t < config.T) {
      if (tabular) {
        const double step = config.step_mode == StepMode::eta ? config.eta
                                                              : effective_step(config.eta, c_used);
        *tabular = config.representation == Representation::direct
                       ? update_tabular_direct(pi_t, estimate, step)
                       : update_tabular_softmax(pi_t, estimate, step);
      } else {
        const Surrogate surr =
            Surrogate::make(config.representation, pi_t.floored(), w, estimate, config.eta, c_used);
        const ActorFit fit = inner_loop_actor(surr, *params, config.m_a, config.actor_tol, armijo);
        *params = fit.params;
      }
    }
    if (config.record_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
    log.records.push_back(std::move(rec));
  }
  return log;
}

RunLog run_experiment(const ExperimentConfig& config) {
  RunLog all;
  for (std::uint64_t seed : config.seeds) {
    RunLog one = run_single(config, seed);
    all.records.insert(all.records.end(), one.records.begin(), one.records.end());
  }
  return all;
}

std::vector<ExperimentConfig> expand_sweep(const SweepConfig& sweep) {
  auto or_base = [](const auto& list, const auto& base) {
    using T = std::decay_t<decltype(base)>;
    return list.empty() ? std::vector<T>{base} : list;
  };
  const ExperimentConfig& b = sweep.base;
  std::vector<ExperimentConfig> cells;
  for (const auto& env : or_base(sweep.envs, b.env)) {
    for (const auto& rep : or_base(sweep.representations, b.representation)) {
      for (const auto& critic : or_base(sweep.critics, b.critic)) {
        for (const auto& feats : or_base(sweep.critic_features, b.critic_features)) {
          for (const auto& eta : or_base(sweep.etas, b.eta)) {
            for (const auto& c : or_base(sweep.cs, b.c)) {
              ExperimentConfig cell = b;
              cell.env = env;
              cell.representation = rep;
              cell.critic = critic;
              cell.critic_features = feats;
              cell.eta = eta;
              cell.c = c;
              cells.push_back(std::move(cell));
            }
          }
        }
      }
    }
  }
  return cells;
}

RunLog run_sweep(const std::vector<ExperimentConfig>& cells, int threads) {
  for (const auto& cell : cells) cell.validate();
  std::vector<std::pair<std::size_t, std::uint64_t>> jobs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::uint64_t seed : cells[i].seeds) jobs.emplace_back(i, seed);
  }
  std::vector<RunLog> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      try {
        results[k] = run_single(cells[jobs[k].first], jobs[k].second);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  int n = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n = std::min<int>(n, static_cast<int>(std::max<std::size_t>(1, jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  RunLog all;
  for (auto& r : results) {
    all.records.insert(all.records.end(), r.records.begin(), r.records.end());
  }
  return all;
}

// ---------------------------------------------------------------------------------------------
// Configuration files

namespace {

using nlohmann::json;

template <class T, class F>
std::vector<T> scalar_or_list(const json& v, F convert) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& item : v) out.push_back(convert(item));
  } else {
    out.push_back(convert(v));
  }
  return out;
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

  SweepConfig sweep;
  ExperimentConfig& b = sweep.base;
  const auto as_string = [](const json& v) { return v.get<std::string>(); };
  const auto as_double = [](const json& v) { return v.get<double>(); };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "env") {
        sweep.envs = scalar_or_list<std::string>(v, as_string);
      } else if (key == "representation") {
        sweep.representations = scalar_or_list<Representation>(
            v, [](const json& x) { return parse_representation(x.get<std::string>()); });
      } else if (key == "critic") {
        sweep.critics = scalar_or_list<CriticKind>(
            v, [](const json& x) { return parse_critic_kind(x.get<std::string>()); });
      } else if (key == "critic_features") {
        sweep.critic_features = scalar_or_list<std::string>(v, as_string);
      } else if (key == "eta") {
        sweep.etas = scalar_or_list<double>(v, as_double);
      } else if (key == "c") {
        sweep.cs = scalar_or_list<double>(v, as_double);
      } else if (key == "actor_param") {
        b.actor_param = parse_actor_param(v.get<std::string>());
      } else if (key == "actor_features") {
        b.actor_features = v.get<std::string>();
      } else if (key == "T") {
        b.T = v.get<int>();
      } else if (key == "m_a") {
        b.m_a = v.get<int>();
      } else if (key == "m_c") {
        b.m_c = v.get<int>();
      } else if (key == "actor_tol") {
        b.actor_tol = v.get<double>();
      } else if (key == "critic_tol") {
        b.critic_tol = v.get<double>();
      } else if (key == "q_mode") {
        b.q_mode = parse_q_mode(v.get<std::string>());
      } else if (key == "mc_num_samples") {
        b.mc_num_samples = v.get<int>();
      } else if (key == "mc_rollout_len") {
        b.mc_rollout_len = v.get<int>();
      } else if (key == "seeds") {
        b.seeds = scalar_or_list<std::uint64_t>(v, [](const json& x) { return x.get<std::uint64_t>(); });
      } else if (key == "output") {
        b.output = v.get<std::string>();
      } else if (key == "step_mode") {
        b.step_mode = parse_step_mode(v.get<std::string>());
      } else if (key == "centering") {
        const std::string name = v.get<std::string>();
        if (name == "policy_weighted") {
          b.centering = Centering::policy_weighted;
        } else if (name == "unweighted_sum") {
          b.centering = Centering::unweighted_sum;
        } else {
          throw std::invalid_argument("unknown centering '" + name + "'");
        }
      } else if (key == "restart_line_search") {
        b.restart_line_search = v.get<bool>();
      } else if (key == "record_wall_time") {
        b.record_wall_time = v.get<bool>();
      } else if (key == "log_improvement") {
        b.log_improvement = v.get<bool>();
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: wrong value type: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (sweep.envs.size() == 1) b.env = sweep.envs.front();
  return sweep;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

// ---------------------------------------------------------------------------------------------
// CSV

const std::vector<std::string> kCsvColumns = {
    "env",       "representation", "critic",    "d",            "eta",
    "c",         "seed",           "iter",      "J",            "critic_loss",
    "grad_norm", "stationarity",   "impr_lhs",  "impr_rhs",     "wall_ms"};

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    out << (i ? "," : "") << kCsvColumns[i];
  }
  out << "\n";
  for (const auto& r : records) {
    out << r.env << ',' << r.representation << ',' << r.critic << ',' << r.d << ',' << num(r.eta)
        << ',' << num(r.c) << ',' << r.seed << ',' << r.iter << ',' << num(r.J) << ','
        << num(r.critic_loss) << ',' << num(r.grad_norm) << ',' << num(r.stationarity) << ','
        << num(r.impr_lhs) << ',' << num(r.impr_rhs) << ',' << num(r.wall_ms) << "\n";
  }
}

std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header != kCsvColumns) throw std::invalid_argument("csv: unexpected header");
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != kCsvColumns.size()) throw std::invalid_argument("csv: wrong field count");
    RunRecord r;
    r.env = f[0];
    r.representation = f[1];
    r.critic = f[2];
    r.d = std::stoi(f[3]);
    r.eta = std::stod(f[4]);
    r.c = std::stod(f[5]);
    r.seed = std::stoull(f[6]);
    r.iter = std::stoi(f[7]);
    r.J = std::stod(f[8]);
    r.critic_loss = std::stod(f[9]);
    r.grad_norm = std::stod(f[10]);
    r.stationarity = std::stod(f[11]);
    r.impr_lhs = std::stod(f[12]);
    r.impr_rhs = std::stod(f[13]);
    r.wall_ms = std::stod(f[14]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records,
                                  const std::vector<std::string>& group_keys) {
  auto key_of = [&](const RunRecord& r) {
    std::vector<std::string> key;
    for (const auto& k : group_keys) {
      if (k == "env") key.push_back(r.env);
      else if (k == "representation") key.push_back(r.representation);
      else if (k == "critic") key.push_back(r.critic);
      else if (k == "d") key.push_back(std::to_string(r.d));
      else if (k == "eta") key.push_back(num(r.eta));
      else if (k == "c") key.push_back(num(r.c));
      else throw std::invalid_argument("aggregate: unknown group key '" + k + "'");
    }
    return key;
  };
  // Groups keep first-appearance order; iterations are sorted within a group.
  std::vector<std::vector<std::string>> order;
  std::map<std::vector<std::string>, std::map<int, std::vector<double>>> values;
  for (const auto& r : records) {
    auto key = key_of(r);
    if (!values.count(key)) order.push_back(key);
    values[key][r.iter].push_back(r.J);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    for (const auto& [iter, js] : values[key]) {
      SummaryRow row;
      row.key = key;
      row.iter = iter;
      row.n = static_cast<int>(js.size());
      double mean = 0.0;
      for (double v : js) mean += v;
      mean /= row.n;
      double var = 0.0;
      if (row.n > 1) {
        for (double v : js) var += (v - mean) * (v - mean);
        var /= (row.n - 1);
      }
      const double half = 1.96 * std::sqrt(var) / std::sqrt(static_cast<double>(row.n));
      row.mean = mean;
      row.ci_low = mean - half;
      row.ci_high = mean + half;
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace dac
