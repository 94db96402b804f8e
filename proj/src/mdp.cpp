#include "dac/mdp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace dac {

namespace {

constexpr double kDistTol = 1e-12;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_policy_shape(const TabularMdp& mdp, const DirectPolicy& policy) {
  require(policy.num_states() == mdp.num_states() && policy.num_actions() == mdp.num_actions(),
          "policy shape does not match the MDP");
}

}  // namespace

std::string to_string(Representation r) {
  return r == Representation::direct ? "direct" : "softmax";
}

Representation parse_representation(const std::string& name) {
  if (name == "direct") return Representation::direct;
  if (name == "softmax") return Representation::softmax;
  throw std::invalid_argument("unknown representation '" + name + "'");
}

TabularMdp::TabularMdp(Matrix transitions, Table reward, Vector initial, double discount)
    : transitions_(std::move(transitions)),
      reward_(std::move(reward)),
      initial_(std::move(initial)),
      discount_(discount) {
  const Eigen::Index S = reward_.rows();
  const Eigen::Index A = reward_.cols();
  require(S > 0 && A > 0, "MDP needs at least one state and one action");
  require(transitions_.rows() == S * A && transitions_.cols() == S,
          "transition matrix must be (S*A) x S");
  require(initial_.size() == S, "initial distribution must have S entries");
  require(discount_ >= 0.0 && discount_ < 1.0, "discount must lie in [0, 1)");
  require(reward_.allFinite(), "rewards must be finite");
  for (Eigen::Index i = 0; i < S * A; ++i) {
    require((transitions_.row(i).array() >= 0.0).all(), "transition probabilities must be >= 0");
    require(std::abs(transitions_.row(i).sum() - 1.0) <= kDistTol,
            "transition row " + std::to_string(i) + " does not sum to 1");
  }
  require((initial_.array() >= 0.0).all(), "initial probabilities must be >= 0");
  require(std::abs(initial_.sum() - 1.0) <= kDistTol, "initial distribution does not sum to 1");
}

Matrix policy_transition(const TabularMdp& mdp, const DirectPolicy& policy) {
  check_policy_shape(mdp, policy);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  Matrix P = Matrix::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      P.row(s) += policy(s, a) * mdp.transitions().row(static_cast<Eigen::Index>(s) * A + a);
    }
  }
  return P;
}

Vector policy_reward(const TabularMdp& mdp, const DirectPolicy& policy) {
  check_policy_shape(mdp, policy);
  return (mdp.reward().array() * policy.probs().array()).rowwise().sum();
}

OccupancySolution solve_policy(const TabularMdp& mdp, const DirectPolicy& policy) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const double gamma = mdp.discount();
  const Matrix P = policy_transition(mdp, policy);
  const Matrix I = Matrix::Identity(S, S);

  const Eigen::PartialPivLU<Matrix> forward(I - gamma * P);
  const Eigen::PartialPivLU<Matrix> backward(I - gamma * P.transpose());

  OccupancySolution sol;
  sol.v = forward.solve(policy_reward(mdp, policy));
  sol.d = backward.solve(mdp.initial());
  if (!sol.v.allFinite() || !sol.d.allFinite()) {
    throw std::runtime_error("solve_policy: linear solve failed");
  }

  const Vector next_value = mdp.transitions() * sol.v;
  sol.q = mdp.reward() + gamma * unflatten(next_value, S, A);
  sol.adv = sol.q.colwise() - sol.v;
  sol.mu = policy.probs().array().colwise() * sol.d.array();
  sol.j = mdp.initial().dot(sol.v);
  return sol;
}

double performance_difference(const TabularMdp& mdp, const DirectPolicy& pi,
                              const DirectPolicy& pi_prime) {
  const OccupancySolution on_pi = solve_policy(mdp, pi);
  const OccupancySolution on_prime = solve_policy(mdp, pi_prime);
  const Table diff = pi.probs() - pi_prime.probs();
  const Vector per_state = (on_prime.q.array() * diff.array()).rowwise().sum();
  return on_pi.d.dot(per_state);
}

Table mc_estimate_q(const TabularMdp& mdp, const DirectPolicy& policy, int rollout_len,
                    int num_samples, std::uint64_t seed) {
  check_policy_shape(mdp, policy);
  require(rollout_len >= 1, "rollout_len must be >= 1");
  require(num_samples >= 1, "num_samples must be >= 1");
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const double gamma = mdp.discount();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto sample = [&](const auto& row) {
    const double u = unif(rng);
    double acc = 0.0;
    const Eigen::Index n = row.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += row(i);
      if (u < acc) return static_cast<int>(i);
    }
    // Rounding left u above the cumulative sum; take the last positive entry.
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      if (row(i) > 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(n - 1);
  };

  Table q_hat = Table::Zero(S, A);
  for (int s0 = 0; s0 < S; ++s0) {
    for (int a0 = 0; a0 < A; ++a0) {
      double total = 0.0;
      for (int k = 0; k < num_samples; ++k) {
        int s = s0;
        int a = a0;
        double discount = 1.0;
        double ret = 0.0;
        for (int step = 0; step < rollout_len; ++step) {
          ret += discount * mdp.reward()(s, a);
          discount *= gamma;
          s = sample(mdp.transitions().row(static_cast<Eigen::Index>(s) * A + a));
          a = sample(policy.probs().row(s));
        }
        total += ret;
      }
      q_hat(s0, a0) = total / num_samples;
    }
  }
  return q_hat;
}

}  // namespace dac
