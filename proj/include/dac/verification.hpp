#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dac/mdp.hpp"

namespace dac {

/// Outcome of one randomized self-check.
struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Random MDP with Dirichlet(1) transition rows and initial distribution and U[0,1) rewards.
TabularMdp random_mdp(int num_states, int num_actions, double discount, std::mt19937_64& rng);
/// Random policy with Dirichlet(1) rows floored away from zero.
DirectPolicy random_policy(int num_states, int num_actions, std::mt19937_64& rng);

/// Joint lower bound holds on random MDPs (half with exact critics, half with noisy ones).
SuiteResult lower_bound_suite(Representation rep, int instances, std::uint64_t seed);
/// Analytic gradients of every critic loss and actor surrogate against central differences.
SuiteResult gradient_suite(int instances_per_objective, std::uint64_t seed);
/// Bregman/KL identities, Fenchel-Young gap and the small-c quadratic limit.
SuiteResult lemma_suite(int instances, std::uint64_t seed);
/// One-hot linear actor inner loop against the closed-form tabular maximizers.
SuiteResult closed_form_consistency_suite(int instances, std::uint64_t seed);
/// Linear critic bandit: decision-aware critic finds the optimal arm, squared loss does not.
SuiteResult linear_critic_bandit_suite();
/// Hypothesis bandit: squared loss cannot separate the hypotheses, the decision-aware loss can.
SuiteResult hypothesis_bandit_suite();
/// General two-arm bandit with random rewards and features.
SuiteResult general_two_arm_suite(int instances, std::uint64_t seed);

/// All of the above at a reduced scale suitable for an interactive check.
std::vector<SuiteResult> run_quick_suites(std::uint64_t seed = 1);

}  // namespace dac
