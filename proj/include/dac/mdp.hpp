#pragma once

#include <cstdint>
#include <iosfwd>

#include "dac/policy.hpp"
#include "dac/types.hpp"

namespace dac {

/// Finite discounted MDP <S, A, P, r, rho, gamma>.
///
/// Transitions are stored as an (S*A) x S matrix whose row s * A + a holds P(.|s,a).
/// Rewards are arbitrary reals.
class TabularMdp {
 public:
  TabularMdp(Matrix transitions, Table reward, Vector initial, double discount);

  int num_states() const { return static_cast<int>(reward_.rows()); }
  int num_actions() const { return static_cast<int>(reward_.cols()); }
  const Matrix& transitions() const { return transitions_; }
  double transition(int s, int a, int next) const {
    return transitions_(static_cast<Eigen::Index>(s) * num_actions() + a, next);
  }
  const Table& reward() const { return reward_; }
  const Vector& initial() const { return initial_; }
  double discount() const { return discount_; }

 private:
  Matrix transitions_;
  Table reward_;
  Vector initial_;
  double discount_;
};

/// Exact quantities of a policy. The occupancy d is unnormalized and sums to 1/(1-gamma).
struct OccupancySolution {
  Vector v;
  Table q;
  Table adv;
  Vector d;
  /// Unnormalized state-action occupancy d(s) p(a|s).
  Table mu;
  double j = 0.0;
};

/// State-to-state matrix P^pi and expected reward r^pi of a policy.
Matrix policy_transition(const TabularMdp& mdp, const DirectPolicy& policy);
Vector policy_reward(const TabularMdp& mdp, const DirectPolicy& policy);

OccupancySolution solve_policy(const TabularMdp& mdp, const DirectPolicy& policy);

/// J(pi) - J(pi') obtained from the occupancy of pi and the action values of pi'.
double performance_difference(const TabularMdp& mdp, const DirectPolicy& pi,
                              const DirectPolicy& pi_prime);

/// Monte Carlo Q estimate: for every (s, a), the average of num_samples truncated
/// discounted returns of length rollout_len that start with (s, a) and then follow policy.
Table mc_estimate_q(const TabularMdp& mdp, const DirectPolicy& policy, int rollout_len,
                    int num_samples, std::uint64_t seed);

/// Line-oriented text format:
///   states <S>
///   actions <A>
///   discount <gamma>
///   initial <s> <prob>
///   transition <s> <a> <s'> <prob>
///   reward <s> <a> <r>
/// Lines starting with '#' are comments. Omitted entries are zero.
void write_mdp(std::ostream& out, const TabularMdp& mdp);
TabularMdp read_mdp(std::istream& in);

}  // namespace dac
