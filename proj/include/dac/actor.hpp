#pragma once

#include <string>

#include "dac/optim.hpp"
#include "dac/policy.hpp"

namespace dac {

/// Which step the closed-form tabular updates take.
///   eta:       the raw functional step size.
///   surrogate: zeta = 1 / (1/eta + 1/c), the exact maximizer of the surrogate.
enum class StepMode { eta, surrogate };
std::string to_string(StepMode m);
StepMode parse_step_mode(const std::string& name);

/// Effective step zeta with 1/zeta = 1/eta + 1/c.
double effective_step(double eta, double c);

/// Actor objective frozen at the start of an outer iteration.
///
/// Direct:  sum_s w(s) sum_a p(a|s) (Q_hat(s,a) - (1/zeta) log(p(a|s)/p_t(a|s)))
/// Softmax: sum_s w(s) sum_a p_t(a|s) (A_hat(s,a) + 1/zeta) log(p(a|s)/p_t(a|s))
///
/// `estimate` holds Q_hat for the direct form and A_hat for the softmax form.
struct Surrogate {
  Representation representation = Representation::direct;
  DirectPolicy policy_t;
  Vector state_weights;
  Table estimate;
  double inv_zeta = 1.0;

  static Surrogate make(Representation representation, DirectPolicy policy_t,
                        Vector state_weights, Table estimate, double eta, double c);
};

double eval_surrogate(const Surrogate& surr, const DirectPolicy& policy);
double eval_surrogate_direct(const Surrogate& surr, const DirectPolicy& policy);
double eval_surrogate_softmax(const Surrogate& surr, const DirectPolicy& policy);

/// Value and gradient in theta for a linear softmax policy.
LossEval eval_surrogate_direct(const Surrogate& surr, const LinearPolicyParams& params);
LossEval eval_surrogate_softmax(const Surrogate& surr, const LinearPolicyParams& params);
LossEval eval_surrogate(const Surrogate& surr, const LinearPolicyParams& params);

/// p_{t+1}(a|s) proportional to p_t(a|s) exp(step Q_hat(s,a)), then floored.
DirectPolicy update_tabular_direct(const DirectPolicy& policy_t, const Table& q_hat, double step);
/// p_{t+1}(a|s) proportional to p_t(a|s) max(1 + step A_hat(s,a), 0), then floored.
/// A row that would vanish entirely keeps its previous distribution.
DirectPolicy update_tabular_softmax(const DirectPolicy& policy_t, const Table& adv_hat,
                                    double step);
/// Dispatches on the surrogate's representation with step zeta.
DirectPolicy surrogate_maximizer(const Surrogate& surr);

struct ActorFit {
  LinearPolicyParams params;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

/// Gradient ascent on the surrogate with Armijo backtracking, started at theta_0.
ActorFit inner_loop_actor(const Surrogate& surr, const LinearPolicyParams& theta_0, int max_iters,
                          double grad_tol, const ArmijoOptions& options = {});

}  // namespace dac
