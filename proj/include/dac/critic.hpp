#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dac/features.hpp"
#include "dac/optim.hpp"
#include "dac/policy.hpp"

namespace dac {

/// Critic family selected on the command line.
enum class CriticKind { da, td, advtd, euclid };
std::string to_string(CriticKind k);
CriticKind parse_critic_kind(const std::string& name);

/// Concrete loss minimized by the critic.
enum class CriticLoss { da_direct, da_softmax, td, adv_td, euclidean_softmax };
std::string to_string(CriticLoss k);
CriticLoss critic_loss_for(CriticKind kind, Representation rep);

/// How advantage features are centered.
///   policy_weighted: X(s,a) - sum_b p(b|s) X(s,b), so sum_a p(a|s) A_hat(s,a) = 0.
///   unweighted_sum:  X(s,a) - sum_b X(s,b).
enum class Centering { policy_weighted, unweighted_sum };

/// Subtracts the per-state mean (or sum) of `values` across actions.
Table center(const Table& values, const Table& probs, Centering centering);
/// Adjoint of `center`: for any u, <u, center(v)> = <center_adjoint(u), v>.
Table center_adjoint(const Table& coefficients, const Table& probs, Centering centering);

/// Linear critic Q_hat(s,a) = <omega, X(s,a)>.
class CriticModel {
 public:
  CriticModel(Vector omega, std::shared_ptr<const FeatureMatrix> features);

  const Vector& omega() const { return omega_; }
  const FeatureMatrix& features() const { return *features_; }
  std::shared_ptr<const FeatureMatrix> feature_ptr() const { return features_; }
  CriticModel with_omega(Vector omega) const { return {std::move(omega), features_}; }

  Table predict_q() const { return features_->apply(omega_); }
  Table predict_advantage(const Table& probs, Centering centering) const {
    return center(predict_q(), probs, centering);
  }

 private:
  Vector omega_;
  std::shared_ptr<const FeatureMatrix> features_;
};

/// Quantities frozen at the start of a critic phase: the target Q, the policy pi_t and the
/// state weights w (normalized to sum to one on construction).
class CriticTarget {
 public:
  CriticTarget(Table q_target, DirectPolicy policy, const Vector& state_weights);

  const Table& q() const { return q_; }
  /// Policy-weighted advantage of the target.
  const Table& advantage() const { return adv_; }
  const DirectPolicy& policy() const { return policy_; }
  const Table& probs() const { return policy_.probs(); }
  const Vector& state_weights() const { return w_; }
  /// mu_bar(s,a) = w(s) p(a|s); sums to one.
  const Table& mu() const { return mu_; }

 private:
  Table q_;
  Table adv_;
  DirectPolicy policy_;
  Vector w_;
  Table mu_;
};

/// Raised by the softmax decision-aware loss when 1 - c (A - A_hat) <= 0 at some (s, a).
class SoftmaxDomainError : public DomainError {
 public:
  SoftmaxDomainError(int state, int action, double margin);
  int state() const { return state_; }
  int action() const { return action_; }
  double margin() const { return margin_; }

 private:
  int state_;
  int action_;
  double margin_;
};

/// Decision-aware loss for the direct representation:
///   sum_s w(s) (1/c) log sum_a p(a|s) exp(-c (Delta(s,a) - sum_b p(b|s) Delta(s,b))),
/// with Delta = Q - Q_hat. Equivalent to the usual form sum_a p Delta + (1/c) log sum_a p e^{-c Delta}.
LossEval loss_da_direct(const CriticModel& model, const CriticTarget& target, double c);

/// Decision-aware loss for the softmax representation:
///   (1/c) sum_{s,a} mu_bar(s,a) (1 - c Delta) log(1 - c Delta), Delta = A - A_hat.
/// Throws SoftmaxDomainError when the argument of the logarithm is not positive.
LossEval loss_da_softmax(const CriticModel& model, const CriticTarget& target, double c,
                         Centering centering = Centering::policy_weighted);

/// Squared loss sum mu_bar (Q - Q_hat)^2.
LossEval loss_td(const CriticModel& model, const CriticTarget& target);
/// Squared loss sum mu_bar (A - A_hat)^2 on centered features.
LossEval loss_adv_td(const CriticModel& model, const CriticTarget& target,
                     Centering centering = Centering::policy_weighted);
/// (c/2) sum mu_bar (A - A_hat)^2.
LossEval loss_da_euclidean_softmax(const CriticModel& model, const CriticTarget& target, double c,
                                   Centering centering = Centering::policy_weighted);

/// Second derivative of loss_da_direct in omega (the tilted feature covariance scaled by c).
Matrix hessian_da_direct(const CriticModel& model, const CriticTarget& target, double c);

/// Normal-equation solves. A ridge of 1e-10 is added when the system is near singular.
Vector solve_td(const CriticTarget& target, const FeatureMatrix& features);
Vector solve_adv_td(const CriticTarget& target, const FeatureMatrix& features,
                    Centering centering = Centering::policy_weighted);

struct CriticOptions {
  int max_iters = 1000;
  double grad_tol = 1e-6;
  Centering centering = Centering::policy_weighted;
  ArmijoOptions armijo{};
};

struct CriticFit {
  CriticModel model;
  double loss = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  /// Trade-off parameter actually used; smaller than requested after softmax-domain halving.
  double c_used = 0.0;
  int c_halvings = 0;
};

/// Evaluates any critic loss (value and gradient) at the model.
LossEval evaluate_critic_loss(CriticLoss loss, const CriticModel& model, const CriticTarget& target,
                              double c, Centering centering = Centering::policy_weighted);

/// Gradient descent with Armijo backtracking, warm-started at `model`.
///
/// For the softmax decision-aware loss an infeasible starting point halves c until
/// it becomes feasible (at most 60 times); the count is reported in the result.
CriticFit minimize_critic(CriticLoss loss, const CriticModel& model, const CriticTarget& target,
                          double c, const CriticOptions& options = {});

}  // namespace dac
