#include "dac/actor.hpp"

#include <cmath>
#include <stdexcept>

namespace dac {

std::string to_string(StepMode m) { return m == StepMode::eta ? "eta" : "surrogate"; }

StepMode parse_step_mode(const std::string& name) {
  if (name == "eta") return StepMode::eta;
  if (name == "surrogate") return StepMode::surrogate;
  throw std::invalid_argument("unknown step mode '" + name + "' (expected eta|surrogate)");
}

double effective_step(double eta, double c) {
  if (!(eta > 0.0) || !(c > 0.0)) throw std::invalid_argument("eta and c must be positive");
  return 1.0 / (1.0 / eta + 1.0 / c);
}

Surrogate Surrogate::make(Representation representation, DirectPolicy policy_t,
                          Vector state_weights, Table estimate, double eta, double c) {
  if (estimate.rows() != policy_t.num_states() || estimate.cols() != policy_t.num_actions()) {
    throw std::invalid_argument("surrogate estimate shape does not match the policy");
  }
  if (state_weights.size() != policy_t.num_states()) {
    throw std::invalid_argument("surrogate weight count does not match the policy");
  }
  if (!(state_weights.array() >= 0.0).all() || !(state_weights.sum() > 0.0)) {
    throw std::invalid_argument("surrogate weights must be non-negative with positive total");
  }
  if (!(policy_t.probs().array() > 0.0).all()) {
    throw DomainError("surrogate anchor policy must have strictly positive probabilities");
  }
  Surrogate s{representation, std::move(policy_t), state_weights / state_weights.sum(),
              std::move(estimate), 1.0 / effective_step(eta, c)};
  return s;
}

namespace {

void check_policy(const Surrogate& surr, const DirectPolicy& policy) {
  if (policy.num_states() != surr.policy_t.num_states() ||
      policy.num_actions() != surr.policy_t.num_actions()) {
    throw std::invalid_argument("policy shape does not match the surrogate");
  }
}

// Row-wise log-probabilities of a linear softmax policy.
Table log_probs(const Table& logits) {
  Table out = logits;
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    out.row(s).array() -= log_sum_exp(logits.row(s).transpose());
  }
  return out;
}

}  // namespace

double eval_surrogate_direct(const Surrogate& surr, const DirectPolicy& policy) {
  check_policy(surr, policy);
  const Table& p = policy.probs();
  const Table& pt = surr.policy_t.probs();
  double total = 0.0;
  for (Eigen::Index s = 0; s < p.rows(); ++s) {
    double row = 0.0;
    for (Eigen::Index a = 0; a < p.cols(); ++a) {
      if (p(s, a) == 0.0) continue;
      row += p(s, a) * (surr.estimate(s, a) - surr.inv_zeta * std::log(p(s, a) / pt(s, a)));
    }
    total += surr.state_weights(s) * row;
  }
  return total;
}

double eval_surrogate_softmax(const Surrogate& surr, const DirectPolicy& policy) {
  check_policy(surr, policy);
  const Table& p = policy.probs();
  const Table& pt = surr.policy_t.probs();
  if (!(p.array() > 0.0).all()) throw DomainError("softmax surrogate needs positive probabilities");
  const Table terms =
      pt.array() * (surr.estimate.array() + surr.inv_zeta) * (p.array() / pt.array()).log();
  return surr.state_weights.dot(terms.rowwise().sum());
}

double eval_surrogate(const Surrogate& surr, const DirectPolicy& policy) {
  return surr.representation == Representation::direct ? eval_surrogate_direct(surr, policy)
                                                        : eval_surrogate_softmax(surr, policy);
}

LossEval eval_surrogate_direct(const Surrogate& surr, const LinearPolicyParams& params) {
  const Table lp = log_probs(params.logits());
  const Table p = lp.array().exp();
  const Table log_ratio = lp.array() - surr.policy_t.probs().array().log();
  // h = Q_hat - (1/zeta)(1 + log(p/p_t)); d/dz_a = p_a (h_a - <p, h>).
  const Table h = surr.estimate.array() - surr.inv_zeta * (1.0 + log_ratio.array());
  Table coeff(p.rows(), p.cols());
  double value = 0.0;
  for (Eigen::Index s = 0; s < p.rows(); ++s) {
    const double w = surr.state_weights(s);
    value += w * (p.row(s).array() *
                  (surr.estimate.row(s).array() - surr.inv_zeta * log_ratio.row(s).array()))
                     .sum();
    const double mean_h = p.row(s).dot(h.row(s));
    coeff.row(s) = w * (p.row(s).array() * (h.row(s).array() - mean_h));
  }
  return {value, params.features().apply_transpose(coeff)};
}

LossEval eval_surrogate_softmax(const Surrogate& surr, const LinearPolicyParams& params) {
  const Table lp = log_probs(params.logits());
  const Table& pt = surr.policy_t.probs();
  // Coefficients k_a = p_t(a) (A_hat(a) + 1/zeta); d/dz_a = k_a - p_a sum_b k_b.
  const Table k = pt.array() * (surr.estimate.array() + surr.inv_zeta);
  Table coeff(k.rows(), k.cols());
  double value = 0.0;
  for (Eigen::Index s = 0; s < k.rows(); ++s) {
    const double w = surr.state_weights(s);
    value += w * (k.row(s).array() * (lp.row(s).array() - pt.row(s).array().log())).sum();
    coeff.row(s) = w * (k.row(s).array() - lp.row(s).array().exp() * k.row(s).sum());
  }
  return {value, params.features().apply_transpose(coeff)};
}

LossEval eval_surrogate(const Surrogate& surr, const LinearPolicyParams& params) {
  return surr.representation == Representation::direct ? eval_surrogate_direct(surr, params)
                                                        : eval_surrogate_softmax(surr, params);
}

DirectPolicy update_tabular_direct(const DirectPolicy& policy_t, const Table& q_hat, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (q_hat.rows() != policy_t.num_states() || q_hat.cols() != policy_t.num_actions()) {
    throw std::invalid_argument("estimate shape does not match the policy");
  }
  const Table logits = policy_t.probs().array().log() + step * q_hat.array();
  return DirectPolicy(softmax_rows(logits)).floored();
}

DirectPolicy update_tabular_softmax(const DirectPolicy& policy_t, const Table& adv_hat,
                                    double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (adv_hat.rows() != policy_t.num_states() || adv_hat.cols() != policy_t.num_actions()) {
    throw std::invalid_argument("estimate shape does not match the policy");
  }
  Table next = policy_t.probs().array() * (1.0 + step * adv_hat.array()).max(0.0);
  for (Eigen::Index s = 0; s < next.rows(); ++s) {
    const double total = next.row(s).sum();
    if (total > 0.0) {
      next.row(s) /= total;
    } else {
      next.row(s) = policy_t.probs().row(s);
    }
  }
  return DirectPolicy(std::move(next)).floored();
}

DirectPolicy surrogate_maximizer(const Surrogate& surr) {
  const double zeta = 1.0 / surr.inv_zeta;
  return surr.representation == Representation::direct
             ? update_tabular_direct(surr.policy_t, surr.estimate, zeta)
             : update_tabular_softmax(surr.policy_t, surr.estimate, zeta);
}

ActorFit inner_loop_actor(const Surrogate& surr, const LinearPolicyParams& theta_0, int max_iters,
                          double grad_tol, const ArmijoOptions& options) {
  if (max_iters < 1) throw std::invalid_argument("actor iteration budget must be >= 1");
  const FeatureMatrix& X = theta_0.features();
  if (X.num_states() != surr.policy_t.num_states() || X.num_actions() != surr.policy_t.num_actions()) {
    throw std::invalid_argument("actor features do not match the surrogate");
  }
  const Objective objective = [&](const Vector& theta) -> std::optional<LossEval> {
    LossEval e = eval_surrogate(surr, theta_0.with_theta(theta));
    if (!std::isfinite(e.value) || !e.gradient.allFinite()) return std::nullopt;
    return e;
  };
  const DescentResult r = armijo_ascent(objective, theta_0.theta(), max_iters, grad_tol, options);
  return {theta_0.with_theta(r.x), r.value, r.grad_norm, r.iterations};
}

}  // namespace dac
