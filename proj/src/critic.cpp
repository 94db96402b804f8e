#include "dac/critic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dac {

std::string to_string(CriticKind k) {
  switch (k) {
    case CriticKind::da: return "da";
    case CriticKind::td: return "td";
    case CriticKind::advtd: return "advtd";
    case CriticKind::euclid: return "euclid";
  }
  return "unknown";
}

CriticKind parse_critic_kind(const std::string& name) {
  if (name == "da") return CriticKind::da;
  if (name == "td") return CriticKind::td;
  if (name == "advtd") return CriticKind::advtd;
  if (name == "euclid") return CriticKind::euclid;
  throw std::invalid_argument("unknown critic '" + name + "' (expected da|td|advtd|euclid)");
}

std::string to_string(CriticLoss k) {
  switch (k) {
    case CriticLoss::da_direct: return "da_direct";
    case CriticLoss::da_softmax: return "da_softmax";
    case CriticLoss::td: return "td";
    case CriticLoss::adv_td: return "adv_td";
    case CriticLoss::euclidean_softmax: return "euclidean_softmax";
  }
  return "unknown";
}

CriticLoss critic_loss_for(CriticKind kind, Representation rep) {
  switch (kind) {
    case CriticKind::da:
      return rep == Representation::direct ? CriticLoss::da_direct : CriticLoss::da_softmax;
    case CriticKind::td: return CriticLoss::td;
    case CriticKind::advtd: return CriticLoss::adv_td;
    case CriticKind::euclid:
      if (rep != Representation::softmax) {
        throw std::invalid_argument("the euclid critic is defined for the softmax representation only");
      }
      return CriticLoss::euclidean_softmax;
  }
  throw std::invalid_argument("unknown critic kind");
}

Table center(const Table& values, const Table& probs, Centering centering) {
  if (values.rows() != probs.rows() || values.cols() != probs.cols()) {
    throw std::invalid_argument("center: shape mismatch");
  }
  Table out = values;
  for (Eigen::Index s = 0; s < values.rows(); ++s) {
    const double shift = centering == Centering::policy_weighted ? probs.row(s).dot(values.row(s))
                                                                 : values.row(s).sum();
    out.row(s).array() -= shift;
  }
  return out;
}

Table center_adjoint(const Table& coefficients, const Table& probs, Centering centering) {
  Table out = coefficients;
  for (Eigen::Index s = 0; s < coefficients.rows(); ++s) {
    const double total = coefficients.row(s).sum();
    if (centering == Centering::policy_weighted) {
      out.row(s) -= total * probs.row(s);
    } else {
      out.row(s).array() -= total;
    }
  }
  return out;
}

CriticModel::CriticModel(Vector omega, std::shared_ptr<const FeatureMatrix> features)
    : omega_(std::move(omega)), features_(std::move(features)) {
  if (!features_) throw std::invalid_argument("critic needs a feature matrix");
  if (omega_.size() != features_->dim()) throw std::invalid_argument("omega dimension mismatch");
}

CriticTarget::CriticTarget(Table q_target, DirectPolicy policy, const Vector& state_weights)
    : q_(std::move(q_target)), policy_(std::move(policy)) {
  if (q_.rows() != policy_.num_states() || q_.cols() != policy_.num_actions()) {
    throw std::invalid_argument("critic target shape does not match the policy");
  }
  if (state_weights.size() != q_.rows()) throw std::invalid_argument("state weight count mismatch");
  if (!(state_weights.array() >= 0.0).all() || !(state_weights.sum() > 0.0)) {
    throw std::invalid_argument("state weights must be non-negative with positive total");
  }
  w_ = state_weights / state_weights.sum();
  adv_ = center(q_, policy_.probs(), Centering::policy_weighted);
  mu_ = policy_.probs().array().colwise() * w_.array();
}

SoftmaxDomainError::SoftmaxDomainError(int state, int action, double margin)
    : DomainError("softmax critic loss undefined at state " + std::to_string(state) + ", action " +
                  std::to_string(action) + ": 1 - c (A - A_hat) = " + std::to_string(margin) +
                  " <= 0; reduce c"),
      state_(state),
      action_(action),
      margin_(margin) {}

namespace {

void check_compatible(const CriticModel& model, const CriticTarget& target) {
  const FeatureMatrix& X = model.features();
  if (X.num_states() != target.q().rows() || X.num_actions() != target.q().cols()) {
    throw std::invalid_argument("critic features do not match the target shape");
  }
}

void require_positive_c(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("trade-off parameter c must be positive");
}

// Per-state pieces of the direct decision-aware loss for residual row delta = Q - Q_hat.
// Returns the state loss and writes q - p (tilted minus behaviour weights) into `shift`.
double da_direct_state(const Eigen::Ref<const Eigen::RowVectorXd>& p_raw,
                       const Eigen::Ref<const Eigen::RowVectorXd>& delta, double c,
                       Eigen::RowVectorXd& shift) {
  const Eigen::Index A = delta.size();
  const Eigen::RowVectorXd p = p_raw / p_raw.sum();
  const double mean = p.dot(delta);
  Eigen::RowVectorXd y(A);
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < A; ++a) {
    y(a) = -c * (delta(a) - mean);
    if (p(a) > 0.0) m = std::max(m, y(a));
  }
  double value;
  if (m < 1.0) {
    double acc = 0.0;
    for (Eigen::Index a = 0; a < A; ++a) acc += p(a) * std::expm1(y(a));
    value = std::log1p(acc) / c;
  } else {
    double acc = 0.0;
    for (Eigen::Index a = 0; a < A; ++a) acc += p(a) * std::exp(y(a) - m);
    value = (m + std::log(acc)) / c;
  }
  // q_a - p_a = p_a (e_a - Z) / Z with e_a = exp(y_a - m), Z = sum_b p_b e_b and
  // e_a - Z = sum_b p_b e_b expm1(y_a - y_b), which stays accurate near the optimum.
  Eigen::RowVectorXd e(A);
  for (Eigen::Index a = 0; a < A; ++a) e(a) = std::exp(y(a) - m);
  const double Z = p.dot(e);
  shift.resize(A);
  for (Eigen::Index a = 0; a < A; ++a) {
    double diff = 0.0;
    for (Eigen::Index b = 0; b < A; ++b) {
      if (b != a && p(b) > 0.0) diff += p(b) * e(b) * std::expm1(y(a) - y(b));
    }
    shift(a) = p(a) * diff / Z;
  }
  return value;
}

}  // namespace

LossEval loss_da_direct(const CriticModel& model, const CriticTarget& target, double c) {
  require_positive_c(c);
  check_compatible(model, target);
  const Table delta = target.q() - model.predict_q();
  Table coeff = Table::Zero(delta.rows(), delta.cols());
  Eigen::RowVectorXd shift;
  double value = 0.0;
  for (Eigen::Index s = 0; s < delta.rows(); ++s) {
    const double w = target.state_weights()(s);
    if (w == 0.0) continue;
    value += w * da_direct_state(target.probs().row(s), delta.row(s), c, shift);
    coeff.row(s) = w * shift;
  }
  return {value, model.features().apply_transpose(coeff)};
}

Matrix hessian_da_direct(const CriticModel& model, const CriticTarget& target, double c) {
  require_positive_c(c);
  check_compatible(model, target);
  const Table delta = target.q() - model.predict_q();
  const Matrix X = model.features().dense();
  const Eigen::Index A = delta.cols();
  Matrix H = Matrix::Zero(X.cols(), X.cols());
  Eigen::RowVectorXd shift;
  for (Eigen::Index s = 0; s < delta.rows(); ++s) {
    const double w = target.state_weights()(s);
    if (w == 0.0) continue;
    da_direct_state(target.probs().row(s), delta.row(s), c, shift);
    const Vector p = target.probs().row(s).transpose() / target.probs().row(s).sum();
    const Vector q = p + shift.transpose();
    const Matrix Xs = X.middleRows(s * A, A);
    const Matrix cov = Matrix(q.asDiagonal()) - q * q.transpose();
    H += w * c * Xs.transpose() * cov * Xs;
  }
  return H;
}

LossEval loss_da_softmax(const CriticModel& model, const CriticTarget& target, double c,
                         Centering centering) {
  require_positive_c(c);
  check_compatible(model, target);
  const Table adv_hat = model.predict_advantage(target.probs(), centering);
  const Table delta = target.advantage() - adv_hat;
  Table coeff = Table::Zero(delta.rows(), delta.cols());
  double value = 0.0;
  for (Eigen::Index s = 0; s < delta.rows(); ++s) {
    for (Eigen::Index a = 0; a < delta.cols(); ++a) {
      const double mu = target.mu()(s, a);
      if (mu == 0.0) continue;
      const double u = 1.0 - c * delta(s, a);
      if (!(u > 0.0)) throw SoftmaxDomainError(static_cast<int>(s), static_cast<int>(a), u);
      const double lu = std::log(u);
      value += mu * u * lu;
      coeff(s, a) = mu * (1.0 + lu);
    }
  }
  return {value / c,
          model.features().apply_transpose(center_adjoint(coeff, target.probs(), centering))};
}

LossEval loss_td(const CriticModel& model, const CriticTarget& target) {
  check_compatible(model, target);
  const Table resid = target.q() - model.predict_q();
  const Table weighted = target.mu().array() * resid.array();
  return {(weighted.array() * resid.array()).sum(),
          -2.0 * model.features().apply_transpose(weighted)};
}

LossEval loss_adv_td(const CriticModel& model, const CriticTarget& target, Centering centering) {
  check_compatible(model, target);
  const Table resid = target.advantage() - model.predict_advantage(target.probs(), centering);
  const Table weighted = target.mu().array() * resid.array();
  return {(weighted.array() * resid.array()).sum(),
          -2.0 * model.features().apply_transpose(center_adjoint(weighted, target.probs(), centering))};
}

LossEval loss_da_euclidean_softmax(const CriticModel& model, const CriticTarget& target, double c,
                                   Centering centering) {
  require_positive_c(c);
  LossEval e = loss_adv_td(model, target, centering);
  e.value *= 0.5 * c;
  e.gradient *= 0.5 * c;
  return e;
}

namespace {

Vector solve_normal_equations(const Matrix& K, const Vector& y) {
  constexpr double kRidge = 1e-10;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(K, Eigen::EigenvaluesOnly);
  Matrix system = K;
  if (eig.eigenvalues().minCoeff() < kRidge) system.diagonal().array() += kRidge;
  return system.ldlt().solve(y);
}

Matrix centered_dense(const FeatureMatrix& features, const Table& probs, Centering centering) {
  Matrix X = features.dense();
  const int A = features.num_actions();
  for (int s = 0; s < features.num_states(); ++s) {
    auto block = X.middleRows(static_cast<Eigen::Index>(s) * A, A);
    Eigen::RowVectorXd shift = centering == Centering::policy_weighted
                                   ? Eigen::RowVectorXd(probs.row(s) * block)
                                   : Eigen::RowVectorXd(block.colwise().sum());
    block.rowwise() -= shift;
  }
  return X;
}

Vector weighted_solve(const Matrix& X, const Table& mu, const Table& target) {
  const Vector m = flat(mu);
  const Matrix K = X.transpose() * m.asDiagonal() * X;
  const Vector y = X.transpose() * (m.array() * flat(target).array()).matrix();
  return solve_normal_equations(K, y);
}

}  // namespace

Vector solve_td(const CriticTarget& target, const FeatureMatrix& features) {
  if (features.num_states() != target.q().rows() || features.num_actions() != target.q().cols()) {
    throw std::invalid_argument("solve_td: feature shape mismatch");
  }
  return weighted_solve(features.dense(), target.mu(), target.q());
}

Vector solve_adv_td(const CriticTarget& target, const FeatureMatrix& features, Centering centering) {
  if (features.num_states() != target.q().rows() || features.num_actions() != target.q().cols()) {
    throw std::invalid_argument("solve_adv_td: feature shape mismatch");
  }
  return weighted_solve(centered_dense(features, target.probs(), centering), target.mu(),
                        target.advantage());
}

LossEval evaluate_critic_loss(CriticLoss loss, const CriticModel& model, const CriticTarget& target,
                              double c, Centering centering) {
  switch (loss) {
    case CriticLoss::da_direct: return loss_da_direct(model, target, c);
    case CriticLoss::da_softmax: return loss_da_softmax(model, target, c, centering);
    case CriticLoss::td: return loss_td(model, target);
    case CriticLoss::adv_td: return loss_adv_td(model, target, centering);
    case CriticLoss::euclidean_softmax: return loss_da_euclidean_softmax(model, target, c, centering);
  }
  throw std::invalid_argument("unknown critic loss");
}

CriticFit minimize_critic(CriticLoss loss, const CriticModel& model, const CriticTarget& target,
                          double c, const CriticOptions& options) {
  if (options.max_iters < 1) throw std::invalid_argument("critic iteration budget must be >= 1");
  require_positive_c(c);
  int halvings = 0;
  if (loss == CriticLoss::da_softmax) {
    constexpr int kMaxHalvings = 60;
    for (;;) {
      try {
        loss_da_softmax(model, target, c, options.centering);
        break;
      } catch (const SoftmaxDomainError&) {
        if (++halvings > kMaxHalvings) throw;
        c *= 0.5;
      }
    }
  }
  const Objective objective = [&](const Vector& omega) -> std::optional<LossEval> {
    try {
      return evaluate_critic_loss(loss, model.with_omega(omega), target, c, options.centering);
    } catch (const SoftmaxDomainError&) {
      return std::nullopt;
    }
  };
  const DescentResult r =
      armijo_descent(objective, model.omega(), options.max_iters, options.grad_tol, options.armijo);
  return {model.with_omega(r.x), r.value, r.grad_norm, r.iterations, c, halvings};
}

}  // namespace dac
