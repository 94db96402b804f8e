#include "dac/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dac {

namespace {

constexpr double kRowTol = 1e-12;
constexpr double kDualSimplexTol = 1e-10;

void require_positive(const Vector& p, const char* what) {
  if (!(p.array() > 0.0).all()) throw DomainError(std::string(what) + ": zero or negative probability");
}

}  // namespace

double log_sum_exp(const Eigen::Ref<const Vector>& z) {
  const double m = z.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((z.array() - m).exp().sum());
}

Vector softmax(const Eigen::Ref<const Vector>& z) {
  const double m = z.maxCoeff();
  Vector e = (z.array() - m).exp();
  return e / e.sum();
}

Table softmax_rows(const Table& logits) {
  Table out(logits.rows(), logits.cols());
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    const double m = logits.row(s).maxCoeff();
    auto e = (logits.row(s).array() - m).exp();
    out.row(s) = e / e.sum();
  }
  return out;
}

double kl_divergence(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < 0.0 || q(i) < 0.0) throw DomainError("kl_divergence: negative probability");
    if (p(i) == 0.0) continue;
    if (q(i) == 0.0) throw DomainError("kl_divergence: reference has zero mass where p does not");
    total += p(i) * std::log(p(i) / q(i));
  }
  return total;
}

// ---------------------------------------------------------------------------------------------

DirectPolicy::DirectPolicy(Table probs) : probs_(std::move(probs)) {
  if (probs_.rows() == 0 || probs_.cols() == 0) throw std::invalid_argument("empty policy");
  if (!probs_.allFinite()) throw std::invalid_argument("policy entries must be finite");
  for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
    if ((probs_.row(s).array() < 0.0).any()) {
      throw std::invalid_argument("policy row " + std::to_string(s) + " has a negative entry");
    }
    if (std::abs(probs_.row(s).sum() - 1.0) > kRowTol) {
      throw std::invalid_argument("policy row " + std::to_string(s) + " does not sum to 1");
    }
  }
}

DirectPolicy DirectPolicy::uniform(int num_states, int num_actions) {
  return DirectPolicy(Table::Constant(num_states, num_actions, 1.0 / num_actions));
}

DirectPolicy DirectPolicy::floored(double floor) const {
  Table p = probs_.cwiseMax(floor);
  for (Eigen::Index s = 0; s < p.rows(); ++s) p.row(s) /= p.row(s).sum();
  return DirectPolicy(std::move(p));
}

SoftmaxPolicy::SoftmaxPolicy(Table logits) : logits_(std::move(logits)) {
  if (!logits_.allFinite()) throw std::invalid_argument("logits must be finite");
}

DirectPolicy SoftmaxPolicy::to_direct() const { return DirectPolicy(softmax_rows(logits_)); }

LinearPolicyParams::LinearPolicyParams(Vector theta, std::shared_ptr<const FeatureMatrix> features)
    : theta_(std::move(theta)), features_(std::move(features)) {
  if (!features_) throw std::invalid_argument("linear policy needs a feature matrix");
  if (theta_.size() != features_->dim()) throw std::invalid_argument("theta dimension mismatch");
}

// ---------------------------------------------------------------------------------------------

std::string to_string(MirrorKind k) {
  switch (k) {
    case MirrorKind::neg_entropy: return "neg_entropy";
    case MirrorKind::log_sum_exp: return "log_sum_exp";
    case MirrorKind::euclidean: return "euclidean";
  }
  return "unknown";
}

MirrorMap::MirrorMap(MirrorKind kind, Vector state_weights)
    : kind_(kind), weights_(std::move(state_weights)) {
  if (!(weights_.array() >= 0.0).all() || !weights_.allFinite()) {
    throw std::invalid_argument("mirror map weights must be finite and non-negative");
  }
}

double MirrorMap::potential(const Vector& x) const {
  switch (kind_) {
    case MirrorKind::neg_entropy: {
      if ((x.array() < 0.0).any()) throw DomainError("negative probability");
      double total = 0.0;
      for (double p : x) {
        if (p > 0.0) total += p * std::log(p);
      }
      return total;
    }
    case MirrorKind::log_sum_exp: return log_sum_exp(x);
    case MirrorKind::euclidean: return 0.5 * x.squaredNorm();
  }
  return 0.0;
}

Vector MirrorMap::gradient(const Vector& x) const {
  switch (kind_) {
    case MirrorKind::neg_entropy:
      require_positive(x, "neg_entropy gradient");
      return (x.array().log() + 1.0).matrix();
    case MirrorKind::log_sum_exp: return softmax(x);
    case MirrorKind::euclidean: return x;
  }
  return x;
}

double MirrorMap::divergence(const Vector& x, const Vector& y) const {
  if (x.size() != y.size()) throw std::invalid_argument("divergence: size mismatch");
  switch (kind_) {
    case MirrorKind::neg_entropy:
      // Generalized KL; equals KL(x || y) when both lie on the simplex.
      return kl_divergence(x, y) - x.sum() + y.sum();
    case MirrorKind::log_sum_exp: return kl_divergence(softmax(y), softmax(x));
    case MirrorKind::euclidean: return 0.5 * (x - y).squaredNorm();
  }
  return 0.0;
}

bool MirrorMap::in_dual_domain(const Vector& u) const {
  if (kind_ != MirrorKind::log_sum_exp) return u.allFinite();
  return (u.array() >= 0.0).all() && std::abs(u.sum() - 1.0) <= kDualSimplexTol;
}

double MirrorMap::dual_divergence(const Vector& u, const Vector& v) const {
  if (u.size() != v.size()) throw std::invalid_argument("dual_divergence: size mismatch");
  switch (kind_) {
    case MirrorKind::neg_entropy:
      // The conjugate of negative entropy on the simplex is log-sum-exp.
      return kl_divergence(softmax(v), softmax(u));
    case MirrorKind::log_sum_exp:
      if (!in_dual_domain(u) || !in_dual_domain(v)) {
        throw DomainError("log_sum_exp dual point is not a distribution");
      }
      return kl_divergence(u, v);
    case MirrorKind::euclidean: return 0.5 * (u - v).squaredNorm();
  }
  return 0.0;
}

Matrix MirrorMap::hessian(const Vector& x) const {
  switch (kind_) {
    case MirrorKind::neg_entropy:
      require_positive(x, "neg_entropy Hessian");
      return x.cwiseInverse().asDiagonal();
    case MirrorKind::log_sum_exp: {
      const Vector p = softmax(x);
      return Matrix(p.asDiagonal()) - p * p.transpose();
    }
    case MirrorKind::euclidean: return Matrix::Identity(x.size(), x.size());
  }
  return {};
}

Matrix MirrorMap::dual_hessian(const Vector& x) const {
  switch (kind_) {
    case MirrorKind::neg_entropy:
      require_positive(x, "neg_entropy dual Hessian");
      return Matrix(x.asDiagonal()) - x * x.transpose();
    case MirrorKind::log_sum_exp: return softmax(x).cwiseInverse().asDiagonal();
    case MirrorKind::euclidean: return Matrix::Identity(x.size(), x.size());
  }
  return {};
}

double bregman_divergence(const MirrorMap& map, const Table& pi, const Table& pi_prime) {
  if (pi.rows() != pi_prime.rows() || pi.cols() != pi_prime.cols()) {
    throw std::invalid_argument("bregman_divergence: shape mismatch");
  }
  if (map.state_weights().size() != pi.rows()) {
    throw std::invalid_argument("bregman_divergence: weight count does not match states");
  }
  double total = 0.0;
  for (Eigen::Index s = 0; s < pi.rows(); ++s) {
    if (map.kind() == MirrorKind::neg_entropy) require_positive(pi_prime.row(s).transpose(), "bregman_divergence");
    total += map.state_weights()(s) *
             map.divergence(pi.row(s).transpose(), pi_prime.row(s).transpose());
  }
  return total;
}

MirrorHessians mirror_hessians(const MirrorMap& map, const Table& pi_t) {
  MirrorHessians h;
  h.primal.reserve(static_cast<std::size_t>(pi_t.rows()));
  h.dual.reserve(static_cast<std::size_t>(pi_t.rows()));
  for (Eigen::Index s = 0; s < pi_t.rows(); ++s) {
    const Vector row = pi_t.row(s).transpose();
    h.primal.push_back(map.hessian(row));
    h.dual.push_back(map.dual_hessian(row));
  }
  return h;
}

double fenchel_young_gap(MirrorKind kind, const Vector& x, const Vector& y, const Vector& y_prime,
                         double c) {
  if (!(c > 0.0)) throw std::invalid_argument("fenchel_young_gap: c must be positive");
  if (x.size() != y.size() || y.size() != y_prime.size()) {
    throw std::invalid_argument("fenchel_young_gap: size mismatch");
  }
  const MirrorMap map(kind, Vector::Ones(1));
  const Vector anchor = map.gradient(y_prime);
  const Vector shifted = anchor - c * x;
  if (!map.in_dual_domain(shifted)) {
    throw DomainError("fenchel_young_gap: shifted dual point leaves the dual domain");
  }
  return (y - y_prime).dot(x) +
         (map.divergence(y, y_prime) + map.dual_divergence(shifted, anchor)) / c;
}

}  // namespace dac
