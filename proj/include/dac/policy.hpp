#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dac/features.hpp"
#include "dac/types.hpp"

namespace dac {

/// Minimum probability kept after closed-form updates so log terms stay finite.
inline constexpr double kProbabilityFloor = 1e-12;

/// Row-wise log-sum-exp with max subtraction.
double log_sum_exp(const Eigen::Ref<const Vector>& z);
Vector softmax(const Eigen::Ref<const Vector>& z);
Table softmax_rows(const Table& logits);

/// Policy in the direct representation: one distribution per state.
class DirectPolicy {
 public:
  explicit DirectPolicy(Table probs);

  static DirectPolicy uniform(int num_states, int num_actions);

  int num_states() const { return static_cast<int>(probs_.rows()); }
  int num_actions() const { return static_cast<int>(probs_.cols()); }
  const Table& probs() const { return probs_; }
  double operator()(int s, int a) const { return probs_(s, a); }

  /// Raises every entry to at least `floor` and renormalizes rows.
  DirectPolicy floored(double floor = kProbabilityFloor) const;

 private:
  Table probs_;
};

/// Policy in the softmax representation.
class SoftmaxPolicy {
 public:
  explicit SoftmaxPolicy(Table logits);
  const Table& logits() const { return logits_; }
  DirectPolicy to_direct() const;

 private:
  Table logits_;
};

/// Linear softmax policy p(a|s) proportional to exp(<theta, X(s,a)>).
class LinearPolicyParams {
 public:
  LinearPolicyParams(Vector theta, std::shared_ptr<const FeatureMatrix> features);

  const Vector& theta() const { return theta_; }
  const FeatureMatrix& features() const { return *features_; }
  std::shared_ptr<const FeatureMatrix> feature_ptr() const { return features_; }

  LinearPolicyParams with_theta(Vector theta) const { return {std::move(theta), features_}; }
  Table logits() const { return features_->apply(theta_); }
  DirectPolicy policy() const { return DirectPolicy(softmax_rows(logits())); }

 private:
  Vector theta_;
  std::shared_ptr<const FeatureMatrix> features_;
};

/// Mirror maps.
///
/// neg_entropy acts on probability rows (direct representation).
/// log_sum_exp and euclidean act on logit rows (softmax representation).
enum class MirrorKind { neg_entropy, log_sum_exp, euclidean };

std::string to_string(MirrorKind k);

class MirrorMap {
 public:
  MirrorMap(MirrorKind kind, Vector state_weights);

  MirrorKind kind() const { return kind_; }
  const Vector& state_weights() const { return weights_; }

  // Per-state primitives. Rows are probabilities for neg_entropy and logits otherwise.
  double potential(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  double divergence(const Vector& x, const Vector& y) const;
  /// D_{phi*}(u, v) for dual points u, v. Throws DomainError outside the dual domain.
  double dual_divergence(const Vector& u, const Vector& v) const;
  bool in_dual_domain(const Vector& u) const;
  Matrix hessian(const Vector& x) const;
  /// Hessian of the conjugate evaluated at the gradient of x.
  Matrix dual_hessian(const Vector& x) const;

 private:
  MirrorKind kind_;
  Vector weights_;
};

/// Sum over states of w(s) * D_phi(pi^s, pi'^s).
double bregman_divergence(const MirrorMap& map, const Table& pi, const Table& pi_prime);

struct MirrorHessians {
  std::vector<Matrix> primal;
  std::vector<Matrix> dual;
};

MirrorHessians mirror_hessians(const MirrorMap& map, const Table& pi_t);

/// <y - y', x> + (1/c) [D_phi(y, y') + D_phi*(grad phi(y') - c x, grad phi(y'))] for one row.
double fenchel_young_gap(MirrorKind kind, const Vector& x, const Vector& y, const Vector& y_prime,
                         double c);

/// Forward KL(p || q) of two distributions. Throws DomainError if q has a zero where p does not.
double kl_divergence(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q);

}  // namespace dac
