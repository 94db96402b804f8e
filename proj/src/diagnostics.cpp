#include "dac/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "dac/actor.hpp"
#include "dac/critic.hpp"

namespace dac {

namespace {

void check_shape(const DirectPolicy& pi, const Table& t, const char* what) {
  if (t.rows() != pi.num_states() || t.cols() != pi.num_actions()) {
    throw std::invalid_argument(std::string(what) + ": shape does not match the policy");
  }
}

/// Representation-space row of pi_t for the map: probabilities or log-probabilities.
Vector anchor_row(MirrorKind kind, const DirectPolicy& pi, Eigen::Index s) {
  const Vector p = pi.probs().row(s).transpose();
  return kind == MirrorKind::neg_entropy ? p : Vector(p.array().log());
}

Matrix pseudo_inverse_sym(const Matrix& M) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  const Vector& ev = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Vector inv = Vector::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > cutoff) inv(i) = 1.0 / ev(i);
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Table gradient_rows(MirrorKind kind, const DirectPolicy& pi_t, const Table& estimate) {
  check_shape(pi_t, estimate, "gradient_rows");
  if (kind == MirrorKind::neg_entropy) return estimate;
  const Table adv = center(estimate, pi_t.probs(), Centering::policy_weighted);
  return pi_t.probs().array() * adv.array();
}

Table exact_gradient_rows(MirrorKind kind, const DirectPolicy& pi_t, const OccupancySolution& sol) {
  return kind == MirrorKind::neg_entropy ? sol.q : gradient_rows(kind, pi_t, sol.adv);
}

ImprovementCheck check_improvement_condition(const OccupancySolution& sol, const DirectPolicy& pi_t,
                                             const Table& estimate, MirrorKind kind,
                                             const FeatureMatrix* actor_features) {
  const Table g = gradient_rows(kind, pi_t, estimate);
  const Table delta = exact_gradient_rows(kind, pi_t, sol) - g;
  const MirrorMap map(kind, sol.d);
  const Eigen::Index S = g.rows();
  const Eigen::Index A = g.cols();

  ImprovementCheck out;
  for (Eigen::Index s = 0; s < S; ++s) {
    const Vector ds = delta.row(s).transpose();
    out.rhs += sol.d(s) * ds.dot(map.dual_hessian(anchor_row(kind, pi_t, s)) * ds);
  }

  if (actor_features == nullptr) {
    for (Eigen::Index s = 0; s < S; ++s) {
      const Vector gs = g.row(s).transpose();
      const Vector p = pi_t.probs().row(s).transpose();
      double term = 0.0;
      switch (kind) {
        case MirrorKind::neg_entropy: {
          // Inverse Hessian restricted to the simplex tangent space.
          const double mean = p.dot(gs);
          term = p.dot(gs.cwiseProduct(gs)) - mean * mean;
          break;
        }
        case MirrorKind::log_sum_exp:
          term = gs.dot(pseudo_inverse_sym(map.hessian(anchor_row(kind, pi_t, s))) * gs);
          break;
        case MirrorKind::euclidean: term = gs.squaredNorm(); break;
      }
      out.lhs += sol.d(s) * term;
    }
  } else {
    const FeatureMatrix& F = *actor_features;
    if (F.num_states() != S || F.num_actions() != A) {
      throw std::invalid_argument("actor features do not match the policy");
    }
    const Matrix X = F.dense();
    const Eigen::Index n = X.cols();
    Matrix H = Matrix::Zero(n, n);
    Vector b = Vector::Zero(n);
    for (Eigen::Index s = 0; s < S; ++s) {
      const Matrix Xs = X.middleRows(s * A, A);
      const Vector p = pi_t.probs().row(s).transpose();
      const Vector gs = g.row(s).transpose();
      const Matrix cov = Matrix(p.asDiagonal()) - p * p.transpose();
      switch (kind) {
        case MirrorKind::neg_entropy:
          // Jacobian of probabilities in theta is cov * Xs, and
          // (cov Xs)^T diag(1/p) (cov Xs) simplifies to Xs^T cov Xs.
          b += sol.d(s) * (Xs.transpose() * (cov * gs));
          H += sol.d(s) * (Xs.transpose() * cov * Xs);
          break;
        case MirrorKind::log_sum_exp:
          b += sol.d(s) * (Xs.transpose() * gs);
          H += sol.d(s) * (Xs.transpose() * cov * Xs);
          break;
        case MirrorKind::euclidean:
          b += sol.d(s) * (Xs.transpose() * gs);
          H += sol.d(s) * (Xs.transpose() * Xs);
          break;
      }
    }
    out.lhs = b.dot(pseudo_inverse_sym(H) * b);
  }
  out.satisfied = out.lhs > out.rhs;
  return out;
}

ImprovementCheck check_improvement_condition(const TabularMdp& mdp, const DirectPolicy& pi_t,
                                             const Table& estimate, MirrorKind kind,
                                             const FeatureMatrix* actor_features) {
  return check_improvement_condition(solve_policy(mdp, pi_t), pi_t, estimate, kind, actor_features);
}

double max_conforming_eta(Representation rep, double discount, int num_actions) {
  if (rep == Representation::softmax) return 1.0 - discount;
  if (discount == 0.0) return std::numeric_limits<double>::infinity();
  const double one_minus = 1.0 - discount;
  return one_minus * one_minus * one_minus / (2.0 * discount * num_actions);
}

LowerBoundCheck verify_lower_bound(const TabularMdp& mdp, const DirectPolicy& pi_t,
                                   const DirectPolicy& pi, const Table& estimate, double eta,
                                   double c, Representation rep) {
  if (!(c > 0.0)) throw std::invalid_argument("verify_lower_bound: c must be positive");
  if (!(eta > 0.0)) throw std::invalid_argument("verify_lower_bound: eta must be positive");
  const double bound = max_conforming_eta(rep, mdp.discount(), mdp.num_actions());
  if (eta > bound * (1.0 + 1e-12)) {
    throw std::invalid_argument("verify_lower_bound: eta exceeds the convexity bound " +
                                std::to_string(bound));
  }
  check_shape(pi_t, estimate, "verify_lower_bound");
  check_shape(pi_t, pi.probs(), "verify_lower_bound");

  const OccupancySolution at_t = solve_policy(mdp, pi_t);
  const double j_new = solve_policy(mdp, pi).j;
  const double k = 1.0 / effective_step(eta, c);
  const Table& pt = pi_t.probs();
  const Table& p = pi.probs();

  LowerBoundCheck out;
  out.lhs = j_new - at_t.j;
  double rhs = 0.0;
  for (Eigen::Index s = 0; s < pt.rows(); ++s) {
    const Vector pts = pt.row(s).transpose();
    const Vector ps = p.row(s).transpose();
    double state_term = 0.0;
    if (rep == Representation::direct) {
      const Vector qhat = estimate.row(s).transpose();
      const Vector delta = at_t.q.row(s).transpose() - qhat;
      const double linear = qhat.dot(ps - pts);
      const double critic = pts.dot(delta) +
                            log_sum_exp(Vector(pts.array().log() - c * delta.array())) / c;
      state_term = linear - k * kl_divergence(ps, pts) - critic;
    } else {
      const double mean = pts.dot(estimate.row(s).transpose());
      const Vector ahat = estimate.row(s).transpose().array() - mean;
      const Vector delta = at_t.adv.row(s).transpose() - ahat;
      double actor_part = 0.0;
      double critic_part = 0.0;
      for (Eigen::Index a = 0; a < pts.size(); ++a) {
        if (!(ps(a) > 0.0)) throw DomainError("softmax lower bound needs positive probabilities");
        const double u = 1.0 - c * delta(a);
        if (!(u > 0.0)) {
          throw SoftmaxDomainError(static_cast<int>(s), static_cast<int>(a), u);
        }
        actor_part += pts(a) * (ahat(a) + k) * std::log(ps(a) / pts(a));
        critic_part += pts(a) * u * std::log(u);
      }
      state_term = actor_part - critic_part / c;
    }
    rhs += at_t.d(s) * state_term;
  }
  out.rhs = rhs;
  out.gap = out.lhs - out.rhs;
  return out;
}

double stationarity_measure(const DirectPolicy& pi_t, const Table& estimate, double eta, double c,
                            const MirrorMap& map) {
  check_shape(pi_t, estimate, "stationarity_measure");
  if (map.state_weights().size() != pi_t.num_states()) {
    throw std::invalid_argument("stationarity_measure: weight count mismatch");
  }
  const double zeta = effective_step(eta, c);
  const Table& pt = pi_t.probs();
  double divergence = 0.0;
  switch (map.kind()) {
    case MirrorKind::neg_entropy: {
      const Table next = softmax_rows(pt.array().log() + zeta * estimate.array());
      for (Eigen::Index s = 0; s < pt.rows(); ++s) {
        divergence += map.state_weights()(s) *
                      kl_divergence(next.row(s).transpose(), pt.row(s).transpose());
      }
      break;
    }
    case MirrorKind::log_sum_exp: {
      const Table adv = center(estimate, pt, Centering::policy_weighted);
      const DirectPolicy next = update_tabular_softmax(pi_t, adv, zeta);
      for (Eigen::Index s = 0; s < pt.rows(); ++s) {
        divergence += map.state_weights()(s) *
                      kl_divergence(pt.row(s).transpose(), next.probs().row(s).transpose());
      }
      break;
    }
    case MirrorKind::euclidean: {
      const Table g = gradient_rows(MirrorKind::euclidean, pi_t, estimate);
      for (Eigen::Index s = 0; s < pt.rows(); ++s) {
        divergence += map.state_weights()(s) * 0.5 * zeta * zeta * g.row(s).squaredNorm();
      }
      break;
    }
  }
  return divergence / (zeta * zeta);
}

std::optional<double> c_objective(const DirectPolicy& pi_t, const Table& g_rows,
                                  const Table& grad_rows, double eta, double c,
                                  const MirrorMap& map) {
  const double c_prime = effective_step(eta, c);
  double total = 0.0;
  for (Eigen::Index s = 0; s < g_rows.rows(); ++s) {
    const Vector anchor = map.gradient(anchor_row(map.kind(), pi_t, s));
    const Vector g = g_rows.row(s).transpose();
    const Vector delta = grad_rows.row(s).transpose() - g;
    const Vector up = anchor + c_prime * g;
    const Vector down = anchor - c * delta;
    if (!map.in_dual_domain(up) || !map.in_dual_domain(down)) return std::nullopt;
    total += map.state_weights()(s) *
             (map.dual_divergence(up, anchor) / c_prime - map.dual_divergence(down, anchor) / c);
  }
  return total;
}

double estimate_c(const DirectPolicy& pi_t, const Table& estimate, const Table& exact, double eta,
                  const MirrorMap& map, const std::vector<double>& c_grid) {
  if (c_grid.empty()) throw std::invalid_argument("estimate_c: empty grid");
  check_shape(pi_t, estimate, "estimate_c");
  check_shape(pi_t, exact, "estimate_c");
  const Table g = gradient_rows(map.kind(), pi_t, estimate);
  const Table grad = gradient_rows(map.kind(), pi_t, exact);
  double best_c = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (double c : c_grid) {
    if (!(c > 0.0)) throw std::invalid_argument("estimate_c: grid values must be positive");
    const std::optional<double> value = c_objective(pi_t, g, grad, eta, c, map);
    if (value && *value > best) {
      best = *value;
      best_c = c;
    }
  }
  if (!(best_c > 0.0)) {
    throw DomainError("estimate_c: every grid point leaves the dual domain; try smaller c values");
  }
  return best_c;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw std::invalid_argument("log_grid: bad range");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    out.push_back(lo);
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) out.push_back(std::exp(a + (b - a) * i / (n - 1)));
  return out;
}

}  // namespace dac
