#pragma once

#include <optional>
#include <vector>

#include "dac/mdp.hpp"
#include "dac/policy.hpp"

namespace dac {

// The per-state estimate g_hat(s, .) and the matching exact gradient depend on the map:
//   neg_entropy (direct):           g_hat = Q_hat(s, .)          grad J = Q(s, .)
//   log_sum_exp / euclidean (logit): g_hat = p_t(.|s) A_hat(s, .)  grad J = p_t(.|s) A(s, .)
// In both cases the functional gradient is the per-state vector scaled by the
// unnormalized occupancy d(s). `estimate` is Q_hat for neg_entropy and A_hat otherwise;
// A_hat is re-centered under p_t before use.

/// Per-state gradient estimate rows for the given map (see above).
Table gradient_rows(MirrorKind kind, const DirectPolicy& pi_t, const Table& estimate);
/// Exact per-state gradient rows from a solved policy.
Table exact_gradient_rows(MirrorKind kind, const DirectPolicy& pi_t, const OccupancySolution& sol);

struct ImprovementCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

/// Compares the gradient-estimate term against the estimation-error term.
///
/// Tabular form (actor_features == nullptr): lhs = <g, [Hess Phi]^+ g> taken on the tangent
/// space of the representation (the simplex for neg_entropy, logit shifts for log_sum_exp).
/// Linear form: lhs = <b, H^+ b> with b = J^T g and H = J^T Hess(Phi) J, where J is the
/// Jacobian of the policy representation in theta.
/// rhs = <delta, Hess Phi*(grad Phi(pi_t)) delta> with delta = grad J - g.
ImprovementCheck check_improvement_condition(const OccupancySolution& sol, const DirectPolicy& pi_t,
                                             const Table& estimate, MirrorKind kind,
                                             const FeatureMatrix* actor_features = nullptr);
ImprovementCheck check_improvement_condition(const TabularMdp& mdp, const DirectPolicy& pi_t,
                                             const Table& estimate, MirrorKind kind,
                                             const FeatureMatrix* actor_features = nullptr);

/// Largest step keeping the joint lower bound valid for each representation.
double max_conforming_eta(Representation rep, double discount, int num_actions);

struct LowerBoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

/// Evaluates J(pi) - J(pi_t) and the joint lower bound built from the critic estimate.
/// `estimate` is Q_hat for the direct representation and A_hat for softmax.
/// Throws std::invalid_argument when eta exceeds max_conforming_eta and DomainError when
/// the softmax critic term is undefined for this c.
LowerBoundCheck verify_lower_bound(const TabularMdp& mdp, const DirectPolicy& pi_t,
                                   const DirectPolicy& pi, const Table& estimate, double eta,
                                   double c, Representation rep);

/// D_Phi(pi_bar, pi_t) / zeta^2 where pi_bar is the exact mirror-ascent point with step zeta.
/// Weights come from the map.
double stationarity_measure(const DirectPolicy& pi_t, const Table& estimate, double eta, double c,
                            const MirrorMap& map);

/// Objective of the trade-off heuristic at a single c, or nullopt when infeasible.
std::optional<double> c_objective(const DirectPolicy& pi_t, const Table& g_rows,
                                  const Table& grad_rows, double eta, double c,
                                  const MirrorMap& map);

/// Grid argmax of c_objective. Throws DomainError when no grid point is feasible.
double estimate_c(const DirectPolicy& pi_t, const Table& estimate, const Table& exact, double eta,
                  const MirrorMap& map, const std::vector<double>& c_grid);

/// Log-spaced grid from lo to hi (inclusive) with n points.
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace dac
