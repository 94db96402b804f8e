#include <doctest.h>

#include <cmath>

#include "dac/actor.hpp"
#include "dac/critic.hpp"
#include "dac/diagnostics.hpp"
#include "dac/verification.hpp"
#include "helpers.hpp"

using namespace dac;
using namespace dac::testing;

TEST_CASE("conforming step sizes") {
  CHECK(max_conforming_eta(Representation::direct, 0.9, 4) == doctest::Approx(std::pow(0.1, 3) / (2 * 0.9 * 4)));
  CHECK(max_conforming_eta(Representation::softmax, 0.9, 4) == doctest::Approx(0.1));
}

TEST_CASE("lower bound: left side is the exact improvement and the gap is non-negative") {
  std::mt19937_64 rng(3);
  for (Representation rep : {Representation::direct, Representation::softmax}) {
    for (int trial = 0; trial < 50; ++trial) {
      const TabularMdp mdp = random_mdp(3, 3, 0.7, rng);
      const DirectPolicy pi_t = random_policy(3, 3, rng);
      const DirectPolicy pi = random_policy(3, 3, rng);
      const OccupancySolution sol = solve_policy(mdp, pi_t);
      const Table est = (rep == Representation::direct ? sol.q : sol.adv) + random_table(3, 3, 0.05, rng);
      const double eta = 0.5 * max_conforming_eta(rep, 0.7, 3);
      const LowerBoundCheck chk = verify_lower_bound(mdp, pi_t, pi, est, eta, 0.1, rep);
      CHECK(chk.lhs == doctest::Approx(solve_policy(mdp, pi).j - sol.j).epsilon(1e-10));
      CHECK(chk.gap == doctest::Approx(chk.lhs - chk.rhs).epsilon(1e-12));
      CHECK(chk.gap >= -1e-10);
    }
  }
}

TEST_CASE("lower bound rejects step sizes beyond the conforming range") {
  std::mt19937_64 rng(4);
  const TabularMdp mdp = random_mdp(2, 3, 0.9, rng);
  const DirectPolicy pi_t = random_policy(2, 3, rng);
  const Table q = solve_policy(mdp, pi_t).q;
  CHECK_THROWS_AS(verify_lower_bound(mdp, pi_t, pi_t, q, 1.0, 0.1, Representation::direct), std::invalid_argument);
}

TEST_CASE("stationarity measure") {
  std::mt19937_64 rng(5);
  const DirectPolicy pi_t = random_policy(3, 4, rng);
  const MirrorMap map(MirrorKind::neg_entropy, Vector::Ones(3));
  // A state-constant estimate leaves the policy unchanged.
  Table flat_q(3, 4);
  flat_q.colwise() = Vector::LinSpaced(3, 1.0, 3.0);
  CHECK(stationarity_measure(pi_t, flat_q, 0.1, 0.1, map) < 1e-14);
  // Otherwise it equals the weighted KL of the mirror-ascent step over zeta squared.
  const Table q = random_table(3, 4, 1.0, rng);
  const double zeta = effective_step(0.2, 0.3);
  double expected = 0.0;
  for (int s = 0; s < 3; ++s) {
    Vector next = pi_t.probs().row(s).transpose().array() * (zeta * q.row(s).transpose()).array().exp();
    next /= next.sum();
    expected += kl_divergence(next, pi_t.probs().row(s).transpose());
  }
  CHECK(stationarity_measure(pi_t, q, 0.2, 0.3, map) == doctest::Approx(expected / (zeta * zeta)).epsilon(1e-10));
}

TEST_CASE("improvement condition: exact critics always satisfy it") {
  std::mt19937_64 rng(6);
  const TabularMdp mdp = random_mdp(3, 3, 0.8, rng);
  const DirectPolicy pi_t = random_policy(3, 3, rng);
  const OccupancySolution sol = solve_policy(mdp, pi_t);
  const ImprovementCheck d = check_improvement_condition(sol, pi_t, sol.q, MirrorKind::neg_entropy);
  CHECK(d.rhs == doctest::Approx(0.0).scale(1.0));
  CHECK(d.lhs > 0.0);
  CHECK(d.satisfied);
  const ImprovementCheck s = check_improvement_condition(sol, pi_t, sol.adv, MirrorKind::log_sum_exp);
  CHECK(s.satisfied);
}

TEST_CASE("improvement condition: one-hot linear form matches the tabular form") {
  std::mt19937_64 rng(7);
  const FeatureMatrix X = FeatureMatrix::one_hot(3, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMdp mdp = random_mdp(3, 3, 0.8, rng);
    const DirectPolicy pi_t = random_policy(3, 3, rng);
    const OccupancySolution sol = solve_policy(mdp, pi_t);
    for (MirrorKind kind : {MirrorKind::neg_entropy, MirrorKind::log_sum_exp}) {
      const Table est = (kind == MirrorKind::neg_entropy ? sol.q : sol.adv) + random_table(3, 3, 0.3, rng);
      const ImprovementCheck tab = check_improvement_condition(sol, pi_t, est, kind);
      const ImprovementCheck lin = check_improvement_condition(sol, pi_t, est, kind, &X);
      CHECK(lin.lhs == doctest::Approx(tab.lhs).epsilon(1e-8));
      CHECK(lin.rhs == doctest::Approx(tab.rhs).epsilon(1e-8));
    }
  }
}

TEST_CASE("tabular direct improvement term is the occupancy-weighted variance of the estimate") {
  std::mt19937_64 rng(8);
  const TabularMdp mdp = random_mdp(2, 3, 0.5, rng);
  const DirectPolicy pi_t = random_policy(2, 3, rng);
  const OccupancySolution sol = solve_policy(mdp, pi_t);
  const Table est = random_table(2, 3, 1.0, rng);
  double expected = 0.0;
  for (int s = 0; s < 2; ++s) {
    const double mean = pi_t.probs().row(s).dot(est.row(s));
    const double second = (pi_t.probs().row(s).array() * est.row(s).array().square()).sum();
    expected += sol.d(s) * (second - mean * mean);
  }
  CHECK(check_improvement_condition(sol, pi_t, est, MirrorKind::neg_entropy).lhs ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("trade-off heuristic") {
  std::mt19937_64 rng(9);
  const DirectPolicy pi_t = random_policy(1, 3, rng);
  const MirrorMap euc(MirrorKind::euclidean, Vector::Ones(1));
  const Table g = random_table(1, 3, 1.0, rng);
  const Table grad = g + random_table(1, 3, 0.5, rng);
  const double eta = 0.3, c = 0.2;
  const double g2 = g.matrix().squaredNorm();
  const double d2 = (grad - g).matrix().squaredNorm();
  const double closed = g2 / (2.0 * (1.0 / eta + 1.0 / c)) - 0.5 * c * d2;
  CHECK(*c_objective(pi_t, g, grad, eta, c, euc) == doctest::Approx(closed).epsilon(1e-12));

  const std::vector<double> grid = log_grid(1e-4, 1.0, 13);
  CHECK(grid.front() == doctest::Approx(1e-4));
  CHECK(grid.back() == doctest::Approx(1.0));
  const Table adv = center(random_table(1, 3, 1.0, rng), pi_t.probs(), Centering::policy_weighted);
  // Exact critic: the objective grows with c, so the top of the grid wins.
  CHECK(estimate_c(pi_t, adv, adv, eta, euc, grid) == doctest::Approx(1.0));
  // A hopeless critic: the bottom of the grid wins.
  CHECK(estimate_c(pi_t, adv, adv + 1e4 * random_table(1, 3, 1.0, rng), eta, euc, grid) == doctest::Approx(1e-4));
  CHECK_THROWS(log_grid(0.0, 1.0, 3));
}
