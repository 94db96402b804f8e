#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dac/mdp.hpp"
#include "dac/verification.hpp"
#include "helpers.hpp"

using namespace dac;
using dac::testing::random_table;

namespace {

// Policy evaluation by repeated Bellman backups; independent of the linear solve.
Vector iterate_values(const TabularMdp& mdp, const DirectPolicy& pi, int sweeps) {
  const int S = mdp.num_states(), A = mdp.num_actions();
  Vector v = Vector::Zero(S);
  for (int k = 0; k < sweeps; ++k) {
    Vector next = Vector::Zero(S);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double q = mdp.reward()(s, a);
        for (int n = 0; n < S; ++n) q += mdp.discount() * mdp.transition(s, a, n) * v(n);
        next(s) += pi(s, a) * q;
      }
    v = next;
  }
  return v;
}

// Discounted visitation as a truncated power series sum_t gamma^t rho^T P^t.
Vector series_occupancy(const TabularMdp& mdp, const DirectPolicy& pi, int horizon) {
  const Matrix P = policy_transition(mdp, pi);
  Vector state = mdp.initial();
  Vector d = Vector::Zero(mdp.num_states());
  double scale = 1.0;
  for (int t = 0; t < horizon; ++t) {
    d += scale * state;
    state = P.transpose() * state;
    scale *= mdp.discount();
  }
  return d;
}

TabularMdp load_fixture() {
  std::ifstream in(std::string(DAC_FIXTURE_DIR) + "/two_state.mdp");
  REQUIRE(in.good());
  return read_mdp(in);
}

}  // namespace

TEST_CASE("solve_policy matches Bellman iteration and the power-series occupancy") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int S = 1 + trial % 5;
    const TabularMdp mdp = random_mdp(S, 3, 0.8, rng);
    const DirectPolicy pi = random_policy(S, 3, rng);
    const OccupancySolution sol = solve_policy(mdp, pi);
    const Vector v = iterate_values(mdp, pi, 400);
    CHECK((sol.v - v).cwiseAbs().maxCoeff() < 1e-10);
    const Vector d = series_occupancy(mdp, pi, 400);
    CHECK((sol.d - d).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sol.d.sum() == doctest::Approx(1.0 / (1.0 - 0.8)).epsilon(1e-12));
    CHECK(sol.j == doctest::Approx(mdp.initial().dot(v)).epsilon(1e-10));
    // Advantages are centered under the policy; mu = d * pi carries the same total mass as d.
    CHECK(((sol.adv.array() * pi.probs().array()).rowwise().sum()).abs().maxCoeff() < 1e-12);
    CHECK(sol.mu.sum() == doctest::Approx(1.0 / (1.0 - 0.8)).epsilon(1e-12));
  }
}

TEST_CASE("performance difference identity holds on random MDPs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int S = 1 + trial % 5;
    const TabularMdp mdp = random_mdp(S, 3, 0.9, rng);
    const DirectPolicy pi = random_policy(S, 3, rng);
    const DirectPolicy other = random_policy(S, 3, rng);
    const double direct = solve_policy(mdp, pi).j - solve_policy(mdp, other).j;
    CHECK(performance_difference(mdp, pi, other) == doctest::Approx(direct).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("hand-solved fixture") {
  const TabularMdp mdp = load_fixture();
  CHECK(mdp.num_states() == 2);
  CHECK(mdp.discount() == 0.5);
  Table go(2, 2), stay(2, 2);
  go << 0, 1, 0.5, 0.5;
  stay << 1, 0, 0.5, 0.5;
  const OccupancySolution s_go = solve_policy(mdp, DirectPolicy(go));
  CHECK(s_go.v(1) == doctest::Approx(6.0));
  CHECK(s_go.v(0) == doctest::Approx(3.0));
  CHECK(s_go.j == doctest::Approx(3.0));
  CHECK(s_go.q(0, 0) == doctest::Approx(1.0 + 0.5 * 3.0));
  CHECK(solve_policy(mdp, DirectPolicy(stay)).j == doctest::Approx(2.0));
}

TEST_CASE("text format round trip is exact") {
  std::mt19937_64 rng(3);
  const TabularMdp mdp = random_mdp(4, 3, 0.73, rng);
  std::stringstream buf;
  write_mdp(buf, mdp);
  const TabularMdp back = read_mdp(buf);
  CHECK(back.transitions() == mdp.transitions());
  CHECK(back.reward() == mdp.reward());
  CHECK(back.initial() == mdp.initial());
  CHECK(back.discount() == mdp.discount());
}

TEST_CASE("malformed MDPs are rejected") {
  Matrix P(2, 1);
  P << 1.0, 0.5;
  Table R = Table::Zero(1, 2);
  Vector rho = Vector::Ones(1);
  CHECK_THROWS(TabularMdp(P, R, rho, 0.9));
  P << 1.0, 1.0;
  CHECK_NOTHROW(TabularMdp(P, R, rho, 0.9));
  CHECK_THROWS(TabularMdp(P, R, rho, 1.0));
  CHECK_THROWS(TabularMdp(P, R, Vector::Constant(1, 0.5), 0.9));
  std::stringstream bad("states 1\nactions 1\ndiscount 0.5\ninitial 0 1\ntransition 0 0 0 0.5\n");
  CHECK_THROWS(read_mdp(bad));
  std::stringstream junk("states 1\nbogus 3\n");
  CHECK_THROWS(read_mdp(junk));
}

TEST_CASE("Monte Carlo Q estimate approaches the exact values") {
  std::mt19937_64 rng(5);
  const TabularMdp mdp = random_mdp(3, 2, 0.5, rng);
  const DirectPolicy pi = random_policy(3, 2, rng);
  const Table exact = solve_policy(mdp, pi).q;
  const Table est = mc_estimate_q(mdp, pi, 60, 4000, 42);
  CHECK((est - exact).cwiseAbs().maxCoeff() < 0.05);
  // Same seed, same estimate.
  CHECK(mc_estimate_q(mdp, pi, 60, 50, 9) == mc_estimate_q(mdp, pi, 60, 50, 9));
}

TEST_CASE("deterministic Monte Carlo returns are exact up to truncation") {
  const TabularMdp mdp = load_fixture();
  Table go(2, 2);
  go << 0, 1, 0.5, 0.5;
  const Table est = mc_estimate_q(mdp, DirectPolicy(go), 80, 3, 1);
  CHECK(est(0, 1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(est(1, 0) == doctest::Approx(6.0).epsilon(1e-12));
}
