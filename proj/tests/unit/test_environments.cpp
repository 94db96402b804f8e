#include <doctest.h>

#include <cmath>

#include "dac/environments.hpp"
#include "dac/mdp.hpp"

using namespace dac;

namespace {

// Optimal value by value iteration, written directly against the transition table.
Vector optimal_values(const TabularMdp& mdp, int sweeps) {
  const int S = mdp.num_states(), A = mdp.num_actions();
  Vector v = Vector::Zero(S);
  for (int k = 0; k < sweeps; ++k) {
    Vector next(S);
    for (int s = 0; s < S; ++s) {
      double best = -1e300;
      for (int a = 0; a < A; ++a) {
        double q = mdp.reward()(s, a);
        for (int n = 0; n < S; ++n) q += mdp.discount() * mdp.transition(s, a, n) * v(n);
        best = std::max(best, q);
      }
      next(s) = best;
    }
    v = next;
  }
  return v;
}

}  // namespace

TEST_CASE("cliff world layout") {
  const GridWorld w = make_cliff_world();
  const TabularMdp& m = w.mdp;
  REQUIRE(m.num_states() == 21);
  REQUIRE(m.num_actions() == 4);
  CHECK(m.discount() == 0.9);
  REQUIRE(w.goal_states.size() == 1);
  REQUIRE(w.hazard_states.size() == 1);
  const int start = w.start_state, goal = w.goal_states[0], sink = w.hazard_states[0];
  CHECK(m.initial()(start) == 1.0);
  // Moving right from start enters the cliff.
  CHECK(m.transition(start, kRight, sink) == 1.0);
  CHECK(m.reward()(start, kRight) == -100.0);
  // Every action from the cliff returns to start at no cost.
  for (int a = 0; a < 4; ++a) {
    CHECK(m.transition(sink, a, start) == 1.0);
    CHECK(m.reward()(sink, a) == 0.0);
    CHECK(m.transition(goal, a, goal) == 1.0);
    CHECK(m.reward()(goal, a) == 0.0);
  }
  // Bumping into the left wall keeps the agent in place.
  CHECK(m.transition(start, kLeft, start) == 1.0);
  // The cell above the goal reaches it with reward +1.
  int above_goal = -1;
  for (int s = 0; s < m.num_states(); ++s)
    if (w.state_coords[s].x == 5.0 && w.state_coords[s].y == 2.0) above_goal = s;
  REQUIRE(above_goal >= 0);
  CHECK(m.transition(above_goal, kDown, goal) == 1.0);
  CHECK(m.reward()(above_goal, kDown) == 1.0);
}

TEST_CASE("cliff world optimal return is gamma^6") {
  const GridWorld w = make_cliff_world();
  const Vector v = optimal_values(w.mdp, 500);
  CHECK(v(w.start_state) == doctest::Approx(std::pow(0.9, 6)).epsilon(1e-12));
}

TEST_CASE("frozen lake slips to the two perpendicular moves") {
  const GridWorld w = make_frozen_lake();
  const TabularMdp& m = w.mdp;
  REQUIRE(m.num_states() == 16);
  CHECK(m.discount() == 0.9);
  CHECK(w.hazard_states.size() == 4);
  // From the top-left corner, moving left: up and left bump the wall, down moves a row.
  CHECK(m.transition(0, kLeft, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(m.transition(0, kLeft, 4) == doctest::Approx(1.0 / 3.0));
  for (int h : w.hazard_states)
    for (int a = 0; a < 4; ++a) CHECK(m.transition(h, a, h) == 1.0);
  const int goal = w.goal_states.at(0);
  CHECK(goal == 15);
  // Entering the goal from state 14 by moving right is rewarded with probability 1/3.
  CHECK(m.reward()(14, kRight) == doctest::Approx(1.0 / 3.0));
  const Vector v = optimal_values(m, 2000);
  CHECK(v(0) > 0.0);
  CHECK(v(0) < 1.0);
}

TEST_CASE("environment lookup and bandit builder") {
  CHECK(make_environment("cliff").mdp.num_states() == 21);
  CHECK(make_environment("frozenlake").mdp.num_states() == 16);
  CHECK_THROWS_AS(make_environment("swamp"), std::invalid_argument);
  const TabularMdp b = build_two_arm_bandit(2.0, 1.0);
  CHECK(b.num_states() == 1);
  CHECK(b.num_actions() == 2);
  Table pi(1, 2);
  pi << 0.25, 0.75;
  const OccupancySolution sol = solve_policy(b, DirectPolicy(pi));
  CHECK(sol.q(0, 0) == 2.0);
  CHECK(sol.j == doctest::Approx(1.25));
}

TEST_CASE("invalid grid specs are rejected") {
  GridSpec spec = cliff_world_spec();
  spec.goals.push_back({9, 9});
  CHECK_THROWS(build_grid_world(spec));
  spec = cliff_world_spec();
  spec.hazards.push_back(spec.goals[0]);
  CHECK_THROWS(build_grid_world(spec));
}
