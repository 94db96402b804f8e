#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dac/bandits.hpp"

using namespace dac;

TEST_CASE("squared-loss critic weight has the closed form (1 - 5p) / (3p + 1)") {
  LinearCriticBandit sc;
  for (double p0 : {0.05, 0.1, 0.19, 0.3, 0.5, 0.9}) {
    sc.p0 = p0;
    const auto traj = run_linear_critic_bandit(sc, BanditCritic::td, 3);
    for (const auto& s : traj) CHECK(s.omega == doctest::Approx((1.0 - 5.0 * s.p) / (3.0 * s.p + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("squared-loss critic: the failure threshold is p0 = 1/5") {
  LinearCriticBandit sc;
  sc.p0 = 0.19;
  auto traj = run_linear_critic_bandit(sc, BanditCritic::td, 50);
  for (std::size_t t = 1; t < traj.size(); ++t) CHECK(traj[t].p < traj[t - 1].p);
  sc.p0 = 0.21;
  traj = run_linear_critic_bandit(sc, BanditCritic::td, 50);
  for (std::size_t t = 1; t < traj.size(); ++t) CHECK(traj[t].p > traj[t - 1].p);
  sc.p0 = 0.5;
  traj = run_linear_critic_bandit(sc, BanditCritic::td, 0);
  CHECK(traj[0].omega < 0.0);
}

TEST_CASE("decision-aware critic weight is -1/3 for every p and c") {
  for (double p : {0.01, 0.1, 0.5, 0.99})
    for (double c : {0.01, 1.0, 10.0}) {
      CHECK(solve_bandit_da_weight(2.0, 1.0, -2.0, 1.0, p, c) == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
      CHECK(std::abs(bandit_da_loss(2.0, 1.0, -2.0, 1.0, p, c, -1.0 / 3.0)) <= 1e-12);
      CHECK(bandit_da_loss(2.0, 1.0, -2.0, 1.0, p, c, 0.0) > 0.0);
    }
}

TEST_CASE("decision-aware bandit run improves monotonically to the optimal arm") {
  LinearCriticBandit sc;
  const auto traj = run_linear_critic_bandit(sc, BanditCritic::da, 200);
  REQUIRE(traj.size() == 201);
  CHECK(traj.front().p == 0.1);
  for (std::size_t t = 1; t < traj.size(); ++t) CHECK(traj[t].p >= traj[t - 1].p);
  CHECK(traj.back().p >= 0.99);
}

TEST_CASE("general two-arm weight and degenerate equal arms") {
  LinearCriticBandit sc;
  sc.r1 = 3.0;
  sc.r2 = 0.5;
  sc.x1 = 0.7;
  sc.x2 = -1.3;
  const auto traj = run_general_two_arm(sc, 10);
  for (const auto& s : traj) CHECK(s.omega == doctest::Approx(2.5 / 2.0).epsilon(1e-12));
  CHECK(solve_bandit_da_weight(1.0, 1.0, 0.7, -1.3, 0.4, 1.0) == doctest::Approx(0.0).scale(1.0));
  sc.r1 = sc.r2;
  CHECK_THROWS(run_general_two_arm(sc, 1));
  sc.r1 = 3.0;
  sc.x1 = sc.x2;
  CHECK_THROWS(run_general_two_arm(sc, 1));
}

namespace {

// Closed-form difference of the two decision-aware losses (c = 1) on the branch p < 1/2.
double gap_closed_form(double p, double eps) {
  const double r = eps * p / (1.0 - p);
  auto xlogx = [](double x) { return x * std::log(x); };
  return p * xlogx(1.0 + eps) + (1.0 - p) * xlogx(1.0 - r) - p * xlogx(1.0 - eps) - (1.0 - p) * xlogx(1.0 + r);
}

}  // namespace

TEST_CASE("hypothesis class: squared loss ties, the decision-aware loss prefers H0") {
  for (double eps : {0.55, 0.75, 0.95}) {
    CHECK(std::abs(gap_closed_form(0.0, eps)) < 1e-15);
    CHECK(std::abs(gap_closed_form(0.5, eps)) < 1e-15);
    for (int k = 1; k < 50; ++k) {
      const double p = 0.01 * k;
      CAPTURE(p);
      CHECK(gap_closed_form(p, eps) < 0.0);
      CHECK(hypothesis_da_gap(p, eps) == doctest::Approx(gap_closed_form(p, eps)).epsilon(1e-12));
      CHECK(std::abs(hypothesis_squared_loss(p, hypothesis_h0(p, eps)) -
                     hypothesis_squared_loss(p, hypothesis_h1(p, eps))) <= 1e-12);
    }
  }
  const Hypothesis a = true_advantage(0.3);
  CHECK(0.3 * a.a1 + 0.7 * a.a2 == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("hypothesis bandit trajectories and tie breaking") {
  HypothesisBandit sc;
  auto da = run_hypothesis_bandit(sc, BanditCritic::da, 200);
  CHECK(da.front().hypothesis == 0);
  CHECK(da.back().p >= 0.99);
  sc.tie_break = TieBreak::prefer_h1;
  auto adv = run_hypothesis_bandit(sc, BanditCritic::advtd, 200);
  CHECK(adv.front().hypothesis == 1);
  CHECK(adv.back().p <= 0.01);
  sc.tie_break = TieBreak::prefer_h0;
  adv = run_hypothesis_bandit(sc, BanditCritic::advtd, 200);
  CHECK(adv.back().p >= 0.99);
  sc.eps = 0.4;
  CHECK_THROWS(run_hypothesis_bandit(sc, BanditCritic::da, 1));
}

TEST_CASE("bandit runs are deterministic and serialize with a fixed header") {
  LinearCriticBandit sc;
  std::ostringstream a, b;
  write_bandit_csv(a, run_linear_critic_bandit(sc, BanditCritic::da, 20));
  write_bandit_csv(b, run_linear_critic_bandit(sc, BanditCritic::da, 20));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("t,p,omega,hypothesis,loss,loss_h0,loss_h1\n", 0) == 0);
  CHECK(parse_bandit_critic("da") == BanditCritic::da);
  CHECK_THROWS(parse_bandit_critic("ppo"));
}
