#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dac {

enum class BanditCritic { td, advtd, da };
BanditCritic parse_bandit_critic(const std::string& name);
std::string to_string(BanditCritic c);

/// Two-armed bandit with a one-dimensional linear critic Q_hat(a) = omega * x_a,
/// where arm 1 is the better arm. Actor: p_{t+1} proportional to p_t exp(eta Q_hat).
struct LinearCriticBandit {
  double r1 = 2.0;
  double r2 = 1.0;
  double x1 = -2.0;
  double x2 = 1.0;
  double p0 = 0.1;
  double eta = 0.1;
  double c = 1.0;
};

enum class TieBreak { prefer_h0, prefer_h1 };
TieBreak parse_tie_break(const std::string& name);

/// Two-armed bandit with true advantages A1 = 1/2, A2 = -p/(2(1-p)) and a critic
/// restricted to two hypotheses: H0 over-estimates A1 by eps, H1 moves A1 toward the
/// wrong side of 1/2. Actor: p_{t+1} proportional to p_t max(1 + eta A_hat, 0).
struct HypothesisBandit {
  double eps = 0.75;
  double p0 = 0.3;
  double eta = 1.0;
  double c = 1.0;
  TieBreak tie_break = TieBreak::prefer_h0;
};

struct BanditStep {
  int t = 0;
  double p = 0.0;       // probability of arm 1 before the update
  double omega = 0.0;   // critic weight (linear scenarios)
  int hypothesis = -1;  // selected hypothesis (hypothesis scenario)
  double loss = 0.0;    // critic loss at the selected estimate
  double loss_h0 = 0.0;
  double loss_h1 = 0.0;
};

/// Exact minimizer of the direct decision-aware loss for the linear two-arm critic.
double solve_bandit_da_weight(double q1, double q2, double x1, double x2, double p, double c);
/// Value of the direct decision-aware loss for the linear two-arm critic.
double bandit_da_loss(double q1, double q2, double x1, double x2, double p, double c,
                      double omega);

/// Trajectory of T+1 steps (t = 0..T) for the linear critic bandit. Supports td and da.
std::vector<BanditStep> run_linear_critic_bandit(const LinearCriticBandit& scenario,
                                                 BanditCritic critic, int T);
/// Same dynamics with arbitrary rewards and features; requires r1 > r2 and x1 != x2. DA critic.
std::vector<BanditStep> run_general_two_arm(const LinearCriticBandit& scenario, int T);

struct Hypothesis {
  double a1 = 0.0;
  double a2 = 0.0;
};
Hypothesis true_advantage(double p);
Hypothesis hypothesis_h0(double p, double eps);
Hypothesis hypothesis_h1(double p, double eps);
/// Squared advantage loss p (A1 - A1_hat)^2 + (1-p) (A2 - A2_hat)^2.
double hypothesis_squared_loss(double p, const Hypothesis& h);
/// Softmax decision-aware loss (1/c) sum_a p_a (1 - c Delta_a) log(1 - c Delta_a); +inf if undefined.
double hypothesis_da_loss(double p, const Hypothesis& h, double c);
/// DA loss of H0 minus DA loss of H1 at c = 1.
double hypothesis_da_gap(double p, double eps);

/// Trajectory for the hypothesis bandit. Supports advtd and da.
std::vector<BanditStep> run_hypothesis_bandit(const HypothesisBandit& scenario, BanditCritic critic,
                                              int T);

void write_bandit_csv(std::ostream& out, const std::vector<BanditStep>& steps);

}  // namespace dac
