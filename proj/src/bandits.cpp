#include "dac/bandits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "dac/actor.hpp"
#include "dac/critic.hpp"

namespace dac {

BanditCritic parse_bandit_critic(const std::string& name) {
  if (name == "td") return BanditCritic::td;
  if (name == "advtd") return BanditCritic::advtd;
  if (name == "da") return BanditCritic::da;
  throw std::invalid_argument("unknown bandit critic '" + name + "' (expected td|advtd|da)");
}

std::string to_string(BanditCritic c) {
  switch (c) {
    case BanditCritic::td: return "td";
    case BanditCritic::advtd: return "advtd";
    case BanditCritic::da: return "da";
  }
  return "unknown";
}

TieBreak parse_tie_break(const std::string& name) {
  if (name == "prefer_h0") return TieBreak::prefer_h0;
  if (name == "prefer_h1") return TieBreak::prefer_h1;
  throw std::invalid_argument("unknown tie break '" + name + "' (expected prefer_h0|prefer_h1)");
}

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::shared_ptr<const FeatureMatrix> arm_features(double x1, double x2) {
  Matrix X(2, 1);
  X << x1, x2;
  return std::make_shared<const FeatureMatrix>(FeatureMatrix::from_dense(1, 2, X));
}

CriticTarget arm_target(double q1, double q2, double p) {
  Table q(1, 2);
  q << q1, q2;
  Table probs(1, 2);
  probs << p, 1.0 - p;
  return {q, DirectPolicy(probs), Vector::Ones(1)};
}

double next_probability(double p, double q1_hat, double q2_hat, double eta) {
  Table probs(1, 2);
  probs << p, 1.0 - p;
  Table q(1, 2);
  q << q1_hat, q2_hat;
  return update_tabular_direct(DirectPolicy(probs), q, eta).probs()(0, 0);
}

}  // namespace

double bandit_da_loss(double q1, double q2, double x1, double x2, double p, double c,
                      double omega) {
  Vector w(1);
  w << omega;
  return loss_da_direct(CriticModel(w, arm_features(x1, x2)), arm_target(q1, q2, p), c).value;
}

double solve_bandit_da_weight(double q1, double q2, double x1, double x2, double p, double c) {
  require(p > 0.0 && p < 1.0, "arm probability must lie in (0, 1)");
  const auto features = arm_features(x1, x2);
  const CriticTarget target = arm_target(q1, q2, p);
  const CriticModel model(Vector::Zero(1), features);
  auto slope = [&](double w) { return loss_da_direct(model.with_omega(Vector::Constant(1, w)), target, c).gradient(0); };
  // The loss is convex in the scalar weight, so its minimizer is the root of the slope.
  // Bracket the root, then take Newton steps that fall back to bisection when they leave the bracket.
  double lo = -1.0;
  double hi = 1.0;
  for (int k = 0; k < 200 && slope(lo) > 0.0; ++k) lo *= 2.0;
  for (int k = 0; k < 200 && slope(hi) < 0.0; ++k) hi *= 2.0;
  double w = 0.0;
  for (int it = 0; it < 500; ++it) {
    const double g = slope(w);
    if (g == 0.0) break;
    if (g < 0.0) lo = w; else hi = w;
    const double h = hessian_da_direct(model.with_omega(Vector::Constant(1, w)), target, c)(0, 0);
    double next = h > 0.0 ? w - g / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == w || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(w))) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

std::vector<BanditStep> run_linear_critic_bandit(const LinearCriticBandit& sc, BanditCritic critic,
                                                 int T) {
  require(T >= 0, "T must be non-negative");
  require(sc.p0 > 0.0 && sc.p0 < 1.0, "p0 must lie in (0, 1)");
  require(sc.eta > 0.0 && sc.c > 0.0, "eta and c must be positive");
  require(critic == BanditCritic::td || critic == BanditCritic::da,
          "the linear critic bandit supports td and da critics");
  const auto features = arm_features(sc.x1, sc.x2);
  std::vector<BanditStep> out;
  double p = sc.p0;
  for (int t = 0; t <= T; ++t) {
    const CriticTarget target = arm_target(sc.r1, sc.r2, p);
    BanditStep step;
    step.t = t;
    step.p = p;
    if (critic == BanditCritic::td) {
      step.omega = solve_td(target, *features)(0);
      step.loss = loss_td(CriticModel(Vector::Constant(1, step.omega), features), target).value;
    } else {
      step.omega = solve_bandit_da_weight(sc.r1, sc.r2, sc.x1, sc.x2, p, sc.c);
      step.loss =
          loss_da_direct(CriticModel(Vector::Constant(1, step.omega), features), target, sc.c).value;
    }
    out.push_back(step);
    if (t < T) p = next_probability(p, step.omega * sc.x1, step.omega * sc.x2, sc.eta);
  }
  return out;
}

std::vector<BanditStep> run_general_two_arm(const LinearCriticBandit& scenario, int T) {
  require(scenario.r1 > scenario.r2, "arm 1 must have the larger reward");
  require(scenario.x1 != scenario.x2, "arm features must differ");
  return run_linear_critic_bandit(scenario, BanditCritic::da, T);
}

Hypothesis true_advantage(double p) { return {0.5, -p / (2.0 * (1.0 - p))}; }

Hypothesis hypothesis_h0(double p, double eps) {
  const double a1 = 0.5 + eps;
  return {a1, -p / (1.0 - p) * a1};
}

Hypothesis hypothesis_h1(double p, double eps) {
  const double sign = p < 0.5 ? 1.0 : (p > 0.5 ? -1.0 : 0.0);
  const double a1 = 0.5 - eps * sign;
  return {a1, -p / (1.0 - p) * a1};
}

double hypothesis_squared_loss(double p, const Hypothesis& h) {
  const Hypothesis a = true_advantage(p);
  const double d1 = a.a1 - h.a1;
  const double d2 = a.a2 - h.a2;
  return p * d1 * d1 + (1.0 - p) * d2 * d2;
}

double hypothesis_da_loss(double p, const Hypothesis& h, double c) {
  const Hypothesis a = true_advantage(p);
  const double u1 = 1.0 - c * (a.a1 - h.a1);
  const double u2 = 1.0 - c * (a.a2 - h.a2);
  if (!(u1 > 0.0) || !(u2 > 0.0)) return std::numeric_limits<double>::infinity();
  return (p * u1 * std::log(u1) + (1.0 - p) * u2 * std::log(u2)) / c;
}

double hypothesis_da_gap(double p, double eps) {
  return hypothesis_da_loss(p, hypothesis_h0(p, eps), 1.0) -
         hypothesis_da_loss(p, hypothesis_h1(p, eps), 1.0);
}

std::vector<BanditStep> run_hypothesis_bandit(const HypothesisBandit& sc, BanditCritic critic,
                                              int T) {
  require(T >= 0, "T must be non-negative");
  require(sc.eps > 0.5 && sc.eps < 1.0, "eps must lie in (1/2, 1)");
  require(sc.p0 > 0.0 && sc.p0 < 1.0, "p0 must lie in (0, 1)");
  require(sc.eta > 0.0 && sc.c > 0.0, "eta and c must be positive");
  require(critic == BanditCritic::advtd || critic == BanditCritic::da,
          "the hypothesis bandit supports advtd and da critics");
  constexpr double kTieTol = 1e-12;
  std::vector<BanditStep> out;
  double p = sc.p0;
  for (int t = 0; t <= T; ++t) {
    const Hypothesis h0 = hypothesis_h0(p, sc.eps);
    const Hypothesis h1 = hypothesis_h1(p, sc.eps);
    BanditStep step;
    step.t = t;
    step.p = p;
    if (critic == BanditCritic::advtd) {
      step.loss_h0 = hypothesis_squared_loss(p, h0);
      step.loss_h1 = hypothesis_squared_loss(p, h1);
    } else {
      step.loss_h0 = hypothesis_da_loss(p, h0, sc.c);
      step.loss_h1 = hypothesis_da_loss(p, h1, sc.c);
    }
    const bool tie = step.loss_h0 == step.loss_h1 || std::abs(step.loss_h0 - step.loss_h1) <= kTieTol;
    if (tie) {
      step.hypothesis = sc.tie_break == TieBreak::prefer_h0 ? 0 : 1;
    } else {
      step.hypothesis = step.loss_h0 < step.loss_h1 ? 0 : 1;
    }
    step.loss = step.hypothesis == 0 ? step.loss_h0 : step.loss_h1;
    out.push_back(step);
    if (t < T) {
      const Hypothesis& h = step.hypothesis == 0 ? h0 : h1;
      Table probs(1, 2);
      probs << p, 1.0 - p;
      Table adv(1, 2);
      adv << h.a1, h.a2;
      p = update_tabular_softmax(DirectPolicy(probs), adv, sc.eta).probs()(0, 0);
    }
  }
  return out;
}

void write_bandit_csv(std::ostream& out, const std::vector<BanditStep>& steps) {
  out << "t,p,omega,hypothesis,loss,loss_h0,loss_h1\n";
  char buf[256];
  for (const auto& s : steps) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n", s.t, s.p, s.omega,
                  s.hypothesis, s.loss, s.loss_h0, s.loss_h1);
    out << buf;
  }
}

}  // namespace dac
