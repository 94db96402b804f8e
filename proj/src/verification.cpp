#include "dac/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "dac/actor.hpp"
#include "dac/bandits.hpp"
#include "dac/critic.hpp"
#include "dac/diagnostics.hpp"

namespace dac {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector dirichlet(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = expo(rng);
  return v / v.sum();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Table gaussian_table(int rows, int cols, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  Table t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = normal(rng);
  return t;
}

Vector gaussian_vector(int n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

std::string format_double(double x) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::scientific << x;
  return ss.str();
}

/// Relative error between an analytic gradient and central differences with step h.
double fd_relative_error(const std::function<double(const Vector&)>& f, const Vector& x,
                         const Vector& grad, double h = 1e-6) {
  Vector fd(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector up = x;
    Vector down = x;
    up(i) += h;
    down(i) -= h;
    fd(i) = (f(up) - f(down)) / (2.0 * h);
  }
  const double scale = std::max({grad.norm(), fd.norm(), 1e-4});
  return (grad - fd).norm() / scale;
}

}  // namespace

TabularMdp random_mdp(int num_states, int num_actions, double discount, std::mt19937_64& rng) {
  Matrix P(static_cast<Eigen::Index>(num_states) * num_actions, num_states);
  for (Eigen::Index i = 0; i < P.rows(); ++i) P.row(i) = dirichlet(num_states, rng).transpose();
  Table R(num_states, num_actions);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = uniform(rng, 0.0, 1.0);
  return TabularMdp(std::move(P), std::move(R), dirichlet(num_states, rng), discount);
}

DirectPolicy random_policy(int num_states, int num_actions, std::mt19937_64& rng) {
  Table p(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) p.row(s) = dirichlet(num_actions, rng).transpose();
  return DirectPolicy(std::move(p)).floored(1e-6);
}

SuiteResult lower_bound_suite(Representation rep, int instances, std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  constexpr int kActions = 3;
  double worst = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int i = 0; i < instances; ++i) {
    const int S = uniform_int(rng, 1, 5);
    const double gamma = uniform(rng, 0.2, 0.95);
    const TabularMdp mdp = random_mdp(S, kActions, gamma, rng);
    const DirectPolicy pi_t = random_policy(S, kActions, rng);
    const OccupancySolution sol = solve_policy(mdp, pi_t);
    const bool noisy = i % 2 == 1;
    Table estimate = rep == Representation::direct ? sol.q : sol.adv;
    if (noisy) estimate += gaussian_table(S, kActions, 0.1, rng);

    const double eta = max_conforming_eta(rep, gamma, kActions) * uniform(rng, 0.05, 1.0);
    double c = log_uniform(rng, 1e-3, 10.0);

    // Candidate policy: random, a mixture toward pi_t, or the exact surrogate maximizer.
    DirectPolicy pi = pi_t;
    const int mode = i % 3;
    if (mode == 0) {
      pi = random_policy(S, kActions, rng);
    } else if (mode == 1) {
      const double lambda = log_uniform(rng, 1e-4, 1.0);
      pi = DirectPolicy((1.0 - lambda) * pi_t.probs() + lambda * random_policy(S, kActions, rng).probs());
    }
    if (rep == Representation::softmax) {
      const Table adv_hat = center(estimate, pi_t.probs(), Centering::policy_weighted);
      const double worst_delta = (sol.adv - adv_hat).maxCoeff();
      if (worst_delta > 0.0) c = std::min(c, 0.5 / worst_delta);
    }
    if (mode == 2) {
      const Vector w = sol.d;
      const Table est = rep == Representation::direct
                            ? estimate
                            : Table(center(estimate, pi_t.probs(), Centering::policy_weighted));
      pi = surrogate_maximizer(Surrogate::make(rep, pi_t, w, est, eta, c));
    }
    const LowerBoundCheck check = verify_lower_bound(mdp, pi_t, pi, estimate, eta, c, rep);
    worst = std::min(worst, check.gap);
    if (!(check.gap >= -1e-10)) ++failures;
  }
  SuiteResult r;
  r.name = "lower bound (" + to_string(rep) + ")";
  r.passed = failures == 0 && instances > 0;
  r.detail = std::to_string(instances) + " instances, " + std::to_string(failures) +
             " violations, worst gap " + format_double(worst);
  r.seconds = seconds_since(start);
  return r;
}

SuiteResult gradient_suite(int instances, std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  struct Stat {
    std::string name;
    double worst = 0.0;
  };
  std::vector<Stat> stats = {{"da_direct"}, {"da_softmax"}, {"td"}, {"adv_td"},
                             {"euclidean_softmax"}, {"surrogate_direct"}, {"surrogate_softmax"}};
  for (int i = 0; i < instances; ++i) {
    const int S = uniform_int(rng, 1, 4);
    const int A = uniform_int(rng, 2, 4);
    const int d = uniform_int(rng, 1, 6);
    const DirectPolicy pi_t = random_policy(S, A, rng);
    Vector weights(S);
    for (int s = 0; s < S; ++s) weights(s) = uniform(rng, 0.1, 1.0);
    const Table q = gaussian_table(S, A, 1.0, rng);
    const CriticTarget target(q, pi_t, weights);
    auto features = std::make_shared<const FeatureMatrix>(
        FeatureMatrix::from_dense(S, A, gaussian_table(S * A, d, 1.0, rng)));
    const CriticModel model(gaussian_vector(d, 0.5, rng), features);
    const Vector omega = model.omega();

    auto check_critic = [&](std::size_t slot, CriticLoss loss, double c) {
      const LossEval e = evaluate_critic_loss(loss, model, target, c);
      const double err = fd_relative_error(
          [&](const Vector& w) { return evaluate_critic_loss(loss, model.with_omega(w), target, c).value; },
          omega, e.gradient);
      stats[slot].worst = std::max(stats[slot].worst, err);
    };
    check_critic(0, CriticLoss::da_direct, log_uniform(rng, 0.05, 5.0));
    {
      const Table delta = target.advantage() - model.predict_advantage(pi_t.probs(), Centering::policy_weighted);
      double c = log_uniform(rng, 0.05, 5.0);
      const double worst_delta = delta.maxCoeff();
      if (worst_delta > 0.0) c = std::min(c, 0.5 / worst_delta);
      check_critic(1, CriticLoss::da_softmax, c);
    }
    check_critic(2, CriticLoss::td, 1.0);
    check_critic(3, CriticLoss::adv_td, 1.0);
    check_critic(4, CriticLoss::euclidean_softmax, log_uniform(rng, 0.05, 5.0));

    const double eta = log_uniform(rng, 0.05, 1.0);
    const double c = log_uniform(rng, 0.05, 1.0);
    const LinearPolicyParams params(gaussian_vector(d, 1.0, rng), features);
    for (Representation rep : {Representation::direct, Representation::softmax}) {
      const Table est = rep == Representation::direct
                            ? gaussian_table(S, A, 1.0, rng)
                            : center(gaussian_table(S, A, 1.0, rng), pi_t.probs(), Centering::policy_weighted);
      const Surrogate surr = Surrogate::make(rep, pi_t, weights, est, eta, c);
      const LossEval e = eval_surrogate(surr, params);
      const double err = fd_relative_error(
          [&](const Vector& th) { return eval_surrogate(surr, params.with_theta(th)).value; },
          params.theta(), e.gradient);
      const std::size_t slot = rep == Representation::direct ? 5 : 6;
      stats[slot].worst = std::max(stats[slot].worst, err);
    }
  }
  SuiteResult r;
  r.name = "gradients vs central differences";
  r.passed = instances > 0;
  std::ostringstream detail;
  detail << instances << " instances each; worst relative error:";
  for (const auto& s : stats) {
    detail << " " << s.name << "=" << format_double(s.worst);
    if (!(s.worst <= 1e-5)) r.passed = false;
  }
  r.detail = detail.str();
  r.seconds = seconds_since(start);
  return r;
}

SuiteResult lemma_suite(int instances, std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  double kl_err = 0.0;
  double rkl_err = 0.0;
  double fy_min = std::numeric_limits<double>::infinity();
  double fy_prox = 0.0;
  const MirrorMap neg(MirrorKind::neg_entropy, Vector::Ones(1));
  const MirrorMap lse(MirrorKind::log_sum_exp, Vector::Ones(1));
  for (int i = 0; i < instances; ++i) {
    const int A = uniform_int(rng, 2, 6);
    const Vector p = dirichlet(A, rng).cwiseMax(1e-8);
    const Vector p2 = dirichlet(A, rng).cwiseMax(1e-8);
    const Vector pn = p / p.sum();
    const Vector p2n = p2 / p2.sum();
    // Bregman divergence from its definition against the closed-form KL.
    const double breg = neg.potential(pn) - neg.potential(p2n) - neg.gradient(p2n).dot(pn - p2n);
    kl_err = std::max(kl_err, std::abs(breg - kl_divergence(pn, p2n)));
    const Vector z = gaussian_vector(A, 2.0, rng);
    const Vector z2 = gaussian_vector(A, 2.0, rng);
    const double breg_lse = lse.potential(z) - lse.potential(z2) - lse.gradient(z2).dot(z - z2);
    rkl_err = std::max(rkl_err, std::abs(breg_lse - kl_divergence(softmax(z2), softmax(z))));

    const double c = log_uniform(rng, 0.05, 5.0);
    // neg_entropy on probability rows.
    {
      const Vector x = gaussian_vector(A, 1.0, rng);
      fy_min = std::min(fy_min, fenchel_young_gap(MirrorKind::neg_entropy, x, pn, p2n, c));
      Vector prox = p2n.array() * (-c * x.array()).exp();
      prox /= prox.sum();
      fy_prox = std::max(fy_prox, std::abs(fenchel_young_gap(MirrorKind::neg_entropy, x, prox, p2n, c)));
    }
    // log_sum_exp on logits: x chosen so that softmax(y') - c x is a distribution.
    {
      const Vector anchor = softmax(z2);
      const Vector target = dirichlet(A, rng).cwiseMax(1e-6);
      const Vector x = (anchor - target / target.sum()) / c;
      fy_min = std::min(fy_min, fenchel_young_gap(MirrorKind::log_sum_exp, x, z, z2, c));
      const Vector prox = (anchor - c * x).array().log();
      fy_prox = std::max(fy_prox, std::abs(fenchel_young_gap(MirrorKind::log_sum_exp, x, prox, z2, c)));
    }
    // euclidean.
    {
      const Vector x = gaussian_vector(A, 1.0, rng);
      fy_min = std::min(fy_min, fenchel_young_gap(MirrorKind::euclidean, x, z, z2, c));
      fy_prox = std::max(fy_prox, std::abs(fenchel_young_gap(MirrorKind::euclidean, x, z2 - c * x, z2, c)));
    }
  }

  // Small-c limit: loss / (c/2) approaches the weighted squared advantage error linearly in c.
  double worst_slope = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 5; ++trial) {
    const int S = 3;
    const int A = 3;
    const DirectPolicy pi_t = random_policy(S, A, rng);
    Vector weights(S);
    for (int s = 0; s < S; ++s) weights(s) = uniform(rng, 0.1, 1.0);
    const CriticTarget target(gaussian_table(S, A, 1.0, rng), pi_t, weights);
    auto features = std::make_shared<const FeatureMatrix>(
        FeatureMatrix::from_dense(S, A, gaussian_table(S * A, 2, 1.0, rng)));
    const CriticModel model(gaussian_vector(2, 0.5, rng), features);
    const Table adv_gap = target.advantage() - model.predict_advantage(pi_t.probs(), Centering::policy_weighted);
    const double quad = (target.mu().array() * adv_gap.array().square()).sum();
    const std::vector<double> cs = {1e-2, 1e-3, 1e-4};
    for (CriticLoss loss : {CriticLoss::da_direct, CriticLoss::da_softmax}) {
      std::vector<double> errs;
      for (double c : cs) {
        const double v = evaluate_critic_loss(loss, model, target, c).value;
        errs.push_back(std::abs(v / (0.5 * c) - quad));
      }
      for (std::size_t k = 0; k + 1 < cs.size(); ++k) {
        const double slope = std::log(errs[k] / errs[k + 1]) / std::log(cs[k] / cs[k + 1]);
        worst_slope = std::min(worst_slope, slope);
      }
    }
  }

  SuiteResult r;
  r.name = "mirror-map lemmas";
  r.passed = kl_err <= 1e-12 && rkl_err <= 1e-12 && fy_min >= -1e-12 && fy_prox <= 1e-10 &&
             worst_slope >= 0.9;
  r.detail = "forward KL err " + format_double(kl_err) + ", reverse KL err " + format_double(rkl_err) +
             ", min FY gap " + format_double(fy_min) + ", FY gap at prox " + format_double(fy_prox) +
             ", min small-c slope " + format_double(worst_slope);
  r.seconds = seconds_since(start);
  return r;
}

SuiteResult closed_form_consistency_suite(int instances, std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  double worst_tv = 0.0;
  int worst_iters = 0;
  for (int i = 0; i < instances; ++i) {
    const int S = uniform_int(rng, 1, 4);
    const int A = 3;
    const Representation rep = i % 2 == 0 ? Representation::direct : Representation::softmax;
    // Mixing with uniform keeps the softmax parameterization well conditioned.
    const DirectPolicy pi_t(0.5 * random_policy(S, A, rng).probs().array() + 0.5 / A);
    Vector weights(S);
    for (int s = 0; s < S; ++s) weights(s) = uniform(rng, 0.2, 1.0);
    const double eta = log_uniform(rng, 0.05, 1.0);
    const double c = log_uniform(rng, 0.05, 1.0);
    const double zeta = effective_step(eta, c);
    Table est = gaussian_table(S, A, 1.0, rng);
    if (rep == Representation::softmax) {
      est = center(est, pi_t.probs(), Centering::policy_weighted);
      // Keep 1 + zeta A_hat positive so the surrogate has an interior maximizer.
      const double lowest = est.minCoeff();
      if (zeta * lowest < -0.5) est *= -0.5 / (zeta * lowest);
    }
    const Surrogate surr = Surrogate::make(rep, pi_t, weights, est, eta, c);
    const DirectPolicy closed = surrogate_maximizer(surr);
    auto features = std::make_shared<const FeatureMatrix>(FeatureMatrix::one_hot(S, A));
    const LinearPolicyParams theta0(flat(Table(pi_t.probs().array().log())), features);
    ArmijoOptions armijo;
    armijo.reset_step = false;
    const ActorFit fit = inner_loop_actor(surr, theta0, 20000, 1e-10, armijo);
    worst_iters = std::max(worst_iters, fit.iterations);
    const Table diff = fit.params.policy().probs() - closed.probs();
    for (int s = 0; s < S; ++s) worst_tv = std::max(worst_tv, 0.5 * diff.row(s).cwiseAbs().sum());
  }
  SuiteResult r;
  r.name = "one-hot inner loop vs closed form";
  r.passed = worst_tv <= 1e-6 && instances > 0;
  r.detail = std::to_string(instances) + " instances, worst per-state TV " + format_double(worst_tv) +
             ", most inner iterations " + std::to_string(worst_iters);
  r.seconds = seconds_since(start);
  return r;
}

SuiteResult linear_critic_bandit_suite() {
  const auto start = Clock::now();
  LinearCriticBandit sc;
  sc.p0 = 0.1;
  const auto da = run_linear_critic_bandit(sc, BanditCritic::da, 200);
  const auto td = run_linear_critic_bandit(sc, BanditCritic::td, 200);
  double omega_err = 0.0;
  double max_loss = 0.0;
  for (const auto& s : da) {
    omega_err = std::max(omega_err, std::abs(s.omega + 1.0 / 3.0));
    max_loss = std::max(max_loss, std::abs(s.loss));
  }
  SuiteResult r;
  r.name = "linear critic bandit";
  r.passed = omega_err <= 1e-8 && max_loss <= 1e-12 && da.back().p >= 0.99 && td.back().p <= 0.01;
  r.detail = "decision-aware weight err " + format_double(omega_err) + ", final p " +
             format_double(da.back().p) + " (decision-aware) vs " + format_double(td.back().p) +
             " (squared)";
  r.seconds = seconds_since(start);
  return r;
}

SuiteResult hypothesis_bandit_suite() {
  const auto start = Clock::now();
  bool ok = true;
  double squared_diff = 0.0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (double eps : {0.55, 0.75, 0.95}) {
    for (int k = 1; k <= 9; ++k) {
      const double p = 0.05 * k;
      squared_diff = std::max(squared_diff, std::abs(hypothesis_squared_loss(p, hypothesis_h0(p, eps)) -
                                                     hypothesis_squared_loss(p, hypothesis_h1(p, eps))));
      const double gap = hypothesis_da_gap(p, eps);
      worst_gap = std::max(worst_gap, gap);
      if (!(gap < 0.0)) ok = false;
    }
  }
  HypothesisBandit sc;
  sc.p0 = 0.3;
  sc.eps = 0.75;
  const auto da = run_hypothesis_bandit(sc, BanditCritic::da, 200);
  sc.tie_break = TieBreak::prefer_h1;
  const auto adv = run_hypothesis_bandit(sc, BanditCritic::advtd, 200);
  ok = ok && squared_diff <= 1e-12 && da.back().p >= 0.99 && adv.back().p <= 0.01;
  SuiteResult r;
  r.name = "hypothesis bandit";
  r.passed = ok;
  r.detail = "squared-loss hypothesis difference " + format_double(squared_diff) +
             ", largest decision-aware gap " + format_double(worst_gap) + ", final p " +
             format_double(da.back().p) + " (decision-aware) vs " + format_double(adv.back().p) +
             " (squared, ties to H1)";
  r.seconds = seconds_since(start);
  return r;
}

SuiteResult general_two_arm_suite(int instances, std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  double omega_err = 0.0;
  double max_loss = 0.0;
  bool monotone = true;
  for (int i = 0; i < instances; ++i) {
    LinearCriticBandit sc;
    sc.r2 = uniform(rng, 0.0, 1.0);
    sc.r1 = sc.r2 + uniform(rng, 0.05, 1.0);
    do {
      sc.x1 = uniform(rng, -2.0, 2.0);
      sc.x2 = uniform(rng, -2.0, 2.0);
    } while (std::abs(sc.x1 - sc.x2) < 0.2);
    sc.p0 = uniform(rng, 0.05, 0.95);
    sc.eta = 0.1;
    sc.c = log_uniform(rng, 0.1, 10.0);
    const double expected = (sc.r1 - sc.r2) / (sc.x1 - sc.x2);
    const auto traj = run_general_two_arm(sc, 50);
    for (std::size_t t = 0; t < traj.size(); ++t) {
      omega_err = std::max(omega_err, std::abs(traj[t].omega - expected));
      max_loss = std::max(max_loss, std::abs(traj[t].loss));
      if (t > 0 && traj[t].p < traj[t - 1].p) monotone = false;
    }
  }
  SuiteResult r;
  r.name = "general two-arm bandit";
  r.passed = omega_err <= 1e-10 && max_loss <= 1e-12 && monotone && instances > 0;
  r.detail = std::to_string(instances) + " instances, weight err " + format_double(omega_err) +
             ", max loss " + format_double(max_loss) + (monotone ? ", p nondecreasing" : ", p decreased");
  r.seconds = seconds_since(start);
  return r;
}

std::vector<SuiteResult> run_quick_suites(std::uint64_t seed) {
  return {linear_critic_bandit_suite(),
          hypothesis_bandit_suite(),
          general_two_arm_suite(20, seed),
          lower_bound_suite(Representation::direct, 200, seed),
          lower_bound_suite(Representation::softmax, 200, seed + 1),
          gradient_suite(40, seed),
          lemma_suite(100, seed),
          closed_form_consistency_suite(10, seed)};
}

}  // namespace dac
