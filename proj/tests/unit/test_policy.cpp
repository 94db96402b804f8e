#include <doctest.h>

#include <cmath>

#include "dac/policy.hpp"
#include "helpers.hpp"

using namespace dac;
using namespace dac::testing;

TEST_CASE("softmax and log-sum-exp stay finite for extreme logits") {
  Vector z(3);
  z << 1000.0, 0.0, -1000.0;
  CHECK(log_sum_exp(z) == doctest::Approx(1000.0));
  const Vector p = softmax(z);
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p.allFinite());
  Vector small(2);
  small << std::log(0.25), std::log(0.75);
  CHECK(softmax(small)(0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("direct policy validation and flooring") {
  Table ok(1, 3);
  ok << 0.2, 0.3, 0.5;
  CHECK_NOTHROW(DirectPolicy{ok});
  Table bad = ok;
  bad(0, 0) = 0.3;
  CHECK_THROWS(DirectPolicy{bad});
  Table neg(1, 2);
  neg << -0.1, 1.1;
  CHECK_THROWS(DirectPolicy{neg});
  Table corner(1, 2);
  corner << 1.0, 0.0;
  const DirectPolicy f = DirectPolicy(corner).floored(1e-3);
  CHECK(f(0, 1) >= 1e-3 * 0.99);
  CHECK(f.probs().row(0).sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(DirectPolicy::uniform(2, 4)(1, 3) == 0.25);
}

TEST_CASE("linear policy produces distributions") {
  std::mt19937_64 rng(4);
  auto X = std::make_shared<const FeatureMatrix>(FeatureMatrix::from_dense(3, 4, random_table(12, 5, 1.0, rng)));
  const LinearPolicyParams params(random_vector(5, 2.0, rng), X);
  const Table p = params.policy().probs();
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(p.minCoeff() > 0.0);
}

TEST_CASE("KL divergence closed form") {
  Vector p(2), q(2);
  p << 0.5, 0.5;
  q << 0.25, 0.75;
  CHECK(kl_divergence(p, q) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-14));
  CHECK(kl_divergence(p, p) == 0.0);
  Vector z(2);
  z << 1.0, 0.0;
  CHECK(kl_divergence(z, p) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(kl_divergence(p, z), DomainError);
}

TEST_CASE("mirror map Hessians match finite differences of the gradient") {
  std::mt19937_64 rng(8);
  for (MirrorKind kind : {MirrorKind::neg_entropy, MirrorKind::log_sum_exp, MirrorKind::euclidean}) {
    CAPTURE(to_string(kind));
    const MirrorMap map(kind, Vector::Ones(1));
    for (int trial = 0; trial < 10; ++trial) {
      const int A = 2 + trial % 4;
      const Vector x = kind == MirrorKind::neg_entropy ? random_distribution(A, rng) : random_vector(A, 1.0, rng);
      const Matrix H = map.hessian(x);
      Matrix fd(A, A);
      for (int j = 0; j < A; ++j) {
        Vector up = x, down = x;
        const double h = 1e-6 * (kind == MirrorKind::neg_entropy ? x(j) : 1.0);
        up(j) += h;
        down(j) -= h;
        fd.col(j) = (map.gradient(up) - map.gradient(down)) / (2.0 * h);
      }
      CHECK((H - fd).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, H.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("dual Hessians of the two entropy maps") {
  std::mt19937_64 rng(9);
  const Vector p = random_distribution(4, rng);
  // Dual of negative entropy is log-sum-exp; its Hessian at grad phi(p) is diag(p) - p p^T.
  const Matrix expected = Matrix(p.asDiagonal()) - p * p.transpose();
  const MirrorMap neg(MirrorKind::neg_entropy, Vector::Ones(1));
  CHECK((neg.dual_hessian(p) - expected).cwiseAbs().maxCoeff() < 1e-14);
  // Dual of log-sum-exp has Hessian diag(1/p) at the softmax point.
  const MirrorMap lse(MirrorKind::log_sum_exp, Vector::Ones(1));
  const Vector z = p.array().log();
  const Matrix inv = Vector(p.cwiseInverse()).asDiagonal();
  CHECK((lse.dual_hessian(z) - inv).cwiseAbs().maxCoeff() < 1e-10);
  const MirrorMap euc(MirrorKind::euclidean, Vector::Ones(1));
  CHECK(euc.dual_hessian(z).isIdentity());
}

TEST_CASE("weighted Bregman divergence sums the per-state terms") {
  Table a(2, 2), b(2, 2);
  a << 0.5, 0.5, 0.9, 0.1;
  b << 0.25, 0.75, 0.5, 0.5;
  Vector w(2);
  w << 2.0, 3.0;
  const MirrorMap map(MirrorKind::neg_entropy, w);
  const double expected = 2.0 * kl_divergence(a.row(0).transpose(), b.row(0).transpose()) +
                          3.0 * kl_divergence(a.row(1).transpose(), b.row(1).transpose());
  CHECK(bregman_divergence(map, a, b) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("log-sum-exp dual divergence requires simplex points") {
  const MirrorMap lse(MirrorKind::log_sum_exp, Vector::Ones(1));
  Vector u(2), v(2);
  u << 0.3, 0.7;
  v << 0.5, 0.5;
  CHECK(lse.in_dual_domain(u));
  CHECK(lse.dual_divergence(u, v) == doctest::Approx(kl_divergence(u, v)).epsilon(1e-14));
  Vector off(2);
  off << 0.3, 0.8;
  CHECK_FALSE(lse.in_dual_domain(off));
  CHECK_THROWS_AS(lse.dual_divergence(off, v), DomainError);
}

TEST_CASE("Fenchel-Young gap vanishes at the Euclidean prox point") {
  Vector x(2), y(2);
  x << 1.0, -2.0;
  y << 0.3, 0.1;
  const double c = 0.7;
  CHECK(std::abs(fenchel_young_gap(MirrorKind::euclidean, x, y - c * x, y, c)) < 1e-14);
  CHECK(fenchel_young_gap(MirrorKind::euclidean, x, y, y, c) > 0.0);
}
