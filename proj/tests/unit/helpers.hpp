#pragma once

#include <functional>
#include <random>

#include "dac/types.hpp"

namespace dac::testing {

inline Vector random_vector(int n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Table random_table(int rows, int cols, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  Table t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = normal(rng);
  return t;
}

inline Vector random_distribution(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = expo(rng) + 1e-3;
  return v / v.sum();
}

/// Central finite-difference gradient.
inline Vector numeric_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                               double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector up = x, down = x;
    up(i) += h;
    down(i) -= h;
    g(i) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

}  // namespace dac::testing
