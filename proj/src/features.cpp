#include "dac/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dac {

FeatureMatrix::FeatureMatrix(int num_states, int num_actions, SparseRows rows)
    : num_states_(num_states), num_actions_(num_actions), rows_(std::move(rows)) {
  if (num_states <= 0 || num_actions <= 0) throw std::invalid_argument("empty feature matrix");
  if (rows_.rows() != static_cast<Eigen::Index>(num_states) * num_actions) {
    throw std::invalid_argument("feature matrix must have S*A rows");
  }
  if (rows_.cols() <= 0) throw std::invalid_argument("feature dimension must be positive");
  rows_.makeCompressed();
}

FeatureMatrix FeatureMatrix::one_hot(int num_states, int num_actions) {
  const Eigen::Index n = static_cast<Eigen::Index>(num_states) * num_actions;
  SparseRows m(n, n);
  m.setIdentity();
  return {num_states, num_actions, std::move(m)};
}

FeatureMatrix FeatureMatrix::from_dense(int num_states, int num_actions, const Matrix& dense) {
  return {num_states, num_actions, dense.sparseView(0.0, 0.0)};
}

Table FeatureMatrix::apply(const Vector& weights) const {
  if (weights.size() != rows_.cols()) throw std::invalid_argument("weight dimension mismatch");
  const Vector scores = rows_ * weights;
  return unflatten(scores, num_states_, num_actions_);
}

Vector FeatureMatrix::apply_transpose(const Table& coefficients) const {
  if (coefficients.rows() != num_states_ || coefficients.cols() != num_actions_) {
    throw std::invalid_argument("coefficient table shape mismatch");
  }
  return rows_.transpose() * flat(coefficients);
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer applied to the running state combined with the next value.
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t encode(long long v) { return static_cast<std::uint64_t>(v); }

}  // namespace

TileCoding::TileCoding(TileCodingSpec spec) : spec_(spec) {
  if (spec_.dim <= 0) throw std::invalid_argument("tile coding dimension must be positive");
  if (spec_.num_tilings <= 0) throw std::invalid_argument("number of tilings must be positive");
  if (spec_.num_tilings > spec_.dim) {
    throw std::invalid_argument("number of tilings cannot exceed the dimension");
  }
  if (!(spec_.tile_size > 0.0)) throw std::invalid_argument("tile size must be positive");
}

std::vector<int> TileCoding::active_indices(double x, double y, int action) const {
  if (action < 0) throw std::invalid_argument("action must be non-negative");
  const int N = spec_.num_tilings;
  const double s = spec_.tile_size;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const double offset = i * s / N;
    const auto tx = static_cast<long long>(std::floor((x + offset) / s));
    const auto ty = static_cast<long long>(std::floor((y + offset) / s));
    std::uint64_t h = mix(spec_.seed, encode(i));
    h = mix(h, encode(tx));
    h = mix(h, encode(ty));
    h = mix(h, encode(action));
    int idx = static_cast<int>(h % static_cast<std::uint64_t>(spec_.dim));
    while (std::find(out.begin(), out.end(), idx) != out.end()) idx = (idx + 1) % spec_.dim;
    out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::SparseVector<double> TileCoding::featurize(double x, double y, int action) const {
  Eigen::SparseVector<double> v(spec_.dim);
  for (int idx : active_indices(x, y, action)) v.insert(idx) = 1.0;
  return v;
}

FeatureMatrix build_feature_matrix(const TileCoding& tc, const std::vector<GridCoord>& state_coords,
                                   int num_actions) {
  const int S = static_cast<int>(state_coords.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      const int row = s * num_actions + a;
      for (int idx : tc.active_indices(state_coords[static_cast<std::size_t>(s)].x,
                                       state_coords[static_cast<std::size_t>(s)].y, a)) {
        triplets.emplace_back(row, idx, 1.0);
      }
    }
  }
  SparseRows m(static_cast<Eigen::Index>(S) * num_actions, tc.spec().dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return {S, num_actions, std::move(m)};
}

const std::vector<FeaturePreset>& feature_presets() {
  // (dimension, tilings, tile size) per environment.
  static const std::vector<FeaturePreset> presets = {
      {"cliff-d40", "cliff", {40, 5, 1.0, 0}},
      {"cliff-d50", "cliff", {50, 6, 1.0, 0}},
      {"cliff-d60", "cliff", {60, 4, 3.0, 0}},
      {"cliff-d80", "cliff", {80, 5, 3.0, 0}},
      {"cliff-d100", "cliff", {100, 6, 3.0, 0}},
      {"frozenlake-d40", "frozenlake", {40, 3, 3.0, 0}},
      {"frozenlake-d50", "frozenlake", {50, 4, 13.0, 0}},
      {"frozenlake-d60", "frozenlake", {60, 5, 3.0, 0}},
      {"frozenlake-d100", "frozenlake", {100, 8, 3.0, 0}},
  };
  return presets;
}

const FeaturePreset& feature_preset(std::string_view name) {
  for (const auto& p : feature_presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown feature preset '" + std::string(name) + "'");
}

}  // namespace dac
