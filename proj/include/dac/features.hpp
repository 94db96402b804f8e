#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dac/types.hpp"

namespace dac {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// State-action feature matrix X with one row per (s, a) at index s * A + a.
class FeatureMatrix {
 public:
  FeatureMatrix(int num_states, int num_actions, SparseRows rows);

  static FeatureMatrix one_hot(int num_states, int num_actions);
  static FeatureMatrix from_dense(int num_states, int num_actions, const Matrix& dense);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int dim() const { return static_cast<int>(rows_.cols()); }
  const SparseRows& rows() const { return rows_; }

  /// Scores X w as an S x A table.
  Table apply(const Vector& weights) const;
  /// X^T u for a table u of per-(s, a) coefficients.
  Vector apply_transpose(const Table& coefficients) const;
  Matrix dense() const { return Matrix(rows_); }

 private:
  int num_states_;
  int num_actions_;
  SparseRows rows_;
};

/// Hashed tile coding over 2-D grid coordinates.
///
/// Tiling i is shifted by i * tile_size / num_tilings along both axes. The
/// tuple (tiling, tile x, tile y, action) is mixed with a 64-bit integer hash
/// and reduced modulo dim. Collisions between different state-action pairs
/// are kept; collisions inside one vector are resolved by linear probing so
/// every vector stays exactly num_tilings-hot.
struct TileCodingSpec {
  int dim = 0;
  int num_tilings = 0;
  double tile_size = 1.0;
  std::uint64_t seed = 0;
};

class TileCoding {
 public:
  explicit TileCoding(TileCodingSpec spec);
  const TileCodingSpec& spec() const { return spec_; }

  /// Sorted active indices for a coordinate/action pair.
  std::vector<int> active_indices(double x, double y, int action) const;
  Eigen::SparseVector<double> featurize(double x, double y, int action) const;

 private:
  TileCodingSpec spec_;
};

struct GridCoord {
  double x = 0.0;
  double y = 0.0;
};

FeatureMatrix build_feature_matrix(const TileCoding& tc, const std::vector<GridCoord>& state_coords,
                                   int num_actions);

struct FeaturePreset {
  std::string name;
  std::string env;
  TileCodingSpec spec;
};

const std::vector<FeaturePreset>& feature_presets();
/// Looks up a preset such as "cliff-d40"; throws std::invalid_argument if unknown.
const FeaturePreset& feature_preset(std::string_view name);

}  // namespace dac
