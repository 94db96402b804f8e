#pragma once

#include <string>
#include <vector>

#include "dac/features.hpp"
#include "dac/mdp.hpp"

namespace dac {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class SlipModel { deterministic, uniform_perpendicular };

/// What happens after entering a hazard cell.
enum class HazardMode {
  /// All hazard cells collapse into one extra state from which every action returns to start.
  reset_to_start,
  /// Each hazard cell is its own absorbing state.
  absorbing,
};

/// Grid world description. Actions are ordered left, down, right, up.
struct GridSpec {
  int width = 0;
  int height = 0;
  Cell start;
  std::vector<Cell> goals;
  std::vector<Cell> hazards;
  double goal_reward = 1.0;
  double hazard_reward = 0.0;
  double step_reward = 0.0;
  SlipModel slip = SlipModel::deterministic;
  HazardMode hazard_mode = HazardMode::absorbing;
  double discount = 0.9;
};

/// A grid MDP together with the map from state index to grid position.
struct GridWorld {
  GridSpec spec;
  TabularMdp mdp;
  std::vector<GridCoord> state_coords;
  int start_state = 0;
  std::vector<int> goal_states;
  std::vector<int> hazard_states;
};

inline constexpr int kLeft = 0;
inline constexpr int kDown = 1;
inline constexpr int kRight = 2;
inline constexpr int kUp = 3;

GridWorld build_grid_world(const GridSpec& spec);

GridSpec cliff_world_spec();
GridSpec frozen_lake_spec();

GridWorld make_cliff_world();
GridWorld make_frozen_lake();

TabularMdp build_cliff_world();
TabularMdp build_frozen_lake();

/// Single-state bandit with deterministic rewards. gamma = 0 so Q equals the reward.
TabularMdp build_two_arm_bandit(double r1, double r2);

/// Environment by CLI name: "cliff" or "frozenlake".
GridWorld make_environment(const std::string& name);

}  // namespace dac
