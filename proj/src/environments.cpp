#include "dac/environments.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace dac {

namespace {

bool contains(const std::vector<Cell>& cells, const Cell& c) {
  return std::find(cells.begin(), cells.end(), c) != cells.end();
}

Cell move(const GridSpec& spec, const Cell& from, int action) {
  Cell to = from;
  switch (action) {
    case kLeft: to.col -= 1; break;
    case kDown: to.row += 1; break;
    case kRight: to.col += 1; break;
    case kUp: to.row -= 1; break;
    default: throw std::invalid_argument("grid action out of range");
  }
  if (to.row < 0 || to.row >= spec.height || to.col < 0 || to.col >= spec.width) return from;
  return to;
}

}  // namespace

GridWorld build_grid_world(const GridSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("grid must be non-empty");
  auto inside = [&](const Cell& c) {
    return c.row >= 0 && c.row < spec.height && c.col >= 0 && c.col < spec.width;
  };
  if (!inside(spec.start)) throw std::invalid_argument("start cell outside the grid");
  if (contains(spec.hazards, spec.start)) throw std::invalid_argument("start cell is a hazard");
  if (contains(spec.goals, spec.start)) throw std::invalid_argument("start cell is a goal");
  for (const auto& c : spec.goals) {
    if (!inside(c)) throw std::invalid_argument("goal cell outside the grid");
    if (contains(spec.hazards, c)) throw std::invalid_argument("cell is both goal and hazard");
  }
  for (const auto& c : spec.hazards) {
    if (!inside(c)) throw std::invalid_argument("hazard cell outside the grid");
  }

  const bool reset = spec.hazard_mode == HazardMode::reset_to_start;
  std::vector<int> index(static_cast<std::size_t>(spec.width * spec.height), -1);
  std::vector<GridCoord> coords;
  auto cell_id = [&](const Cell& c) { return static_cast<std::size_t>(c.row * spec.width + c.col); };

  for (int r = 0; r < spec.height; ++r) {
    for (int col = 0; col < spec.width; ++col) {
      const Cell c{r, col};
      if (reset && contains(spec.hazards, c)) continue;
      index[cell_id(c)] = static_cast<int>(coords.size());
      coords.push_back({static_cast<double>(col), static_cast<double>(r)});
    }
  }
  int sink = -1;
  if (reset && !spec.hazards.empty()) {
    GridCoord centre{};
    for (const auto& c : spec.hazards) {
      centre.x += c.col;
      centre.y += c.row;
    }
    centre.x /= static_cast<double>(spec.hazards.size());
    centre.y /= static_cast<double>(spec.hazards.size());
    sink = static_cast<int>(coords.size());
    coords.push_back(centre);
  }

  const int S = static_cast<int>(coords.size());
  const int A = 4;
  const int start = index[cell_id(spec.start)];
  Matrix P = Matrix::Zero(static_cast<Eigen::Index>(S) * A, S);
  Table R = Table::Zero(S, A);

  std::vector<std::pair<int, double>> outcomes;
  for (int r = 0; r < spec.height; ++r) {
    for (int col = 0; col < spec.width; ++col) {
      const Cell here{r, col};
      const int s = index[cell_id(here)];
      if (s < 0) continue;
      const bool terminal = contains(spec.goals, here) || contains(spec.hazards, here);
      for (int a = 0; a < A; ++a) {
        const Eigen::Index row = static_cast<Eigen::Index>(s) * A + a;
        if (terminal) {
          P(row, s) = 1.0;
          continue;
        }
        outcomes.clear();
        if (spec.slip == SlipModel::deterministic) {
          outcomes.emplace_back(a, 1.0);
        } else {
          outcomes.emplace_back((a + A - 1) % A, 1.0 / 3.0);
          outcomes.emplace_back(a, 1.0 / 3.0);
          outcomes.emplace_back((a + 1) % A, 1.0 / 3.0);
        }
        for (const auto& [dir, prob] : outcomes) {
          const Cell next = move(spec, here, dir);
          double reward = spec.step_reward;
          int target = index[cell_id(next)];
          if (contains(spec.hazards, next)) {
            reward = spec.hazard_reward;
            if (reset) target = sink;
          } else if (contains(spec.goals, next)) {
            reward = spec.goal_reward;
          }
          P(row, target) += prob;
          R(s, a) += prob * reward;
        }
      }
    }
  }
  if (sink >= 0) {
    for (int a = 0; a < A; ++a) P(static_cast<Eigen::Index>(sink) * A + a, start) = 1.0;
  }

  Vector rho = Vector::Zero(S);
  rho(start) = 1.0;

  GridWorld world{spec, TabularMdp(std::move(P), std::move(R), std::move(rho), spec.discount),
                  std::move(coords), start, {}, {}};
  for (const auto& c : spec.goals) world.goal_states.push_back(index[cell_id(c)]);
  if (reset) {
    if (sink >= 0) world.hazard_states.push_back(sink);
  } else {
    for (const auto& c : spec.hazards) world.hazard_states.push_back(index[cell_id(c)]);
  }
  return world;
}

// Cliff walking on a 4 x 6 grid. Start is the bottom-left cell, goal the bottom-right
// cell, and the four cells between them form the cliff. The cliff cells share one
// state: entering it costs -100 and the next action returns to start. The goal is
// absorbing and pays +1 on entry. 20 grid cells plus the cliff state give 21 states.
GridSpec cliff_world_spec() {
  GridSpec spec;
  spec.width = 6;
  spec.height = 4;
  spec.start = {3, 0};
  spec.goals = {{3, 5}};
  for (int col = 1; col <= 4; ++col) spec.hazards.push_back({3, col});
  spec.goal_reward = 1.0;
  spec.hazard_reward = -100.0;
  spec.step_reward = 0.0;
  spec.slip = SlipModel::deterministic;
  spec.hazard_mode = HazardMode::reset_to_start;
  spec.discount = 0.9;
  return spec;
}

// Standard 4 x 4 lake:
//   S F F F
//   F H F H
//   F F F H
//   H F F G
GridSpec frozen_lake_spec() {
  GridSpec spec;
  spec.width = 4;
  spec.height = 4;
  spec.start = {0, 0};
  spec.goals = {{3, 3}};
  spec.hazards = {{1, 1}, {1, 3}, {2, 3}, {3, 0}};
  spec.goal_reward = 1.0;
  spec.hazard_reward = 0.0;
  spec.step_reward = 0.0;
  spec.slip = SlipModel::uniform_perpendicular;
  spec.hazard_mode = HazardMode::absorbing;
  spec.discount = 0.9;
  return spec;
}

GridWorld make_cliff_world() { return build_grid_world(cliff_world_spec()); }
GridWorld make_frozen_lake() { return build_grid_world(frozen_lake_spec()); }
TabularMdp build_cliff_world() { return make_cliff_world().mdp; }
TabularMdp build_frozen_lake() { return make_frozen_lake().mdp; }

TabularMdp build_two_arm_bandit(double r1, double r2) {
  Matrix P = Matrix::Ones(2, 1);
  Table R(1, 2);
  R << r1, r2;
  return TabularMdp(std::move(P), std::move(R), Vector::Ones(1), 0.0);
}

GridWorld make_environment(const std::string& name) {
  if (name == "cliff") return make_cliff_world();
  if (name == "frozenlake") return make_frozen_lake();
  throw std::invalid_argument("unknown grid environment '" + name + "'");
}

}  // namespace dac
