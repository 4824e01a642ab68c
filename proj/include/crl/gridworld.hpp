#pragma once

#include "crl/mdp.hpp"

#include <array>
#include <compare>
#include <map>
#include <string_view>
#include <vector>

namespace crl {

/// Gridworld actions. Index order is part of the tie-breaking contract:
/// argmax ties resolve to the lowest index, so "up" wins when all are equal.
enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3, Nothing = 4 };

inline constexpr int kNumGridActions = 5;
inline constexpr std::array<std::string_view, kNumGridActions> kActionNames = {
    "up", "down", "left", "right", "nothing"};

struct Cell {
    int row = 0;
    int col = 0;
    auto operator<=>(const Cell&) const = default;
};

/// Rectangular gridworld. States are indexed row-major: s = row * width + col.
/// Moving off the grid leaves the agent in place, and r(s, a) is the reward of
/// the cell entered by taking a from s (the same cell again for a wall bump or
/// "nothing").
struct GridworldSpec {
    int width = 5;
    int height = 5;
    double default_reward = 0.0;
    std::map<Cell, double> rewards;
    Cell start;
    std::vector<Cell> goal_cells;  // annotation only

    int num_states() const { return width * height; }
    int state_of(Cell c) const { return c.row * width + c.col; }
    Cell cell_of(int s) const { return {s / width, s % width}; }
    bool contains(Cell c) const { return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width; }
    double reward_at(Cell c) const;
    /// Cell reached by taking `a` in `c`, clamped at the walls.
    Cell next_cell(Cell c, Action a) const;
    /// Validates dimensions and that all referenced cells lie on the grid.
    void validate() const;
};

TabularMdp build_gridworld(const GridworldSpec& spec, double discount);

/// |dr| + |dc| between two cells.
int manhattan(Cell a, Cell b);

}  // namespace crl
