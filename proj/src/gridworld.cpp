#include "crl/gridworld.hpp"

#include <cstdlib>
#include <string>

namespace crl {

namespace {

constexpr std::array<Cell, kNumGridActions> kMoves = {
    Cell{-1, 0}, Cell{1, 0}, Cell{0, -1}, Cell{0, 1}, Cell{0, 0}};

std::string to_string(Cell c) {
    return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

}  // namespace

double GridworldSpec::reward_at(Cell c) const {
    auto it = rewards.find(c);
    return it == rewards.end() ? default_reward : it->second;
}

Cell GridworldSpec::next_cell(Cell c, Action a) const {
    const Cell d = kMoves[static_cast<int>(a)];
    const Cell n{c.row + d.row, c.col + d.col};
    return contains(n) ? n : c;
}

void GridworldSpec::validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("gridworld dimensions must be positive");
    if (!contains(start)) throw ConfigError("start cell " + to_string(start) + " is off the grid");
    for (const auto& [cell, value] : rewards) {
        if (!contains(cell)) throw ConfigError("reward cell " + to_string(cell) + " is off the grid");
    }
    for (const Cell& g : goal_cells) {
        if (!contains(g)) throw ConfigError("goal cell " + to_string(g) + " is off the grid");
    }
}

TabularMdp build_gridworld(const GridworldSpec& spec, double discount) {
    spec.validate();
    if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("discount must lie in (0,1)");
    const int S = spec.num_states();
    std::vector<MatrixXd> P(kNumGridActions, MatrixXd::Zero(S, S));
    MatrixXd r(S, kNumGridActions);
    for (int s = 0; s < S; ++s) {
        const Cell c = spec.cell_of(s);
        for (int a = 0; a < kNumGridActions; ++a) {
            const Cell n = spec.next_cell(c, static_cast<Action>(a));
            P[a](s, spec.state_of(n)) = 1.0;
            r(s, a) = spec.reward_at(n);
        }
    }
    VectorXd p0 = VectorXd::Zero(S);
    p0(spec.state_of(spec.start)) = 1.0;
    return TabularMdp(std::move(P), std::move(r), discount, std::move(p0));
}

int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

}  // namespace crl
