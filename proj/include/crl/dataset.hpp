#pragma once

#include "crl/gridworld.hpp"
#include "crl/mdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace crl {

struct Transition {
    int traj_id = 0;
    int t = 0;
    int s = 0;
    int a = 0;
    double r = 0.0;
    int s_next = 0;

    bool operator==(const Transition&) const = default;
};

/// Offline dataset of transitions. Trajectory `i` occupies the half-open
/// index range trajectories[i] of `transitions`.
struct TransitionDataset {
    struct Range {
        std::size_t begin = 0;
        std::size_t end = 0;
        bool operator==(const Range&) const = default;
    };

    std::vector<Transition> transitions;
    std::vector<Range> trajectories;
    std::uint64_t seed = 0;

    std::size_t size() const { return transitions.size(); }
    bool empty() const { return transitions.empty(); }
    bool operator==(const TransitionDataset&) const = default;
};

/// Rolls out `num_traj` trajectories of `horizon` steps. Initial states are
/// drawn from the MDP's p0. Trajectory i uses Rng::stream(seed, i) and draws,
/// per step, first the action and then the next state.
TransitionDataset sample_trajectories(const TabularMdp& mdp, const TabularPolicy& policy,
                                      int num_traj, int horizon, std::uint64_t seed);

/// Single-trajectory dataset following `path` exactly. Consecutive cells
/// must be one legal move apart; a repeated cell is the "nothing" action.
TransitionDataset fixed_dataset(const std::vector<Cell>& path, const GridworldSpec& spec);

/// CSV with header traj_id,t,s,a,r,s_next.
void write_dataset_csv(std::ostream& out, const TransitionDataset& data);
TransitionDataset read_dataset_csv(std::istream& in);

}  // namespace crl
