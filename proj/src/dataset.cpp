#include "crl/dataset.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <sstream>

namespace crl {

TransitionDataset sample_trajectories(const TabularMdp& mdp, const TabularPolicy& policy,
                                      int num_traj, int horizon, std::uint64_t seed) {
    if (horizon < 1) throw PreconditionError("horizon must be at least 1");
    if (num_traj < 0) throw PreconditionError("number of trajectories must be non-negative");
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions()) {
        throw PreconditionError("policy shape does not match the MDP");
    }
    TransitionDataset data;
    data.seed = seed;
    data.transitions.reserve(static_cast<std::size_t>(num_traj) * horizon);
    const VectorXd& p0 = mdp.initial_dist();
    std::vector<double> row(mdp.num_states());
    std::vector<double> action_row(mdp.num_actions());

    for (int i = 0; i < num_traj; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const std::size_t begin = data.transitions.size();
        int s = rng.categorical({p0.data(), static_cast<std::size_t>(p0.size())});
        for (int t = 0; t < horizon; ++t) {
            for (int a = 0; a < mdp.num_actions(); ++a) action_row[a] = policy(s, a);
            const int a = rng.categorical(action_row);
            for (int n = 0; n < mdp.num_states(); ++n) row[n] = mdp.transition(s, a, n);
            const int next = rng.categorical(row);
            data.transitions.push_back({i, t, s, a, mdp.reward()(s, a), next});
            s = next;
        }
        data.trajectories.push_back({begin, data.transitions.size()});
    }
    return data;
}

TransitionDataset fixed_dataset(const std::vector<Cell>& path, const GridworldSpec& spec) {
    spec.validate();
    if (path.size() < 2) throw PreconditionError("a fixed path needs at least two cells");
    TransitionDataset data;
    for (std::size_t t = 0; t + 1 < path.size(); ++t) {
        const Cell from = path[t];
        const Cell to = path[t + 1];
        if (!spec.contains(from) || !spec.contains(to)) throw PreconditionError("path leaves the grid");
        int action = -1;
        for (int a = 0; a < kNumGridActions && action < 0; ++a) {
            const auto act = static_cast<Action>(a);
            // Prefer "nothing" for self-loops rather than a wall bump.
            if (from == to && act != Action::Nothing) continue;
            if (spec.next_cell(from, act) == to) action = a;
        }
        if (action < 0) {
            throw PreconditionError(fmt::format("illegal jump ({},{}) -> ({},{}) at step {}",
                                                from.row, from.col, to.row, to.col, t));
        }
        data.transitions.push_back({0, static_cast<int>(t), spec.state_of(from), action,
                                    spec.reward_at(to), spec.state_of(to)});
    }
    data.trajectories.push_back({0, data.transitions.size()});
    return data;
}

void write_dataset_csv(std::ostream& out, const TransitionDataset& data) {
    out << "traj_id,t,s,a,r,s_next\n";
    for (const Transition& tr : data.transitions) {
        out << fmt::format("{},{},{},{},{},{}\n", tr.traj_id, tr.t, tr.s, tr.a, tr.r, tr.s_next);
    }
}

TransitionDataset read_dataset_csv(std::istream& in) {
    std::string line;
    // Leading '#' lines (such as the config-hash stamp) are skipped.
    int line_no = 0;
    bool have = false;
    while ((have = static_cast<bool>(std::getline(in, line)))) {
        ++line_no;
        if (line.empty() || line[0] != '#') break;
    }
    if (!have || line.rfind("traj_id,t,s,a,r,s_next", 0) != 0) {
        throw ConfigError("dataset CSV must start with header traj_id,t,s,a,r,s_next");
    }
    TransitionDataset data;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Transition tr;
        char c1, c2, c3, c4, c5;
        if (!(ls >> tr.traj_id >> c1 >> tr.t >> c2 >> tr.s >> c3 >> tr.a >> c4 >> tr.r >> c5 >> tr.s_next) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',') {
            throw ConfigError(fmt::format("dataset CSV line {} is malformed", line_no));
        }
        if (data.transitions.empty() || data.transitions.back().traj_id != tr.traj_id) {
            if (!data.trajectories.empty()) data.trajectories.back().end = data.transitions.size();
            data.trajectories.push_back({data.transitions.size(), data.transitions.size()});
        }
        data.transitions.push_back(tr);
    }
    if (!data.trajectories.empty()) data.trajectories.back().end = data.transitions.size();
    return data;
}

}  // namespace crl
