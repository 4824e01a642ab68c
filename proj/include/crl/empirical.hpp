#pragma once

#include "crl/dataset.hpp"
#include "crl/mdp.hpp"

#include <vector>

namespace crl {

/// Tabular model estimated from an offline dataset (or built exactly from a
/// known MDP for the theorem checks).
///
/// Only supported pairs (N(s,a) > 0) carry a transition distribution and a
/// reward; `next_dist(a)` rows of unsupported pairs are zero. Unvisited
/// states get the uniform behavior policy. Every consumer weights losses by
/// p(s,a) or p(s), so those rows never enter a dataset-weighted objective.
class EmpiricalModel {
public:
    EmpiricalModel() = default;

    int num_states() const { return static_cast<int>(reward_.rows()); }
    int num_actions() const { return static_cast<int>(reward_.cols()); }
    double discount() const { return discount_; }

    /// N[s][a][s'] stored per action as |S|x|S| matrices.
    const std::vector<MatrixXd>& counts() const { return counts_; }
    /// Empirical P(.|s,a) per action; zero rows where unsupported.
    const MatrixXd& next_dist(int a) const { return next_dist_[a]; }
    /// Mean observed reward on supported pairs, 0 elsewhere.
    const MatrixXd& reward() const { return reward_; }
    const MatrixXd& state_action_dist() const { return state_action_dist_; }
    const VectorXd& state_dist() const { return state_dist_; }
    const TabularPolicy& behavior() const { return behavior_; }
    const BoolMatrix& support() const { return support_; }
    const BoolVector& visited() const { return visited_; }
    bool supported(int s, int a) const { return support_(s, a); }
    bool visited(int s) const { return visited_(s); }

    double min_reward() const;
    double max_reward() const;

    /// True when every observed next state is also a visited state, i.e.
    /// backups from supported pairs under the behavior policy never leave
    /// the supported set.
    bool closed() const;

    /// sum_{s'} P_hat(s'|s,a) v(s'); zero on unsupported pairs.
    MatrixXd expect_next(const VectorXd& v) const;

    /// Same model with `offset` added to every supported reward.
    EmpiricalModel with_reward_offset(double offset) const;

    /// Same model with the given reward table, masked to the support.
    EmpiricalModel with_rewards(const MatrixXd& reward) const;

    /// Empirical MDP for the exact oracles. Supported pairs use the estimated
    /// P_hat and mean reward; each unsupported pair becomes a self-loop with
    /// reward `unsupported_reward`.
    TabularMdp to_mdp(double unsupported_reward) const;

    friend EmpiricalModel estimate_empirical_model(const TransitionDataset&, int, int, double);
    friend EmpiricalModel exact_model(const TabularMdp&, const TabularPolicy&, const VectorXd&);

private:
    void finalize();

    std::vector<MatrixXd> counts_;
    std::vector<MatrixXd> next_dist_;
    MatrixXd reward_;
    MatrixXd state_action_dist_;
    VectorXd state_dist_;
    TabularPolicy behavior_;
    BoolMatrix support_;
    BoolVector visited_;
    double discount_ = 0.0;
};

/// Counts transitions, then normalises into p(s,a), p(s) and beta_hat(a|s).
EmpiricalModel estimate_empirical_model(const TransitionDataset& dataset, int num_states,
                                        int num_actions, double discount);

/// "Infinite data" model: P_hat = P, p(s,a) = state_dist(s) * behavior(a|s).
/// Support is where behavior(a|s) > 0 at states with state_dist(s) > 0.
EmpiricalModel exact_model(const TabularMdp& mdp, const TabularPolicy& behavior,
                           const VectorXd& state_dist);

}  // namespace crl
