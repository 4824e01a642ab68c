#pragma once

#include "crl/common.hpp"
#include "crl/rng.hpp"

#include <vector>

namespace crl {

/// Row-stochastic action-probability table pi(a|s). Rows are states.
class TabularPolicy {
public:
    TabularPolicy() = default;
    /// Validates that every row is a distribution within 1e-9.
    explicit TabularPolicy(MatrixXd probs);

    static TabularPolicy uniform(int num_states, int num_actions);
    static TabularPolicy deterministic(const std::vector<int>& actions, int num_actions);
    /// Row-wise softmax of the given logits (max-subtracted).
    static TabularPolicy softmax(const MatrixXd& logits);

    int num_states() const { return static_cast<int>(probs_.rows()); }
    int num_actions() const { return static_cast<int>(probs_.cols()); }
    double operator()(int s, int a) const { return probs_(s, a); }
    const MatrixXd& probs() const { return probs_; }

    /// Greedy action per state, lowest index on ties.
    std::vector<int> argmax(double tie_tolerance = 1e-9) const;

private:
    MatrixXd probs_;
};

/// Exact finite MDP with state-action rewards and no terminal states.
///
/// Transitions are stored per action as row-stochastic |S|x|S| matrices so
/// that expectations over next states are matrix-vector products.
class TabularMdp {
public:
    TabularMdp() = default;
    TabularMdp(std::vector<MatrixXd> transition, MatrixXd reward, double discount,
               VectorXd initial_dist);

    int num_states() const { return static_cast<int>(reward_.rows()); }
    int num_actions() const { return static_cast<int>(reward_.cols()); }
    double discount() const { return discount_; }
    const MatrixXd& reward() const { return reward_; }
    const VectorXd& initial_dist() const { return initial_dist_; }

    /// P(. | ., a) as an |S|x|S| matrix.
    const MatrixXd& transition(int a) const { return transition_[a]; }
    double transition(int s, int a, int next) const { return transition_[a](s, next); }

    bool deterministic() const { return deterministic_; }
    /// Successor of (s, a); only valid for deterministic MDPs.
    int next_state(int s, int a) const;

    /// E_{s' ~ P(.|s,a)}[v(s')] for every (s, a).
    MatrixXd expect_next(const VectorXd& v) const;

    TabularMdp with_rewards(MatrixXd reward) const;

private:
    std::vector<MatrixXd> transition_;
    MatrixXd reward_;
    double discount_ = 0.0;
    VectorXd initial_dist_;
    bool deterministic_ = false;
};

/// Q-values Q[s][a] in units of discounted return.
struct QTable {
    MatrixXd values;

    int num_states() const { return static_cast<int>(values.rows()); }
    int num_actions() const { return static_cast<int>(values.cols()); }
    double operator()(int s, int a) const { return values(s, a); }
    /// Greedy action per state, lowest index on ties.
    std::vector<int> argmax(double tie_tolerance = 1e-9) const;
    /// V(s) = sum_a pi(a|s) Q(s, a).
    VectorXd state_values(const TabularPolicy& policy) const;
};

/// Random dense MDP used by the theorem checks: Dirichlet(1) transition rows,
/// rewards uniform in [reward_lo, reward_hi], uniform initial distribution.
TabularMdp random_tabular_mdp(int num_states, int num_actions, double discount, Rng& rng,
                              double reward_lo = 0.1, double reward_hi = 1.0);

/// Random full-support policy with Dirichlet(1) rows; if `zero_prob` > 0,
/// each action except one randomly kept action is zeroed with that probability.
TabularPolicy random_policy(int num_states, int num_actions, Rng& rng, double zero_prob = 0.0);

/// Random policy whose support is contained in the support of `base`.
TabularPolicy random_policy_within_support(const TabularPolicy& base, Rng& rng);

}  // namespace crl
