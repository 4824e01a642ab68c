#pragma once

#include "crl/classifier_ac.hpp"
#include "crl/empirical.hpp"
#include "crl/mdp.hpp"

#include <iosfwd>
#include <vector>

namespace crl {

/// Q(s, a, s_g) stored as one |S|x|A| matrix per goal state.
struct GoalConditionedQ {
    std::vector<MatrixXd> values;
    VectorXd goal_dist;

    int num_goals() const { return static_cast<int>(values.size()); }
    double operator()(int s, int a, int g) const { return values[g](s, a); }
};

/// pi(a | s, s_g), one row-stochastic table per goal.
struct GoalConditionedPolicy {
    std::vector<TabularPolicy> per_goal;

    int num_goals() const { return static_cast<int>(per_goal.size()); }
    /// The same marginal policy for every goal.
    static GoalConditionedPolicy constant(const TabularPolicy& pi, int num_goals);
};

/// Density p_e(s) of successful-outcome examples.
struct SuccessExamples {
    VectorXd density;

    explicit SuccessExamples(VectorXd d);
};

/// r_g(s,a) = (1 - gamma) P(s' = g | s, a) for every goal g.
std::vector<MatrixXd> goal_rewards(const TabularMdp& mdp);

/// Discounted future-state occupancy of the marginal policy:
///   Q(s,a,g) = (1 - gamma) P(g|s,a) + gamma E_{s' ~ P, a' ~ beta} Q(s',a',g),
/// one linear solve per goal. Goal distribution is uniform.
GoalConditionedQ gc_discounted_occupancy(const TabularMdp& mdp, const TabularPolicy& policy_marginal);

/// Q*(s,a,g) by the importance-weighted iteration
///   Q(s,a,g) <- [(1-gamma) P(g|s,a) + gamma E_{s',a'~pi(.|s',g)} Q(s',a',g)] beta(a|s) / pi(a|s,g)
/// on the dataset model. Its fixed point is Q^beta(s,a,g) beta(a|s) / pi(a|s,g).
GoalConditionedQ gc_critic_reg_fixed_point(const EmpiricalModel& dataset_model, const GoalConditionedPolicy& policy,
                                           const SolverConfig& config = {});

/// Q(s,a) = (1 - gamma) p_e(s) + gamma E_{s',a'~beta} Q(s',a').
QTable rce_discounted_success(const TabularMdp& mdp, const TabularPolicy& beta, const SuccessExamples& examples);

/// Q*(s,a) by Q <- [(1-gamma) p_e(s) + gamma E_{s',a'~pi} Q] beta / pi.
QTable rce_critic_reg_fixed_point(const EmpiricalModel& dataset_model, const TabularPolicy& policy,
                                  const SuccessExamples& examples, const SolverConfig& config = {});

/// Long-format CSV: s,a,s_g,value.
void write_goal_q_csv(std::ostream& out, const GoalConditionedQ& q);

}  // namespace crl
