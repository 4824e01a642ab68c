#include "crl/extensions.hpp"

#include "crl/solvers.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <ostream>

namespace crl {

GoalConditionedPolicy GoalConditionedPolicy::constant(const TabularPolicy& pi, int num_goals) {
    return {std::vector<TabularPolicy>(num_goals, pi)};
}

SuccessExamples::SuccessExamples(VectorXd d) : density(std::move(d)) {
    if (density.size() == 0 || (density.array() < 0.0).any() || std::abs(density.sum() - 1.0) > 1e-12) {
        throw PreconditionError("success-example density must be a probability vector");
    }
}

std::vector<MatrixXd> goal_rewards(const TabularMdp& mdp) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    std::vector<MatrixXd> out(S, MatrixXd(S, A));
    for (int g = 0; g < S; ++g)
        for (int a = 0; a < A; ++a) out[g].col(a) = (1.0 - mdp.discount()) * mdp.transition(a).col(g);
    return out;
}

GoalConditionedQ gc_discounted_occupancy(const TabularMdp& mdp, const TabularPolicy& policy_marginal) {
    const int S = mdp.num_states();
    GoalConditionedQ q;
    q.goal_dist = VectorXd::Constant(S, 1.0 / S);
    for (MatrixXd& r : goal_rewards(mdp)) {
        q.values.push_back(policy_evaluation_exact(mdp.with_rewards(std::move(r)), policy_marginal).values);
    }
    return q;
}

GoalConditionedQ gc_critic_reg_fixed_point(const EmpiricalModel& dataset_model, const GoalConditionedPolicy& policy,
                                           const SolverConfig& config) {
    const int S = dataset_model.num_states();
    const int A = dataset_model.num_actions();
    if (policy.num_goals() != S) throw PreconditionError("goal-conditioned policy needs one table per state");
    GoalConditionedQ q;
    q.goal_dist = VectorXd::Constant(S, 1.0 / S);
    for (int g = 0; g < S; ++g) {
        MatrixXd r(S, A);
        for (int a = 0; a < A; ++a) r.col(a) = (1.0 - dataset_model.discount()) * dataset_model.next_dist(a).col(g);
        const EmpiricalModel model_g = dataset_model.with_rewards(r);
        const TabularPolicy& pi = policy.per_goal[g];
        q.values.push_back(importance_weighted_fixed_point(model_g, pi, pi, config).values);
    }
    return q;
}

QTable rce_discounted_success(const TabularMdp& mdp, const TabularPolicy& beta, const SuccessExamples& examples) {
    if (examples.density.size() != mdp.num_states()) throw PreconditionError("example density has wrong size");
    MatrixXd r = ((1.0 - mdp.discount()) * examples.density).replicate(1, mdp.num_actions());
    return policy_evaluation_exact(mdp.with_rewards(std::move(r)), beta);
}

QTable rce_critic_reg_fixed_point(const EmpiricalModel& dataset_model, const TabularPolicy& policy,
                                  const SuccessExamples& examples, const SolverConfig& config) {
    if (examples.density.size() != dataset_model.num_states()) {
        throw PreconditionError("example density has wrong size");
    }
    MatrixXd r = ((1.0 - dataset_model.discount()) * examples.density).replicate(1, dataset_model.num_actions());
    return importance_weighted_fixed_point(dataset_model.with_rewards(r), policy, policy, config);
}

void write_goal_q_csv(std::ostream& out, const GoalConditionedQ& q) {
    out << "s,a,s_g,value\n";
    for (int g = 0; g < q.num_goals(); ++g)
        for (Eigen::Index s = 0; s < q.values[g].rows(); ++s)
            for (Eigen::Index a = 0; a < q.values[g].cols(); ++a)
                fmt::print(out, "{},{},{},{}\n", s, a, g, q.values[g](s, a));
}

}  // namespace crl
