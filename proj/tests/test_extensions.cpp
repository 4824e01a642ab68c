#include "crl/classifier_ac.hpp"
#include "crl/extensions.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace crl;

namespace {

struct Instance {
    TabularMdp mdp;
    TabularPolicy beta;
    EmpiricalModel model;
};

Instance make(std::uint64_t seed, int S, int A, double zero_prob = 0.0) {
    Rng rng(seed);
    Instance in;
    in.mdp = random_tabular_mdp(S, A, 0.9, rng);
    in.beta = random_policy(S, A, rng, zero_prob);
    in.model = exact_model(in.mdp, in.beta, VectorXd::Constant(S, 1.0 / S));
    return in;
}

TabularMdp two_state_loop(double gamma) {
    // Both actions move to the other state.
    MatrixXd p(2, 2);
    p << 0, 1, 1, 0;
    return TabularMdp({p, p}, MatrixXd::Zero(2, 2), gamma, VectorXd::Constant(2, 0.5));
}

// 10^5 plain sweeps of Q <- [r + gamma E_{s', a' ~ pi} Q] beta / pi.
MatrixXd plain_iteration(const TabularMdp& mdp, const MatrixXd& r, const TabularPolicy& beta, const TabularPolicy& pi) {
    MatrixXd q = MatrixXd::Zero(r.rows(), r.cols());
    for (int it = 0; it < 100000; ++it) {
        const VectorXd v = (q.array() * pi.probs().array()).rowwise().sum();
        const MatrixXd y = r + mdp.discount() * mdp.expect_next(v);
        q = (y.array() * beta.probs().array() / pi.probs().array()).matrix();
    }
    return q;
}

SolverConfig tight() {
    SolverConfig c;
    c.tolerance = 1e-13;
    return c;
}

}  // namespace

TEST(GoalOccupancy, TinyDiscountIsOneStepHitProbability) {
    const Instance in = make(1, 4, 2);
    const TabularMdp mdp(std::vector<MatrixXd>{in.mdp.transition(0), in.mdp.transition(1)}, in.mdp.reward(), 1e-9,
                         in.mdp.initial_dist());
    const GoalConditionedQ q = gc_discounted_occupancy(mdp, in.beta);
    for (int g = 0; g < 4; ++g)
        for (int a = 0; a < 2; ++a)
            for (int s = 0; s < 4; ++s) EXPECT_NEAR(q(s, a, g), mdp.transition(s, a, g), 1e-8);
}

TEST(GoalOccupancy, TwoStateLoopByHand) {
    const double gamma = 0.5;
    const GoalConditionedQ q = gc_discounted_occupancy(two_state_loop(gamma), TabularPolicy::uniform(2, 2));
    // Goal 1 from state 0: hits at t = 0, 2, 4, ...; from 1: at t = 1, 3, ...
    const double near = (1 - gamma) / (1 - gamma * gamma);
    for (int a = 0; a < 2; ++a) {
        EXPECT_NEAR(q(0, a, 1), near, 1e-12);
        EXPECT_NEAR(q(1, a, 1), gamma * near, 1e-12);
        EXPECT_NEAR(q(1, a, 0), near, 1e-12);
    }
}

TEST(GoalOccupancy, NormalizesOverGoals) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Instance in = make(seed, 5, 3);
        const GoalConditionedQ q = gc_discounted_occupancy(in.mdp, in.beta);
        MatrixXd total = MatrixXd::Zero(5, 3);
        for (const MatrixXd& m : q.values) {
            total += m;
            EXPECT_GT(m.minCoeff(), 0.0);
        }
        EXPECT_LT((total.array() - 1.0).abs().maxCoeff(), 1e-9);
        EXPECT_NEAR(q.goal_dist.sum(), 1.0, 1e-15);
    }
}

TEST(GoalCriticReg, BehaviorPolicyGivesOccupancy) {
    const Instance in = make(2, 4, 3);
    const GoalConditionedQ oracle = gc_discounted_occupancy(in.mdp, in.beta);
    const GoalConditionedQ q = gc_critic_reg_fixed_point(in.model, GoalConditionedPolicy::constant(in.beta, 4), tight());
    for (int g = 0; g < 4; ++g) EXPECT_LT(sup_norm_diff(q.values[g], oracle.values[g]), 1e-9);
}

TEST(GoalCriticReg, IdentityAndRatio) {
    Rng rng(33);
    const Instance in = make(3, 5, 3, 0.3);
    GoalConditionedPolicy pi;
    for (int g = 0; g < 5; ++g) pi.per_goal.push_back(random_policy_within_support(in.beta, rng));
    const GoalConditionedQ oracle = gc_discounted_occupancy(in.mdp, in.beta);
    const GoalConditionedQ q = gc_critic_reg_fixed_point(in.model, pi, tight());
    const std::vector<MatrixXd> r = goal_rewards(in.mdp);
    for (int g = 0; g < 5; ++g) {
        const TabularPolicy& p = pi.per_goal[g];
        const VectorXd lhs = expected_log_q(p, q.values[g]);
        const VectorXd rhs = lambda_one_step_objective(p, in.beta, oracle.values[g], 0.0);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-6);
        for (int s = 0; s < 5; ++s)
            for (int a = 0; a < 3; ++a)
                if (p(s, a) > 0.0) EXPECT_NEAR(q(s, a, g), oracle(s, a, g) * in.beta(s, a) / p(s, a), 1e-9);
    }
    // Independent long plain iteration at a full-support goal policy.
    const Instance full = make(4, 3, 2);
    const TabularPolicy p = random_policy(3, 2, rng);
    const GoalConditionedQ fq = gc_critic_reg_fixed_point(full.model, GoalConditionedPolicy::constant(p, 3), tight());
    const std::vector<MatrixXd> fr = goal_rewards(full.mdp);
    for (int g = 0; g < 3; ++g) EXPECT_LT(sup_norm_diff(fq.values[g], plain_iteration(full.mdp, fr[g], full.beta, p)), 1e-6);
}

TEST(GoalCriticReg, OneHotPolicyScalesByBehavior) {
    Instance in = make(5, 3, 5);
    MatrixXd uniform = MatrixXd::Constant(3, 5, 0.2);
    in.model = exact_model(in.mdp, TabularPolicy(uniform), VectorXd::Constant(3, 1.0 / 3));
    const GoalConditionedQ oracle = gc_discounted_occupancy(in.mdp, TabularPolicy(uniform));
    const TabularPolicy hot = TabularPolicy::deterministic({1, 1, 1}, 5);
    const GoalConditionedQ q = gc_critic_reg_fixed_point(in.model, GoalConditionedPolicy::constant(hot, 3), tight());
    for (int g = 0; g < 3; ++g)
        for (int s = 0; s < 3; ++s) EXPECT_NEAR(q(s, 1, g), 0.2 * oracle(s, 1, g), 1e-9);
}

TEST(GoalCriticReg, SupportViolation) {
    const Instance in = make(6, 3, 3, 0.5);
    ASSERT_TRUE((in.beta.probs().array() == 0.0).any());
    EXPECT_THROW(gc_critic_reg_fixed_point(in.model, GoalConditionedPolicy::constant(TabularPolicy::uniform(3, 3), 3)),
                 PreconditionError);
}

TEST(Success, UniformExamples) {
    const Instance in = make(7, 4, 3);
    const QTable q = rce_discounted_success(in.mdp, in.beta, SuccessExamples(VectorXd::Constant(4, 0.25)));
    EXPECT_LT((q.values.array() - 0.25).abs().maxCoeff(), 1e-12);
}

TEST(Success, SingleState) {
    const TabularMdp mdp({MatrixXd::Ones(1, 1)}, MatrixXd::Zero(1, 1), 0.9, VectorXd::Ones(1));
    EXPECT_NEAR(rce_discounted_success(mdp, TabularPolicy::uniform(1, 1), SuccessExamples(VectorXd::Ones(1)))(0, 0),
                1.0, 1e-12);
}

TEST(Success, ThreeStateChainMatchesSweeps) {
    MatrixXd p = MatrixXd::Zero(3, 3);
    p(0, 1) = p(1, 2) = p(2, 2) = 1.0;
    const TabularMdp mdp({p}, MatrixXd::Zero(3, 1), 0.8, VectorXd::Unit(3, 0));
    VectorXd e(3);
    e << 0.1, 0.3, 0.6;
    const QTable q = rce_discounted_success(mdp, TabularPolicy::uniform(3, 1), SuccessExamples(e));
    // Hand solve: Q2 = 0.6, Q1 = 0.2*0.3 + 0.8*0.6, Q0 = 0.2*0.1 + 0.8*Q1.
    EXPECT_NEAR(q(2, 0), 0.6, 1e-8);
    EXPECT_NEAR(q(1, 0), 0.06 + 0.48, 1e-8);
    EXPECT_NEAR(q(0, 0), 0.02 + 0.8 * 0.54, 1e-8);
    EXPECT_THROW(SuccessExamples(VectorXd::Constant(3, 0.5)), PreconditionError);
}

TEST(SuccessCriticReg, IdentityAndScaling) {
    Rng rng(44);
    const Instance in = make(8, 5, 3, 0.3);
    VectorXd e(5);
    for (int s = 0; s < 5; ++s) e(s) = 0.1 + rng.uniform();
    const SuccessExamples ex(e / e.sum());
    const TabularPolicy pi = random_policy_within_support(in.beta, rng);
    const MatrixXd oracle = rce_discounted_success(in.mdp, in.beta, ex).values;
    const MatrixXd q = rce_critic_reg_fixed_point(in.model, pi, ex, tight()).values;
    EXPECT_LT((expected_log_q(pi, q) - lambda_one_step_objective(pi, in.beta, oracle, 0.0)).cwiseAbs().maxCoeff(),
              1e-6);
    EXPECT_LT(sup_norm_diff(rce_critic_reg_fixed_point(in.model, in.beta, ex, tight()).values.cwiseProduct(
                                (in.beta.probs().array() > 0).cast<double>().matrix()),
                            oracle.cwiseProduct((in.beta.probs().array() > 0).cast<double>().matrix())),
              1e-9);

    // pi puts 0.9 on one action with beta uniform over five: Q scaled by 0.2 / 0.9.
    Instance u = make(9, 3, 5);
    const TabularPolicy uni = TabularPolicy::uniform(3, 5);
    u.model = exact_model(u.mdp, uni, VectorXd::Constant(3, 1.0 / 3));
    MatrixXd peaked = MatrixXd::Constant(3, 5, 0.025);
    peaked.col(3).setConstant(0.9);
    const SuccessExamples ex3(VectorXd::Constant(3, 1.0 / 3));
    const MatrixXd q3 = rce_critic_reg_fixed_point(u.model, TabularPolicy(peaked), ex3, tight()).values;
    const MatrixXd o3 = rce_discounted_success(u.mdp, uni, ex3).values;
    for (int s = 0; s < 3; ++s) EXPECT_NEAR(q3(s, 3), o3(s, 3) * 2.0 / 9.0, 1e-9);

    const MatrixXd r = ((1.0 - 0.9) * ex3.density).replicate(1, 5);
    EXPECT_LT(sup_norm_diff(q3, plain_iteration(u.mdp, r, uni, TabularPolicy(peaked))), 1e-6);
}

TEST(GoalCsv, LongFormat) {
    GoalConditionedQ q;
    q.values = {MatrixXd::Constant(1, 2, 0.5)};
    q.goal_dist = VectorXd::Ones(1);
    std::ostringstream out;
    write_goal_q_csv(out, q);
    EXPECT_EQ(out.str(), "s,a,s_g,value\n0,0,0,0.5\n0,1,0,0.5\n");
}
