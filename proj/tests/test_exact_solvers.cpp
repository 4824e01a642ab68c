#include "crl/empirical.hpp"
#include "crl/gridworld.hpp"
#include "crl/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace crl;

namespace {

TabularMdp one_state(double r, double gamma) {
    return TabularMdp({MatrixXd::Ones(1, 1)}, MatrixXd::Constant(1, 1, r), gamma, VectorXd::Ones(1));
}

GridworldSpec left_grid() {
    GridworldSpec g;
    g.rewards[{4, 4}] = 1.0;
    return g;
}

// Long fixed-step evaluation, independent of the linear solve.
MatrixXd iterate_evaluation(const TabularMdp& mdp, const TabularPolicy& pi, int steps) {
    MatrixXd q = MatrixXd::Zero(mdp.num_states(), mdp.num_actions());
    for (int i = 0; i < steps; ++i) {
        const VectorXd v = (q.array() * pi.probs().array()).rowwise().sum();
        q = mdp.reward() + mdp.discount() * mdp.expect_next(v);
    }
    return q;
}

// Euclidean projection onto the probability simplex.
VectorXd project_simplex(VectorXd v) {
    VectorXd u = v;
    std::sort(u.data(), u.data() + u.size(), std::greater<>());
    double css = 0.0, theta = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        css += u(i);
        const double t = (css - 1.0) / double(i + 1);
        if (u(i) - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0);
}

// max_pi sum pi q - lambda KL(pi || beta) by projected gradient ascent.
VectorXd simplex_argmax_kl(const VectorXd& q, const VectorXd& beta, double lambda) {
    VectorXd pi = beta;
    for (int it = 0; it < 200000; ++it) {
        VectorXd g = q;
        for (Eigen::Index a = 0; a < q.size(); ++a) g(a) -= lambda * (std::log(std::max(pi(a), 1e-300) / beta(a)) + 1.0);
        pi = project_simplex(pi + 1e-3 * g).cwiseMax(1e-12);
        pi /= pi.sum();
    }
    return pi;
}

EmpiricalModel full_model(const TabularMdp& mdp) {
    const int S = mdp.num_states();
    return exact_model(mdp, TabularPolicy::uniform(S, mdp.num_actions()), VectorXd::Constant(S, 1.0 / S));
}

}  // namespace

TEST(PolicyEvaluation, GeometricSeries) {
    const QTable q = policy_evaluation_exact(one_state(1.0, 0.95), TabularPolicy::uniform(1, 1));
    EXPECT_NEAR(q(0, 0), 20.0, 1e-10);
    EXPECT_NEAR(expected_return(one_state(1.0, 0.95), TabularPolicy::uniform(1, 1)), 20.0, 1e-10);
}

TEST(PolicyEvaluation, TwoStateChain) {
    MatrixXd p = MatrixXd::Zero(2, 2);
    p(0, 1) = 1.0;
    p(1, 1) = 1.0;
    MatrixXd r(2, 1);
    r << 0.0, 1.0;
    const TabularMdp mdp({p}, r, 0.5, VectorXd::Unit(2, 0));
    const QTable q = policy_evaluation_exact(mdp, TabularPolicy::uniform(2, 1));
    EXPECT_NEAR(q(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(q(1, 0), 2.0, 1e-12);
}

TEST(PolicyEvaluation, MatchesTenThousandSweeps) {
    const TabularMdp mdp = build_gridworld(left_grid(), 0.95);
    const TabularPolicy uni = TabularPolicy::uniform(25, 5);
    EXPECT_LT(sup_norm_diff(policy_evaluation_exact(mdp, uni).values, iterate_evaluation(mdp, uni, 10000)), 1e-8);
}

TEST(PolicyEvaluation, PositiveRewardsGivePositiveQ) {
    Rng rng(11);
    for (int i = 0; i < 10; ++i) {
        const TabularMdp mdp = random_tabular_mdp(2 + i % 7, 2 + i % 4, 0.9, rng);
        const TabularPolicy pi = random_policy(mdp.num_states(), mdp.num_actions(), rng);
        EXPECT_GT(policy_evaluation_exact(mdp, pi).values.minCoeff(), 0.0);
    }
}

TEST(ValueIteration, ZeroRewardsTieToUp) {
    GridworldSpec g;
    const SolverResult vi = value_iteration(build_gridworld(g, 0.95), {});
    EXPECT_EQ(vi.q.values.cwiseAbs().maxCoeff(), 0.0);
    for (int a : vi.policy.argmax()) EXPECT_EQ(a, int(Action::Up));
}

TEST(ValueIteration, GreedyPolicyIsSelfConsistent) {
    const TabularMdp mdp = build_gridworld(left_grid(), 0.95);
    const SolverResult vi = value_iteration(mdp, {});
    EXPECT_LT(sup_norm_diff(vi.q.values, policy_evaluation_exact(mdp, vi.policy).values), 1e-6);
    // Q*(s, a) = gamma^(d - 1) / (1 - gamma) with d steps to the goal after a.
    const GridworldSpec g = left_grid();
    for (int s = 0; s < 25; ++s) {
        const Cell c = g.cell_of(s);
        const int d = manhattan(c, {4, 4});
        const double v = std::pow(0.95, std::max(d - 1, 0)) / 0.05;
        EXPECT_NEAR(vi.q.values.row(s).maxCoeff(), v, 1e-5) << s;
    }
}

TEST(ValueIteration, BudgetExhaustion) {
    SolverConfig c;
    c.max_iters = 3;
    EXPECT_THROW(value_iteration(build_gridworld(left_grid(), 0.95), c), NonConvergenceError);
    c = {};
    c.tolerance = 0.0;
    EXPECT_THROW(value_iteration(build_gridworld(left_grid(), 0.95), c), ConfigError);
}

TEST(QLearning, FullCoverageEqualsValueIteration) {
    const TabularMdp mdp = build_gridworld(left_grid(), 0.95);
    SolverConfig c;
    c.tolerance = 1e-11;
    const SolverResult ql = q_learning_from_dataset(full_model(mdp), c);
    EXPECT_LT(sup_norm_diff(ql.q.values, value_iteration(mdp, c).q.values), 1e-8);
}

TEST(QLearning, UnsupportedRowsSitAtTheFloor) {
    TransitionDataset d;
    d.transitions = {{0, 0, 0, 3, 1.0, 1}, {0, 1, 1, 1, -1.0, 0}};
    d.trajectories = {{0, 2}};
    const EmpiricalModel m = estimate_empirical_model(d, 3, 5, 0.9);
    const double floor = unsupported_floor(m);
    EXPECT_DOUBLE_EQ(floor, -1.0 / 0.1 - 1.0);
    const SolverResult ql = q_learning_from_dataset(m, {});
    for (int a = 0; a < 5; ++a) EXPECT_DOUBLE_EQ(ql.q(2, a), floor);
    EXPECT_EQ(ql.q.argmax()[0], 3);
    EXPECT_DOUBLE_EQ(ql.q(0, 0), floor);
}

TEST(OneStep, HugeLambdaReturnsBehavior) {
    Rng rng(5);
    const TabularMdp mdp = random_tabular_mdp(4, 3, 0.9, rng);
    const TabularPolicy beta = random_policy(4, 3, rng);
    const EmpiricalModel m = exact_model(mdp, beta, VectorXd::Constant(4, 0.25));
    SolverConfig c;
    c.onestep_lambda = 1e6;
    const SolverResult r = one_step_rl(m, c);
    EXPECT_LT(sup_norm_diff(r.policy.probs(), m.behavior().probs()), 1e-6);
    c.onestep_lambda = 0.0;
    EXPECT_THROW(one_step_rl(m, c), ConfigError);
}

TEST(OneStep, ClosedFormMatchesSimplexAscent) {
    Rng rng(8);
    const TabularMdp mdp = random_tabular_mdp(3, 3, 0.9, rng);
    const TabularPolicy beta = random_policy(3, 3, rng);
    const EmpiricalModel m = exact_model(mdp, beta, VectorXd::Constant(3, 1.0 / 3));
    const SolverResult r = one_step_rl(m, {});
    for (int s = 0; s < 3; ++s) {
        const VectorXd numeric = simplex_argmax_kl(r.q.values.row(s).transpose(), beta.probs().row(s).transpose(), 1.0);
        EXPECT_LT((numeric - r.policy.probs().row(s).transpose()).cwiseAbs().maxCoeff(), 1e-5) << s;
    }
}

TEST(OneStep, CriticIsExactBehaviorValue) {
    Rng rng(13);
    const TabularMdp mdp = build_gridworld(left_grid(), 0.95);
    const TransitionDataset d = sample_trajectories(mdp, TabularPolicy::uniform(25, 5), 20, 50, 0);
    const EmpiricalModel m = estimate_empirical_model(d, 25, 5, 0.95);
    const SolverResult r = one_step_rl(m, {});
    const MatrixXd oracle = policy_evaluation_exact(m.to_mdp(unsupported_floor(m) * 0.05), m.behavior()).values;
    EXPECT_LT(m.support().select(r.q.values - oracle, 0.0).cwiseAbs().maxCoeff(), 1e-6);
    const SolverResult sarsa = sarsa_evaluation(m, {});
    EXPECT_LT(sup_norm_diff(sarsa.q.values, r.q.values), 1e-12);
}

TEST(OneStep, UnderestimatesImprovedPolicy) {
    Rng rng(21);
    for (int i = 0; i < 10; ++i) {
        const TabularMdp mdp = random_tabular_mdp(3 + i % 5, 2 + i % 3, 0.9, rng);
        const TabularPolicy beta = random_policy(mdp.num_states(), mdp.num_actions(), rng);
        const MatrixXd q_beta = policy_evaluation_exact(mdp, beta).values;
        for (double lambda : {0.1, 1.0, 10.0}) {
            const TabularPolicy pi = reverse_kl_improvement(beta, q_beta, lambda);
            const VectorXd under = (pi.probs().array() * q_beta.array()).rowwise().sum();
            const VectorXd truth = policy_evaluation_exact(mdp, pi).state_values(pi);
            EXPECT_LE((under - truth).maxCoeff(), 1e-10);
        }
    }
}

TEST(RewardShift, ArgmaxInvariant) {
    GridworldSpec g;
    g.rewards[{1, 4}] = 1.0;
    g.rewards[{1, 3}] = -10.0;
    const TabularMdp mdp = build_gridworld(g, 0.95);
    const TabularMdp shifted = mdp.with_rewards(mdp.reward().array() + 11.0);
    const SolverResult a = value_iteration(mdp, {}), b = value_iteration(shifted, {});
    EXPECT_LT((b.q.values.array() - a.q.values.array() - 11.0 / 0.05).abs().maxCoeff(), 1e-6);
    EXPECT_EQ(a.policy.argmax(), b.policy.argmax());

    const TransitionDataset d = sample_trajectories(mdp, TabularPolicy::uniform(25, 5), 10, 100, 37);
    const EmpiricalModel m = estimate_empirical_model(d, 25, 5, 0.95);
    const EmpiricalModel ms = m.with_reward_offset(11.0);
    const SolverResult o1 = one_step_rl(m, {}), o2 = one_step_rl(ms, {});
    EXPECT_EQ(o1.policy.argmax(1e-9), o2.policy.argmax(1e-9));
    EXPECT_LT(m.support().select(o2.q.values.array() - o1.q.values.array() - 11.0 / 0.05, 0.0).abs().maxCoeff(), 1e-6);
}

TEST(Cql, ZeroLambdaIsSoftValueIteration) {
    const TabularMdp mdp = build_gridworld(left_grid(), 0.95);
    const EmpiricalModel m = full_model(mdp);
    SolverConfig c;
    c.cql_lambda = 0.0;
    c.tolerance = 1e-11;
    const SolverResult r = cql_soft_value_iteration(m, c);
    MatrixXd q = MatrixXd::Zero(25, 5);
    for (int it = 0; it < 2000; ++it) {
        VectorXd v(25);
        for (int s = 0; s < 25; ++s) {
            const double mx = q.row(s).maxCoeff();
            v(s) = mx + std::log((q.row(s).array() - mx).exp().sum());
        }
        q = mdp.reward() + 0.95 * mdp.expect_next(v);
    }
    EXPECT_LT(sup_norm_diff(r.q.values, q), 1e-8);
    // Residuals contract after a short burn-in.
    for (int i = 10; i + 1 < r.trace.iterations(); ++i)
        EXPECT_LE(r.trace.residuals[i + 1], r.trace.residuals[i] * (1.0 + 1e-9));
    EXPECT_LT(sup_norm_diff(r.policy.probs(), TabularPolicy::softmax(r.q.values).probs()), 1e-12);
}

TEST(Cql, LowTemperatureRecoversValueIterationArgmax) {
    GridworldSpec g;
    g.rewards[{1, 4}] = 1.0;
    g.rewards[{1, 3}] = -10.0;
    const TabularMdp mdp = build_gridworld(g, 0.95);
    SolverConfig c;
    c.cql_lambda = 0.0;
    c.temperature = 1e-3;
    const SolverResult r = cql_soft_value_iteration(full_model(mdp), c);
    const auto vi = value_iteration(mdp, {}).q;
    const auto g_cql = r.q.argmax(1e-6);
    for (int s = 0; s < 25; ++s) EXPECT_NEAR(vi(s, g_cql[s]), vi.values.row(s).maxCoeff(), 1e-6) << s;
}

TEST(Cql, PenaltyFixedPointHolds) {
    Rng rng(2);
    const TabularMdp mdp = random_tabular_mdp(4, 3, 0.9, rng);
    MatrixXd b = random_policy(4, 3, rng).probs();
    b(0, 2) = 0.0;
    b.row(0) /= b.row(0).sum();
    const EmpiricalModel m = exact_model(mdp, TabularPolicy(b), VectorXd::Constant(4, 0.25));
    SolverConfig c;
    c.cql_lambda = 10.0;
    c.tolerance = 1e-12;
    const SolverResult r = cql_soft_value_iteration(m, c);
    VectorXd v(4);
    for (int s = 0; s < 4; ++s) {
        const double mx = r.q.values.row(s).maxCoeff();
        v(s) = mx + std::log((r.q.values.row(s).array() - mx).exp().sum());
    }
    const MatrixXd y = m.reward() + 0.9 * m.expect_next(v);
    const MatrixXd mu = TabularPolicy::softmax(r.q.values).probs();
    for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 3; ++a) {
            if (!m.supported(s, a)) {
                EXPECT_DOUBLE_EQ(r.q(s, a), unsupported_floor(m));
                continue;
            }
            EXPECT_NEAR(r.q(s, a), y(s, a) - 10.0 * (mu(s, a) / b(s, a) - 1.0), 1e-8);
        }
}

TEST(SolverConfig, Validation) {
    SolverConfig c;
    c.temperature = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.cql_lambda = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}
