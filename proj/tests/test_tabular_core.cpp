#include "crl/dataset.hpp"
#include "crl/empirical.hpp"
#include "crl/gridworld.hpp"
#include "crl/mdp.hpp"
#include "crl/rng.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>
#include <tuple>

using namespace crl;

namespace {

GridworldSpec five_by_five() {
    GridworldSpec g;
    g.rewards[{4, 4}] = 1.0;
    g.goal_cells = {{4, 4}};
    return g;
}

const std::vector<Cell> kRightPath = {{0, 0}, {1, 0}, {1, 1}, {1, 2}, {1, 3},
                                      {1, 4}, {0, 4}, {0, 4}, {0, 4}, {0, 4}};

}  // namespace

TEST(Gridworld, NothingIsSelfTransition) {
    const TabularMdp mdp = build_gridworld(five_by_five(), 0.95);
    for (int s = 0; s < 25; ++s) EXPECT_EQ(mdp.next_state(s, int(Action::Nothing)), s);
}

TEST(Gridworld, WallsClampEveryOutwardMove) {
    const GridworldSpec g = five_by_five();
    const TabularMdp mdp = build_gridworld(g, 0.95);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(mdp.next_state(g.state_of({0, i}), int(Action::Up)), g.state_of({0, i}));
        EXPECT_EQ(mdp.next_state(g.state_of({4, i}), int(Action::Down)), g.state_of({4, i}));
        EXPECT_EQ(mdp.next_state(g.state_of({i, 0}), int(Action::Left)), g.state_of({i, 0}));
        EXPECT_EQ(mdp.next_state(g.state_of({i, 4}), int(Action::Right)), g.state_of({i, 4}));
    }
    EXPECT_EQ(mdp.next_state(0, int(Action::Left)), 0);
}

TEST(Gridworld, RewardIsPaidOnEnteringACell) {
    const GridworldSpec g = five_by_five();
    const TabularMdp mdp = build_gridworld(g, 0.95);
    EXPECT_DOUBLE_EQ(mdp.reward()(g.state_of({3, 4}), int(Action::Down)), 1.0);
    EXPECT_DOUBLE_EQ(mdp.reward()(g.state_of({4, 3}), int(Action::Right)), 1.0);
    // The goal repeats: staying on it keeps paying.
    EXPECT_DOUBLE_EQ(mdp.reward()(g.state_of({4, 4}), int(Action::Nothing)), 1.0);
    EXPECT_DOUBLE_EQ(mdp.reward()(0, int(Action::Right)), 0.0);
    EXPECT_DOUBLE_EQ(mdp.discount(), 0.95);
    EXPECT_TRUE(mdp.deterministic());
    EXPECT_EQ(mdp.initial_dist()(0), 1.0);
}

TEST(Gridworld, RejectsBadInputs) {
    GridworldSpec g;
    g.width = 0;
    EXPECT_THROW(build_gridworld(g, 0.95), ConfigError);
    EXPECT_THROW(build_gridworld(five_by_five(), 1.0), ConfigError);
    EXPECT_THROW(build_gridworld(five_by_five(), 0.0), ConfigError);
    GridworldSpec off = five_by_five();
    off.rewards[{7, 7}] = 1.0;
    EXPECT_THROW(build_gridworld(off, 0.9), ConfigError);
}

TEST(Mdp, RowsAreNormalized) {
    Rng rng(3);
    const TabularMdp mdp = random_tabular_mdp(6, 4, 0.9, rng);
    for (int a = 0; a < 4; ++a) {
        EXPECT_LT((mdp.transition(a).rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
        EXPECT_GE(mdp.transition(a).minCoeff(), 0.0);
    }
    EXPECT_NEAR(mdp.initial_dist().sum(), 1.0, 1e-12);
    EXPECT_FALSE(mdp.deterministic());
}

TEST(Mdp, RejectsInvalidTransitions) {
    std::vector<MatrixXd> p{MatrixXd::Constant(2, 2, 0.6)};
    EXPECT_THROW(TabularMdp(p, MatrixXd::Zero(2, 1), 0.9, VectorXd::Constant(2, 0.5)), PreconditionError);
    std::vector<MatrixXd> q{MatrixXd::Identity(2, 2)};
    EXPECT_THROW(TabularMdp(q, MatrixXd::Zero(2, 1), 0.9, VectorXd::Constant(2, 0.3)), PreconditionError);
}

TEST(Policy, RowsMustSumToOne) {
    MatrixXd p(1, 2);
    p << 0.5, 0.6;
    EXPECT_THROW(TabularPolicy{p}, PreconditionError);
    Rng rng(1);
    const TabularPolicy pi = random_policy(7, 3, rng, 0.4);
    EXPECT_LT((pi.probs().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
    EXPECT_GE(pi.probs().minCoeff(), 0.0);
    const TabularPolicy sub = random_policy_within_support(pi, rng);
    for (int s = 0; s < 7; ++s)
        for (int a = 0; a < 3; ++a)
            if (pi(s, a) == 0.0) EXPECT_EQ(sub(s, a), 0.0);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    Rng a = Rng::stream(5, 0), b = Rng::stream(5, 0), c = Rng::stream(5, 1);
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    Rng u(9);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
        const int k = u.uniform_int(5);
        EXPECT_GE(k, 0);
        EXPECT_LT(k, 5);
    }
}

TEST(Rng, FirstDrawsArePinned) {
    // std::mt19937_64 output is fixed by the standard, so these never change.
    std::mt19937_64 raw(splitmix64(42));
    Rng r(42);
    EXPECT_EQ(r.next_u64(), raw());
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(Sampling, SizesMatchPresets) {
    const TabularMdp mdp = build_gridworld(five_by_five(), 0.95);
    const TabularPolicy uni = TabularPolicy::uniform(25, 5);
    const TransitionDataset left = sample_trajectories(mdp, uni, 20, 50, 0);
    EXPECT_EQ(left.size(), 1000u);
    EXPECT_EQ(left.trajectories.size(), 20u);
    const TransitionDataset fig3 = sample_trajectories(mdp, uni, 10, 100, 0);
    EXPECT_EQ(fig3.size(), 1000u);
    for (const auto& t : left.transitions) {
        EXPECT_EQ(mdp.next_state(t.s, t.a), t.s_next);
        EXPECT_DOUBLE_EQ(mdp.reward()(t.s, t.a), t.r);
    }
    EXPECT_EQ(left.transitions.front().s, 0);
}

TEST(Sampling, SeedReproducibility) {
    const TabularMdp mdp = build_gridworld(five_by_five(), 0.95);
    const TabularPolicy uni = TabularPolicy::uniform(25, 5);
    EXPECT_EQ(sample_trajectories(mdp, uni, 3, 20, 7), sample_trajectories(mdp, uni, 3, 20, 7));
    EXPECT_NE(sample_trajectories(mdp, uni, 3, 20, 7).transitions,
              sample_trajectories(mdp, uni, 3, 20, 8).transitions);
    // No randomness left: deterministic MDP, deterministic policy, fixed start.
    const TabularPolicy right = TabularPolicy::deterministic(std::vector<int>(25, int(Action::Right)), 5);
    EXPECT_EQ(sample_trajectories(mdp, right, 2, 10, 1).transitions,
              sample_trajectories(mdp, right, 2, 10, 99).transitions);
}

TEST(Sampling, RejectsMismatchedPolicy) {
    const TabularMdp mdp = build_gridworld(five_by_five(), 0.95);
    EXPECT_THROW(sample_trajectories(mdp, TabularPolicy::uniform(4, 5), 1, 5, 0), PreconditionError);
    EXPECT_THROW(sample_trajectories(mdp, TabularPolicy::uniform(25, 5), 1, 0, 0), PreconditionError);
}

TEST(FixedDataset, ExpertPath) {
    const TransitionDataset d = fixed_dataset(kRightPath, five_by_five());
    ASSERT_EQ(d.size(), 9u);
    int self_loops = 0;
    for (const auto& t : d.transitions) self_loops += t.a == int(Action::Nothing);
    EXPECT_EQ(self_loops, 3);
    EXPECT_EQ(d.transitions[0].a, int(Action::Down));
    EXPECT_EQ(d.transitions[5].a, int(Action::Up));
}

TEST(FixedDataset, ShortPathsAndJumps) {
    const TransitionDataset one = fixed_dataset({{2, 2}, {2, 3}}, five_by_five());
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.transitions[0].a, int(Action::Right));
    const TransitionDataset stay = fixed_dataset({{2, 2}, {2, 2}}, five_by_five());
    EXPECT_EQ(stay.transitions[0].a, int(Action::Nothing));
    EXPECT_THROW(fixed_dataset({{0, 0}, {2, 2}}, five_by_five()), PreconditionError);
}

TEST(DatasetCsv, RoundTrip) {
    const TabularMdp mdp = build_gridworld(five_by_five(), 0.95);
    const TransitionDataset d = sample_trajectories(mdp, TabularPolicy::uniform(25, 5), 4, 12, 3);
    std::stringstream ss;
    write_dataset_csv(ss, d);
    EXPECT_EQ(ss.str().substr(0, 24), "traj_id,t,s,a,r,s_next\n0");
    TransitionDataset back = read_dataset_csv(ss);
    back.seed = d.seed;
    EXPECT_EQ(back, d);
}

TEST(EmpiricalModel, SingleTransition) {
    TransitionDataset d;
    d.transitions = {{0, 0, 0, 0, 1.0, 1}};
    d.trajectories = {{0, 1}};
    const EmpiricalModel m = estimate_empirical_model(d, 2, 2, 0.9);
    EXPECT_DOUBLE_EQ(m.state_action_dist()(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(m.behavior()(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(m.behavior()(1, 0), 0.5);  // unvisited state: uniform
    EXPECT_TRUE(m.supported(0, 0));
    EXPECT_FALSE(m.supported(0, 1));
    EXPECT_FALSE(m.visited(1));
    EXPECT_FALSE(m.closed());
}

TEST(EmpiricalModel, TwoActionsSplitEvenly) {
    TransitionDataset d;
    d.transitions = {{0, 0, 0, 0, 0.0, 0}, {0, 1, 0, 1, 0.0, 0}};
    d.trajectories = {{0, 2}};
    const EmpiricalModel m = estimate_empirical_model(d, 1, 2, 0.9);
    EXPECT_DOUBLE_EQ(m.behavior()(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(m.behavior()(0, 1), 0.5);
    EXPECT_TRUE(m.closed());
}

TEST(EmpiricalModel, EmptyDatasetIsAnError) {
    EXPECT_THROW(estimate_empirical_model(TransitionDataset{}, 2, 2, 0.9), PreconditionError);
}

TEST(EmpiricalModel, BehaviorMatchesIndependentTally) {
    const TabularMdp mdp = build_gridworld(five_by_five(), 0.95);
    const TabularPolicy uni = TabularPolicy::uniform(25, 5);
    const TransitionDataset d = sample_trajectories(mdp, uni, 20, 50, 0);
    const EmpiricalModel m = estimate_empirical_model(d, 25, 5, 0.95);

    std::map<std::pair<int, int>, int> sa;
    std::map<int, int> st;
    std::map<std::tuple<int, int, int>, int> sas;
    for (const auto& t : d.transitions) {
        ++sa[{t.s, t.a}];
        ++st[t.s];
        ++sas[{t.s, t.a, t.s_next}];
    }
    double total = 0.0;
    for (int s = 0; s < 25; ++s) {
        for (int a = 0; a < 5; ++a) {
            const int n = sa.count({s, a}) ? sa[{s, a}] : 0;
            EXPECT_EQ(m.supported(s, a), n > 0);
            EXPECT_NEAR(m.state_action_dist()(s, a), n / 1000.0, 1e-15);
            if (st.count(s)) EXPECT_NEAR(m.behavior()(s, a), double(n) / st[s], 1e-15);
            total += m.state_action_dist()(s, a);
            for (int s2 = 0; s2 < 25; ++s2) {
                const int c = sas.count({s, a, s2}) ? sas[{s, a, s2}] : 0;
                EXPECT_DOUBLE_EQ(m.counts()[a](s, s2), c);
            }
        }
        EXPECT_NEAR(m.behavior().probs().row(s).sum(), 1.0, 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    // Support only where the true MDP permits, and uniform behavior is near
    // uniform at interior states.
    for (int a = 0; a < 5; ++a)
        for (int s = 0; s < 25; ++s)
            for (int s2 = 0; s2 < 25; ++s2)
                if (m.counts()[a](s, s2) > 0) EXPECT_EQ(mdp.next_state(s, a), s2);
    EXPECT_LT((m.behavior().probs().row(12).array() - 0.2).abs().maxCoeff(), 0.2);
}

TEST(EmpiricalModel, ExactModelAndToMdp) {
    Rng rng(4);
    const TabularMdp mdp = random_tabular_mdp(4, 3, 0.9, rng);
    MatrixXd b = MatrixXd::Constant(4, 3, 0.5);
    b.col(2).setZero();
    const EmpiricalModel m = exact_model(mdp, TabularPolicy(b), VectorXd::Constant(4, 0.25));
    EXPECT_TRUE(m.closed());
    EXPECT_FALSE(m.supported(0, 2));
    EXPECT_DOUBLE_EQ(m.state_action_dist()(1, 1), 0.125);
    const TabularMdp back = m.to_mdp(-3.0);
    EXPECT_DOUBLE_EQ(back.reward()(0, 2), -3.0);
    EXPECT_DOUBLE_EQ(back.transition(0, 2, 0), 1.0);
    EXPECT_NEAR(sup_norm_diff(back.transition(1), mdp.transition(1)), 0.0, 1e-15);
    const EmpiricalModel shifted = m.with_reward_offset(2.0);
    EXPECT_DOUBLE_EQ(shifted.reward()(0, 0), m.reward()(0, 0) + 2.0);
    EXPECT_DOUBLE_EQ(shifted.reward()(0, 2), 0.0);
}
