#include "crl/config.hpp"
#include "crl/experiments.hpp"
#include "crl/metrics.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace crl;

namespace {

ExperimentConfig preset(const std::string& name) { return load_preset(preset_dir() + "/" + name + ".cfg"); }

const Assertion& find(const ExperimentReport& r, const std::string& name) {
    for (const auto& a : r.assertions)
        if (a.name == name) return a;
    throw std::runtime_error("no assertion " + name);
}

TabularPolicy from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    MatrixXd m(rows.size(), rows.begin()->size());
    int i = 0;
    for (const auto& r : rows) {
        int j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return TabularPolicy(m);
}

}  // namespace

TEST(Similarity, SymmetricBoundedAndExact) {
    const TabularPolicy a = from_rows({{0.7, 0.3}, {0.2, 0.8}, {0.5, 0.5}});
    const TabularPolicy b = from_rows({{0.6, 0.4}, {0.9, 0.1}, {0.5, 0.5}});
    const SimilarityReport ab = argmax_similarity(a, b), ba = argmax_similarity(b, a);
    EXPECT_DOUBLE_EQ(ab.score, ba.score);
    EXPECT_DOUBLE_EQ(ab.score, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(ab.chance_level, 0.5);
    EXPECT_EQ(ab.states, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(ab.per_state_match, (std::vector<bool>{true, false, true}));
    EXPECT_DOUBLE_EQ(argmax_similarity(a, a).score, 1.0);
    BoolVector mask(3);
    mask << false, true, false;
    EXPECT_DOUBLE_EQ(argmax_similarity(a, b, mask).score, 0.0);
    EXPECT_THROW(argmax_similarity(a, b, BoolVector::Constant(3, false)), PreconditionError);
}

TEST(Similarity, TiesResolveToLowestIndex) {
    const TabularPolicy a = from_rows({{0.5, 0.5 - 1e-12}});
    const TabularPolicy b = from_rows({{0.4, 0.6}});
    EXPECT_EQ(a.argmax()[0], 0);
    EXPECT_DOUBLE_EQ(argmax_similarity(a, b).score, 0.0);
}

TEST(R2, IdentityAndConstantTarget) {
    const TabularPolicy a = from_rows({{0.7, 0.3}, {0.2, 0.8}});
    const R2Report r = action_prob_r2(a, a, BoolVector::Constant(2, true));
    EXPECT_DOUBLE_EQ(r.r_squared, 1.0);
    EXPECT_EQ(r.num_points, 4);
    const TabularPolicy flat = TabularPolicy::uniform(2, 2);
    EXPECT_THROW(action_prob_r2(a, flat, BoolVector::Constant(2, true)), PreconditionError);
    // 1 - SS_res / SS_tot by hand.
    const TabularPolicy b = from_rows({{0.6, 0.4}, {0.3, 0.7}});
    EXPECT_NEAR(action_prob_r2(b, a, BoolVector::Constant(2, true)).r_squared, 1.0 - 0.04 / 0.26, 1e-12);
}

TEST(Deviating, StatesWithSuboptimalGreedyAction) {
    MatrixXd q(3, 2);
    q << 1, 2, 3, 1, 0, 0;
    const TabularPolicy pi = from_rows({{0.9, 0.1}, {0.9, 0.1}, {0.1, 0.9}});
    const BoolVector dev = deviating_states(q, pi, BoolVector::Constant(3, true));
    EXPECT_TRUE(dev(0));
    EXPECT_FALSE(dev(1));
    EXPECT_FALSE(dev(2));  // tied Q: any action is optimal
}

TEST(RandomGridworld, DistinctPlacementsAndDeterminism) {
    const ExperimentConfig c = preset("fig3");
    GridworldSpec base = c.grid;
    base.rewards.clear();
    std::set<std::pair<Cell, Cell>> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const RandomGridworld g = generate_random_gridworld({base, 1.0, -10.0, seed}, 0.95);
        EXPECT_NE(g.high, g.low);
        EXPECT_DOUBLE_EQ(g.spec.reward_at(g.high), 1.0);
        EXPECT_DOUBLE_EQ(g.spec.reward_at(g.low), -10.0);
        seen.insert({g.high, g.low});
    }
    EXPECT_EQ(seen.size(), 100u);
    const RandomGridworld a = generate_random_gridworld({base, 1.0, -10.0, 7}, 0.95);
    const RandomGridworld b = generate_random_gridworld({base, 1.0, -10.0, 7}, 0.95);
    EXPECT_EQ(a.mdp.reward(), b.mdp.reward());
    const RandomMdpSpec defaults;
    EXPECT_EQ(defaults.high_reward_value, 1.0);
    EXPECT_EQ(defaults.low_reward_value, -10.0);
}

TEST(MovesToward, RoutesAroundTheObstacle) {
    GridworldSpec g;
    // (1,2) to (1,4) with (1,3) blocked: going right is not shorter.
    EXPECT_FALSE(moves_toward(g, {1, 2}, int(Action::Right), {1, 4}, {1, 3}));
    EXPECT_TRUE(moves_toward(g, {1, 2}, int(Action::Up), {1, 4}, {1, 3}));
    EXPECT_FALSE(moves_toward(g, {1, 2}, int(Action::Left), {1, 4}, {1, 3}));
    EXPECT_FALSE(moves_toward(g, {1, 2}, int(Action::Nothing), {1, 4}, {1, 3}));
}

TEST(Fig2, AllPresetsAgree) {
    for (const std::string name : {"fig2-left", "fig2-center", "fig2-right"}) {
        const ExperimentReport r = run_fig2(preset(name), 0);
        EXPECT_TRUE(r.passed()) << name;
        EXPECT_GE(r.metrics["r_squared"].get<double>(), 0.999) << name;
        EXPECT_DOUBLE_EQ(r.metrics["argmax_agreement"].get<double>(), 1.0) << name;
        EXPECT_LT(r.runtime_seconds, 120.0);
    }
    const ExperimentReport right = run_fig2(preset("fig2-right"), 0);
    EXPECT_TRUE(find(right, "one_step_traces_path").passed);
    EXPECT_TRUE(find(right, "unregularized_leaves_path").passed);
    EXPECT_TRUE(find(run_fig2(preset("fig2-center"), 0), "unregularized_differs_somewhere").passed);
}

TEST(Fig3, BlueBox) {
    const ExperimentReport r = run_fig3(preset("fig3"), 0);
    for (const std::string n : {"value_iteration_toward_high", "q_learning_toward_high", "one_step_away_from_high",
                                "cql_high_matches_one_step", "cql_low_matches_q_learning"})
        EXPECT_TRUE(find(r, n).passed) << n;
    ASSERT_NE(r.find_table("blue_box.csv"), nullptr);
    EXPECT_EQ(r.figures.size(), 5u);
}

TEST(Fig3, MissingBlueStateIsAConfigError) {
    ExperimentConfig c = preset("fig3");
    c.num_traj = 1;
    c.horizon = 1;
    c.blue_box = {{4, 4}};
    EXPECT_THROW(run_fig3(c, 0), ConfigError);
}

TEST(Fig4, HistogramAndCounts) {
    const ExperimentReport r = run_fig4(preset("fig3"), 0);
    EXPECT_TRUE(find(r, "fraction_above_chance").passed);
    EXPECT_EQ(r.metrics["scored"].get<int>() + r.metrics["excluded_no_deviating_states"].get<int>(), 100);
    const Artifact* h = r.find_table("histogram.csv");
    ASSERT_NE(h, nullptr);
    EXPECT_NE(h->content.find(",0.2\n"), std::string::npos);
    EXPECT_EQ(r.find_table("similarity_per_mdp.csv")->content, run_fig4(preset("fig3"), 0).find_table("similarity_per_mdp.csv")->content);
}

TEST(Fig5, ModeratePeak) {
    const ExperimentReport r = run_fig5(preset("fig3"), 0);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.metrics["comparisons_per_point"].get<int>(), 25);
    EXPECT_EQ(r.metrics["curve"].size(), 5u);
    ExperimentConfig c = preset("fig3");
    c.lambda_grid = {0.1, 1.0};
    EXPECT_THROW(run_fig5(c, 0), ConfigError);
}

TEST(Fig7, PeakAtOne) {
    const ExperimentReport r = run_fig7(preset("fig2-left"), 0);
    EXPECT_TRUE(find(r, "maximized_at_one").passed);
    EXPECT_TRUE(find(r, "identity_at_one").passed);
    EXPECT_TRUE(find(r, "unregularized_below_one").passed);
}

TEST(FigCac, SixMethods) {
    const ExperimentReport r = run_fig_cac(preset("fig3"), 0);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.figures.size(), 6u);
    EXPECT_DOUBLE_EQ(r.metrics["reward_offset"].get<double>(), 11.0);
}

TEST(Experiments, ByteIdenticalReruns) {
    const ExperimentConfig c = preset("fig2-left");
    const ExperimentReport a = run_fig2(c, 3), b = run_fig2(c, 3);
    ASSERT_EQ(a.tables.size(), b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) EXPECT_EQ(a.tables[i].content, b.tables[i].content);
    for (std::size_t i = 0; i < a.figures.size(); ++i) EXPECT_EQ(a.figures[i].content, b.figures[i].content);
    EXPECT_EQ(a.config_hash, b.config_hash);
    const ExperimentReport other = run_fig2(c, 4);
    EXPECT_NE(a.find_table("policies.csv")->content, other.find_table("policies.csv")->content);
}

TEST(Experiments, TheoremSuite) {
    const ExperimentReport r = verify_theorems(preset("fig2-left"), 0);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.assertions.size(), 9u);
    for (const char* k : {"fixed_point_max_dev", "objective_max_dev", "lambda_mixture_max_dev", "goal_conditioned_max_dev",
                          "example_based_max_dev"})
        EXPECT_LT(r.metrics[k].get<double>(), 1e-6) << k;
    EXPECT_EQ(r.find_table("theorems.csv")->content,
              verify_theorems(preset("fig2-left"), 0).find_table("theorems.csv")->content);
}
