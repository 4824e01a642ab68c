#include "crl/experiments.hpp"

#include "crl/classifier_ac.hpp"
#include "crl/metrics.hpp"
#include "crl/solvers.hpp"
#include "crl/svg.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <deque>
#include <map>

namespace crl {

PreparedData prepare(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    PreparedData d;
    d.mdp = build_gridworld(config.grid, config.discount);
    if (config.dataset == ExperimentConfig::DatasetKind::Path) {
        d.dataset = fixed_dataset(config.path, config.grid);
    } else {
        d.dataset = sample_trajectories(d.mdp, TabularPolicy::uniform(d.mdp.num_states(), d.mdp.num_actions()),
                                        config.num_traj, config.horizon, config.dataset_seed + seed);
    }
    d.model = estimate_empirical_model(d.dataset, d.mdp.num_states(), d.mdp.num_actions(), config.discount);
    return d;
}

bool moves_toward(const GridworldSpec& grid, Cell from, int action, Cell target, Cell obstacle) {
    std::map<Cell, int> dist{{target, 0}};
    std::deque<Cell> queue{target};
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (int a = 0; a < 4; ++a) {
            const Cell n = grid.next_cell(c, static_cast<Action>(a));
            if (n == c || n == obstacle || dist.count(n)) continue;
            dist[n] = dist[c] + 1;
            queue.push_back(n);
        }
    }
    const Cell next = grid.next_cell(from, static_cast<Action>(action));
    const auto here = dist.find(from);
    const auto there = dist.find(next);
    return here != dist.end() && there != dist.end() && there->second < here->second;
}

Cell best_cell(const GridworldSpec& grid) {
    Cell best = grid.cell_of(0);
    for (int s = 1; s < grid.num_states(); ++s)
        if (grid.reward_at(grid.cell_of(s)) > grid.reward_at(best)) best = grid.cell_of(s);
    return best;
}

Cell worst_cell(const GridworldSpec& grid) {
    Cell worst = grid.cell_of(0);
    for (int s = 1; s < grid.num_states(); ++s)
        if (grid.reward_at(grid.cell_of(s)) < grid.reward_at(worst)) worst = grid.cell_of(s);
    return worst;
}

std::string policies_csv(const GridworldSpec& grid, const std::vector<std::pair<std::string, TabularPolicy>>& pols) {
    std::string out = "method,s,row,col,a,action,prob\n";
    for (const auto& [name, pi] : pols)
        for (int s = 0; s < pi.num_states(); ++s)
            for (int a = 0; a < pi.num_actions(); ++a)
                out += fmt::format("{},{},{},{},{},{},{:.10f}\n", name, s, grid.cell_of(s).row, grid.cell_of(s).col, a,
                                   kActionNames[a], pi(s, a));
    return out;
}

std::string q_tables_csv(const std::vector<std::pair<std::string, MatrixXd>>& tables) {
    std::string out = "method,s,a,value\n";
    for (const auto& [name, q] : tables)
        for (Eigen::Index s = 0; s < q.rows(); ++s)
            for (Eigen::Index a = 0; a < q.cols(); ++a) out += fmt::format("{},{},{},{:.10g}\n", name, s, a, q(s, a));
    return out;
}

std::string argmax_csv(const GridworldSpec& grid, const std::vector<std::pair<std::string, std::vector<int>>>& maps) {
    std::string out = "method,s,row,col,action\n";
    for (const auto& [name, acts] : maps)
        for (std::size_t s = 0; s < acts.size(); ++s)
            out += fmt::format("{},{},{},{},{}\n", name, s, grid.cell_of(int(s)).row, grid.cell_of(int(s)).col,
                               kActionNames[acts[s]]);
    return out;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::string out = "iteration,critic_loss,actor_objective,ema_drift\n";
    for (const auto& r : trace)
        out += fmt::format("{},{:.10g},{:.10g},{:.6e}\n", r.iteration, r.critic_loss, r.actor_objective, r.ema_drift);
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ExperimentReport new_report(Command c, const ExperimentConfig& config, std::uint64_t seed) {
    ExperimentReport r;
    r.command = command_name(c);
    r.config_hash = config_hash(config);
    r.metrics["preset"] = config.name;
    r.metrics["seed"] = seed;
    return r;
}

ClassifierEvalConfig eval_config(const ExperimentConfig& config, std::uint64_t seed) {
    ClassifierEvalConfig e;
    e.lr = config.eval_lr;
    e.init_seed = config.ac.init_seed + seed;
    return e;
}

ActorCriticConfig ac_config(const ExperimentConfig& config, std::uint64_t seed) {
    ActorCriticConfig c = config.ac;
    c.init_seed = config.ac.init_seed + seed;
    return c;
}

ActorCriticConfig unreg_config(const ExperimentConfig& config, std::uint64_t seed) {
    ActorCriticConfig c = ac_config(config, seed);
    c.actor_optimizer = config.unreg_actor_optimizer;
    c.actor_lr = config.unreg_actor_lr;
    return c;
}

std::string fmt_actions(const std::vector<int>& acts, const std::vector<int>& states) {
    std::string out;
    for (int s : states) out += fmt::format("{}{}", out.empty() ? "" : " ", kActionNames[acts[s]]);
    return out;
}

std::vector<int> blue_states(const ExperimentConfig& config) {
    if (config.blue_box.empty()) throw ConfigError("key 'blue_box': this command needs the blue-box cells");
    std::vector<int> out;
    for (Cell c : config.blue_box) out.push_back(config.grid.state_of(c));
    return out;
}

int agree_count(const std::vector<int>& a, const std::vector<int>& b, const std::vector<int>& states) {
    int n = 0;
    for (int s : states) n += a[s] == b[s];
    return n;
}

std::vector<int> visited_states(const EmpiricalModel& m) {
    std::vector<int> out;
    for (int s = 0; s < m.num_states(); ++s)
        if (m.visited(s)) out.push_back(s);
    return out;
}

std::vector<int> all_states(int n) {
    std::vector<int> out(n);
    for (int s = 0; s < n; ++s) out[s] = s;
    return out;
}

}  // namespace

ExperimentReport run_fig2(const ExperimentConfig& config, std::uint64_t seed) {
    const auto t0 = Clock::now();
    ExperimentReport rep = new_report(Command::Fig2, config, seed);
    const PreparedData d = prepare(config, seed);
    const double offset = config.resolved_offset();
    const EmpiricalModel model = d.model.with_reward_offset(offset);
    rep.metrics["reward_offset"] = offset;
    rep.metrics["transitions"] = d.dataset.size();

    const ClassifierAcResult one_step = one_step_classifier_ac(model, eval_config(config, seed));
    const ActorCriticRun critic_reg = critic_reg_classifier_ac(model, ac_config(config, seed));
    const ActorCriticRun unreg = unregularized_classifier_ac(model, unreg_config(config, seed));

    const double tol = config.tie_tolerance;
    const auto g_os = one_step.policy.argmax(tol);
    const auto g_cr = critic_reg.result.policy.argmax(tol);
    const auto g_un = unreg.result.policy.argmax(tol);
    const auto visited = visited_states(model);

    const R2Report r2 = action_prob_r2(critic_reg.result.policy, one_step.policy, model.visited());
    const int agree = agree_count(g_os, g_cr, visited);
    rep.metrics["r_squared"] = r2.r_squared;
    rep.metrics["r2_points"] = r2.num_points;
    rep.metrics["visited_states"] = visited.size();
    rep.metrics["argmax_agreement"] = double(agree) / visited.size();
    rep.metrics["return_one_step"] = expected_return(d.mdp, one_step.policy);
    rep.metrics["return_critic_reg"] = expected_return(d.mdp, critic_reg.result.policy);
    rep.metrics["return_unregularized"] = expected_return(d.mdp, unreg.result.policy);

    rep.check("r2_one_step_vs_critic_reg", r2.r_squared >= 0.99, ">= 0.99", fmt::format("{:.6f}", r2.r_squared), 0.01);
    rep.check("argmax_agreement_visited", agree == int(visited.size()), fmt::format("{}/{}", visited.size(), visited.size()),
              fmt::format("{}/{}", agree, visited.size()));

    if (config.fig2_check == ExperimentConfig::Fig2Check::Path) {
        int os_hits = 0, cr_hits = 0, un_hits = 0;
        for (const Transition& tr : d.dataset.transitions) {
            os_hits += g_os[tr.s] == tr.a;
            cr_hits += g_cr[tr.s] == tr.a;
            un_hits += g_un[tr.s] == tr.a;
        }
        const int n = int(d.dataset.size());
        rep.check("one_step_traces_path", os_hits == n, fmt::format("{}/{}", n, n), fmt::format("{}/{}", os_hits, n));
        rep.check("critic_reg_traces_path", cr_hits == n, fmt::format("{}/{}", n, n), fmt::format("{}/{}", cr_hits, n));
        rep.check("unregularized_leaves_path", un_hits < n, fmt::format("< {}/{}", n, n),
                  fmt::format("{}/{}", un_hits, n));
    } else if (config.fig2_check == ExperimentConfig::Fig2Check::Differs) {
        const int same = agree_count(g_os, g_un, visited);
        const int differ = int(visited.size()) - same;
        rep.metrics["states_unregularized_differs"] = differ;
        rep.check("unregularized_differs_somewhere", differ >= 1, ">= 1 visited state", fmt::format("{}", differ));
    }

    const std::vector<std::pair<std::string, TabularPolicy>> pols = {
        {"one_step", one_step.policy}, {"critic_reg", critic_reg.result.policy}, {"unregularized", unreg.result.policy}};
    rep.add_table("policies.csv", policies_csv(config.grid, pols));
    rep.add_table("q_tables.csv", q_tables_csv({{"one_step", one_step.q.values},
                                                {"critic_reg", critic_reg.result.q.values},
                                                {"unregularized", unreg.result.q.values}}));
    rep.add_table("trace_critic_reg.csv", trace_csv(critic_reg.trace));
    rep.add_table("trace_unregularized.csv", trace_csv(unreg.trace));
    std::vector<std::pair<double, double>> pts;
    for (int s : visited)
        for (int a = 0; a < model.num_actions(); ++a) pts.emplace_back(one_step.policy(s, a), critic_reg.result.policy(s, a));
    rep.add_figure("scatter.svg", scatter_svg(pts, fmt::format("{}: R^2 = {:.4f}", config.name, r2.r_squared),
                                              "one-step pi(a|s)", "critic-regularized pi(a|s)"));
    for (const auto& [name, pi] : pols) {
        rep.add_figure(fmt::format("policy_{}.svg", name),
                       policy_svg(config.grid, pi, {fmt::format("{} ({})", config.name, name), {}}, tol));
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport run_fig3(const ExperimentConfig& config, std::uint64_t seed) {
    const auto t0 = Clock::now();
    ExperimentReport rep = new_report(Command::Fig3, config, seed);
    const PreparedData d = prepare(config, seed);
    const std::vector<int> blue = blue_states(config);
    const Cell high = best_cell(config.grid);
    const Cell low = worst_cell(config.grid);

    SolverConfig sc = config.solver;
    const SolverResult vi = value_iteration(d.mdp, sc);
    const SolverResult ql = q_learning_from_dataset(d.model, sc);
    const SolverResult os = one_step_rl(d.model, sc);
    const SolverResult cql_high = cql_soft_value_iteration(d.model, sc);
    sc.cql_lambda = config.cql_lambda_low;
    const SolverResult cql_low = cql_soft_value_iteration(d.model, sc);

    const double tol = 1e-9;
    const auto g_vi = vi.q.argmax(tol);
    const auto g_ql = ql.q.argmax(tol);
    const auto g_os = os.policy.argmax(tol);
    const auto g_ch = cql_high.policy.argmax(tol);
    const auto g_cl = cql_low.policy.argmax(tol);

    for (int s : blue) {
        if (!d.model.visited(s)) throw ConfigError(fmt::format("blue-box state {} is not in the dataset", s));
    }
    auto count_toward = [&](const std::vector<int>& g) {
        int n = 0;
        for (int s : blue) n += moves_toward(config.grid, config.grid.cell_of(s), g[s], high, low);
        return n;
    };
    const int nb = int(blue.size());
    const std::string all = fmt::format("{}/{}", nb, nb);
    rep.check("value_iteration_toward_high", count_toward(g_vi) == nb, all, fmt::format("{}/{}", count_toward(g_vi), nb));
    rep.check("q_learning_toward_high", count_toward(g_ql) == nb, all, fmt::format("{}/{}", count_toward(g_ql), nb));
    rep.check("one_step_away_from_high", count_toward(g_os) == 0, fmt::format("0/{}", nb),
              fmt::format("{}/{}", count_toward(g_os), nb));
    rep.check("cql_high_matches_one_step", agree_count(g_ch, g_os, blue) == nb, all,
              fmt::format("{}/{}", agree_count(g_ch, g_os, blue), nb));
    rep.check("cql_low_matches_q_learning", agree_count(g_cl, g_ql, blue) == nb, all,
              fmt::format("{}/{}", agree_count(g_cl, g_ql, blue), nb));

    rep.metrics["blue_box"] = nlohmann::ordered_json::object({{"value_iteration", fmt_actions(g_vi, blue)},
                                                              {"q_learning", fmt_actions(g_ql, blue)},
                                                              {"one_step", fmt_actions(g_os, blue)},
                                                              {"cql_high", fmt_actions(g_ch, blue)},
                                                              {"cql_low", fmt_actions(g_cl, blue)}});
    rep.metrics["cql_lambda_high"] = config.solver.cql_lambda;
    rep.metrics["cql_lambda_low"] = config.cql_lambda_low;
    rep.metrics["similarity_cql_high_one_step"] = argmax_similarity(cql_high.policy, os.policy).score;
    rep.metrics["similarity_cql_low_q_learning"] =
        argmax_similarity(cql_low.policy, TabularPolicy::deterministic(g_ql, kNumGridActions)).score;
    rep.metrics["iterations"] = nlohmann::ordered_json::object({{"value_iteration", vi.trace.iterations()},
                                                                {"q_learning", ql.trace.iterations()},
                                                                {"one_step", os.trace.iterations()},
                                                                {"cql_high", cql_high.trace.iterations()},
                                                                {"cql_low", cql_low.trace.iterations()}});

    const std::vector<std::pair<std::string, std::vector<int>>> maps = {
        {"value_iteration", g_vi}, {"q_learning", g_ql}, {"one_step", g_os}, {"cql_high", g_ch}, {"cql_low", g_cl}};
    rep.add_table("argmax.csv", argmax_csv(config.grid, maps));
    std::string box = "s,row,col,value_iteration,q_learning,one_step,cql_high,cql_low\n";
    for (int s : blue) {
        const Cell c = config.grid.cell_of(s);
        box += fmt::format("{},{},{},{},{},{},{},{}\n", s, c.row, c.col, kActionNames[g_vi[s]], kActionNames[g_ql[s]],
                           kActionNames[g_os[s]], kActionNames[g_ch[s]], kActionNames[g_cl[s]]);
    }
    rep.add_table("blue_box.csv", box);
    rep.add_table("q_tables.csv", q_tables_csv({{"value_iteration", vi.q.values},
                                                {"q_learning", ql.q.values},
                                                {"one_step", os.q.values},
                                                {"cql_high", cql_high.q.values},
                                                {"cql_low", cql_low.q.values}}));
    std::string traces = "method,iteration,residual\n";
    for (const auto& [name, tr] : std::vector<std::pair<std::string, const SolveTrace*>>{
             {"q_learning", &ql.trace}, {"one_step", &os.trace}, {"cql_high", &cql_high.trace}, {"cql_low", &cql_low.trace}})
        for (int i = 0; i < tr->iterations(); ++i) traces += fmt::format("{},{},{:.6e}\n", name, i + 1, tr->residuals[i]);
    rep.add_table("solver_traces.csv", traces);
    for (const auto& [name, g] : maps) {
        rep.add_figure(fmt::format("policy_{}.svg", name),
                       policy_svg(config.grid, g, {fmt::format("{} ({})", config.name, name), config.blue_box}));
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

namespace {

// Base grid for random placements: the preset with its reward cells removed.
GridworldSpec placement_base(const ExperimentConfig& config) {
    GridworldSpec base = config.grid;
    base.rewards.clear();
    base.goal_cells.clear();
    return base;
}

double mean_of(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return m / xs.size();
}

double std_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::sqrt(v / xs.size());
}

}  // namespace

ExperimentReport run_fig4(const ExperimentConfig& config, std::uint64_t seed) {
    const auto t0 = Clock::now();
    ExperimentReport rep = new_report(Command::Fig4, config, seed);
    SolverConfig sc = config.solver;
    std::vector<double> scores;
    int excluded = 0;
    std::string per_mdp = "mdp,high_row,high_col,low_row,low_col,visited,deviating,similarity\n";
    for (int i = 0; i < config.num_mdps; ++i) {
        RandomMdpSpec spec{placement_base(config), config.high_reward, config.low_reward,
                           seed * std::uint64_t(config.num_mdps) + std::uint64_t(i)};
        const RandomGridworld rg = generate_random_gridworld(spec, config.discount);
        ExperimentConfig sub = config;
        sub.grid = rg.spec;
        sub.dataset = ExperimentConfig::DatasetKind::Uniform;
        const PreparedData d = prepare(sub, spec.seed);

        const MatrixXd q_star = value_iteration(d.mdp, sc).q.values;
        const TabularPolicy os = one_step_rl(d.model, sc).policy;
        const TabularPolicy cql = cql_soft_value_iteration(d.model, sc).policy;
        const BoolVector dev = deviating_states(q_star, cql, d.model.visited());
        const int n_dev = int(dev.count());
        const int n_vis = int(d.model.visited().count());
        if (n_dev == 0) {
            ++excluded;
            per_mdp += fmt::format("{},{},{},{},{},{},0,\n", i, rg.high.row, rg.high.col, rg.low.row, rg.low.col, n_vis);
            continue;
        }
        const double score = argmax_similarity(os, cql, dev, StateSubset::DeviatingStates).score;
        scores.push_back(score);
        per_mdp += fmt::format("{},{},{},{},{},{},{},{:.6f}\n", i, rg.high.row, rg.high.col, rg.low.row, rg.low.col,
                               n_vis, n_dev, score);
    }
    const double chance = 1.0 / kNumGridActions;
    int above = 0;
    for (double s : scores) above += s > chance;
    const auto bins = histogram(scores, 10, 0.0, 1.0);
    std::string hist = "bin_lo,bin_hi,count,chance_level\n";
    for (const auto& b : bins) hist += fmt::format("{:.1f},{:.1f},{},{:.1f}\n", b.lo, b.hi, b.count, chance);

    rep.metrics["num_mdps"] = config.num_mdps;
    rep.metrics["scored"] = scores.size();
    rep.metrics["excluded_no_deviating_states"] = excluded;
    rep.metrics["above_chance"] = above;
    rep.metrics["chance_level"] = chance;
    rep.metrics["mean_similarity"] = scores.empty() ? 0.0 : mean_of(scores);
    const double frac = double(above) / config.num_mdps;
    rep.check("fraction_above_chance", frac >= 0.8, ">= 0.8", fmt::format("{:.2f}", frac));
    rep.check("counts_add_up", int(scores.size()) + excluded == config.num_mdps, fmt::format("{}", config.num_mdps),
              fmt::format("{}", scores.size() + excluded));
    rep.add_table("similarity_per_mdp.csv", per_mdp);
    rep.add_table("histogram.csv", hist);
    rep.add_figure("histogram.svg", histogram_svg(bins, chance,
                                                  fmt::format("one-step RL vs CQL({:g}) on deviating states",
                                                              config.solver.cql_lambda),
                                                  "argmax similarity"));
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport run_fig5(const ExperimentConfig& config, std::uint64_t seed) {
    const auto t0 = Clock::now();
    ExperimentReport rep = new_report(Command::Fig5, config, seed);
    std::vector<double> grid = config.lambda_grid;
    std::sort(grid.begin(), grid.end());
    if (std::find(grid.begin(), grid.end(), 10.0) == grid.end() || grid.size() < 3) {
        throw ConfigError("key 'lambda_grid': needs lambda = 10 and at least three values");
    }
    // CQL seed k and one-step seed j each sample their own dataset.
    std::vector<TabularPolicy> one_step;
    std::vector<EmpiricalModel> cql_models;
    for (int j = 0; j < config.onestep_seeds; ++j)
        one_step.push_back(one_step_rl(prepare(config, seed + j).model, config.solver).policy);
    for (int k = 0; k < config.cql_seeds; ++k) cql_models.push_back(prepare(config, seed + k).model);

    std::vector<CurvePoint> curve;
    std::string csv = "lambda,mean,std,comparisons\n";
    std::map<double, double> mean_at;
    for (double lambda : grid) {
        SolverConfig sc = config.solver;
        sc.cql_lambda = lambda;
        std::vector<double> sims;
        for (const auto& m : cql_models) {
            const TabularPolicy cql = cql_soft_value_iteration(m, sc).policy;
            for (const auto& os : one_step) sims.push_back(argmax_similarity(cql, os).score);
        }
        curve.push_back({lambda, mean_of(sims), std_of(sims)});
        mean_at[lambda] = mean_of(sims);
        csv += fmt::format("{:g},{:.6f},{:.6f},{}\n", lambda, mean_of(sims), std_of(sims), sims.size());
    }
    const double lo = grid.front(), hi = grid.back();
    rep.check("peak_above_weak", mean_at[10.0] > mean_at[lo], fmt::format("> {:.4f} (lambda {:g})", mean_at[lo], lo),
              fmt::format("{:.4f}", mean_at[10.0]));
    rep.check("peak_above_strong", mean_at[10.0] > mean_at[hi], fmt::format("> {:.4f} (lambda {:g})", mean_at[hi], hi),
              fmt::format("{:.4f}", mean_at[10.0]));
    const int n = config.cql_seeds * config.onestep_seeds;
    rep.metrics["comparisons_per_point"] = n;
    auto& pts = rep.metrics["curve"] = nlohmann::ordered_json::array();
    for (const auto& p : curve) pts.push_back({{"lambda", p.x}, {"mean", p.mean}, {"std", p.std}});
    rep.add_table("similarity_vs_lambda.csv", csv);
    rep.add_figure("similarity_vs_lambda.svg",
                   curve_svg(curve, true, "CQL vs one-step RL", "CQL lambda", "argmax similarity"));
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport run_fig7(const ExperimentConfig& config, std::uint64_t seed) {
    const auto t0 = Clock::now();
    ExperimentReport rep = new_report(Command::Fig7, config, seed);
    std::vector<double> grid = config.coef_grid;
    std::sort(grid.begin(), grid.end());
    if (std::find(grid.begin(), grid.end(), 1.0) == grid.end()) {
        throw ConfigError("key 'coef_grid': needs coefficient 1");
    }
    const PreparedData d = prepare(config, seed);
    const EmpiricalModel model = d.model.with_reward_offset(config.resolved_offset());
    const ClassifierAcResult one_step = one_step_classifier_ac(model, eval_config(config, seed));

    std::map<double, double> sim;
    std::vector<CurvePoint> curve;
    std::string csv = "coefficient,mixture_lambda,similarity,r_squared\n";
    for (double c : grid) {
        ActorCriticConfig ac = ac_config(config, seed);
        const double mix = 1.0 - c;
        ac.weights = {mix, mix, mix};
        const ActorCriticRun run = train_classifier_ac(model, ac);
        const auto rs = argmax_similarity(run.result.policy, one_step.policy, model.visited(), StateSubset::AllStates,
                                          config.tie_tolerance);
        const double r2 = action_prob_r2(run.result.policy, one_step.policy, model.visited()).r_squared;
        sim[c] = rs.score;
        curve.push_back({c, rs.score, 0.0});
        csv += fmt::format("{:g},{:g},{:.6f},{:.6f}\n", c, mix, rs.score, r2);
    }
    double best_other = 0.0;
    for (double c : grid)
        if (c > 0.0 && c < 1.0) best_other = std::max(best_other, sim[c]);
    rep.check("maximized_at_one", sim[1.0] >= best_other, fmt::format(">= {:.4f}", best_other),
              fmt::format("{:.4f}", sim[1.0]));
    rep.check("identity_at_one", sim[1.0] == 1.0, "1", fmt::format("{:.4f}", sim[1.0]));
    if (grid.front() == 0.0) {
        rep.check("unregularized_below_one", sim[0.0] < sim[1.0], fmt::format("< {:.4f}", sim[1.0]),
                  fmt::format("{:.4f}", sim[0.0]));
    }
    auto& pts = rep.metrics["curve"] = nlohmann::ordered_json::array();
    for (const auto& p : curve) pts.push_back({{"coefficient", p.x}, {"similarity", p.mean}});
    rep.add_table("similarity_vs_coefficient.csv", csv);
    rep.add_figure("similarity_vs_coefficient.svg",
                   curve_svg(curve, false, "classifier AC: critic vs actor regularization",
                             "critic regularization coefficient", "argmax similarity"));
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport run_fig_cac(const ExperimentConfig& config, std::uint64_t seed) {
    const auto t0 = Clock::now();
    ExperimentReport rep = new_report(Command::FigCac, config, seed);
    const PreparedData d = prepare(config, seed);
    const std::vector<int> blue = blue_states(config);
    const double offset = config.resolved_offset();
    const EmpiricalModel shifted = d.model.with_reward_offset(offset);
    rep.metrics["reward_offset"] = offset;

    const SolverResult ql = q_learning_from_dataset(d.model, config.solver);
    const SolverResult os = one_step_rl(d.model, config.solver);
    const SolverResult cql = cql_soft_value_iteration(d.model, config.solver);
    const ClassifierAcResult actor_reg = one_step_classifier_ac(shifted, eval_config(config, seed));
    const ActorCriticRun critic_reg = critic_reg_classifier_ac(shifted, ac_config(config, seed));
    const ActorCriticRun unreg = unregularized_classifier_ac(shifted, unreg_config(config, seed));

    const double tol = config.tie_tolerance;
    const auto g_ql = ql.q.argmax(1e-9);
    const auto g_os = os.policy.argmax(1e-9);
    const auto g_cql = cql.policy.argmax(1e-9);
    const auto g_ar = actor_reg.policy.argmax(tol);
    const auto g_cr = critic_reg.result.policy.argmax(tol);
    const auto g_un = unreg.result.policy.argmax(tol);
    const int S = d.model.num_states();
    const auto every = all_states(S);
    const int nb = int(blue.size());

    rep.check("actor_reg_equals_critic_reg", agree_count(g_ar, g_cr, every) == S, fmt::format("{}/{}", S, S),
              fmt::format("{}/{}", agree_count(g_ar, g_cr, every), S));
    rep.check("actor_reg_matches_one_step_blue", agree_count(g_ar, g_os, blue) == nb, fmt::format("{}/{}", nb, nb),
              fmt::format("{}/{}", agree_count(g_ar, g_os, blue), nb));
    rep.check("critic_reg_matches_one_step_blue", agree_count(g_cr, g_os, blue) == nb, fmt::format("{}/{}", nb, nb),
              fmt::format("{}/{}", agree_count(g_cr, g_os, blue), nb));

    const TabularPolicy greedy_ql = TabularPolicy::deterministic(g_ql, kNumGridActions);
    const TabularPolicy greedy_un = TabularPolicy::deterministic(g_un, kNumGridActions);
    const double ret_ql = expected_return(d.mdp, greedy_ql);
    const double ret_un = expected_return(d.mdp, greedy_un);
    const double ret_opt = expected_return(d.mdp, value_iteration(d.mdp, config.solver).policy);
    rep.metrics["return_optimal"] = ret_opt;
    rep.metrics["return_q_learning"] = ret_ql;
    rep.metrics["return_unregularized_classifier"] = ret_un;
    const double rel = std::abs(ret_un - ret_ql) / std::max(1.0, std::abs(ret_ql));
    rep.check("unregularized_return_matches_q_learning", rel <= 1e-3, fmt::format("{:.6f}", ret_ql),
              fmt::format("{:.6f}", ret_un), 1e-3);
    rep.metrics["states_unregularized_vs_q_learning_agree"] = agree_count(g_un, g_ql, every);
    rep.metrics["states_actor_reg_vs_one_step_agree"] = agree_count(g_ar, g_os, every);
    rep.metrics["states_critic_reg_vs_cql_agree"] = agree_count(g_cr, g_cql, every);

    const std::vector<std::pair<std::string, std::vector<int>>> maps = {
        {"q_learning", g_ql},     {"one_step", g_os},     {"cql", g_cql},
        {"classifier_unregularized", g_un}, {"classifier_actor_reg", g_ar}, {"classifier_critic_reg", g_cr}};
    rep.add_table("argmax.csv", argmax_csv(config.grid, maps));
    std::string box = "s,row,col";
    for (const auto& [name, g] : maps) box += "," + name;
    box += "\n";
    for (int s : blue) {
        const Cell c = config.grid.cell_of(s);
        box += fmt::format("{},{},{}", s, c.row, c.col);
        for (const auto& [name, g] : maps) box += fmt::format(",{}", kActionNames[g[s]]);
        box += "\n";
    }
    rep.add_table("blue_box.csv", box);
    rep.add_table("trace_critic_reg.csv", trace_csv(critic_reg.trace));
    for (const auto& [name, g] : maps) {
        rep.add_figure(fmt::format("policy_{}.svg", name),
                       policy_svg(config.grid, g, {fmt::format("{} ({})", config.name, name), config.blue_box}));
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport run_bench(const ExperimentConfig& config, std::uint64_t seed) {
    const auto t0 = Clock::now();
    ExperimentReport rep = new_report(Command::Bench, config, seed);
    const PreparedData d = prepare(config, seed);
    const EmpiricalModel shifted = d.model.with_reward_offset(config.resolved_offset());
    std::string csv = "task,seconds,iterations\n";
    auto time = [&](const std::string& name, auto&& fn) {
        const auto t = Clock::now();
        const int iters = fn();
        const double secs = seconds_since(t);
        csv += fmt::format("{},{:.6f},{}\n", name, secs, iters);
        rep.metrics["seconds"][name] = secs;
    };
    time("policy_evaluation_exact", [&] {
        policy_evaluation_exact(d.mdp, TabularPolicy::uniform(d.mdp.num_states(), d.mdp.num_actions()));
        return 1;
    });
    time("value_iteration", [&] { return value_iteration(d.mdp, config.solver).trace.iterations(); });
    time("q_learning_from_dataset", [&] { return q_learning_from_dataset(d.model, config.solver).trace.iterations(); });
    time("one_step_rl", [&] { return one_step_rl(d.model, config.solver).trace.iterations(); });
    time("cql_soft_value_iteration", [&] { return cql_soft_value_iteration(d.model, config.solver).trace.iterations(); });
    time("classifier_policy_evaluation", [&] {
        return classifier_policy_evaluation(shifted, shifted.behavior(), eval_config(config, seed)).gradient_steps;
    });
    time("critic_reg_classifier_ac", [&] {
        critic_reg_classifier_ac(shifted, ac_config(config, seed));
        return config.ac.outer_iters;
    });
    rep.add_table("bench.csv", csv);
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport run_command(Command command, const ExperimentConfig& config, std::uint64_t seed) {
    switch (command) {
        case Command::Fig2: return run_fig2(config, seed);
        case Command::Fig3: return run_fig3(config, seed);
        case Command::Fig4: return run_fig4(config, seed);
        case Command::Fig5: return run_fig5(config, seed);
        case Command::Fig7: return run_fig7(config, seed);
        case Command::FigCac: return run_fig_cac(config, seed);
        case Command::VerifyTheorems: return verify_theorems(config, seed);
        case Command::Bench: return run_bench(config, seed);
    }
    throw ConfigError("unknown command");
}

}  // namespace crl
