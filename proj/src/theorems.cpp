#include "crl/classifier_ac.hpp"
#include "crl/experiments.hpp"
#include "crl/extensions.hpp"
#include "crl/solvers.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>

namespace crl {

namespace {

constexpr std::uint64_t kTheoremStream = 0x7E00;

struct Instance {
    TabularMdp mdp;
    TabularPolicy beta;
    TabularPolicy pi;
    EmpiricalModel model;
};

// Random instance with a uniform state distribution, so every state is
// visited and the exact model is closed. `zero_prob` punches holes in beta.
Instance random_instance(Rng& rng, int max_states, int max_actions, double discount, double zero_prob) {
    const int S = 2 + rng.uniform_int(max_states - 1);
    const int A = 2 + rng.uniform_int(max_actions - 1);
    Instance in;
    in.mdp = random_tabular_mdp(S, A, discount, rng);
    in.beta = random_policy(S, A, rng, zero_prob);
    // pi keeps a random part of beta's support, so some pairs carry the
    // +inf sentinel.
    MatrixXd pi = random_policy_within_support(in.beta, rng).probs();
    for (int s = 0; s < S; ++s) {
        MatrixXd row = pi.row(s);
        for (int a = 0; a < A; ++a)
            if (rng.uniform() < zero_prob) row(0, a) = 0.0;
        if (row.sum() > 0.0) pi.row(s) = row / row.sum();
    }
    in.pi = TabularPolicy(std::move(pi));
    in.model = exact_model(in.mdp, in.beta, VectorXd::Constant(S, 1.0 / S));
    return in;
}

// Largest |a - b| over states where both are finite.
double max_abs_diff(const VectorXd& a, const VectorXd& b) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a(i) - b(i)));
    return m;
}

// Relative sup-norm deviation over entries where `pi` > 0.
double ratio_deviation(const MatrixXd& got, const MatrixXd& want, const TabularPolicy& pi) {
    double m = 0.0;
    for (Eigen::Index s = 0; s < got.rows(); ++s)
        for (Eigen::Index a = 0; a < got.cols(); ++a)
            if (pi(s, a) > 0.0) m = std::max(m, std::abs(got(s, a) - want(s, a)) / std::max(1.0, std::abs(want(s, a))));
    return m;
}

MatrixXd importance_formula(const MatrixXd& q_beta, const TabularPolicy& beta, const TabularPolicy& neg) {
    MatrixXd out = MatrixXd::Zero(q_beta.rows(), q_beta.cols());
    for (Eigen::Index s = 0; s < q_beta.rows(); ++s)
        for (Eigen::Index a = 0; a < q_beta.cols(); ++a)
            if (neg(s, a) > 0.0) out(s, a) = q_beta(s, a) * beta(s, a) / neg(s, a);
    return out;
}

SolverConfig tight() {
    SolverConfig c;
    c.tolerance = 1e-13;
    c.max_iters = 200000;
    return c;
}

}  // namespace

ExperimentReport verify_theorems(const ExperimentConfig& config, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.command = command_name(Command::VerifyTheorems);
    rep.config_hash = config_hash(config);
    rep.metrics["seed"] = seed;
    const double tol = config.theorem_tol;
    const double gamma = config.discount;

    ClassifierEvalConfig ec;
    ec.lr = config.eval_lr;
    ec.init_seed = config.ac.init_seed + seed;

    // Classifier evaluation converges to the linear-solve Q^pi.
    {
        Rng rng = Rng::stream(seed, kTheoremStream + 1);
        double worst = 0.0;
        for (int i = 0; i < config.theorem_instances; ++i) {
            const Instance in = random_instance(rng, 10, 5, gamma, 0.0);
            const MatrixXd exact = policy_evaluation_exact(in.mdp, in.pi).values;
            ClassifierEvalConfig c = ec;
            c.init_seed += i;
            const MatrixXd got = classifier_policy_evaluation(in.model, in.pi, c).q.values;
            worst = std::max(worst, sup_norm_diff(got, exact));
        }
        rep.metrics["classifier_eval_random_max_dev"] = worst;
        rep.check("classifier_eval_random_mdps", worst <= config.eval_oracle_tol, fmt::format("<= {:g}", config.eval_oracle_tol),
                  fmt::format("{:.3e}", worst), config.eval_oracle_tol);

        double preset_worst = 0.0;
        for (const std::string name : {"fig2-left", "fig2-center", "fig2-right", "fig3"}) {
            const std::string path = (std::filesystem::path(preset_dir()) / (name + ".cfg")).string();
            if (!std::filesystem::exists(path)) continue;
            const ExperimentConfig pc = load_preset(path);
            const EmpiricalModel model = prepare(pc, seed).model.with_reward_offset(pc.resolved_offset());
            if (!model.closed()) continue;
            const MatrixXd exact = policy_evaluation_exact(model.to_mdp(0.0), model.behavior()).values;
            const MatrixXd got = classifier_policy_evaluation(model, model.behavior(), ec).q.values;
            const double dev = model.support().select(got - exact, 0.0).cwiseAbs().maxCoeff();
            rep.metrics["classifier_eval_preset_dev"][name] = dev;
            preset_worst = std::max(preset_worst, dev);
        }
        rep.check("classifier_eval_presets", preset_worst <= config.eval_oracle_tol, fmt::format("<= {:g}", config.eval_oracle_tol),
                  fmt::format("{:.3e}", preset_worst), config.eval_oracle_tol);
    }

    // Critic-regularized fixed point and the actor-objective identity.
    {
        Rng rng = Rng::stream(seed, kTheoremStream + 2);
        double fixed_dev = 0.0, objective_dev = 0.0;
        for (int i = 0; i < config.theorem_instances; ++i) {
            const Instance in = random_instance(rng, 10, 5, gamma, 0.3);
            const MatrixXd q_beta = policy_evaluation_exact(in.mdp, in.beta).values;
            const MatrixXd q_r = critic_reg_fixed_point(in.model, in.pi, tight()).values;
            fixed_dev = std::max(fixed_dev, ratio_deviation(q_r, importance_formula(q_beta, in.beta, in.pi), in.pi));
            objective_dev = std::max(objective_dev, max_abs_diff(expected_log_q(in.pi, q_r),
                                                                 lambda_one_step_objective(in.pi, in.beta, q_beta, 0.0)));
        }
        rep.metrics["fixed_point_max_dev"] = fixed_dev;
        rep.metrics["objective_max_dev"] = objective_dev;
        rep.check("critic_reg_fixed_point_identity", fixed_dev <= tol, fmt::format("<= {:g}", tol), fmt::format("{:.3e}", fixed_dev),
                  tol);
        rep.check("critic_reg_objective_identity", objective_dev <= tol, fmt::format("<= {:g}", tol),
                  fmt::format("{:.3e}", objective_dev), tol);
    }

    // Lambda-weighted losses with equal coefficients.
    {
        Rng rng = Rng::stream(seed, kTheoremStream + 3);
        double worst = 0.0;
        std::map<double, double> by_lambda;
        for (int i = 0; i < config.lambda_instances; ++i) {
            const Instance in = random_instance(rng, 10, 5, gamma, 0.3);
            const MatrixXd q_beta = policy_evaluation_exact(in.mdp, in.beta).values;
            for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const MatrixXd q = lambda_critic_fixed_point(in.model, in.pi, LambdaWeights::uniform(lambda), tight()).values;
                const double dev = max_abs_diff(expected_log_q(in.pi, q),
                                                lambda_one_step_objective(in.pi, in.beta, q_beta, lambda));
                worst = std::max(worst, dev);
                by_lambda[lambda] = std::max(by_lambda[lambda], dev);
            }
        }
        for (const auto& [lambda, dev] : by_lambda) rep.metrics["lambda_mixture_max_dev_by_lambda"][fmt::format("{:g}", lambda)] = dev;
        rep.metrics["lambda_mixture_max_dev"] = worst;
        rep.check("lambda_mixture_objective", worst <= tol, fmt::format("<= {:g}", tol), fmt::format("{:.3e}", worst), tol);
    }

    // Goal-conditioned variant.
    {
        Rng rng = Rng::stream(seed, kTheoremStream + 4);
        double worst = 0.0, norm_dev = 0.0;
        for (int i = 0; i < config.extension_instances; ++i) {
            Instance in = random_instance(rng, 6, 3, gamma, 0.3);
            const int S = in.mdp.num_states();
            GoalConditionedPolicy pi;
            for (int g = 0; g < S; ++g) pi.per_goal.push_back(random_policy_within_support(in.beta, rng));
            const GoalConditionedQ q_beta = gc_discounted_occupancy(in.mdp, in.beta);
            const GoalConditionedQ q = gc_critic_reg_fixed_point(in.model, pi, tight());
            MatrixXd total = MatrixXd::Zero(S, in.mdp.num_actions());
            for (int g = 0; g < S; ++g) {
                total += q_beta.values[g];
                worst = std::max(worst, max_abs_diff(expected_log_q(pi.per_goal[g], q.values[g]),
                                                     lambda_one_step_objective(pi.per_goal[g], in.beta,
                                                                               q_beta.values[g], 0.0)));
            }
            norm_dev = std::max(norm_dev, (total.array() - 1.0).abs().maxCoeff());
        }
        rep.metrics["goal_conditioned_max_dev"] = worst;
        rep.metrics["gc_normalization_max_dev"] = norm_dev;
        rep.check("goal_conditioned_objective", worst <= tol, fmt::format("<= {:g}", tol), fmt::format("{:.3e}", worst), tol);
        rep.check("gc_normalization", norm_dev <= 1e-9, "<= 1e-9", fmt::format("{:.3e}", norm_dev), 1e-9);
    }

    // Example-based variant.
    {
        Rng rng = Rng::stream(seed, kTheoremStream + 5);
        double worst = 0.0;
        for (int i = 0; i < config.extension_instances; ++i) {
            const Instance in = random_instance(rng, 6, 3, gamma, 0.3);
            VectorXd density(in.mdp.num_states());
            for (Eigen::Index s = 0; s < density.size(); ++s) density(s) = -std::log(1.0 - rng.uniform());
            const SuccessExamples examples(density / density.sum());
            const MatrixXd q_beta = rce_discounted_success(in.mdp, in.beta, examples).values;
            const MatrixXd q = rce_critic_reg_fixed_point(in.model, in.pi, examples, tight()).values;
            worst = std::max(worst, max_abs_diff(expected_log_q(in.pi, q),
                                                 lambda_one_step_objective(in.pi, in.beta, q_beta, 0.0)));
        }
        rep.metrics["example_based_max_dev"] = worst;
        rep.check("example_based_objective", worst <= tol, fmt::format("<= {:g}", tol), fmt::format("{:.3e}", worst), tol);
    }

    // A policy outside the behavior support is a precondition error, not a
    // failed identity.
    {
        Rng rng = Rng::stream(seed, kTheoremStream + 6);
        Instance in = random_instance(rng, 5, 3, gamma, 0.0);
        MatrixXd beta = in.beta.probs();
        beta.row(0).setZero();
        beta(0, 0) = 1.0;
        const EmpiricalModel model =
            exact_model(in.mdp, TabularPolicy(beta), VectorXd::Constant(in.mdp.num_states(), 1.0 / in.mdp.num_states()));
        std::string outcome = "accepted";
        try {
            critic_reg_fixed_point(model, TabularPolicy::uniform(in.mdp.num_states(), in.mdp.num_actions()));
        } catch (const PreconditionError& e) {
            outcome = "precondition error";
            rep.metrics["support_violation_message"] = e.what();
        }
        rep.check("support_violation_rejected", outcome == "precondition error", "precondition error", outcome);
    }

    std::string csv = "check,expected,actual,passed\n";
    for (const auto& a : rep.assertions) csv += fmt::format("{},{},{},{}\n", a.name, a.expected, a.actual, a.passed);
    rep.add_table("theorems.csv", csv);
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace crl
