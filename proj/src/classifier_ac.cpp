#include "crl/classifier_ac.hpp"

#include "crl/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace crl {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double log_sigmoid(double x) {
    // log sigmoid(x) = -softplus(-x)
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

MatrixXd LogitTable::sigmoid() const { return logits.unaryExpr([](double x) { return crl::sigmoid(x); }); }

LogitTable LogitTable::from_q(const MatrixXd& q) {
    if ((q.array() <= 0.0).any()) throw PreconditionError("Q must be positive to take logits");
    LogitTable t{q.array().log().matrix()};
    t.clamp();
    return t;
}

LogitTable LogitTable::random_normal(int num_states, int num_actions, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, streams::kCriticInit);
    MatrixXd l(num_states, num_actions);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) l(s, a) = rng.normal();
    return {std::move(l)};
}

double ce_critic_loss(const LogitTable& logits, const MatrixXd& targets, const MatrixXd& weights) {
    const MatrixXd& l = logits.logits;
    double loss = 0.0;
    for (Eigen::Index s = 0; s < l.rows(); ++s) {
        for (Eigen::Index a = 0; a < l.cols(); ++a) {
            if (weights(s, a) == 0.0) continue;
            // log(1 - sigmoid(l)) = log sigmoid(-l)
            loss -= weights(s, a) * (targets(s, a) * log_sigmoid(l(s, a)) + log_sigmoid(-l(s, a)));
        }
    }
    return loss;
}

MatrixXd ce_critic_gradient(const LogitTable& logits, const MatrixXd& targets, const MatrixXd& weights) {
    const MatrixXd sig = logits.sigmoid();
    return weights.cwiseProduct(((targets.array() + 1.0) * sig.array() - targets.array()).matrix());
}

double preconditioned_ce_step(LogitTable& logits, const MatrixXd& w_pos, const MatrixXd& w_neg, double lr) {
    double moved = 0.0;
    for (Eigen::Index s = 0; s < logits.logits.rows(); ++s) {
        for (Eigen::Index a = 0; a < logits.logits.cols(); ++a) {
            const double total = w_pos(s, a) + w_neg(s, a);
            if (total <= 0.0) continue;
            double& l = logits.logits(s, a);
            const double t = w_pos(s, a) / total;
            const double p = sigmoid(l);
            const double fisher = p * sigmoid(-l);
            const double next = std::clamp(l - lr * (p - t) / fisher, -kLogitClamp, kLogitClamp);
            moved = std::max(moved, std::abs(next - l));
            l = next;
        }
    }
    return moved;
}

void require_positive_rewards(const EmpiricalModel& model) {
    const double lo = model.min_reward();
    if (lo < 0.0) {
        throw PreconditionError(fmt::format(
            "classifier critics need non-negative rewards; minimum is {}, apply reward_offset = {}", lo, 1.0 - lo));
    }
    if (!(model.max_reward() > 0.0)) {
        throw PreconditionError("classifier critics need at least one positive reward; apply a reward_offset");
    }
}

ClassifierEvalResult classifier_policy_evaluation(const EmpiricalModel& model, const TabularPolicy& backup,
                                                  const ClassifierEvalConfig& config) {
    require_positive_rewards(model);
    if (!(config.lr > 0.0 && config.lr <= 1.0)) throw ConfigError("lr must lie in (0,1]");
    const int S = model.num_states();
    const int A = model.num_actions();
    const MatrixXd& weights = model.state_action_dist();

    ClassifierEvalResult out;
    out.logits = LogitTable::random_normal(S, A, config.init_seed);
    MatrixXd q = out.logits.q();
    double outer_change = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < config.max_outer; ++outer) {
        const MatrixXd y = td_target(model, q, backup).y;
        // With w+ = p y and w- = p the step drives sigmoid(l) to y / (y + 1).
        const MatrixXd w_pos = weights.cwiseProduct(y);
        const double inner_tol = std::max(1e-13, 1e-2 * std::min(outer_change, 1.0));
        for (int inner = 0; inner < config.max_inner; ++inner) {
            ++out.gradient_steps;
            if (preconditioned_ce_step(out.logits, w_pos, weights, config.lr) < inner_tol) break;
        }
        MatrixXd next = out.logits.q();
        outer_change = model.support().select(next - q, 0.0).cwiseAbs().maxCoeff();
        q = std::move(next);
        out.trace.residuals.push_back(outer_change);
        if (outer_change < config.tolerance) {
            out.q = QTable{std::move(q)};
            return out;
        }
    }
    throw NonConvergenceError("classifier policy evaluation did not converge", outer_change,
                              out.trace.residuals.size());
}

TabularPolicy one_step_classifier_policy(const EmpiricalModel& model, const MatrixXd& q_beta) {
    const MatrixXd& beta = model.behavior().probs();
    MatrixXd p = beta;
    for (int s = 0; s < model.num_states(); ++s) {
        if (!model.visited(s)) continue;
        for (int a = 0; a < model.num_actions(); ++a)
            p(s, a) = beta(s, a) > 0.0 ? beta(s, a) * q_beta(s, a) : 0.0;
        p.row(s) /= p.row(s).sum();
    }
    return TabularPolicy(std::move(p));
}

ClassifierAcResult one_step_classifier_ac(const EmpiricalModel& model, const ClassifierEvalConfig& config) {
    ClassifierEvalResult critic = classifier_policy_evaluation(model, model.behavior(), config);
    TabularPolicy pi = one_step_classifier_policy(model, critic.q.values);
    return {std::move(critic.q), std::move(pi), std::move(critic.logits)};
}

void LambdaWeights::validate() const {
    for (double w : {critic, td, kl}) {
        if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("lambda weights must lie in [0,1]");
    }
}

TabularPolicy lambda_mixture(const TabularPolicy& pi, const TabularPolicy& beta, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("mixture lambda must lie in [0,1]");
    if (pi.num_states() != beta.num_states() || pi.num_actions() != beta.num_actions()) {
        throw PreconditionError("mixture of policies with different shapes");
    }
    return TabularPolicy((1.0 - lambda) * pi.probs() + lambda * beta.probs());
}

QTable importance_weighted_fixed_point(const EmpiricalModel& model, const TabularPolicy& td, const TabularPolicy& neg,
                            const SolverConfig& config) {
    const int S = model.num_states();
    const int A = model.num_actions();
    const MatrixXd& beta = model.behavior().probs();
    if (!model.closed()) {
        throw PreconditionError("fixed points need a closed model: every next state must be visited");
    }
    for (int s = 0; s < S; ++s) {
        if (!model.visited(s)) continue;
        for (int a = 0; a < A; ++a) {
            if (beta(s, a) == 0.0 && (td.probs()(s, a) > 0.0 || neg.probs()(s, a) > 0.0)) {
                throw PreconditionError(fmt::format(
                    "policy puts mass on action {} at state {} where the behavior policy has none", a, s));
            }
        }
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();
    MatrixXd ratio = MatrixXd::Zero(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            if (model.visited(s) && beta(s, a) > 0.0)
                ratio(s, a) = neg.probs()(s, a) > 0.0 ? beta(s, a) / neg.probs()(s, a) : kInf;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            if (std::isinf(ratio(s, a)) && td.probs()(s, a) > 0.0) {
                throw PreconditionError(fmt::format(
                    "TD policy backs up action {} at state {} where the negatives have no mass; the fixed point is "
                    "infinite",
                    a, s));
            }

    // td(a'|s') Q(s',a'). A sentinel entry has td = neg = 0, and its term is
    // the limit of td * y * beta / neg with td / neg -> 1, i.e. beta * y.
    auto backup_value = [&](const MatrixXd& q, const MatrixXd& y) {
        VectorXd v = VectorXd::Zero(S);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                if (std::isinf(ratio(s, a))) v(s) += beta(s, a) * y(s, a);
                else if (td.probs()(s, a) > 0.0) v(s) += td.probs()(s, a) * q(s, a);
            }
        return v;
    };
    MatrixXd q = MatrixXd::Zero(S, A);
    MatrixXd y = MatrixXd::Zero(S, A);
    double change = kInf;
    for (int it = 0; it < config.max_iters; ++it) {
        y = model.reward() + model.discount() * model.expect_next(backup_value(q, y));
        MatrixXd next = MatrixXd::Zero(S, A);
        change = 0.0;
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                if (ratio(s, a) == 0.0) continue;
                next(s, a) = std::isinf(ratio(s, a)) ? kInf : y(s, a) * ratio(s, a);
                if (std::isfinite(next(s, a))) {
                    change = std::max(change, std::abs(next(s, a) - q(s, a)) / (1.0 + std::abs(next(s, a))));
                }
            }
        }
        q = std::move(next);
        if (!std::isfinite(change)) break;
        if (change < config.tolerance * 1e-4) return QTable{std::move(q)};
    }
    throw NonConvergenceError("importance-weighted critic iteration did not converge", change, config.max_iters);
}

QTable critic_reg_fixed_point(const EmpiricalModel& model, const TabularPolicy& policy,
                              const SolverConfig& config) {
    return importance_weighted_fixed_point(model, policy, policy, config);
}

QTable lambda_critic_fixed_point(const EmpiricalModel& model, const TabularPolicy& policy,
                                 const LambdaWeights& weights, const SolverConfig& config) {
    weights.validate();
    const TabularPolicy& beta = model.behavior();
    return importance_weighted_fixed_point(model, lambda_mixture(policy, beta, weights.td),
                                lambda_mixture(policy, beta, weights.critic), config);
}

VectorXd lambda_one_step_objective(const TabularPolicy& pi, const TabularPolicy& beta, const MatrixXd& q_beta,
                                   double lambda_kl) {
    if (!(lambda_kl >= 0.0 && lambda_kl <= 1.0)) throw ConfigError("lambda_kl must lie in [0,1]");
    VectorXd out = VectorXd::Zero(pi.num_states());
    for (int s = 0; s < pi.num_states(); ++s) {
        for (int a = 0; a < pi.num_actions(); ++a) {
            const double p = pi(s, a);
            if (p == 0.0) continue;
            const double b = beta(s, a);
            if (b == 0.0) {
                throw PreconditionError(fmt::format("pi is not supported by beta at state {}, action {}", s, a));
            }
            const double mix = (1.0 - lambda_kl) * p + lambda_kl * b;
            out(s) += p * (std::log(q_beta(s, a)) + std::log(b) - std::log(mix));
        }
    }
    return out;
}

VectorXd expected_log_q(const TabularPolicy& pi, const MatrixXd& q) {
    VectorXd out = VectorXd::Zero(pi.num_states());
    for (int s = 0; s < pi.num_states(); ++s)
        for (int a = 0; a < pi.num_actions(); ++a)
            if (pi(s, a) > 0.0) out(s) += pi(s, a) * std::log(q(s, a));
    return out;
}

void ActorCriticConfig::validate() const {
    weights.validate();
    if (!(critic_lr > 0.0 && critic_lr <= 1.0)) throw ConfigError("critic lr must lie in (0,1]");
    if (!(actor_lr > 0.0)) throw ConfigError("actor lr must be positive");
    if (!(ema_rate > 0.0 && ema_rate <= 1.0)) throw ConfigError("ema_rate must lie in (0,1]");
    if (critic_steps < 1 || actor_steps < 0) throw ConfigError("step counts must be positive");
    if (outer_iters < 1) throw ConfigError("outer_iters must be at least 1");
    if (trace_every < 1) throw ConfigError("trace_every must be at least 1");
}

namespace {

// Flags a run whose actor objective keeps swinging over the final window:
// the spread must be small, or the sequence must at least be monotone.
void check_oscillation(const std::vector<double>& objective, const ActorCriticConfig& config) {
    const int n = static_cast<int>(objective.size());
    const int w = std::min(config.window, n / 2);
    if (w < 3) return;
    double lo = objective[n - w], hi = lo;
    int ups = 0, downs = 0;
    for (int i = n - w + 1; i < n; ++i) {
        lo = std::min(lo, objective[i]);
        hi = std::max(hi, objective[i]);
        const double d = objective[i] - objective[i - 1];
        if (d > 0) ++ups;
        if (d < 0) ++downs;
    }
    const double spread = hi - lo;
    if (spread > config.oscillation_tol * (1.0 + std::abs(objective.back())) && ups > 0 && downs > 0) {
        throw NonConvergenceError(
            fmt::format("actor objective oscillates over the last {} iterations; try a smaller ema_rate", w),
            spread, objective.size());
    }
}

}  // namespace

ActorCriticRun train_classifier_ac(const EmpiricalModel& model, const ActorCriticConfig& config) {
    config.validate();
    require_positive_rewards(model);
    const int S = model.num_states();
    const int A = model.num_actions();
    const MatrixXd& beta = model.behavior().probs();
    const double lc = config.weights.critic;
    const double ltd = config.weights.td;

    LogitTable critic = LogitTable::random_normal(S, A, config.init_seed);
    MatrixXd theta = MatrixXd::Zero(S, A);
    MatrixXd pi = MatrixXd::Constant(S, A, 1.0 / A);
    MatrixXd pi_bar = pi;
    const bool adam = config.actor_optimizer == ActorCriticConfig::Optimizer::Adam;
    MatrixXd m1 = MatrixXd::Zero(S, A);
    MatrixXd m2 = MatrixXd::Zero(S, A);
    int adam_t = 0;

    ActorCriticRun run;
    std::vector<double> objective;
    objective.reserve(config.outer_iters);
    // Masks out unvisited states; the losses there carry zero weight.
    const VectorXd state_weight = model.visited().cast<double>();

    for (int it = 0; it < config.outer_iters; ++it) {
        const MatrixXd neg = state_weight.asDiagonal() * ((1.0 - lc) * pi_bar + lc * beta);
        const MatrixXd td = (1.0 - ltd) * pi_bar + ltd * beta;
        MatrixXd w_pos;
        for (int k = 0; k < config.critic_steps; ++k) {
            const MatrixXd q = critic.q();
            const VectorXd v = (td.array() * q.array()).rowwise().sum();
            const MatrixXd y = model.reward() + model.discount() * model.expect_next(v);
            w_pos = state_weight.asDiagonal() * beta.cwiseProduct(y);
            preconditioned_ce_step(critic, w_pos, neg, config.critic_lr);
        }

        for (int k = 0; k < config.actor_steps; ++k) {
            ++adam_t;
            const double c1 = 1.0 - std::pow(0.9, adam_t);
            const double c2 = 1.0 - std::pow(0.999, adam_t);
            for (int s = 0; s < S; ++s) {
                if (!model.visited(s)) continue;
                const double mean = pi.row(s).dot(critic.logits.row(s));
                for (int a = 0; a < A; ++a) {
                    const double g = pi(s, a) * (critic.logits(s, a) - mean);
                    if (!adam) {
                        theta(s, a) += config.actor_lr * g;
                        continue;
                    }
                    m1(s, a) = 0.9 * m1(s, a) + 0.1 * g;
                    m2(s, a) = 0.999 * m2(s, a) + 0.001 * g * g;
                    theta(s, a) += config.actor_lr * (m1(s, a) / c1) / (std::sqrt(m2(s, a) / c2) + 1e-8);
                }
                const double m = theta.row(s).maxCoeff();
                pi.row(s) = (theta.row(s).array() - m).exp();
                pi.row(s) /= pi.row(s).sum();
            }
        }

        const MatrixXd prev_bar = pi_bar;
        pi_bar = (1.0 - config.ema_rate) * pi_bar + config.ema_rate * pi;

        double j = 0.0;
        for (int s = 0; s < S; ++s)
            if (model.visited(s)) j += model.state_dist()(s) * pi.row(s).dot(critic.logits.row(s));
        objective.push_back(j);
        if (it % config.trace_every == 0 || it + 1 == config.outer_iters) {
            // Loss with the same weights the step used, reported per unit mass.
            const MatrixXd p = model.state_dist().asDiagonal() * MatrixXd::Ones(S, A);
            double loss = 0.0;
            const MatrixXd& l = critic.logits;
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a)
                    if (model.visited(s))
                        loss -= p(s, a) * (w_pos(s, a) * log_sigmoid(l(s, a)) + neg(s, a) * log_sigmoid(-l(s, a)));
            run.trace.push_back({it, loss, j, (pi_bar - prev_bar).cwiseAbs().maxCoeff()});
        }
    }
    check_oscillation(objective, config);

    run.result.logits = critic;
    run.result.q = QTable{critic.q()};
    run.result.policy = TabularPolicy(pi);
    run.ema_policy = TabularPolicy(pi_bar);
    return run;
}

ActorCriticRun critic_reg_classifier_ac(const EmpiricalModel& model, ActorCriticConfig config) {
    config.weights = {0.0, 0.0, 0.0};
    return train_classifier_ac(model, config);
}

ActorCriticRun unregularized_classifier_ac(const EmpiricalModel& model, ActorCriticConfig config) {
    config.weights = {1.0, 0.0, 1.0};
    return train_classifier_ac(model, config);
}

}  // namespace crl
