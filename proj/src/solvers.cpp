#include "crl/solvers.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace crl {

void SolverConfig::validate() const {
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (!(cql_lambda >= 0.0)) throw ConfigError("cql_lambda must be non-negative");
    if (!(onestep_lambda > 0.0)) throw ConfigError("onestep_lambda must be positive");
    if (!(behavior_floor > 0.0 && behavior_floor < 1.0)) throw ConfigError("behavior_floor must lie in (0,1)");
}

namespace {

VectorXd policy_average(const MatrixXd& q, const TabularPolicy& pi) {
    return (q.array() * pi.probs().array()).rowwise().sum();
}

VectorXd row_max(const MatrixXd& q) { return q.rowwise().maxCoeff(); }

VectorXd row_logsumexp(const MatrixXd& q, double tau) {
    VectorXd out(q.rows());
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        const double m = q.row(s).maxCoeff();
        out(s) = m + tau * std::log(((q.row(s).array() - m) / tau).exp().sum());
    }
    return out;
}

[[noreturn]] void budget_exhausted(const char* what, const SolveTrace& trace) {
    throw NonConvergenceError(what, trace.residuals.empty() ? 0.0 : trace.residuals.back(),
                              trace.residuals.size());
}

// Runs `sweep(q)` until successive iterates agree within the tolerance.
template <typename Sweep>
SolveTrace iterate(MatrixXd& q, const SolverConfig& config, const char* what, Sweep&& sweep) {
    SolveTrace trace;
    for (int it = 0; it < config.max_iters; ++it) {
        MatrixXd next = sweep(q);
        const double residual = sup_norm_diff(next, q);
        q = std::move(next);
        trace.residuals.push_back(residual);
        if (!std::isfinite(residual)) budget_exhausted(what, trace);
        if (residual < config.tolerance) return trace;
    }
    budget_exhausted(what, trace);
}

TabularPolicy greedy(const QTable& q) {
    return TabularPolicy::deterministic(q.argmax(), q.num_actions());
}

MatrixXd pin_unsupported(MatrixXd q, const EmpiricalModel& model, double floor) {
    return model.support().select(q, floor);
}

}  // namespace

TdTarget td_target(const TabularMdp& mdp, const MatrixXd& q, const TabularPolicy& backup) {
    MatrixXd y = mdp.reward() + mdp.discount() * mdp.expect_next(policy_average(q, backup));
    return {std::move(y), backup};
}

TdTarget td_target(const EmpiricalModel& model, const MatrixXd& q, const TabularPolicy& backup) {
    MatrixXd y = model.reward() + model.discount() * model.expect_next(policy_average(q, backup));
    return {std::move(y), backup};
}

QTable policy_evaluation_exact(const TabularMdp& mdp, const TabularPolicy& policy) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (policy.num_states() != S || policy.num_actions() != A) {
        throw PreconditionError("policy shape does not match the MDP");
    }
    MatrixXd P_pi = MatrixXd::Zero(S, S);
    VectorXd r_pi = VectorXd::Zero(S);
    for (int a = 0; a < A; ++a) {
        P_pi += policy.probs().col(a).asDiagonal() * mdp.transition(a);
        r_pi += policy.probs().col(a).cwiseProduct(mdp.reward().col(a));
    }
    const MatrixXd M = MatrixXd::Identity(S, S) - mdp.discount() * P_pi;
    Eigen::PartialPivLU<MatrixXd> lu(M);
    VectorXd v = lu.solve(r_pi);
    // One step of iterative refinement keeps the residual at round-off level
    // even when gamma is close to 1.
    v += lu.solve(r_pi - M * v);
    QTable q{mdp.reward() + mdp.discount() * mdp.expect_next(v)};

    const double scale = 1.0 + q.values.cwiseAbs().maxCoeff();
    const double residual = sup_norm_diff(td_target(mdp, q.values, policy).y, q.values);
    if (!(residual <= 1e-10 * scale)) {
        throw NonConvergenceError("policy evaluation linear solve is inaccurate", residual, 1);
    }
    return q;
}

double expected_return(const TabularMdp& mdp, const TabularPolicy& policy) {
    const QTable q = policy_evaluation_exact(mdp, policy);
    return mdp.initial_dist().dot(q.state_values(policy));
}

SolverResult value_iteration(const TabularMdp& mdp, const SolverConfig& config) {
    config.validate();
    MatrixXd q = MatrixXd::Zero(mdp.num_states(), mdp.num_actions());
    SolveTrace trace = iterate(q, config, "value iteration did not converge", [&](const MatrixXd& cur) {
        return MatrixXd(mdp.reward() + mdp.discount() * mdp.expect_next(row_max(cur)));
    });
    QTable table{std::move(q)};
    TabularPolicy pi = greedy(table);
    return {std::move(table), std::move(pi), std::move(trace)};
}

double unsupported_floor(const EmpiricalModel& model) {
    return model.min_reward() / (1.0 - model.discount()) - 1.0;
}

SolverResult q_learning_from_dataset(const EmpiricalModel& model, const SolverConfig& config) {
    config.validate();
    const double floor = unsupported_floor(model);
    MatrixXd q = pin_unsupported(MatrixXd::Zero(model.num_states(), model.num_actions()), model, floor);
    SolveTrace trace = iterate(q, config, "Q-iteration did not converge", [&](const MatrixXd& cur) {
        MatrixXd next = model.reward() + model.discount() * model.expect_next(row_max(cur));
        return pin_unsupported(std::move(next), model, floor);
    });
    QTable table{std::move(q)};
    TabularPolicy pi = greedy(table);
    return {std::move(table), std::move(pi), std::move(trace)};
}

SolverResult sarsa_evaluation(const EmpiricalModel& model, const SolverConfig& config) {
    config.validate();
    const double floor = unsupported_floor(model);
    MatrixXd q = pin_unsupported(MatrixXd::Zero(model.num_states(), model.num_actions()), model, floor);
    SolveTrace trace = iterate(q, config, "SARSA evaluation did not converge", [&](const MatrixXd& cur) {
        return pin_unsupported(td_target(model, cur, model.behavior()).y, model, floor);
    });
    return {QTable{std::move(q)}, model.behavior(), std::move(trace)};
}

TabularPolicy reverse_kl_improvement(const TabularPolicy& behavior, const MatrixXd& q, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("one-step lambda must be positive");
    if (q.rows() != behavior.num_states() || q.cols() != behavior.num_actions()) {
        throw PreconditionError("Q table shape does not match the behavior policy");
    }
    const MatrixXd& beta = behavior.probs();
    MatrixXd p(q.rows(), q.cols());
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        // Only actions with beta > 0 can receive mass; the max is taken over
        // those so the exponentials cannot all underflow.
        double m = -std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < q.cols(); ++a)
            if (beta(s, a) > 0.0) m = std::max(m, q(s, a));
        for (Eigen::Index a = 0; a < q.cols(); ++a)
            p(s, a) = beta(s, a) > 0.0 ? beta(s, a) * std::exp((q(s, a) - m) / lambda) : 0.0;
        p.row(s) /= p.row(s).sum();
    }
    return TabularPolicy(std::move(p));
}

SolverResult one_step_rl(const EmpiricalModel& model, const SolverConfig& config) {
    config.validate();
    SolverResult critic = sarsa_evaluation(model, config);
    critic.policy = reverse_kl_improvement(model.behavior(), critic.q.values, config.onestep_lambda);
    return critic;
}

namespace {

// Solves q_a = y_a - lambda (mu_a / b_a - 1) over the supported actions of one
// state, where mu = softmax([q, fixed] / tau). Minimises
//   F(q) = 1/2 sum b (q - y)^2 - lambda sum b q + lambda tau lse([q, fixed] / tau).
class CqlStateSolver {
public:
    CqlStateSolver(VectorXd b, VectorXd y, VectorXd fixed, double lambda, double tau)
        : b_(std::move(b)), y_(std::move(y)), fixed_(std::move(fixed)), lambda_(lambda), tau_(tau) {}

    VectorXd solve(VectorXd q) const {
        if (lambda_ == 0.0) return y_;
        const Eigen::Index k = q.size();
        for (int it = 0; it < 200; ++it) {
            VectorXd mu;
            double f = value(q, &mu);
            VectorXd grad = b_.cwiseProduct(q - y_) - lambda_ * b_ + lambda_ * mu;
            if ((grad.array() / b_.array()).abs().maxCoeff() < 1e-11 * (1.0 + q.cwiseAbs().maxCoeff())) break;
            MatrixXd H = MatrixXd(b_.asDiagonal()) +
                         (lambda_ / tau_) * (MatrixXd(mu.asDiagonal()) - mu * mu.transpose());
            VectorXd step = H.llt().solve(-grad);
            const double slope = grad.dot(step);
            double t = 1.0;
            VectorXd trial(k);
            for (int ls = 0; ls < 60; ++ls) {
                trial = q + t * step;
                if (value(trial, nullptr) <= f + 1e-4 * t * slope) break;
                t *= 0.5;
            }
            if ((trial - q).cwiseAbs().maxCoeff() == 0.0) break;
            q = std::move(trial);
        }
        return q;
    }

private:
    double value(const VectorXd& q, VectorXd* mu_out) const {
        double m = q.maxCoeff();
        if (fixed_.size() > 0) m = std::max(m, fixed_.maxCoeff());
        const VectorXd eq = ((q.array() - m) / tau_).exp();
        const double z = eq.sum() + ((fixed_.array() - m) / tau_).exp().sum();
        if (mu_out) *mu_out = eq / z;
        return 0.5 * b_.dot((q - y_).cwiseAbs2()) - lambda_ * b_.dot(q) +
               lambda_ * (m + tau_ * std::log(z));
    }

    VectorXd b_, y_, fixed_;
    double lambda_, tau_;
};

}  // namespace

SolverResult cql_soft_value_iteration(const EmpiricalModel& model, const SolverConfig& config) {
    config.validate();
    const int S = model.num_states();
    const int A = model.num_actions();
    const double tau = config.temperature;
    const double lambda = config.cql_lambda;
    const double floor = unsupported_floor(model);
    const MatrixXd beta = model.behavior().probs().cwiseMax(config.behavior_floor);

    double beta_min = 1.0;
    double r_abs = 0.0;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            if (model.supported(s, a)) {
                beta_min = std::min(beta_min, beta(s, a));
                r_abs = std::max(r_abs, std::abs(model.reward()(s, a)));
            }
    // |Q| can never exceed this at the fixed point; twice it means divergence.
    const double bound = (r_abs + tau * std::log(double(A))) / (1.0 - model.discount()) +
                         lambda / beta_min + std::abs(floor) + 1.0;

    std::vector<std::vector<int>> supp(S), unsupp(S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) (model.supported(s, a) ? supp : unsupp)[s].push_back(a);

    MatrixXd q = pin_unsupported(MatrixXd::Zero(S, A), model, floor);
    SolveTrace trace = iterate(q, config, "CQL soft value iteration did not converge", [&](const MatrixXd& cur) {
        const MatrixXd y = model.reward() + model.discount() * model.expect_next(row_logsumexp(cur, tau));
        MatrixXd next = cur;
        for (int s = 0; s < S; ++s) {
            const auto& K = supp[s];
            if (K.empty()) continue;
            VectorXd b(K.size()), ys(K.size()), q0(K.size());
            VectorXd fixed(unsupp[s].size());
            for (std::size_t i = 0; i < K.size(); ++i) {
                b(i) = beta(s, K[i]);
                ys(i) = y(s, K[i]);
                q0(i) = cur(s, K[i]);
            }
            for (std::size_t i = 0; i < unsupp[s].size(); ++i) fixed(i) = cur(s, unsupp[s][i]);
            const VectorXd sol = CqlStateSolver(b, ys, fixed, lambda, tau).solve(q0);
            for (std::size_t i = 0; i < K.size(); ++i) next(s, K[i]) = sol(i);
        }
        const double peak = next.cwiseAbs().maxCoeff();
        if (!(peak <= 2.0 * bound)) {
            throw NonConvergenceError(fmt::format("CQL values exceed the bound {:.6g}", bound), peak, 0);
        }
        return next;
    });

    MatrixXd logits = q / tau;
    TabularPolicy mu = TabularPolicy::softmax(logits);
    return {QTable{std::move(q)}, std::move(mu), std::move(trace)};
}

}  // namespace crl
