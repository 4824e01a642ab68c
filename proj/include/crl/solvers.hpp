#pragma once

#include "crl/empirical.hpp"
#include "crl/mdp.hpp"

#include <vector>

namespace crl {

struct SolverConfig {
    double tolerance = 1e-8;  // sup-norm change between sweeps
    int max_iters = 100000;
    double temperature = 1.0;  // soft backups and softmax policies
    double cql_lambda = 1.0;
    double onestep_lambda = 1.0;
    double behavior_floor = 1e-6;  // beta_hat is clamped from below in CQL ratios

    void validate() const;
};

/// y(s,a) = r(s,a) + gamma * E_{s'} sum_a' backup(a'|s') Q(s',a').
struct TdTarget {
    MatrixXd y;
    TabularPolicy backup_policy;
};

TdTarget td_target(const TabularMdp& mdp, const MatrixXd& q, const TabularPolicy& backup);
/// Same backup under the empirical model; rows of unsupported pairs hold
/// only the (zero) reward and should be masked by the caller.
TdTarget td_target(const EmpiricalModel& model, const MatrixXd& q, const TabularPolicy& backup);

/// Residual after each sweep of a fixed-point loop.
struct SolveTrace {
    std::vector<double> residuals;
    int iterations() const { return static_cast<int>(residuals.size()); }
};

struct SolverResult {
    QTable q;
    TabularPolicy policy;
    SolveTrace trace;
};

/// Q^pi from a direct linear solve of (I - gamma P_pi) V = r_pi, then one backup.
/// The Bellman residual of the returned table is checked against 1e-10.
QTable policy_evaluation_exact(const TabularMdp& mdp, const TabularPolicy& policy);

/// p0 . V^pi under the given MDP.
double expected_return(const TabularMdp& mdp, const TabularPolicy& policy);

/// Bellman-optimality iteration on the exact model. The returned policy is
/// deterministic greedy, ties to the lowest action index.
SolverResult value_iteration(const TabularMdp& mdp, const SolverConfig& config);

/// Q_floor = r_min / (1 - gamma) - 1, the value pinned at unsupported pairs.
double unsupported_floor(const EmpiricalModel& model);

/// Full-batch Q-iteration on the empirical model. Unsupported pairs stay at
/// the floor, so an unseen action never wins an argmax.
SolverResult q_learning_from_dataset(const EmpiricalModel& model, const SolverConfig& config);

/// SARSA evaluation of beta_hat on the empirical model (floor elsewhere).
SolverResult sarsa_evaluation(const EmpiricalModel& model, const SolverConfig& config);

/// pi(a|s) proportional to beta(a|s) exp(q(s,a) / lambda).
TabularPolicy reverse_kl_improvement(const TabularPolicy& behavior, const MatrixXd& q,
                                     double lambda);

/// SARSA critic for Q^beta followed by one reverse-KL improvement step with
/// config.onestep_lambda.
SolverResult one_step_rl(const EmpiricalModel& model, const SolverConfig& config);

/// Tabular CQL with soft value iteration.
///
/// Each sweep computes soft targets y(s,a) = r + gamma E[tau lse(Q_t(s',.)/tau)]
/// and then sets Q_{t+1}(s,.) on the supported actions of s to the
/// solution of
///     Q_{t+1}(s,a) = y(s,a) - lambda (mu(a|s) / beta_eps(a|s) - 1),
/// with mu = softmax(Q_{t+1}(s,.)/tau). Taking mu from Q_t instead makes
/// the sweep expansive once lambda / beta is large, so the per-state system
/// is solved exactly: it is the stationarity condition of a strictly convex
/// function and Newton's method finds it in a handful of steps. The sweep
/// map stays a gamma-contraction. Unsupported pairs sit at the floor and
/// enter the softmax as constants. Returns mu_Q as the policy.
SolverResult cql_soft_value_iteration(const EmpiricalModel& model, const SolverConfig& config);

}  // namespace crl
