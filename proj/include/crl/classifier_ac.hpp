#pragma once

#include "crl/empirical.hpp"
#include "crl/solvers.hpp"

#include <cstdint>
#include <vector>

namespace crl {

inline constexpr double kLogitClamp = 30.0;

/// Q-values stored as logits: Q = exp(l), so Q / (Q + 1) = sigmoid(l).
struct LogitTable {
    MatrixXd logits;

    MatrixXd q() const { return logits.array().exp().matrix(); }
    MatrixXd sigmoid() const;
    void clamp() { logits = logits.cwiseMax(-kLogitClamp).cwiseMin(kLogitClamp); }
    static LogitTable from_q(const MatrixXd& q);
    /// Standard-normal logits drawn from stream kCriticInit of `seed`.
    static LogitTable random_normal(int num_states, int num_actions, std::uint64_t seed);
};

double log_sigmoid(double x);

/// L = -sum p(s,a) [ y log sigmoid(l) + log(1 - sigmoid(l)) ].
double ce_critic_loss(const LogitTable& logits, const MatrixXd& targets, const MatrixXd& weights);
/// dL/dl = p(s,a) [ (y + 1) sigmoid(l) - y ].
MatrixXd ce_critic_gradient(const LogitTable& logits, const MatrixXd& targets, const MatrixXd& weights);

/// Binary cross-entropy with positive weight w+ and negative weight w- per
/// entry moves the logit towards sigmoid(l) = w+ / (w+ + w-). The trainers
/// divide the raw gradient (w+ + w-) (sigmoid(l) - t) by the entry's Fisher
/// information (w+ + w-) sigmoid(l) (1 - sigmoid(l)), so `lr` is the fraction
/// of the remaining logit gap closed per step, whatever p(s,a) is. Entries
/// with w+ = w- = 0 are left untouched. Returns the largest logit change.
double preconditioned_ce_step(LogitTable& logits, const MatrixXd& w_pos, const MatrixXd& w_neg,
                              double lr);

struct ClassifierEvalConfig {
    double lr = 1e-2;
    int max_outer = 100000;
    int max_inner = 100000;
    double tolerance = 1e-9;  // sup-norm change of Q between outer rounds
    std::uint64_t init_seed = 0;
};

struct ClassifierEvalResult {
    LogitTable logits;
    QTable q;
    SolveTrace trace;
    int gradient_steps = 0;
};

/// Throws PreconditionError unless every supported reward is >= 0 and at
/// least one is > 0.
void require_positive_rewards(const EmpiricalModel& model);

/// Classifier policy evaluation: alternate exact TD targets y^{backup, Q_t} on
/// the empirical model with cross-entropy gradient steps until the critic
/// matches them. Each inner solve stops at a tolerance tied to the current
/// outer change. Logits start from a standard normal.
ClassifierEvalResult classifier_policy_evaluation(const EmpiricalModel& model,
                                                  const TabularPolicy& backup,
                                                  const ClassifierEvalConfig& config);

/// pi(a|s) proportional to beta(a|s) Q(s,a) at visited states, beta at the others.
TabularPolicy one_step_classifier_policy(const EmpiricalModel& model, const MatrixXd& q_beta);

struct ClassifierAcResult {
    QTable q;
    TabularPolicy policy;
    LogitTable logits;
};

/// Actor-regularized classifier AC: Q^beta by classifier evaluation, then
/// the closed-form maximizer of E_pi[log Q^beta] - KL(pi || beta).
ClassifierAcResult one_step_classifier_ac(const EmpiricalModel& model, const ClassifierEvalConfig& config);

/// Fixed point of Q(s,a) <- y^{td,Q}(s,a) beta(a|s) / neg(a|s) over pairs with
/// beta > 0, by plain iteration. Pairs with neg = 0 < beta hold +inf; in
/// backups their td * Q term is read as its limit beta * y, which is what
/// keeps Q = Q^beta beta / neg exact for policies with holes. Pairs with
/// beta = 0 stay at 0. Throws if td or neg put mass where beta has none at a
/// visited state, if td backs up a +inf pair, or if the model is not closed.
QTable importance_weighted_fixed_point(const EmpiricalModel& model, const TabularPolicy& td,
                                       const TabularPolicy& neg, const SolverConfig& config = {});

/// Fixed point of Q <- y^{pi,Q} beta / pi on the empirical model, computed
/// by iteration. Entries with pi = 0 < beta are +inf. Requires a closed model.
QTable critic_reg_fixed_point(const EmpiricalModel& model, const TabularPolicy& policy,
                              const SolverConfig& config = {});

struct LambdaWeights {
    double critic = 0.0;
    double td = 0.0;
    double kl = 0.0;

    static LambdaWeights uniform(double lambda) { return {lambda, lambda, lambda}; }
    void validate() const;
};

/// (1 - lambda) pi + lambda beta, row-wise.
TabularPolicy lambda_mixture(const TabularPolicy& pi, const TabularPolicy& beta, double lambda);

/// Fixed point of Q <- y^{mix_td, Q} beta / mix_critic. When
/// weights.critic == weights.td this is Q^beta beta / mix.
QTable lambda_critic_fixed_point(const EmpiricalModel& model, const TabularPolicy& policy,
                                 const LambdaWeights& weights, const SolverConfig& config = {});

/// Per state: sum_a pi [log Q^beta + log beta - log((1 - l) pi + l beta)].
VectorXd lambda_one_step_objective(const TabularPolicy& pi, const TabularPolicy& beta,
                                   const MatrixXd& q_beta, double lambda_kl);

/// Per state: sum_a pi(a|s) log Q(s,a), skipping actions with pi = 0.
VectorXd expected_log_q(const TabularPolicy& pi, const MatrixXd& q);

struct TraceRow {
    int iteration = 0;
    double critic_loss = 0.0;
    double actor_objective = 0.0;
    double ema_drift = 0.0;
};

struct ActorCriticConfig {
    LambdaWeights weights{0.0, 0.0, 0.0};
    double critic_lr = 1e-2;
    double actor_lr = 1e-2;
    int critic_steps = 1;
    int actor_steps = 1;
    double ema_rate = 0.05;
    int outer_iters = 20000;
    std::uint64_t init_seed = 0;
    int trace_every = 100;
    /// Oscillation check over the last `window` outer iterations.
    int window = 1000;
    double oscillation_tol = 1e-3;
    /// Plain gradient ascent, or Adam (beta1 0.9, beta2 0.999) on the actor
    /// logits. Adam's step does not shrink with the scale of log Q.
    enum class Optimizer { Sgd, Adam };
    Optimizer actor_optimizer = Optimizer::Sgd;

    void validate() const;
};

/// The EMA-stabilized actor-critic loop shared by the unregularized,
/// critic-regularized and lambda-weighted variants. Per outer iteration:
///   critic: cross-entropy steps with positives beta_hat(a|s) y(s,a),
///           negatives (1 - l_c) pi_bar + l_c beta_hat, and TD targets under
///           (1 - l_td) pi_bar + l_td beta_hat, all in expectation;
///   actor:  ascent on E_pi[log Q] at visited states;
///   ema:    pi_bar <- (1 - eta) pi_bar + eta pi.
/// Actor logits start at zero, pi_bar uniform, critic logits standard normal.
struct ActorCriticRun {
    ClassifierAcResult result;
    TabularPolicy ema_policy;
    std::vector<TraceRow> trace;
};

ActorCriticRun train_classifier_ac(const EmpiricalModel& model, const ActorCriticConfig& config);

/// Critic-regularized classifier AC (negatives and TD backups from pi_bar).
ActorCriticRun critic_reg_classifier_ac(const EmpiricalModel& model, ActorCriticConfig config);
/// Unregularized classifier AC (dataset negatives, TD backups from pi_bar).
ActorCriticRun unregularized_classifier_ac(const EmpiricalModel& model, ActorCriticConfig config);

}  // namespace crl
