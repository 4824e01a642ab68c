#include "crl/empirical.hpp"

#include <fmt/format.h>

namespace crl {

EmpiricalModel estimate_empirical_model(const TransitionDataset& dataset, int num_states,
                                        int num_actions, double discount) {
    if (dataset.empty()) throw PreconditionError("cannot estimate a model from an empty dataset");
    if (num_states <= 0 || num_actions <= 0) throw PreconditionError("model dimensions must be positive");
    EmpiricalModel m;
    m.discount_ = discount;
    m.counts_.assign(num_actions, MatrixXd::Zero(num_states, num_states));
    MatrixXd reward_sum = MatrixXd::Zero(num_states, num_actions);
    for (const Transition& tr : dataset.transitions) {
        if (tr.s < 0 || tr.s >= num_states || tr.s_next < 0 || tr.s_next >= num_states ||
            tr.a < 0 || tr.a >= num_actions) {
            throw PreconditionError(fmt::format("transition ({},{},{}) out of range", tr.s, tr.a, tr.s_next));
        }
        m.counts_[tr.a](tr.s, tr.s_next) += 1.0;
        reward_sum(tr.s, tr.a) += tr.r;
    }

    MatrixXd n(num_states, num_actions);
    for (int a = 0; a < num_actions; ++a) n.col(a) = m.counts_[a].rowwise().sum();
    m.support_ = n.array() > 0.0;
    m.reward_ = (m.support_).select(reward_sum.array() / n.array().max(1.0), 0.0);
    m.next_dist_.resize(num_actions);
    for (int a = 0; a < num_actions; ++a) {
        m.next_dist_[a] = m.counts_[a];
        for (int s = 0; s < num_states; ++s) {
            if (n(s, a) > 0.0) m.next_dist_[a].row(s) /= n(s, a);
        }
    }
    m.state_action_dist_ = n / n.sum();
    m.finalize();
    return m;
}

EmpiricalModel exact_model(const TabularMdp& mdp, const TabularPolicy& behavior,
                           const VectorXd& state_dist) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (behavior.num_states() != S || behavior.num_actions() != A || state_dist.size() != S) {
        throw PreconditionError("exact_model: shapes do not match the MDP");
    }
    if ((state_dist.array() < 0.0).any() || std::abs(state_dist.sum() - 1.0) > 1e-12) {
        throw PreconditionError("exact_model: state distribution must be a probability vector");
    }
    EmpiricalModel m;
    m.discount_ = mdp.discount();
    m.state_action_dist_ = state_dist.asDiagonal() * behavior.probs();
    m.support_ = m.state_action_dist_.array() > 0.0;
    m.reward_ = m.support_.select(mdp.reward().array(), 0.0);
    m.counts_.resize(A);
    m.next_dist_.resize(A);
    for (int a = 0; a < A; ++a) {
        m.next_dist_[a] = mdp.transition(a);
        for (int s = 0; s < S; ++s) {
            if (!m.support_(s, a)) m.next_dist_[a].row(s).setZero();
        }
        m.counts_[a] = m.state_action_dist_.col(a).asDiagonal() * m.next_dist_[a];
    }
    m.finalize();
    return m;
}

void EmpiricalModel::finalize() {
    const int S = static_cast<int>(state_action_dist_.rows());
    const int A = static_cast<int>(state_action_dist_.cols());
    state_dist_ = state_action_dist_.rowwise().sum();
    visited_ = state_dist_.array() > 0.0;
    MatrixXd beta(S, A);
    for (int s = 0; s < S; ++s) {
        if (visited_(s)) {
            beta.row(s) = state_action_dist_.row(s) / state_dist_(s);
        } else {
            beta.row(s).setConstant(1.0 / A);
        }
    }
    behavior_ = TabularPolicy(std::move(beta));
}

double EmpiricalModel::min_reward() const {
    double lo = std::numeric_limits<double>::infinity();
    for (int s = 0; s < num_states(); ++s)
        for (int a = 0; a < num_actions(); ++a)
            if (support_(s, a)) lo = std::min(lo, reward_(s, a));
    return lo;
}

double EmpiricalModel::max_reward() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < num_states(); ++s)
        for (int a = 0; a < num_actions(); ++a)
            if (support_(s, a)) hi = std::max(hi, reward_(s, a));
    return hi;
}

bool EmpiricalModel::closed() const {
    for (int a = 0; a < num_actions(); ++a) {
        for (int s = 0; s < num_states(); ++s) {
            if (!support_(s, a)) continue;
            for (int n = 0; n < num_states(); ++n) {
                if (next_dist_[a](s, n) > 0.0 && !visited_(n)) return false;
            }
        }
    }
    return true;
}

MatrixXd EmpiricalModel::expect_next(const VectorXd& v) const {
    MatrixXd out(num_states(), num_actions());
    for (int a = 0; a < num_actions(); ++a) out.col(a) = next_dist_[a] * v;
    return out;
}

EmpiricalModel EmpiricalModel::with_reward_offset(double offset) const {
    EmpiricalModel m = *this;
    m.reward_ = support_.select(reward_.array() + offset, 0.0);
    return m;
}

EmpiricalModel EmpiricalModel::with_rewards(const MatrixXd& reward) const {
    if (reward.rows() != num_states() || reward.cols() != num_actions()) {
        throw PreconditionError("reward table shape does not match the model");
    }
    EmpiricalModel m = *this;
    m.reward_ = support_.select(reward.array(), 0.0);
    return m;
}

TabularMdp EmpiricalModel::to_mdp(double unsupported_reward) const {
    std::vector<MatrixXd> P = next_dist_;
    MatrixXd r = reward_;
    for (int a = 0; a < num_actions(); ++a) {
        for (int s = 0; s < num_states(); ++s) {
            if (!support_(s, a)) {
                P[a](s, s) = 1.0;
                r(s, a) = unsupported_reward;
            }
        }
    }
    return TabularMdp(std::move(P), std::move(r), discount_,
                      VectorXd::Constant(num_states(), 1.0 / num_states()));
}

}  // namespace crl
