#include "crl/mdp.hpp"

#include <cmath>
#include <string>

namespace crl {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kPolicyTol = 1e-9;

void check_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& row, double tol,
                        const std::string& what) {
    if ((row.array() < 0.0).any() || !row.allFinite()) {
        throw PreconditionError(what + " has negative or non-finite entries");
    }
    if (std::abs(row.sum() - 1.0) > tol) {
        throw PreconditionError(what + " sums to " + std::to_string(row.sum()) + ", not 1");
    }
}

}  // namespace

TabularPolicy::TabularPolicy(MatrixXd probs) : probs_(std::move(probs)) {
    if (probs_.rows() == 0 || probs_.cols() == 0) throw PreconditionError("policy table is empty");
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
        check_distribution(probs_.row(s), kPolicyTol, "policy row " + std::to_string(s));
    }
}

TabularPolicy TabularPolicy::uniform(int num_states, int num_actions) {
    return TabularPolicy(MatrixXd::Constant(num_states, num_actions, 1.0 / num_actions));
}

TabularPolicy TabularPolicy::deterministic(const std::vector<int>& actions, int num_actions) {
    MatrixXd p = MatrixXd::Zero(static_cast<Eigen::Index>(actions.size()), num_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) p(s, actions[s]) = 1.0;
    return TabularPolicy(std::move(p));
}

TabularPolicy TabularPolicy::softmax(const MatrixXd& logits) {
    MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
        const double m = logits.row(s).maxCoeff();
        p.row(s) = (logits.row(s).array() - m).exp();
        p.row(s) /= p.row(s).sum();
    }
    return TabularPolicy(std::move(p));
}

std::vector<int> TabularPolicy::argmax(double tie_tolerance) const {
    std::vector<int> out(num_states());
    for (int s = 0; s < num_states(); ++s) out[s] = argmax_lowest(probs_.row(s), tie_tolerance);
    return out;
}

TabularMdp::TabularMdp(std::vector<MatrixXd> transition, MatrixXd reward, double discount,
                       VectorXd initial_dist)
    : transition_(std::move(transition)), reward_(std::move(reward)), discount_(discount),
      initial_dist_(std::move(initial_dist)) {
    const auto S = reward_.rows();
    const auto A = reward_.cols();
    if (S == 0 || A == 0) throw PreconditionError("MDP needs at least one state and one action");
    if (static_cast<Eigen::Index>(transition_.size()) != A) {
        throw PreconditionError("transition tensor has wrong number of actions");
    }
    if (!(discount_ > 0.0 && discount_ < 1.0)) {
        throw ConfigError("discount must lie in (0,1)");
    }
    if (!reward_.allFinite()) throw PreconditionError("reward table has non-finite entries");
    if (initial_dist_.size() != S) throw PreconditionError("initial distribution has wrong size");
    check_distribution(initial_dist_.transpose(), kStochasticTol, "initial distribution");

    deterministic_ = true;
    for (Eigen::Index a = 0; a < A; ++a) {
        const MatrixXd& P = transition_[a];
        if (P.rows() != S || P.cols() != S) throw PreconditionError("transition matrix has wrong shape");
        for (Eigen::Index s = 0; s < S; ++s) {
            check_distribution(P.row(s), kStochasticTol,
                               "P(.|" + std::to_string(s) + "," + std::to_string(a) + ")");
            if (P.row(s).maxCoeff() != 1.0) deterministic_ = false;
        }
    }
}

int TabularMdp::next_state(int s, int a) const {
    if (!deterministic_) throw PreconditionError("next_state requires a deterministic MDP");
    Eigen::Index next = 0;
    transition_[a].row(s).maxCoeff(&next);
    return static_cast<int>(next);
}

MatrixXd TabularMdp::expect_next(const VectorXd& v) const {
    MatrixXd out(num_states(), num_actions());
    for (int a = 0; a < num_actions(); ++a) out.col(a) = transition_[a] * v;
    return out;
}

TabularMdp TabularMdp::with_rewards(MatrixXd reward) const {
    return TabularMdp(transition_, std::move(reward), discount_, initial_dist_);
}

std::vector<int> QTable::argmax(double tie_tolerance) const {
    std::vector<int> out(num_states());
    for (int s = 0; s < num_states(); ++s) {
        const double scale = 1.0 + std::abs(values.row(s).maxCoeff());
        out[s] = argmax_lowest(values.row(s), tie_tolerance * scale);
    }
    return out;
}

VectorXd QTable::state_values(const TabularPolicy& policy) const {
    return (values.array() * policy.probs().array()).rowwise().sum();
}

namespace {

Eigen::RowVectorXd dirichlet_row(int n, Rng& rng) {
    // Dirichlet(1) via normalised exponentials.
    Eigen::RowVectorXd row(n);
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        row(i) = -std::log(u);
    }
    return row / row.sum();
}

}  // namespace

TabularMdp random_tabular_mdp(int num_states, int num_actions, double discount, Rng& rng,
                              double reward_lo, double reward_hi) {
    std::vector<MatrixXd> P(num_actions, MatrixXd(num_states, num_states));
    for (int a = 0; a < num_actions; ++a) {
        for (int s = 0; s < num_states; ++s) {
            P[a].row(s) = dirichlet_row(num_states, rng);
            // Renormalise so rows sum to one at the validation tolerance.
            P[a].row(s) /= P[a].row(s).sum();
        }
    }
    MatrixXd r(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) r(s, a) = reward_lo + (reward_hi - reward_lo) * rng.uniform();
    }
    return TabularMdp(std::move(P), std::move(r), discount,
                      VectorXd::Constant(num_states, 1.0 / num_states));
}

TabularPolicy random_policy(int num_states, int num_actions, Rng& rng, double zero_prob) {
    MatrixXd p(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        Eigen::RowVectorXd row = dirichlet_row(num_actions, rng);
        if (zero_prob > 0.0) {
            const int keep = rng.uniform_int(num_actions);
            for (int a = 0; a < num_actions; ++a) {
                if (a != keep && rng.uniform() < zero_prob) row(a) = 0.0;
            }
            row /= row.sum();
        }
        p.row(s) = row;
    }
    return TabularPolicy(std::move(p));
}

TabularPolicy random_policy_within_support(const TabularPolicy& base, Rng& rng) {
    MatrixXd p(base.num_states(), base.num_actions());
    for (int s = 0; s < base.num_states(); ++s) {
        Eigen::RowVectorXd row = dirichlet_row(base.num_actions(), rng);
        for (int a = 0; a < base.num_actions(); ++a) {
            if (base(s, a) <= 0.0) row(a) = 0.0;
        }
        p.row(s) = row / row.sum();
    }
    return TabularPolicy(std::move(p));
}

}  // namespace crl
