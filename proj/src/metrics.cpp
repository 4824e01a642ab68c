#include "crl/metrics.hpp"

#include "crl/rng.hpp"

#include <numeric>
#include <utility>

namespace crl {

SimilarityReport argmax_similarity(const TabularPolicy& a, const TabularPolicy& b, const BoolVector& mask,
                                   StateSubset subset, double tie_tolerance) {
    if (a.num_states() != b.num_states() || a.num_actions() != b.num_actions()) {
        throw PreconditionError("similarity of policies with different shapes");
    }
    if (mask.size() != a.num_states()) throw PreconditionError("state mask has wrong size");
    const std::vector<int> ga = a.argmax(tie_tolerance);
    const std::vector<int> gb = b.argmax(tie_tolerance);
    SimilarityReport r;
    r.subset = subset;
    r.chance_level = 1.0 / a.num_actions();
    int hits = 0;
    for (int s = 0; s < a.num_states(); ++s) {
        if (!mask(s)) continue;
        r.states.push_back(s);
        r.per_state_match.push_back(ga[s] == gb[s]);
        hits += ga[s] == gb[s];
    }
    if (r.states.empty()) throw PreconditionError("similarity over an empty state subset");
    r.score = static_cast<double>(hits) / r.states.size();
    return r;
}

SimilarityReport argmax_similarity(const TabularPolicy& a, const TabularPolicy& b) {
    return argmax_similarity(a, b, BoolVector::Constant(a.num_states(), true));
}

BoolVector deviating_states(const MatrixXd& q_star, const TabularPolicy& policy, const BoolVector& mask,
                            double tolerance) {
    const std::vector<int> g = policy.argmax();
    BoolVector out = BoolVector::Constant(q_star.rows(), false);
    for (Eigen::Index s = 0; s < q_star.rows(); ++s) {
        out(s) = mask(s) && q_star(s, g[s]) < q_star.row(s).maxCoeff() - tolerance;
    }
    return out;
}

R2Report action_prob_r2(const TabularPolicy& prediction, const TabularPolicy& target, const BoolVector& mask) {
    if (prediction.num_states() != target.num_states() || prediction.num_actions() != target.num_actions()) {
        throw PreconditionError("R^2 of policies with different shapes");
    }
    std::vector<std::pair<double, double>> pts;
    for (int s = 0; s < target.num_states(); ++s) {
        if (!mask(s)) continue;
        for (int a = 0; a < target.num_actions(); ++a) pts.emplace_back(prediction(s, a), target(s, a));
    }
    if (pts.size() < 2) throw PreconditionError("R^2 needs at least two points");
    double mean = 0.0;
    for (auto& [p, t] : pts) mean += t;
    mean /= pts.size();
    double ss_res = 0.0, ss_tot = 0.0;
    for (auto& [p, t] : pts) {
        ss_res += (p - t) * (p - t);
        ss_tot += (t - mean) * (t - mean);
    }
    if (!(ss_tot > 0.0)) throw PreconditionError("R^2 target is constant");
    return {1.0 - ss_res / ss_tot, static_cast<int>(pts.size()), mask};
}

RandomGridworld generate_random_gridworld(const RandomMdpSpec& spec, double discount) {
    spec.base.validate();
    const int n = spec.base.num_states();
    if (n < 2) throw PreconditionError("random placement needs at least two cells");
    std::vector<std::pair<int, int>> pairs;
    for (int h = 0; h < n; ++h)
        for (int l = 0; l < n; ++l)
            if (h != l) pairs.emplace_back(h, l);
    Rng rng(streams::kRandomMdp);
    for (int i = static_cast<int>(pairs.size()) - 1; i > 0; --i) std::swap(pairs[i], pairs[rng.uniform_int(i + 1)]);
    const auto [h, l] = pairs[spec.seed % pairs.size()];

    RandomGridworld out{spec.base, spec.base.cell_of(h), spec.base.cell_of(l), {}};
    out.spec.rewards[out.high] = spec.high_reward_value;
    out.spec.rewards[out.low] = spec.low_reward_value;
    out.spec.goal_cells = {out.high};
    out.mdp = build_gridworld(out.spec, discount);
    return out;
}

TabularMdp generate_random_mdp(const RandomMdpSpec& spec, double discount) {
    return generate_random_gridworld(spec, discount).mdp;
}

}  // namespace crl
