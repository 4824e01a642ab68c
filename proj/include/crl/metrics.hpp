#pragma once

#include "crl/gridworld.hpp"
#include "crl/mdp.hpp"

#include <cstdint>
#include <vector>

namespace crl {

enum class StateSubset { AllStates, DeviatingStates };

struct SimilarityReport {
    std::vector<int> states;          // the compared subset, ascending
    std::vector<bool> per_state_match;  // aligned with `states`
    double score = 0.0;
    StateSubset subset = StateSubset::AllStates;
    double chance_level = 0.0;  // 1 / |A|
};

/// Default tie tolerance for argmax comparisons on probability tables.
inline constexpr double kArgmaxTieTol = 1e-9;

/// Fraction of states in `mask` where the two greedy actions agree.
/// Ties resolve to the lowest action index. Throws on an empty mask.
SimilarityReport argmax_similarity(const TabularPolicy& a, const TabularPolicy& b, const BoolVector& mask,
                                   StateSubset subset = StateSubset::AllStates,
                                   double tie_tolerance = kArgmaxTieTol);
SimilarityReport argmax_similarity(const TabularPolicy& a, const TabularPolicy& b);

/// States in `mask` where `policy`'s greedy action is not optimal for
/// q_star, i.e. Q*(s, a) < max_a' Q*(s, a') - tolerance.
BoolVector deviating_states(const MatrixXd& q_star, const TabularPolicy& policy, const BoolVector& mask,
                            double tolerance = 1e-6);

struct R2Report {
    double r_squared = 0.0;
    int num_points = 0;
    BoolVector state_mask;
};

/// R^2 = 1 - SS_res / SS_tot over all (s, a) with mask(s); `prediction`
/// is compared against `target`.
R2Report action_prob_r2(const TabularPolicy& prediction, const TabularPolicy& target, const BoolVector& mask);

struct RandomMdpSpec {
    GridworldSpec base;
    double high_reward_value = 1.0;
    double low_reward_value = -10.0;
    std::uint64_t seed = 0;
};

struct RandomGridworld {
    GridworldSpec spec;
    Cell high;
    Cell low;
    TabularMdp mdp;
};

/// Places the high and low reward cells on the base grid. All ordered
/// (high, low) pairs with high != low are put in one fixed random order and
/// seed k takes entry k (mod the pair count), so consecutive seeds never
/// repeat a placement until the pairs run out.
RandomGridworld generate_random_gridworld(const RandomMdpSpec& spec, double discount);
TabularMdp generate_random_mdp(const RandomMdpSpec& spec, double discount = 0.95);

}  // namespace crl
