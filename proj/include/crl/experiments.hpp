#pragma once

#include "crl/config.hpp"
#include "crl/dataset.hpp"
#include "crl/empirical.hpp"
#include "crl/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace crl {

struct PreparedData {
    TabularMdp mdp;
    TransitionDataset dataset;
    EmpiricalModel model;
};

/// Builds the preset's MDP, dataset and empirical model. `seed` shifts the
/// dataset seed of sampled datasets; path datasets ignore it.
PreparedData prepare(const ExperimentConfig& config, std::uint64_t seed = 0);

/// True when taking `action` from `from` strictly shortens the walking
/// distance to `target` on the grid, with `obstacle` treated as a wall.
bool moves_toward(const GridworldSpec& grid, Cell from, int action, Cell target, Cell obstacle);

/// The highest- and lowest-reward cells of the preset (ties: row-major first).
Cell best_cell(const GridworldSpec& grid);
Cell worst_cell(const GridworldSpec& grid);

/// Long-format tables.
std::string policies_csv(const GridworldSpec& grid, const std::vector<std::pair<std::string, TabularPolicy>>& pols);
std::string q_tables_csv(const std::vector<std::pair<std::string, MatrixXd>>& tables);
std::string argmax_csv(const GridworldSpec& grid, const std::vector<std::pair<std::string, std::vector<int>>>& maps);
std::string trace_csv(const std::vector<TraceRow>& trace);

/// One-step vs critic-regularized vs unregularized classifier AC on a
/// fig2 preset.
ExperimentReport run_fig2(const ExperimentConfig& config, std::uint64_t seed);
/// Value iteration, dataset Q-learning, one-step RL and CQL at two lambdas.
ExperimentReport run_fig3(const ExperimentConfig& config, std::uint64_t seed);
/// One-step vs CQL similarity on deviating states over random placements.
ExperimentReport run_fig4(const ExperimentConfig& config, std::uint64_t seed);
/// All-states similarity between CQL(lambda) and one-step RL.
ExperimentReport run_fig5(const ExperimentConfig& config, std::uint64_t seed);
/// One-step classifier AC vs lambda-weighted critic regularization, with
/// regularization coefficient c mapped to mixture weight 1 - c.
ExperimentReport run_fig7(const ExperimentConfig& config, std::uint64_t seed);
/// Six-method comparison on the fig3 preset.
ExperimentReport run_fig_cac(const ExperimentConfig& config, std::uint64_t seed);
/// The theorem-oracle suite on random small instances plus the preset.
ExperimentReport verify_theorems(const ExperimentConfig& config, std::uint64_t seed);
/// Wall-clock timings of the solvers on the preset.
ExperimentReport run_bench(const ExperimentConfig& config, std::uint64_t seed);

ExperimentReport run_command(Command command, const ExperimentConfig& config, std::uint64_t seed);

}  // namespace crl
