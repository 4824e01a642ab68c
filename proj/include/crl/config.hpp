#pragma once

#include "crl/classifier_ac.hpp"
#include "crl/gridworld.hpp"
#include "crl/solvers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace crl {

/// Everything a pipeline needs: environment, dataset, solver and training
/// settings, and sweep grids. Defaults are the tabular settings used for
/// every figure (gamma 0.95, lr 1e-2, 20k updates).
struct ExperimentConfig {
    std::string name;

    GridworldSpec grid;
    double discount = 0.95;

    enum class DatasetKind { Uniform, Path };
    DatasetKind dataset = DatasetKind::Uniform;
    int num_traj = 20;
    int horizon = 50;
    std::uint64_t dataset_seed = 0;
    std::vector<Cell> path;

    /// nullopt means "auto": 1 - r_min when r_min < 0, else 0.
    std::optional<double> reward_offset;

    SolverConfig solver{1e-8, 100000, 1.0, 10.0, 1.0, 1e-6};
    double cql_lambda_low = 0.1;

    ActorCriticConfig ac;
    double eval_lr = 1e-2;
    double tie_tolerance = 1e-6;  // argmax ties on probability tables
    /// Actor settings of the unregularized trainer only. Its log Q gaps are
    /// tiny next to log Q, so plain ascent at actor_lr barely moves.
    ActorCriticConfig::Optimizer unreg_actor_optimizer = ActorCriticConfig::Optimizer::Adam;
    double unreg_actor_lr = 1e-3;

    std::vector<Cell> blue_box;
    enum class Fig2Check { None, Path, Differs };
    Fig2Check fig2_check = Fig2Check::None;

    int num_mdps = 100;
    double high_reward = 1.0;
    double low_reward = -10.0;
    std::vector<double> lambda_grid{0.1, 1.0, 10.0, 100.0, 1000.0};
    int cql_seeds = 5;
    int onestep_seeds = 5;
    std::vector<double> coef_grid{0.0, 0.25, 0.5, 0.75, 1.0};

    int theorem_instances = 20;
    int lambda_instances = 10;
    int extension_instances = 10;
    double theorem_tol = 1e-6;
    double eval_oracle_tol = 1e-3;

    /// Offset actually applied to rewards before classifier critics.
    double resolved_offset() const;
    void validate() const;
};

ExperimentConfig default_config();

/// Applies one `key = value` assignment. Throws ConfigError naming the key
/// for unknown keys and malformed or out-of-range values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::string& origin = "override");

/// Parses a preset file: one `key = value` per line, `#` comments, blank
/// lines ignored. Unspecified keys keep their defaults.
ExperimentConfig parse_preset(const std::string& text, const std::string& origin = "preset");
ExperimentConfig load_preset(const std::string& path);

/// Every key in sorted order, one `key = value` line each. Parsing the
/// output reproduces the config.
std::string canonical_config(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
std::uint64_t fnv1a64(const std::string& bytes);

enum class Command { Fig2, Fig3, Fig4, Fig5, Fig7, FigCac, VerifyTheorems, Bench };

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command c);

struct RunConfig {
    Command command = Command::Fig2;
    std::vector<std::string> preset_paths;
    std::vector<std::uint64_t> seeds{0};
    std::string out_dir = "runs";
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// "0,1,2" -> {0,1,2}. Throws ConfigError on empty or malformed lists.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
/// "key=value" -> pair. Throws ConfigError without '='.
std::pair<std::string, std::string> parse_override(const std::string& text);

/// Presets each command runs when none is given on the command line.
std::vector<std::string> default_presets(Command c);
/// Directory holding the shipped presets.
std::string preset_dir();

/// Loads and overrides the preset for one run.
ExperimentConfig resolve_config(const std::string& preset_path,
                                const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace crl
