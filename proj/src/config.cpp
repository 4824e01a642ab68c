#include "crl/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#ifndef CRL_PRESET_DIR
#define CRL_PRESET_DIR "presets"
#endif

namespace crl {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        std::string item = trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

// Value errors are reported as plain messages; apply_setting prefixes the key.
struct ValueError {
    std::string message;
};

double to_double(const std::string& v) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
        throw ValueError{fmt::format("'{}' is not a number", v)};
    }
    return x;
}

long long to_int(const std::string& v) {
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ValueError{fmt::format("'{}' is not an integer", v)};
    return x;
}

Cell to_cell(const std::string& v) {
    const auto parts = split(v, ',');
    if (parts.size() != 2) throw ValueError{fmt::format("'{}' is not a cell 'row,col'", v)};
    return {static_cast<int>(to_int(parts[0])), static_cast<int>(to_int(parts[1]))};
}

std::vector<Cell> to_cells(const std::string& v) {
    std::vector<Cell> out;
    for (const auto& item : split(v, ';')) out.push_back(to_cell(item));
    return out;
}

std::vector<double> to_doubles(const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) out.push_back(to_double(item));
    if (out.empty()) throw ValueError{"list must not be empty"};
    return out;
}

std::string fmt_cell(Cell c) { return fmt::format("{},{}", c.row, c.col); }

std::string fmt_cells(const std::vector<Cell>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "; " : "") + fmt_cell(cells[i]);
    return out;
}

std::string fmt_doubles(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += fmt::format("{}{}", i ? "," : "", xs[i]);
    return out;
}

void require(bool ok, const char* message) {
    if (!ok) throw ValueError{message};
}

struct Key {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Key positive_int(T ExperimentConfig::*field) {
    return {[field](ExperimentConfig& c, const std::string& v) {
                const long long x = to_int(v);
                require(x >= 1, "must be a positive integer");
                c.*field = static_cast<T>(x);
            },
            [field](const ExperimentConfig& c) { return fmt::format("{}", c.*field); }};
}

const std::map<std::string, Key>& registry() {
    static const std::map<std::string, Key> keys = [] {
        std::map<std::string, Key> k;
        k["name"] = {[](auto& c, auto& v) { c.name = v; }, [](auto& c) { return c.name; }};
        k["width"] = {[](auto& c, auto& v) {
                          const long long x = to_int(v);
                          require(x >= 1, "width must be positive");
                          c.grid.width = int(x);
                      },
                      [](auto& c) { return fmt::format("{}", c.grid.width); }};
        k["height"] = {[](auto& c, auto& v) {
                           const long long x = to_int(v);
                           require(x >= 1, "height must be positive");
                           c.grid.height = int(x);
                       },
                       [](auto& c) { return fmt::format("{}", c.grid.height); }};
        k["start"] = {[](auto& c, auto& v) { c.grid.start = to_cell(v); },
                      [](auto& c) { return fmt_cell(c.grid.start); }};
        k["goals"] = {[](auto& c, auto& v) { c.grid.goal_cells = to_cells(v); },
                      [](auto& c) { return fmt_cells(c.grid.goal_cells); }};
        k["default_reward"] = {[](auto& c, auto& v) { c.grid.default_reward = to_double(v); },
                               [](auto& c) { return fmt::format("{}", c.grid.default_reward); }};
        k["rewards"] = {[](auto& c, auto& v) {
                            c.grid.rewards.clear();
                            for (const auto& item : split(v, ';')) {
                                const auto kv = split(item, ':');
                                if (kv.size() != 2) throw ValueError{fmt::format("'{}' is not 'row,col: value'", item)};
                                c.grid.rewards[to_cell(kv[0])] = to_double(kv[1]);
                            }
                        },
                        [](auto& c) {
                            std::string out;
                            for (const auto& [cell, r] : c.grid.rewards)
                                out += fmt::format("{}{}: {}", out.empty() ? "" : "; ", fmt_cell(cell), r);
                            return out;
                        }};
        k["discount"] = {[](auto& c, auto& v) {
                             const double x = to_double(v);
                             require(x > 0.0 && x < 1.0, "discount must lie in (0,1)");
                             c.discount = x;
                         },
                         [](auto& c) { return fmt::format("{}", c.discount); }};
        k["dataset"] = {[](auto& c, auto& v) {
                            if (v == "uniform") c.dataset = ExperimentConfig::DatasetKind::Uniform;
                            else if (v == "path") c.dataset = ExperimentConfig::DatasetKind::Path;
                            else throw ValueError{"dataset must be 'uniform' or 'path'"};
                        },
                        [](auto& c) {
                            return std::string(c.dataset == ExperimentConfig::DatasetKind::Path ? "path" : "uniform");
                        }};
        k["num_traj"] = positive_int(&ExperimentConfig::num_traj);
        k["horizon"] = positive_int(&ExperimentConfig::horizon);
        k["dataset_seed"] = {[](auto& c, auto& v) {
                                 const long long x = to_int(v);
                                 require(x >= 0, "dataset_seed must be non-negative");
                                 c.dataset_seed = std::uint64_t(x);
                             },
                             [](auto& c) { return fmt::format("{}", c.dataset_seed); }};
        k["path"] = {[](auto& c, auto& v) { c.path = to_cells(v); }, [](auto& c) { return fmt_cells(c.path); }};
        k["reward_offset"] = {[](auto& c, auto& v) {
                                  if (v == "auto") c.reward_offset.reset();
                                  else c.reward_offset = to_double(v);
                              },
                              [](auto& c) {
                                  return c.reward_offset ? fmt::format("{}", *c.reward_offset) : std::string("auto");
                              }};
        k["tolerance"] = {[](auto& c, auto& v) {
                              const double x = to_double(v);
                              require(x > 0.0, "tolerance must be positive");
                              c.solver.tolerance = x;
                          },
                          [](auto& c) { return fmt::format("{}", c.solver.tolerance); }};
        k["max_iters"] = {[](auto& c, auto& v) {
                              const long long x = to_int(v);
                              require(x >= 1, "max_iters must be positive");
                              c.solver.max_iters = int(x);
                          },
                          [](auto& c) { return fmt::format("{}", c.solver.max_iters); }};
        k["temperature"] = {[](auto& c, auto& v) {
                                const double x = to_double(v);
                                require(x > 0.0, "temperature must be positive");
                                c.solver.temperature = x;
                            },
                            [](auto& c) { return fmt::format("{}", c.solver.temperature); }};
        k["behavior_floor"] = {[](auto& c, auto& v) {
                                   const double x = to_double(v);
                                   require(x > 0.0 && x < 1.0, "behavior_floor must lie in (0,1)");
                                   c.solver.behavior_floor = x;
                               },
                               [](auto& c) { return fmt::format("{}", c.solver.behavior_floor); }};
        k["cql_lambda"] = {[](auto& c, auto& v) {
                               const double x = to_double(v);
                               require(x >= 0.0, "cql_lambda must be non-negative");
                               c.solver.cql_lambda = x;
                           },
                           [](auto& c) { return fmt::format("{}", c.solver.cql_lambda); }};
        k["cql_lambda_low"] = {[](auto& c, auto& v) {
                                   const double x = to_double(v);
                                   require(x >= 0.0, "cql_lambda_low must be non-negative");
                                   c.cql_lambda_low = x;
                               },
                               [](auto& c) { return fmt::format("{}", c.cql_lambda_low); }};
        k["onestep_lambda"] = {[](auto& c, auto& v) {
                                   const double x = to_double(v);
                                   require(x > 0.0, "onestep_lambda must be positive");
                                   c.solver.onestep_lambda = x;
                               },
                               [](auto& c) { return fmt::format("{}", c.solver.onestep_lambda); }};
        k["lr"] = {[](auto& c, auto& v) {
                       const double x = to_double(v);
                       require(x > 0.0 && x <= 1.0, "lr must lie in (0,1]");
                       c.ac.critic_lr = x;
                       c.eval_lr = x;
                   },
                   [](auto& c) { return fmt::format("{}", c.ac.critic_lr); }};
        k["actor_lr"] = {[](auto& c, auto& v) {
                             const double x = to_double(v);
                             require(x > 0.0, "actor_lr must be positive");
                             c.ac.actor_lr = x;
                         },
                         [](auto& c) { return fmt::format("{}", c.ac.actor_lr); }};
        k["ema_rate"] = {[](auto& c, auto& v) {
                             const double x = to_double(v);
                             require(x > 0.0 && x <= 1.0, "ema_rate must lie in (0,1]");
                             c.ac.ema_rate = x;
                         },
                         [](auto& c) { return fmt::format("{}", c.ac.ema_rate); }};
        k["outer_iters"] = {[](auto& c, auto& v) {
                                const long long x = to_int(v);
                                require(x >= 1, "outer_iters must be positive");
                                c.ac.outer_iters = int(x);
                            },
                            [](auto& c) { return fmt::format("{}", c.ac.outer_iters); }};
        k["critic_steps"] = {[](auto& c, auto& v) {
                                 const long long x = to_int(v);
                                 require(x >= 1, "critic_steps must be positive");
                                 c.ac.critic_steps = int(x);
                             },
                             [](auto& c) { return fmt::format("{}", c.ac.critic_steps); }};
        k["actor_steps"] = {[](auto& c, auto& v) {
                                const long long x = to_int(v);
                                require(x >= 0, "actor_steps must be non-negative");
                                c.ac.actor_steps = int(x);
                            },
                            [](auto& c) { return fmt::format("{}", c.ac.actor_steps); }};
        k["init_seed"] = {[](auto& c, auto& v) {
                              const long long x = to_int(v);
                              require(x >= 0, "init_seed must be non-negative");
                              c.ac.init_seed = std::uint64_t(x);
                          },
                          [](auto& c) { return fmt::format("{}", c.ac.init_seed); }};
        k["oscillation_window"] = {[](auto& c, auto& v) {
                                       const long long x = to_int(v);
                                       require(x >= 1, "oscillation_window must be positive");
                                       c.ac.window = int(x);
                                   },
                                   [](auto& c) { return fmt::format("{}", c.ac.window); }};
        k["oscillation_tol"] = {[](auto& c, auto& v) {
                                    const double x = to_double(v);
                                    require(x > 0.0, "oscillation_tol must be positive");
                                    c.ac.oscillation_tol = x;
                                },
                                [](auto& c) { return fmt::format("{}", c.ac.oscillation_tol); }};
        k["unreg_actor_optimizer"] = {[](auto& c, auto& v) {
                                          if (v == "sgd") c.unreg_actor_optimizer = ActorCriticConfig::Optimizer::Sgd;
                                          else if (v == "adam") c.unreg_actor_optimizer = ActorCriticConfig::Optimizer::Adam;
                                          else throw ValueError{"unreg_actor_optimizer must be sgd or adam"};
                                      },
                                      [](auto& c) {
                                          return std::string(c.unreg_actor_optimizer == ActorCriticConfig::Optimizer::Sgd
                                                                 ? "sgd"
                                                                 : "adam");
                                      }};
        k["unreg_actor_lr"] = {[](auto& c, auto& v) {
                                   const double x = to_double(v);
                                   require(x > 0.0, "unreg_actor_lr must be positive");
                                   c.unreg_actor_lr = x;
                               },
                               [](auto& c) { return fmt::format("{}", c.unreg_actor_lr); }};
        k["tie_tolerance"] = {[](auto& c, auto& v) {
                                  const double x = to_double(v);
                                  require(x >= 0.0, "tie_tolerance must be non-negative");
                                  c.tie_tolerance = x;
                              },
                              [](auto& c) { return fmt::format("{}", c.tie_tolerance); }};
        k["blue_box"] = {[](auto& c, auto& v) { c.blue_box = to_cells(v); },
                         [](auto& c) { return fmt_cells(c.blue_box); }};
        k["fig2_check"] = {[](auto& c, auto& v) {
                               if (v == "none") c.fig2_check = ExperimentConfig::Fig2Check::None;
                               else if (v == "path") c.fig2_check = ExperimentConfig::Fig2Check::Path;
                               else if (v == "differs") c.fig2_check = ExperimentConfig::Fig2Check::Differs;
                               else throw ValueError{"fig2_check must be none, path or differs"};
                           },
                           [](auto& c) {
                               switch (c.fig2_check) {
                                   case ExperimentConfig::Fig2Check::Path: return std::string("path");
                                   case ExperimentConfig::Fig2Check::Differs: return std::string("differs");
                                   default: return std::string("none");
                               }
                           }};
        k["num_mdps"] = positive_int(&ExperimentConfig::num_mdps);
        k["high_reward"] = {[](auto& c, auto& v) { c.high_reward = to_double(v); },
                            [](auto& c) { return fmt::format("{}", c.high_reward); }};
        k["low_reward"] = {[](auto& c, auto& v) { c.low_reward = to_double(v); },
                           [](auto& c) { return fmt::format("{}", c.low_reward); }};
        k["lambda_grid"] = {[](auto& c, auto& v) {
                                auto xs = to_doubles(v);
                                for (double x : xs) require(x > 0.0, "lambda_grid values must be positive");
                                c.lambda_grid = std::move(xs);
                            },
                            [](auto& c) { return fmt_doubles(c.lambda_grid); }};
        k["cql_seeds"] = positive_int(&ExperimentConfig::cql_seeds);
        k["onestep_seeds"] = positive_int(&ExperimentConfig::onestep_seeds);
        k["coef_grid"] = {[](auto& c, auto& v) {
                              auto xs = to_doubles(v);
                              for (double x : xs) require(x >= 0.0 && x <= 1.0, "coef_grid values must lie in [0,1]");
                              c.coef_grid = std::move(xs);
                          },
                          [](auto& c) { return fmt_doubles(c.coef_grid); }};
        k["theorem_instances"] = positive_int(&ExperimentConfig::theorem_instances);
        k["lambda_instances"] = positive_int(&ExperimentConfig::lambda_instances);
        k["extension_instances"] = positive_int(&ExperimentConfig::extension_instances);
        k["theorem_tol"] = {[](auto& c, auto& v) {
                                const double x = to_double(v);
                                require(x > 0.0, "theorem_tol must be positive");
                                c.theorem_tol = x;
                            },
                            [](auto& c) { return fmt::format("{}", c.theorem_tol); }};
        k["eval_oracle_tol"] = {[](auto& c, auto& v) {
                               const double x = to_double(v);
                               require(x > 0.0, "eval_oracle_tol must be positive");
                               c.eval_oracle_tol = x;
                           },
                           [](auto& c) { return fmt::format("{}", c.eval_oracle_tol); }};
        return k;
    }();
    return keys;
}

}  // namespace

double ExperimentConfig::resolved_offset() const {
    if (reward_offset) return *reward_offset;
    double r_min = grid.default_reward;
    for (const auto& [cell, r] : grid.rewards) r_min = std::min(r_min, r);
    return r_min < 0.0 ? 1.0 - r_min : 0.0;
}

void ExperimentConfig::validate() const {
    try {
        grid.validate();
    } catch (const Error& e) {
        throw ConfigError(fmt::format("grid: {}", e.what()));
    }
    auto on_grid = [&](const std::vector<Cell>& cells, const char* key) {
        for (Cell c : cells)
            if (!grid.contains(c)) throw ConfigError(fmt::format("key '{}': cell {},{} is off the grid", key, c.row, c.col));
    };
    on_grid(path, "path");
    on_grid(blue_box, "blue_box");
    if (dataset == DatasetKind::Path && path.size() < 2) {
        throw ConfigError("key 'path': a path dataset needs at least two cells");
    }
    solver.validate();
    ac.validate();
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::string& origin) {
    const auto& keys = registry();
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(fmt::format("{}: unknown key '{}'", origin, key));
    try {
        it->second.set(config, trim(value));
    } catch (const ValueError& e) {
        throw ConfigError(fmt::format("{}: key '{}': {}", origin, key, e.message));
    }
}

ExperimentConfig parse_preset(const std::string& text, const std::string& origin) {
    ExperimentConfig config = default_config();
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
        }
        apply_setting(config, trim(body.substr(0, eq)), body.substr(eq + 1),
                      fmt::format("{}:{}", origin, line_no));
    }
    return config;
}

ExperimentConfig load_preset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open preset '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_preset(buf.str(), path);
}

std::string canonical_config(const ExperimentConfig& config) {
    std::string out;
    for (const auto& [key, entry] : registry()) out += fmt::format("{} = {}\n", key, entry.get(config));
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& config) {
    return fmt::format("{:016x}", fnv1a64(canonical_config(config)));
}

namespace {
const std::vector<std::pair<Command, std::string>> kCommands = {
    {Command::Fig2, "fig2"},     {Command::Fig3, "fig3"},
    {Command::Fig4, "fig4"},     {Command::Fig5, "fig5"},
    {Command::Fig7, "fig7"},     {Command::FigCac, "figcac"},
    {Command::VerifyTheorems, "verify-theorems"}, {Command::Bench, "bench"}};
}

std::optional<Command> parse_command(const std::string& name) {
    for (const auto& [c, n] : kCommands)
        if (n == name) return c;
    return std::nullopt;
}

std::string command_name(Command c) {
    for (const auto& [cc, n] : kCommands)
        if (cc == c) return n;
    return "?";
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    if (text.find(",,") != std::string::npos || text.starts_with(',') || text.ends_with(',')) {
        throw ConfigError(fmt::format("--seeds: empty entry in '{}'", text));
    }
    for (const auto& item : split(text, ',')) {
        std::uint64_t x = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
            throw ConfigError(fmt::format("--seeds: '{}' is not a non-negative integer", item));
        }
        out.push_back(x);
    }
    if (out.empty()) throw ConfigError("--seeds: seed list must not be empty");
    return out;
}

std::pair<std::string, std::string> parse_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--set '{}': expected key=value", text));
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

std::string preset_dir() {
    if (const char* env = std::getenv("CRL_PRESET_DIR")) return env;
    return CRL_PRESET_DIR;
}

std::vector<std::string> default_presets(Command c) {
    const std::string dir = preset_dir() + "/";
    switch (c) {
        case Command::Fig2: return {dir + "fig2-left.cfg", dir + "fig2-center.cfg", dir + "fig2-right.cfg"};
        case Command::Fig7: return {dir + "fig2-left.cfg"};
        case Command::VerifyTheorems: return {dir + "fig2-left.cfg"};
        default: return {dir + "fig3.cfg"};
    }
}

ExperimentConfig resolve_config(const std::string& preset_path,
                                const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig config = load_preset(preset_path);
    for (const auto& [k, v] : overrides) apply_setting(config, k, v, "--set");
    config.validate();
    return config;
}

}  // namespace crl
