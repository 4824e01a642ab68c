// Command-line front end: runs one pipeline per (preset, seed) and writes
// its artifacts under OUT/<command>/<preset>/seed<k>.
#include "crl/config.hpp"
#include "crl/experiments.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>

namespace {

enum Exit { kPass = 0, kAssertion = 1, kConfig = 2, kNonConvergence = 3 };

int run(const crl::RunConfig& rc) {
    int status = kPass;
    for (const std::string& preset : rc.preset_paths) {
        const crl::ExperimentConfig config = crl::resolve_config(preset, rc.overrides);
        const std::string stem = std::filesystem::path(preset).stem().string();
        for (std::uint64_t seed : rc.seeds) {
            const crl::ExperimentReport rep = crl::run_command(rc.command, config, seed);
            const auto dir = std::filesystem::path(rc.out_dir) / crl::command_name(rc.command) / stem /
                             fmt::format("seed{}", seed);
            crl::write_report(rep, dir.string(), crl::canonical_config(config));
            for (const auto& a : rep.assertions) {
                fmt::print("  {} {}: expected {}, got {}\n", a.passed ? "ok  " : "FAIL", a.name, a.expected,
                           a.actual);
            }
            fmt::print("{} {} seed {}: {} ({:.2f}s) -> {}\n", crl::command_name(rc.command), stem, seed,
                       rep.passed() ? "pass" : "FAIL", rep.runtime_seconds, dir.string());
            if (!rep.passed()) status = kAssertion;
        }
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular offline RL laboratory"};
    std::string command;
    std::vector<std::string> presets;
    std::string seeds = "0";
    std::string out = "runs";
    std::vector<std::string> sets;
    app.add_option("command", command, "fig2 | fig3 | fig4 | fig5 | fig7 | figcac | verify-theorems | bench")
        ->required();
    app.add_option("--preset", presets, "preset file (repeatable); defaults depend on the command");
    app.add_option("--seeds", seeds, "comma-separated run seeds");
    app.add_option("--out", out, "output directory");
    app.add_option("--set", sets, "key=value override (repeatable)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfig;
    }

    try {
        crl::RunConfig rc;
        const auto cmd = crl::parse_command(command);
        if (!cmd) throw crl::ConfigError(fmt::format("unknown command '{}'", command));
        rc.command = *cmd;
        rc.preset_paths = presets.empty() ? crl::default_presets(rc.command) : presets;
        rc.seeds = crl::parse_seed_list(seeds);
        rc.out_dir = out;
        for (const auto& s : sets) rc.overrides.push_back(crl::parse_override(s));
        return run(rc);
    } catch (const crl::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const crl::NonConvergenceError& e) {
        std::cerr << "did not converge: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const crl::PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kAssertion;
    }
}
