#include "crl/report.hpp"

#include "crl/common.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>

namespace crl {

bool ExperimentReport::passed() const {
    for (const auto& a : assertions)
        if (!a.passed) return false;
    return true;
}

bool ExperimentReport::check(std::string name, bool ok, std::string expected, std::string actual, double tolerance) {
    assertions.push_back({std::move(name), std::move(expected), std::move(actual), tolerance, ok});
    return ok;
}

const Artifact* ExperimentReport::find_table(const std::string& filename) const {
    for (const auto& t : tables)
        if (t.filename == filename) return &t;
    return nullptr;
}

nlohmann::ordered_json summary_json(const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["command"] = report.command;
    j["config_hash"] = report.config_hash;
    j["passed"] = report.passed();
    auto& arr = j["assertions"] = nlohmann::ordered_json::array();
    for (const auto& a : report.assertions) {
        arr.push_back({{"name", a.name},
                       {"expected", a.expected},
                       {"actual", a.actual},
                       {"tolerance", a.tolerance},
                       {"passed", a.passed}});
    }
    j["metrics"] = report.metrics;
    auto names = [](const std::vector<Artifact>& xs) {
        auto out = nlohmann::ordered_json::array();
        for (const auto& x : xs) out.push_back(x.filename);
        return out;
    };
    j["tables"] = names(report.tables);
    j["figures"] = names(report.figures);
    j["runtime_seconds"] = report.runtime_seconds;
    return j;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << content;
}

}  // namespace

void write_report(const ExperimentReport& report, const std::string& dir, const std::string& canonical_config) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", dir, ec.message()));
    const fs::path root(dir);
    write_file(root / "config.cfg", fmt::format("# config_hash: {}\n{}", report.config_hash, canonical_config));
    for (const auto& t : report.tables) {
        write_file(root / t.filename, fmt::format("# config_hash: {}\n{}", report.config_hash, t.content));
    }
    for (const auto& f : report.figures) {
        // The hash comment goes right after the opening <svg> tag.
        std::string svg = f.content;
        const auto end = svg.find('>');
        svg.insert(end + 1, fmt::format("\n<!-- config_hash: {} -->", report.config_hash));
        write_file(root / f.filename, svg);
    }
    write_file(root / "summary.json", summary_json(report).dump(2) + "\n");
}

}  // namespace crl
