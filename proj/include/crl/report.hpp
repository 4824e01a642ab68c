#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace crl {

struct Assertion {
    std::string name;
    std::string expected;
    std::string actual;
    double tolerance = 0.0;
    bool passed = false;
};

struct Artifact {
    std::string filename;
    std::string content;
};

/// In-memory result of one pipeline run. Nothing touches the filesystem
/// until write_report.
struct ExperimentReport {
    std::string command;
    std::string config_hash;
    std::vector<Assertion> assertions;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    std::vector<Artifact> tables;   // CSV
    std::vector<Artifact> figures;  // SVG
    double runtime_seconds = 0.0;

    bool passed() const;
    /// Records an assertion and returns `ok`.
    bool check(std::string name, bool ok, std::string expected, std::string actual, double tolerance = 0.0);
    void add_table(std::string filename, std::string csv) { tables.push_back({std::move(filename), std::move(csv)}); }
    void add_figure(std::string filename, std::string svg) {
        figures.push_back({std::move(filename), std::move(svg)});
    }
    const Artifact* find_table(const std::string& filename) const;
};

nlohmann::ordered_json summary_json(const ExperimentReport& report);

/// Writes config.cfg, every table and figure, and summary.json into `dir`
/// (created if needed). CSV files start with a `# config_hash:` comment
/// line and SVG files carry the hash in an XML comment.
void write_report(const ExperimentReport& report, const std::string& dir, const std::string& canonical_config);

}  // namespace crl
