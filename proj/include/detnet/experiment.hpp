#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "detnet/caps.hpp"
#include "detnet/network.hpp"

namespace detnet {

/// k sources s1..sk, relays r1 r2, destinations d1..dk.  `to_relays` is
/// k x 2, `from_relays` 2 x k; a zero gain leaves the link out.
DetNetwork gen_k2k(int k, const std::vector<std::vector<int>>& to_relays,
                   const std::vector<std::vector<int>>& from_relays);

/// Single layer: link s_i -> d_j with gain gains[i][j] when positive.
DetNetwork gen_interference(const std::vector<std::vector<int>>& gains);

struct RandomLayeredParams {
    int layers = 3;     // node layers, sources first and destinations last
    int width = 2;      // relays per middle layer
    double density = 1.0;
    int max_gain = 2;
    int pairs = 1;
};

/// Every possible link between consecutive layers appears with probability
/// `density`, gain uniform in 1..max_gain, drawn from SplitMix64(seed).
DetNetwork gen_random_layered(std::uint64_t seed, const RandomLayeredParams& params);

struct GeneratorSpec {
    std::string name;  // k2k | interference | random_layered | files
    std::uint64_t count = 1;
    nlohmann::json params = nlohmann::json::object();
};

struct ExperimentConfig {
    GeneratorSpec generator;
    std::vector<std::string> strategies;     // MIS MIR MIL coding silent
    std::optional<std::vector<int>> gain_domain;  // default 1..q per instance
    std::string view = "union";                    // or a node id
    SearchCaps caps;
    std::uint64_t seed = 1;
    std::string output = "out";
    bool alpha_bounds = false;  // family upper bounds per instance
    bool timing = false;        // write timing.csv (not reproducible)
    std::size_t simulation_trials = 1;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Instance `index` of the configured generator.  Throws InvalidNetwork when
/// the generated network is empty.
DetNetwork generate_instance(const ExperimentConfig& config, std::uint64_t index);
std::string instance_id(std::uint64_t index);

struct InstanceResult {
    std::string id;
    nlohmann::json report;
    std::vector<std::vector<std::string>> rows;  // summary rows
    std::vector<std::string> refusals;
    double wall_seconds = 0;
};

InstanceResult run_instance(const ExperimentConfig& config, std::uint64_t index);

struct RunSummary {
    std::uint64_t instances = 0;
    std::uint64_t refusals = 0;
};

inline constexpr const char* kSummaryVersion = "detnet-summary v1";

/// Writes instances/<id>.json and summary.csv (and timing.csv when asked)
/// under `out`.  Instances run on `jobs` threads; output is identical for
/// every job count.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out, unsigned jobs);

/// Writes networks/<id>.json for every instance.
std::uint64_t generate_networks(const ExperimentConfig& config, const std::filesystem::path& out);

/// Rebuilds summary.csv from instances/*.json and returns per-strategy
/// aggregate lines.
std::vector<std::string> summarize_reports(const std::filesystem::path& out);

}  // namespace detnet
