#pragma once

#include "skillweave/service.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace skillweave {

// One scripted exchange: what to send and what the reply and state must show.
struct ScenarioStep {
    Json send;
    std::vector<std::string> expect;
    std::vector<std::string> expect_not;
    Json expect_state = Json::object();
};

struct Scenario {
    std::string name;
    std::string description;
    // Config path (relative to the scenario file) or inline object; banking when absent.
    Json config;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::vector<ScenarioStep> steps;
    std::filesystem::path base_dir;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Scenario parse_scenario(const Json& document, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

struct ScenarioOptions {
    std::optional<std::filesystem::path> log_dir;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> config;
};

struct ScenarioFailure {
    std::size_t step = 0;
    std::string message;
};

struct ScenarioReport {
    std::string name;
    bool passed = true;
    std::size_t steps_run = 0;
    std::optional<ScenarioFailure> failure;
    std::vector<Json> outputs;
    Json trace;
    std::optional<std::filesystem::path> log_path;
    double elapsed_ms = 0.0;
};

// Stops at the first failed expectation.
ScenarioReport run_scenario(const Scenario& scenario, const ScenarioOptions& options = {});

Json to_json(const ScenarioReport& report);

}  // namespace skillweave
