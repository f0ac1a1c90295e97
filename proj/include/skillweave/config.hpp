#pragma once

#include "skillweave/catalog.hpp"
#include "skillweave/compiler.hpp"
#include "skillweave/goals.hpp"
#include "skillweave/skills.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

namespace skillweave {

enum class OrchestrationMode { planner, s3 };

std::string_view to_string(OrchestrationMode mode);
OrchestrationMode parse_mode(std::string_view text);

struct S3Options {
    double delta = 0.5;
    std::size_t k = 1;
};

struct GoalExtension {
    ElementId after;
    std::string prompt;
};

struct AssistantConfig {
    // "fixture:banking" or a catalog path, relative to the config file.
    std::string catalog = "fixture:banking";
    std::filesystem::path base_dir;
    OrchestrationMode mode = OrchestrationMode::planner;
    int max_replans = 25;
    double slot_fill_cost = 2.0;
    S3Options s3;
    std::uint64_t seed = 7;
    std::chrono::milliseconds webhook_timeout{10000};
    std::map<ElementId, std::vector<std::string>> aliases;
    std::map<ElementId, std::string> validators;
    std::map<ElementId, std::string> prompts;
    std::map<ElementId, std::string> goal_names;
    std::map<ElementId, std::string> templates;
    std::vector<GoalExtension> goal_extensions;
    Json intents = Json::array();
    std::optional<ElementSet> slot_fill_elements;
    // The document this config was read from, with overrides applied.
    Json source = Json::object();
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int config_schema_version = 1;

AssistantConfig parse_config(const Json& document, const std::filesystem::path& base_dir = {});
AssistantConfig load_config(const std::filesystem::path& path);
AssistantConfig banking_config();

// Applies command-line style overrides and keeps source in step with them.
void set_mode(AssistantConfig& config, OrchestrationMode mode);
void set_seed(AssistantConfig& config, std::uint64_t seed);

// Everything a session needs that does not change while it runs. Shared
// read-only between sessions.
class Assistant {
public:
    static std::shared_ptr<const Assistant> create(AssistantConfig config);
    static std::shared_ptr<const Assistant> create(AssistantConfig config, CatalogFile catalog);
    // Uses the given runtimes instead of resolving catalog endpoints.
    static std::shared_ptr<const Assistant> create(AssistantConfig config, CatalogFile catalog,
                                                   SkillRegistry registry);

    const AssistantConfig& config() const { return config_; }
    const CatalogFile& catalog() const { return catalog_; }
    const Ontology& ontology() const { return catalog_.ontology; }
    const SkillRegistry& registry() const { return registry_; }
    const IntentRules& rules() const { return rules_; }
    const CompileOptions& compile_options() const { return compile_options_; }

    // nullopt when the element has no validator.
    std::optional<bool> valid_value(const ElementId& element, const std::string& value) const;

    std::string display_name(const ElementId& element) const { return catalog_.ontology.display_name(element); }
    std::string goal_name(const ElementSet& goal) const;

    std::string catalog_fingerprint() const;
    std::string config_fingerprint() const;

private:
    Assistant(AssistantConfig config, CatalogFile catalog, std::optional<SkillRegistry> registry);

    AssistantConfig config_;
    CatalogFile catalog_;
    SkillRegistry registry_;
    IntentRules rules_;
    std::map<ElementId, std::regex> validators_;
    CompileOptions compile_options_;
};

// Resolves the catalog reference of a config.
CatalogFile load_config_catalog(const AssistantConfig& config);

}  // namespace skillweave
