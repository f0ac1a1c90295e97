#include "skillweave/config.hpp"

#include "skillweave/banking.hpp"

namespace skillweave {

std::string_view to_string(OrchestrationMode mode) {
    return mode == OrchestrationMode::s3 ? "s3" : "planner";
}

OrchestrationMode parse_mode(std::string_view text) {
    if (text == "planner")
        return OrchestrationMode::planner;
    if (text == "s3")
        return OrchestrationMode::s3;
    throw ConfigError("unknown mode '" + std::string(text) + "' (expected planner or s3)");
}

namespace {

template <typename T>
T field(const Json& document, const char* key, T fallback) {
    auto it = document.find(key);
    if (it == document.end() || it->is_null())
        return fallback;
    try {
        return it->get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(std::string("config field '") + key + "' has the wrong type");
    }
}

}  // namespace

AssistantConfig parse_config(const Json& document, const std::filesystem::path& base_dir) {
    if (!document.is_object())
        throw ConfigError("config must be an object");
    if (auto it = document.find("schema_version"); it != document.end()) {
        if (!it->is_number_integer() || it->get<int>() != config_schema_version)
            throw ConfigError("unsupported config schema_version");
    }

    AssistantConfig config;
    config.source = document;
    config.base_dir = base_dir;
    config.catalog = field<std::string>(document, "catalog", config.catalog);
    config.mode = parse_mode(field<std::string>(document, "mode", "planner"));
    config.max_replans = field<int>(document, "max_replans", config.max_replans);
    if (config.max_replans < 1)
        throw ConfigError("max_replans must be at least 1");
    config.slot_fill_cost = field<double>(document, "slot_fill_cost", config.slot_fill_cost);
    if (config.slot_fill_cost <= 0)
        throw ConfigError("slot_fill_cost must be positive");
    if (auto it = document.find("s3"); it != document.end() && it->is_object()) {
        config.s3.delta = field<double>(*it, "delta", config.s3.delta);
        config.s3.k = field<std::size_t>(*it, "k", config.s3.k);
    }
    config.seed = field<std::uint64_t>(document, "seed", config.seed);
    config.webhook_timeout = std::chrono::milliseconds(field<std::int64_t>(document, "webhook_timeout_ms", 10000));
    config.aliases = field<std::map<ElementId, std::vector<std::string>>>(document, "aliases", {});
    config.validators = field<std::map<ElementId, std::string>>(document, "validators", {});
    config.prompts = field<std::map<ElementId, std::string>>(document, "prompts", {});
    config.goal_names = field<std::map<ElementId, std::string>>(document, "goal_names", {});
    config.templates = field<std::map<ElementId, std::string>>(document, "templates", {});
    for (const auto& item : field<Json>(document, "goal_extensions", Json::array())) {
        if (!item.is_object() || !item.contains("after") || !item.contains("prompt"))
            throw ConfigError("goal_extensions entries need 'after' and 'prompt'");
        config.goal_extensions.push_back({item["after"].get<std::string>(), item["prompt"].get<std::string>()});
    }
    config.intents = field<Json>(document, "intents", Json::array());
    if (!config.intents.is_array())
        throw ConfigError("intents must be a list");
    if (auto it = document.find("slot_fill"); it != document.end() && it->is_object() && it->contains("elements"))
        config.slot_fill_elements = (*it)["elements"].get<ElementSet>();
    return config;
}

AssistantConfig load_config(const std::filesystem::path& path) {
    Json document;
    try {
        document = load_document(path);
    } catch (const DocumentError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(document, path.parent_path());
}

AssistantConfig banking_config() {
    return parse_config(parse_document(banking_config_text()));
}

void set_mode(AssistantConfig& config, OrchestrationMode mode) {
    config.mode = mode;
    config.source["mode"] = std::string(to_string(mode));
}

void set_seed(AssistantConfig& config, std::uint64_t seed) {
    config.seed = seed;
    config.source["seed"] = seed;
}

CatalogFile load_config_catalog(const AssistantConfig& config) {
    if (config.catalog == "fixture:banking")
        return banking_catalog();
    std::filesystem::path path = config.catalog;
    if (path.is_relative() && !config.base_dir.empty())
        path = config.base_dir / path;
    try {
        return load_catalog(path);
    } catch (const DocumentError& e) {
        throw CatalogError(e.message(), e.line(), e.column());
    }
}

Assistant::Assistant(AssistantConfig config, CatalogFile catalog, std::optional<SkillRegistry> registry)
    : config_(std::move(config)), catalog_(std::move(catalog)) {
    auto issues = validate(catalog_.catalog, catalog_.ontology);
    if (!issues.empty())
        throw CatalogError("catalog is invalid: " + issues.front().message);

    if (registry) {
        registry_ = std::move(*registry);
    } else {
        RegistryOptions options;
        options.seed = config_.seed;
        options.webhook_timeout = config_.webhook_timeout;
        options.slot_fill_elements = config_.slot_fill_elements;
        options.prompts = config_.prompts;
        registry_ = build_registry(catalog_, options);
    }

    for (const auto& [element, names] : config_.aliases)
        if (!catalog_.ontology.contains(element))
            throw ConfigError("alias for unknown element '" + element + "'");
    std::vector<IntentRule> rules;
    try {
        for (const auto& item : config_.intents)
            rules.push_back(parse_intent_rule(item));
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad intent rule: ") + e.what());
    } catch (const EventError& e) {
        throw ConfigError(e.what());
    }
    rules_ = IntentRules(std::move(rules), ElementResolver(catalog_.ontology, config_.aliases));

    for (const auto& [element, pattern] : config_.validators) {
        try {
            validators_.emplace(element, std::regex(pattern));
        } catch (const std::regex_error& e) {
            throw ConfigError("bad validator for '" + element + "': " + e.what());
        }
    }
    compile_options_.slot_fill_cost = config_.slot_fill_cost;
}

std::shared_ptr<const Assistant> Assistant::create(AssistantConfig config) {
    CatalogFile catalog = load_config_catalog(config);
    return create(std::move(config), std::move(catalog));
}

std::shared_ptr<const Assistant> Assistant::create(AssistantConfig config, CatalogFile catalog) {
    return std::shared_ptr<const Assistant>(new Assistant(std::move(config), std::move(catalog), std::nullopt));
}

std::shared_ptr<const Assistant> Assistant::create(AssistantConfig config, CatalogFile catalog,
                                                   SkillRegistry registry) {
    return std::shared_ptr<const Assistant>(new Assistant(std::move(config), std::move(catalog), std::move(registry)));
}

std::optional<bool> Assistant::valid_value(const ElementId& element, const std::string& value) const {
    auto it = validators_.find(element);
    if (it == validators_.end())
        return std::nullopt;
    return std::regex_match(value, it->second);
}

std::string Assistant::goal_name(const ElementSet& goal) const {
    std::string out;
    for (const auto& element : goal) {
        if (!out.empty())
            out += " and ";
        auto it = config_.goal_names.find(element);
        out += it != config_.goal_names.end() ? it->second : display_name(element);
    }
    return out;
}

std::string Assistant::catalog_fingerprint() const {
    return hex64(fingerprint(to_json(catalog_).dump()));
}

std::string Assistant::config_fingerprint() const {
    return hex64(fingerprint(config_.source.dump()));
}

}  // namespace skillweave
