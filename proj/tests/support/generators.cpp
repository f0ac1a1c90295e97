#include "generators.hpp"

#include <algorithm>

namespace skillweave::testing {

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) {
    return std::bernoulli_distribution(p)(rng);
}

std::string element_name(int i) {
    return "e" + std::to_string(i);
}

ElementSet random_subset(std::mt19937_64& rng, int elements, int lo, int hi) {
    ElementSet out;
    int size = uniform(rng, lo, hi);
    for (int tries = 0; static_cast<int>(out.size()) < size && tries < 20; ++tries)
        out.insert(element_name(uniform(rng, 0, elements - 1)));
    return out;
}

}  // namespace

CatalogFile random_catalog(std::mt19937_64& rng, const CatalogLimits& limits) {
    CatalogFile file;
    int elements = uniform(rng, 3, limits.max_elements);
    for (int i = 0; i < elements; ++i) {
        ElementType type;
        type.id = element_name(i);
        if (i > 0 && chance(rng, 0.2))
            type.parent = element_name(uniform(rng, 0, i - 1));
        type.sensitive = chance(rng, 0.2);
        type.slot_fillable = chance(rng, 0.3);
        file.ontology.add(type);
    }

    int skills = uniform(rng, 1, limits.max_skills);
    for (int s = 0; s < skills; ++s) {
        SkillSpec skill;
        skill.skill_id = "s" + std::to_string(s);
        skill.endpoint = "http://127.0.0.1:9/" + skill.skill_id;
        skill.description = "skill " + skill.skill_id;
        skill.retry_limit = uniform(rng, 1, 3);
        int pairs = uniform(rng, 1, limits.max_pairs);
        for (int p = 0; p < pairs; ++p) {
            IoPair pair;
            pair.pair_id = "p" + std::to_string(p);
            pair.inputs = random_subset(rng, elements, 0, 2);
            int outcomes = uniform(rng, 1, limits.max_outcomes);
            std::set<ElementSet> seen;
            for (int tries = 0; static_cast<int>(pair.outcomes.size()) < outcomes && tries < 20; ++tries) {
                ElementSet outcome = random_subset(rng, elements, 1, 2);
                if (seen.insert(outcome).second)
                    pair.outcomes.push_back(outcome);
            }
            skill.pairs.push_back(std::move(pair));
        }
        file.catalog.skills.emplace(skill.skill_id, std::move(skill));
    }

    if (chance(rng, limits.slot_fill_chance)) {
        SkillSpec fill{"slot_fill", std::string(slot_fill_endpoint), "question to you", 2,
                       {IoPair{"ask", {}, {{"element"}}}}, true};
        file.catalog.skills.emplace(fill.skill_id, fill);
    }
    SkillSpec authorize{"authorize", std::string(authorize_endpoint), "permission request", 1,
                        {IoPair{"confirm", {}, {{"authorized"}}}}, true};
    file.catalog.skills.emplace(authorize.skill_id, authorize);
    return file;
}

CompileInput random_compile_input(std::mt19937_64& rng, const CatalogFile& file) {
    int elements = static_cast<int>(file.ontology.size());
    CompileInput input;
    input.goal = random_subset(rng, elements, 1, 2);
    input.known = random_subset(rng, elements, 0, 2);
    for (const auto& [id, skill] : file.catalog.skills) {
        if (skill.internal || !chance(rng, 0.2))
            continue;
        const IoPair& pair = skill.pairs[uniform(rng, 0, static_cast<int>(skill.pairs.size()) - 1)];
        const ElementSet& outcome = pair.outcomes.front();
        input.learned.insert(Fluent::cannot_establish(pair_ref(id, pair.pair_id), *outcome.begin()));
    }
    if (file.catalog.slot_fill_skill() && chance(rng, 0.3))
        input.learned.insert(Fluent::cannot_establish("slot_fill.ask", element_name(uniform(rng, 0, elements - 1))));
    return input;
}

PlanningModel random_flat_model(std::mt19937_64& rng, int elements, int actions) {
    PlanningModel model;
    auto fluents = [&](int lo, int hi) {
        FluentSet out;
        for (const auto& element : random_subset(rng, elements, lo, hi))
            out.insert(Fluent::known(element));
        return out;
    };
    for (int i = 0; i < actions; ++i) {
        GroundedAction action;
        action.id = "a" + std::to_string(i);
        action.skill_id = action.id;
        action.pair_id = "p";
        action.preconditions = fluents(0, 2);
        action.add_effects = fluents(1, 2);
        for (const auto& f : action.add_effects)
            action.outcome.insert(f.first);
        model.actions.emplace(action.id, std::move(action));
    }
    model.initial_state = fluents(1, 2);
    model.goal = fluents(1, 2);
    return model;
}

std::string random_banking_utterance(std::mt19937_64& rng) {
    static const std::vector<std::string> pool = {
        "I'd like to apply for a loan",
        "can I get a credit card?",
        "what's my account balance?",
        "what is my credit score?",
        "jane@example.com",
        "sam@example.com",
        "ghost@example.com",
        "my account number is 11223344",
        "55667788",
        "Jane Doe",
        "my name is Sam Smith",
        "12 Elm Street, Springfield",
        "20000",
        "85000",
        "40000",
        "jane_id.png",
        "blurry_scan.png",
        "yes",
        "no",
        "stop",
        "what did you do?",
        "why did you ask for my salary?",
        "why did you need my account number?",
        "how did you get my credit score?",
        "was my loan approved?",
        "asdf",
        "$1,000",
    };
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
}

std::vector<std::string> random_banking_sequence(std::mt19937_64& rng, int max_length) {
    static const std::vector<std::vector<std::string>> scripts = {
        {"I'd like to apply for a loan", "jane@example.com", "Jane Doe", "20000", "85000", "yes"},
        {"I need a loan", "my account number is 55667788", "Sam Smith", "5000", "40000", "yes", "can I get a credit card?",
         "12 Elm Street, Springfield"},
        {"what's my account balance?", "my account number is 11223344", "yes"},
        {"can I get a credit card?", "sam@example.com", "jane_id.png", "I'd like to apply for a loan", "50000", "90000",
         "yes"},
    };
    std::vector<std::string> out;
    if (chance(rng, 0.5)) {
        int length = uniform(rng, 1, max_length);
        for (int i = 0; i < length; ++i)
            out.push_back(random_banking_utterance(rng));
        return out;
    }
    const auto& script = scripts[uniform(rng, 0, static_cast<int>(scripts.size()) - 1)];
    for (const auto& line : script) {
        if (chance(rng, 0.2))
            out.push_back(random_banking_utterance(rng));
        if (chance(rng, 0.1))
            continue;
        out.push_back(line == "yes" && chance(rng, 0.3) ? "no" : line);
    }
    return out;
}

std::unique_ptr<Session> play_scenario(const Scenario& scenario, Clock clock) {
    AssistantConfig config = banking_config();
    if (scenario.config.is_string())
        config = load_config(scenario.base_dir / scenario.config.get<std::string>());
    else if (scenario.config.is_object())
        config = parse_config(scenario.config, scenario.base_dir);
    if (scenario.mode)
        set_mode(config, parse_mode(*scenario.mode));
    if (scenario.seed)
        set_seed(config, *scenario.seed);
    auto session = std::make_unique<Session>("scenario", Assistant::create(config), std::move(clock));
    for (const auto& step : scenario.steps) {
        Json event = step.send.is_string() ? Json{{"kind", "utterance"}, {"text", step.send}} : step.send;
        session->handle_event(event_from_json(event));
    }
    return session;
}

std::filesystem::path source_dir() {
    return SKILLWEAVE_SOURCE_DIR;
}

std::vector<std::filesystem::path> bundled_scenarios() {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(source_dir() / "data" / "scenarios"))
        if (entry.path().extension() == ".json")
            out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace skillweave::testing
