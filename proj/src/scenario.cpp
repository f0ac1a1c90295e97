#include "skillweave/scenario.hpp"

#include <chrono>

namespace skillweave {

namespace {

std::vector<std::string> strings(const Json& json, const char* key) {
    auto it = json.find(key);
    if (it == json.end() || it->is_null())
        return {};
    if (it->is_string())
        return {it->get<std::string>()};
    return it->get<std::vector<std::string>>();
}

std::string describe(const Json& send) {
    return send.is_string() ? "\"" + send.get<std::string>() + "\"" : send.dump();
}

std::string listing(const std::vector<std::string>& messages) {
    std::string out;
    for (const auto& message : messages)
        out += "\n    | " + message;
    return out.empty() ? "\n    | (no messages)" : out;
}

std::set<std::string> state_elements(const Json& state) {
    std::set<std::string> out;
    for (const auto& fact : state["ltm"])
        out.insert(fact["element"].get<std::string>());
    return out;
}

std::set<std::string> string_set(const Json& json) {
    std::set<std::string> out;
    for (const auto& item : json)
        out.insert(item.get<std::string>());
    return out;
}

// Empty when state satisfies every expectation, else a description of the first miss.
std::string check_state(const Json& expect, const Json& state, const Json& output) {
    auto known = state_elements(state);
    for (const auto& element : strings(expect, "known"))
        if (!known.count(element))
            return "expected " + element + " to be known";
    for (const auto& element : strings(expect, "not_known"))
        if (known.count(element))
            return "expected " + element + " not to be known";
    auto learned = string_set(state["learned"]);
    for (const auto& fluent : strings(expect, "learned"))
        if (!learned.count(fluent))
            return "expected learned fact " + fluent + "; have " + state["learned"].dump();
    for (const auto& fluent : strings(expect, "not_learned"))
        if (learned.count(fluent))
            return "did not expect learned fact " + fluent;
    auto pruned = string_set(state["pruned"]);
    for (const auto& action : strings(expect, "pruned"))
        if (!pruned.count(action))
            return "expected pruned action " + action + "; have " + state["pruned"].dump();
    auto authorized = string_set(state["authorized"]);
    for (const auto& skill : strings(expect, "authorized"))
        if (!authorized.count(skill))
            return "expected " + skill + " to be authorized";
    if (auto it = expect.find("pending"); it != expect.end()) {
        const Json& pending = state["pending"];
        if (it->is_null() && !pending.is_null())
            return "expected no pending question, have " + pending["subject"].get<std::string>();
        if (it->is_string() && (pending.is_null() || pending["subject"] != *it))
            return "expected a pending question about " + it->get<std::string>() + ", have " +
                   (pending.is_null() ? std::string("none") : pending["subject"].get<std::string>());
    }
    if (auto it = expect.find("goal_stack"); it != expect.end()) {
        Json stack = Json::array();
        for (const auto& entry : state["goal_stack"])
            stack.push_back(entry["goal"]);
        if (stack != *it)
            return "expected goal stack " + it->dump() + ", have " + stack.dump();
    }
    if (auto it = expect.find("achieved"); it != expect.end()) {
        if (output["achieved"] != *it)
            return "expected achieved " + it->dump() + ", have " + output["achieved"].dump();
    }
    if (auto it = expect.find("intent"); it != expect.end()) {
        if (output["intent"]["kind"] != *it)
            return "expected intent " + it->dump() + ", have " + output["intent"]["kind"].dump();
    }
    return {};
}

}  // namespace

Scenario parse_scenario(const Json& document, const std::filesystem::path& base_dir) {
    if (!document.is_object())
        throw ScenarioError("scenario must be an object");
    Scenario scenario;
    scenario.base_dir = base_dir;
    try {
        scenario.name = document.value("name", "scenario");
        scenario.description = document.value("description", "");
        scenario.config = document.value("config", Json());
        if (document.contains("mode"))
            scenario.mode = document["mode"].get<std::string>();
        if (document.contains("seed"))
            scenario.seed = document["seed"].get<std::uint64_t>();
        for (const auto& item : document.value("steps", Json::array())) {
            ScenarioStep step;
            step.send = item.at("send");
            if (!step.send.is_string() && !step.send.is_object())
                throw ScenarioError("send must be text or an event object");
            step.expect = strings(item, "expect");
            step.expect_not = strings(item, "expect_not");
            step.expect_state = item.value("expect_state", Json::object());
            scenario.steps.push_back(std::move(step));
        }
    } catch (const Json::exception& e) {
        throw ScenarioError(std::string("malformed scenario: ") + e.what());
    }
    return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
    Json document;
    try {
        document = load_document(path);
    } catch (const DocumentError& e) {
        throw ScenarioError(e.what());
    }
    Scenario scenario = parse_scenario(document, path.parent_path());
    if (!document.contains("name"))
        scenario.name = path.stem().string();
    return scenario;
}

ScenarioReport run_scenario(const Scenario& scenario, const ScenarioOptions& options) {
    auto start = std::chrono::steady_clock::now();
    ScenarioReport report;
    report.name = scenario.name;

    AssistantConfig config;
    if (options.config) {
        config = load_config(*options.config);
    } else if (scenario.config.is_string()) {
        std::filesystem::path path = scenario.config.get<std::string>();
        config = load_config(path.is_relative() ? scenario.base_dir / path : path);
    } else if (scenario.config.is_object()) {
        config = parse_config(scenario.config, scenario.base_dir);
    } else {
        config = banking_config();
    }
    if (auto mode = options.mode ? options.mode : scenario.mode)
        set_mode(config, parse_mode(*mode));
    if (auto seed = options.seed ? options.seed : scenario.seed)
        set_seed(config, *seed);

    SessionManager manager(config, options.log_dir);
    const std::string id = "scenario";
    manager.create_session({{"session_id", id}});
    if (options.log_dir)
        report.log_path = manager.envelope(id).log_path;

    for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
        const ScenarioStep& step = scenario.steps[i];
        Json event = step.send.is_string() ? Json{{"kind", "utterance"}, {"text", step.send}} : step.send;
        Json output = manager.post_event(id, event);
        report.outputs.push_back(output);
        report.steps_run = i + 1;
        auto messages = output["messages"].get<std::vector<std::string>>();
        std::string text;
        for (const auto& message : messages)
            text += message + "\n";

        std::string problem;
        for (const auto& expected : step.expect) {
            if (text.find(expected) == std::string::npos) {
                problem = "expected reply to contain \"" + expected + "\"" + "\n  got:" + listing(messages);
                break;
            }
        }
        if (problem.empty()) {
            for (const auto& unwanted : step.expect_not) {
                if (text.find(unwanted) != std::string::npos) {
                    problem = "reply should not contain \"" + unwanted + "\"" + "\n  got:" + listing(messages);
                    break;
                }
            }
        }
        if (problem.empty() && !step.expect_state.empty())
            problem = check_state(step.expect_state, manager.get_state(id), output);
        if (!problem.empty()) {
            report.passed = false;
            report.failure = ScenarioFailure{i + 1, "step " + std::to_string(i + 1) + " (send " + describe(step.send) +
                                                        "): " + problem};
            break;
        }
    }
    report.trace = manager.get_trace(id);
    report.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

Json to_json(const ScenarioReport& report) {
    Json json = {
        {"name", report.name},
        {"passed", report.passed},
        {"steps_run", report.steps_run},
        {"elapsed_ms", report.elapsed_ms},
    };
    if (report.failure)
        json["failure"] = {{"step", report.failure->step}, {"message", report.failure->message}};
    if (report.log_path)
        json["log"] = report.log_path->string();
    return json;
}

}  // namespace skillweave
