#include "skillweave/explainer.hpp"
#include "skillweave/http_api.hpp"
#include "skillweave/scenario.hpp"
#include "skillweave/service.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace skillweave;

namespace {

struct Globals {
    std::string config;
    std::string mode;
    std::int64_t seed = -1;
    bool json = false;
};

AssistantConfig make_config(const Globals& globals) {
    AssistantConfig config = globals.config.empty() ? banking_config() : load_config(globals.config);
    if (!globals.mode.empty())
        set_mode(config, parse_mode(globals.mode));
    if (globals.seed >= 0)
        set_seed(config, static_cast<std::uint64_t>(globals.seed));
    return config;
}

ElementSet parse_elements(const Assistant& assistant, const std::string& text) {
    ElementSet out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        auto start = item.find_first_not_of(' ');
        if (start == std::string::npos)
            continue;
        item = item.substr(start, item.find_last_not_of(' ') - start + 1);
        if (assistant.ontology().contains(item)) {
            out.insert(item);
        } else if (auto resolved = assistant.rules().resolver().resolve(item)) {
            out.insert(*resolved);
        } else {
            throw std::runtime_error("unknown element '" + item + "'");
        }
    }
    return out;
}

PlanningModel model_for(const Assistant& assistant, const std::string& goal, const std::string& known) {
    CompileInput input;
    input.goal = parse_elements(assistant, goal);
    input.known = parse_elements(assistant, known);
    return compile(assistant.catalog().catalog, assistant.ontology(), input, assistant.compile_options());
}

Json landmarks_json(const PlanningModel& model) {
    try {
        return to_json(extract_landmarks(model));
    } catch (const PlannerError& e) {
        return {{"error", e.what()}};
    }
}

void print_plan_text(const Json& plan) {
    if (plan["plan"].is_null()) {
        std::cout << "no plan yet\n";
        return;
    }
    std::cout << "goal: " << plan["goal"].dump() << "  status: " << plan["status"].get<std::string>()
              << "  cost: " << plan["cost"] << "\n";
    int n = 0;
    for (const auto& step : plan["steps"])
        std::cout << "  " << ++n << ". " << step["action_id"].get<std::string>() << "\n";
}

void print_output(const Json& output, bool json) {
    if (json) {
        std::cout << output.dump() << "\n";
        return;
    }
    for (const auto& message : output["messages"])
        std::cout << "assistant> " << message.get<std::string>() << "\n";
}

void print_explanation(const Json& explanation, bool json) {
    if (json)
        std::cout << explanation.dump() << "\n";
    else
        std::cout << "assistant> " << explanation.value("text", std::string()) << "\n";
}

int repl(const Globals& globals, const std::string& log_dir) {
    std::optional<std::filesystem::path> logs;
    if (!log_dir.empty())
        logs = log_dir;
    SessionManager manager(make_config(globals), logs);
    std::string id = manager.create_session();
    if (!globals.json)
        std::cout << "session " << id << ". Type /quit to leave.\n";
    std::string line;
    while ((globals.json || std::cout << "you> " << std::flush) && std::getline(std::cin, line)) {
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        try {
            if (line[0] != '/') {
                print_output(manager.post_event(id, {{"kind", "utterance"}, {"text", line}}), globals.json);
                continue;
            }
            std::istringstream words(line);
            std::string command, element, mode;
            words >> command >> element >> mode;
            if (command == "/quit" || command == "/exit")
                return 0;
            if (command == "/why")
                print_explanation(manager.explain(id, "why", element, mode), globals.json);
            else if (command == "/how")
                print_explanation(manager.explain(id, "how", element, ""), globals.json);
            else if (command == "/chain")
                print_explanation(manager.explain(id, "chain", element, ""), globals.json);
            else if (command == "/summary")
                print_explanation(manager.explain(id, "what", element, ""), globals.json);
            else if (command == "/stop")
                print_output(manager.post_event(id, {{"kind", "utterance"}, {"text", "stop"}}), globals.json);
            else if (command == "/trace")
                std::cout << manager.get_trace(id).dump(globals.json ? -1 : 2) << "\n";
            else if (command == "/state")
                std::cout << manager.get_state(id).dump(globals.json ? -1 : 2) << "\n";
            else if (command == "/plan") {
                Json plan = manager.get_plan(id);
                if (globals.json)
                    std::cout << plan.dump() << "\n";
                else
                    print_plan_text(plan);
            } else {
                std::cout << "commands: /why <element> [final|chain], /how <element>, /chain <element>, /summary, "
                             "/stop, /trace, /state, /plan, /quit\n";
            }
        } catch (const ServiceError& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return 0;
}

int run(const Globals& globals, const std::vector<std::string>& files, const std::string& log_dir) {
    ScenarioOptions options;
    if (!log_dir.empty())
        options.log_dir = log_dir;
    if (!globals.mode.empty())
        options.mode = globals.mode;
    if (globals.seed >= 0)
        options.seed = static_cast<std::uint64_t>(globals.seed);
    if (!globals.config.empty())
        options.config = globals.config;
    int status = 0;
    for (const auto& file : files) {
        ScenarioReport report = run_scenario(load_scenario(file), options);
        if (globals.json) {
            std::cout << to_json(report).dump() << "\n";
        } else if (report.passed) {
            std::cout << "PASS " << report.name << " (" << report.steps_run << " steps, " << report.elapsed_ms
                      << " ms)\n";
        } else {
            std::cout << "FAIL " << report.name << ": " << report.failure->message << "\n";
        }
        if (!report.passed)
            status = 1;
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planning-based conversational assistant"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals globals;
    app.add_option("--config", globals.config, "Assistant config (JSON or YAML); bundled banking when omitted");
    app.add_option("--mode", globals.mode, "Orchestration mode")->check(CLI::IsMember({"planner", "s3"}));
    app.add_option("--seed", globals.seed, "Fixture seed")->check(CLI::NonNegativeNumber);
    app.add_flag("--json", globals.json, "Machine-readable output");

    std::string log_dir;
    auto* repl_cmd = app.add_subcommand("repl", "Chat with an in-process session");
    repl_cmd->add_option("--log-dir", log_dir, "Write the session log here");

    std::vector<std::string> scenario_files;
    auto* run_cmd = app.add_subcommand("run", "Run scripted scenarios");
    run_cmd->add_option("scenarios", scenario_files)->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--log-dir", log_dir, "Write session logs here");

    std::string goal, known;
    bool pddl = false;
    auto* compile_cmd = app.add_subcommand("compile", "Print the grounded planning model");
    compile_cmd->add_flag("--dump", "Dump the model (default)");
    compile_cmd->add_flag("--pddl", pddl, "Print PDDL domain and problem text instead");
    compile_cmd->add_option("--goal", goal, "Comma-separated goal elements");
    compile_cmd->add_option("--known", known, "Comma-separated elements known initially");

    auto* plan_cmd = app.add_subcommand("plan", "Plan for a goal from a given state");
    plan_cmd->add_option("--goal", goal, "Comma-separated goal elements")->required();
    plan_cmd->add_option("--known", known, "Comma-separated elements known initially");
    bool greedy = false;
    plan_cmd->add_flag("--greedy", greedy, "Greedy best-first search instead of A*");

    std::string what;
    auto* dump_cmd = app.add_subcommand("dump", "Dump the catalog, a model or its landmarks");
    dump_cmd->add_option("what", what)->required()->check(CLI::IsMember({"model", "landmarks", "catalog"}));
    dump_cmd->add_option("--goal", goal, "Comma-separated goal elements");
    dump_cmd->add_option("--known", known, "Comma-separated elements known initially");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    serve_cmd->add_option("--host", host);
    serve_cmd->add_option("--port", port);
    serve_cmd->add_option("--log-dir", log_dir, "Session log directory")->capture_default_str();

    std::string log_file;
    auto* replay_cmd = app.add_subcommand("replay", "Replay a session log and print its trace");
    replay_cmd->add_option("log", log_file)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*repl_cmd)
            return repl(globals, log_dir);
        if (*run_cmd)
            return run(globals, scenario_files, log_dir);
        if (*serve_cmd) {
            std::optional<std::filesystem::path> logs;
            if (!log_dir.empty())
                logs = log_dir;
            SessionManager manager(make_config(globals), logs);
            std::cerr << "listening on http://" << host << ":" << port << "\n";
            return serve(manager, host, port) ? 0 : 1;
        }
        if (*replay_cmd) {
            ReplayResult result = replay(log_file);
            Json trace = result.session->trace_json();
            if (globals.json) {
                std::cout << Json{{"events", result.events}, {"mismatches", result.mismatches}, {"trace", trace}}.dump()
                          << "\n";
            } else {
                std::cout << trace.dump(2) << "\n";
                std::cerr << result.events << " events replayed, " << result.mismatches << " mismatched outputs\n";
            }
            return result.mismatches == 0 ? 0 : 1;
        }

        auto assistant = Assistant::create(make_config(globals));
        if (*dump_cmd && what == "catalog") {
            std::cout << to_json(assistant->catalog()).dump(2) << "\n";
            return 0;
        }
        PlanningModel model = model_for(*assistant, goal, known);
        if (*compile_cmd) {
            if (pddl)
                std::cout << to_pddl_domain(model) << "\n" << to_pddl_problem(model) << "\n";
            else
                std::cout << to_json(model).dump(globals.json ? -1 : 2) << "\n";
            return 0;
        }
        if (*dump_cmd) {
            Json out = what == "model" ? to_json(model) : landmarks_json(model);
            std::cout << out.dump(globals.json ? -1 : 2) << "\n";
            return 0;
        }
        PlannerOptions options;
        if (greedy)
            options.strategy = SearchStrategy::greedy;
        SearchResult result = plan(model, options);
        Json out = to_json(result);
        out["landmarks"] = landmarks_json(model);
        std::cout << out.dump(globals.json ? -1 : 2) << "\n";
        return result.solved() ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
