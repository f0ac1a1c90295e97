#include "generators.hpp"

#include "skillweave/banking.hpp"
#include "skillweave/service.hpp"

#include <doctest.h>

#include <fstream>
#include <thread>

using namespace skillweave;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("skillweave-test-" + std::to_string(std::random_device{}()) + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static inline int counter = 0;
};

Json utterance(const std::string& text) {
    return {{"kind", "utterance"}, {"text", text}};
}

int status_of(const std::function<void()>& call) {
    try {
        call();
    } catch (const ServiceError& e) {
        return e.status();
    }
    return 0;
}

Clock counting_clock() {
    auto now = std::make_shared<std::int64_t>(0);
    return [now] { return ++*now; };
}

}  // namespace

TEST_CASE("sessions get distinct ids") {
    SessionManager manager(banking_config());
    std::set<std::string> ids;
    for (int i = 0; i < 20; ++i)
        ids.insert(manager.create_session());
    CHECK(ids.size() == 20);
    CHECK(manager.session_ids().size() == 20);
    CHECK(manager.create_session({{"session_id", "mine"}}) == "mine");
    CHECK(status_of([&] { manager.create_session({{"session_id", "mine"}}); }) == 400);
    CHECK(status_of([&] { manager.create_session({{"session_id", "no spaces"}}); }) == 400);
}

TEST_CASE("bad requests are rejected") {
    SessionManager manager(banking_config());
    CHECK(status_of([&] { manager.create_session({{"config", {{"mode", "telepathy"}}}}); }) == 400);
    CHECK(status_of([&] { manager.create_session({{"config", "/no/such/config.json"}}); }) == 400);
    CHECK(status_of([&] { manager.create_session({{"mode", "warp"}}); }) == 400);
    CHECK(status_of([&] { manager.create_session(Json::array()); }) == 400);
    CHECK(status_of([&] { manager.post_event("missing", utterance("hi")); }) == 404);
    CHECK(status_of([&] { manager.get_state("missing"); }) == 404);
    std::string id = manager.create_session();
    try {
        manager.post_event(id, utterance(""));
        FAIL("empty utterance accepted");
    } catch (const ServiceError& e) {
        CHECK(e.status() == 400);
        CHECK(e.code() == "bad_event");
    }
    CHECK(manager.get_trace(id)["turns"].empty());
}

TEST_CASE("custom session config and mode") {
    SessionManager manager(banking_config());
    std::string id = manager.create_session({{"mode", "s3"}, {"seed", 11}});
    CHECK(manager.get_state(id)["mode"] == "s3");
    CHECK(manager.envelope(id).config_fingerprint != manager.envelope(manager.create_session()).config_fingerprint);
    CHECK(manager.envelope(id).catalog_fingerprint ==
          manager.envelope(manager.create_session()).catalog_fingerprint);
}

TEST_CASE("state masks sensitive values") {
    SessionManager manager(banking_config());
    std::string id = manager.create_session();
    for (auto text : {"I'd like to apply for a loan", "jane@example.com", "Jane Doe", "20000", "85000"})
        manager.post_event(id, utterance(text));
    Json state = manager.get_state(id);
    CHECK(state.dump().find("85000") == std::string::npos);
    bool saw_salary = false;
    for (const auto& fact : state["ltm"]) {
        if (fact["element"] == "salary") {
            saw_salary = true;
            CHECK(fact["value"] == "•••");
            CHECK(fact["sensitive"] == true);
        }
    }
    CHECK(saw_salary);
    CHECK(state["pending"]["kind"] == "authorize");
}

TEST_CASE("plan and explain endpoints") {
    SessionManager manager(banking_config());
    std::string id = manager.create_session();
    CHECK(manager.get_plan(id)["plan"].is_null());
    CHECK(status_of([&] { manager.explain(id, "what", "", ""); }) == 422);
    for (auto text : {"I'd like to apply for a loan", "jane@example.com", "Jane Doe", "20000", "85000", "yes"})
        manager.post_event(id, utterance(text));
    Json plan = manager.get_plan(id);
    CHECK(plan["status"] == "plan");
    CHECK(plan["goal"] == Json{"loan_decision"});
    CHECK(manager.explain(id, "how", "credit score", "")["skill_id"] == "db_retrieve");
    CHECK(manager.explain(id, "why", "email", "final")["links"].size() == 1);
    CHECK(manager.explain(id, "chain", "loan_decision", "")["terminal"] == "user_provided");
    CHECK(manager.explain(id, "what", "", "")["kind"] == "what");
    CHECK(status_of([&] { manager.explain(id, "why", "email", "sideways"); }) == 400);
    CHECK(status_of([&] { manager.explain(id, "why", "", ""); }) == 400);
    CHECK(status_of([&] { manager.explain(id, "why", "teleporter", ""); }) == 400);
    CHECK(status_of([&] { manager.explain(id, "dance", "email", ""); }) == 400);
    CHECK(status_of([&] { manager.explain(id, "how", "address", ""); }) == 422);
}

TEST_CASE("events are logged before the reply") {
    TempDir dir;
    SessionManager manager(banking_config(), dir.path, counting_clock());
    std::string id = manager.create_session();
    auto path = manager.envelope(id).log_path;
    CHECK(EventLog::read(path).size() == 1);
    manager.post_event(id, utterance("what's my account balance?"));
    manager.post_event(id, utterance("jane@example.com"));
    auto entries = EventLog::read(path);
    REQUIRE(entries.size() == 5);
    CHECK(entries[0].direction == "meta");
    CHECK(entries[3].direction == "event");
    CHECK(entries[4].direction == "output");
    for (std::size_t i = 0; i < entries.size(); ++i)
        CHECK(entries[i].seq == static_cast<std::int64_t>(i));
    // The skill record made during the turn takes a clock tick between the two lines.
    REQUIRE_FALSE(manager.get_trace(id)["records"].empty());
    CHECK(entries[4].timestamp - entries[3].timestamp >= 2);
    CHECK(entries[4].payload["messages"].dump().find("$4,250.00") != std::string::npos);
}

TEST_CASE("replay rebuilds the session") {
    TempDir dir;
    SessionManager manager(banking_config(), dir.path);
    std::string id = manager.create_session({{"seed", 3}});
    for (auto text : {"I want a credit card", "jane@example.com", "blurry_scan.png", "12 Elm Street", "Jane Doe",
                      "why did you need my address?"})
        manager.post_event(id, utterance(text));
    ReplayResult result = replay(manager.envelope(id).log_path);
    CHECK(result.events == 6);
    CHECK(result.mismatches == 0);
    CHECK(result.session->trace_json() == manager.get_trace(id));
    CHECK(result.session->id() == id);
}

TEST_CASE("replay of an empty log is an empty session") {
    TempDir dir;
    std::ofstream(dir.path / "empty.ndjson").close();
    ReplayResult result = replay(dir.path / "empty.ndjson");
    CHECK(result.events == 0);
    CHECK(result.session->history().empty());
    CHECK(status_of([&] { replay(dir.path / "absent.ndjson"); }) == 404);
    std::ofstream(dir.path / "junk.ndjson") << "{not json\n";
    CHECK(status_of([&] { replay(dir.path / "junk.ndjson"); }) == 400);
    std::ofstream(dir.path / "headless.ndjson") << R"({"seq":0,"direction":"event","payload":{},"timestamp":0})" << "\n";
    CHECK(status_of([&] { replay(dir.path / "headless.ndjson"); }) == 400);
}

TEST_CASE("replay refuses a changed catalog") {
    TempDir dir;
    auto catalog_path = dir.path / "catalog.json";
    std::ofstream(catalog_path) << banking_catalog_text();
    Json config = Json::parse(banking_config_text());
    config["catalog"] = catalog_path.string();
    SessionManager manager(banking_config(), dir.path);
    std::string id = manager.create_session({{"config", config}});
    manager.post_event(id, utterance("I need a loan"));
    auto log = manager.envelope(id).log_path;
    CHECK(replay(log).mismatches == 0);

    Json changed = Json::parse(banking_catalog_text());
    for (auto& skill : changed["skills"])
        if (skill["skill_id"] == "ocr")
            skill["retry_limit"] = 5;
    std::ofstream(catalog_path, std::ios::trunc) << changed.dump(2);
    try {
        replay(log);
        FAIL("replay accepted a changed catalog");
    } catch (const ServiceError& e) {
        CHECK(e.status() == 409);
        CHECK(e.code() == "incompatible");
    }
}

TEST_CASE("concurrent sessions do not interfere") {
    SessionManager manager(banking_config());
    std::vector<std::string> ids;
    for (int i = 0; i < 4; ++i)
        ids.push_back(manager.create_session());
    std::vector<std::thread> threads;
    for (const auto& id : ids)
        threads.emplace_back([&manager, id] {
            for (auto text : {"I'd like to apply for a loan", "jane@example.com", "Jane Doe", "20000", "85000", "yes"})
                manager.post_event(id, utterance(text));
        });
    for (auto& thread : threads)
        thread.join();
    for (const auto& id : ids) {
        Json trace = manager.get_trace(id);
        CHECK(trace["records"] == manager.get_trace(ids.front())["records"]);
        CHECK(manager.get_state(id)["authorized"] == Json{"loan_submit"});
    }
}
