#include "generators.hpp"

#include "skillweave/scenario.hpp"

#include <doctest.h>

using namespace skillweave;

TEST_CASE("empty scenario passes") {
    ScenarioReport report = run_scenario(parse_scenario(Json{{"name", "nothing"}}));
    CHECK(report.passed);
    CHECK(report.steps_run == 0);
    CHECK(to_json(report)["name"] == "nothing");
}

TEST_CASE("a reply mismatch fails with the received messages") {
    Json document = {{"steps",
                      {{{"send", "I'd like to apply for a loan"}, {"expect", "email"}},
                       {{"send", "jane@example.com"}, {"expect", "What is your favourite colour?"}},
                       {{"send", "never reached"}}}}};
    ScenarioReport report = run_scenario(parse_scenario(document));
    CHECK_FALSE(report.passed);
    CHECK(report.steps_run == 2);
    REQUIRE(report.failure);
    CHECK(report.failure->step == 2);
    CHECK(report.failure->message.rfind("step 2 (send \"jane@example.com\"): expected reply to contain", 0) == 0);
    CHECK(report.failure->message.find("    | What is your full name?") != std::string::npos);
    CHECK(to_json(report)["failure"]["step"] == 2);
}

TEST_CASE("state expectations") {
    auto run = [](Json expect_state) {
        Json document = {{"steps", {{{"send", "I want a credit card"}}, {{"send", "jane@example.com"}, {"expect_state", expect_state}}}}};
        return run_scenario(parse_scenario(document));
    };
    CHECK(run({{"known", {"email"}}, {"pending", "id_document"}, {"goal_stack", {{"card_decision"}}}}).passed);
    CHECK(run({{"not_known", "card_approved"}, {"intent", "provide_value"}, {"learned", Json::array()}}).passed);
    ScenarioReport wrong = run({{"known", "credit_score"}});
    CHECK_FALSE(wrong.passed);
    CHECK(wrong.failure->message.find("expected credit_score to be known") != std::string::npos);
    CHECK_FALSE(run({{"pending", nullptr}}).passed);
    CHECK_FALSE(run({{"authorized", "loan_submit"}}).passed);
}

TEST_CASE("expect_not catches leaks") {
    Json document = {{"steps", {{{"send", "hello"}, {"expect_not", "Sorry"}}}}};
    ScenarioReport report = run_scenario(parse_scenario(document));
    CHECK_FALSE(report.passed);
    CHECK(report.failure->message.find("reply should not contain \"Sorry\"") != std::string::npos);
}

TEST_CASE("options override the scenario") {
    Json document = {{"mode", "planner"}, {"steps", {{{"send", "hello"}, {"expect", "none of my skills"}}}}};
    ScenarioOptions options;
    options.mode = "s3";
    CHECK(run_scenario(parse_scenario(document), options).passed);
    CHECK_FALSE(run_scenario(parse_scenario(document)).passed);
}

TEST_CASE("malformed scenarios are rejected") {
    CHECK_THROWS_AS(parse_scenario(Json::array()), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(Json{{"steps", {{{"expect", "x"}}}}}), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(Json{{"steps", {{{"send", 3}}}}}), ScenarioError);
    CHECK_THROWS_AS(load_scenario("/no/such/scenario.json"), ScenarioError);
}

TEST_CASE("bundled scenarios pass and log") {
    auto files = testing::bundled_scenarios();
    REQUIRE(files.size() >= 5);
    auto dir = std::filesystem::temp_directory_path() / "skillweave-scenario-logs";
    std::filesystem::create_directories(dir);
    for (const auto& file : files) {
        Scenario scenario = load_scenario(file);
        CHECK(scenario.name == file.stem().string());
        ScenarioOptions options;
        options.log_dir = dir;
        ScenarioReport report = run_scenario(scenario, options);
        CHECK_MESSAGE(report.passed, file.filename().string() << ": " << (report.failure ? report.failure->message : ""));
        REQUIRE(report.log_path);
        CHECK(std::filesystem::exists(*report.log_path));
    }
    std::filesystem::remove_all(dir);
}
