#include "oracles.hpp"

#include "skillweave/banking.hpp"
#include "skillweave/orchestrator.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace skillweave;

namespace {

std::int64_t fixed_clock() {
    return 1000;
}

Session banking_session(OrchestrationMode mode = OrchestrationMode::planner) {
    AssistantConfig config = banking_config();
    set_mode(config, mode);
    return Session("t", Assistant::create(config), fixed_clock);
}

TurnOutput say(Session& session, const std::string& text) {
    return session.handle_event(Event::utterance(text));
}

std::string joined(const TurnOutput& out) {
    std::string text;
    for (const auto& message : out.messages)
        text += message + "\n";
    return text;
}

// Replies with whatever the test sets, counting calls.
class ScriptedSkill : public SkillRuntime {
public:
    explicit ScriptedSkill(std::function<InvocationResult()> reply) : reply_(std::move(reply)) {}
    InvocationResult execute(const InvocationRequest&) const override {
        ++calls;
        return reply_();
    }
    mutable int calls = 0;

private:
    std::function<InvocationResult()> reply_;
};

// x (given) -> maker -> y or z.
CatalogFile maker_catalog(int retry_limit) {
    CatalogFile file;
    file.ontology = Ontology({{"x", std::nullopt, false, false, "x value"},
                              {"y", std::nullopt, false, false, "y value"},
                              {"z", std::nullopt, false, false, "z value"}});
    file.catalog.skills["maker"] = {"maker", "http://127.0.0.1:9/maker", "maker service", retry_limit,
                                    {IoPair{"p", {"x"}, {{"y"}, {"z"}}}}, false};
    file.catalog.skills["slot_fill"] = {"slot_fill", std::string(slot_fill_endpoint), "question to you", 2,
                                        {IoPair{"ask", {}, {{"element"}}}}, true};
    file.catalog.skills["authorize"] = {"authorize", std::string(authorize_endpoint), "permission request", 1,
                                        {IoPair{"confirm", {}, {{"authorized"}}}}, true};
    return file;
}

struct MakerSetup {
    std::shared_ptr<ScriptedSkill> skill;
    std::unique_ptr<Session> session;
};

MakerSetup maker_session(std::function<InvocationResult()> reply, int retry_limit = 2, int max_replans = 25) {
    CatalogFile file = maker_catalog(retry_limit);
    AssistantConfig config;
    config.catalog = "inline";
    config.max_replans = max_replans;
    config.intents = Json::array({{{"pattern", "make y"}, {"intent", "goal"}, {"args", {{"element", "y"}}}}});
    SkillRegistry registry = build_registry(file);
    auto skill = std::make_shared<ScriptedSkill>(std::move(reply));
    registry.add("maker", skill);
    auto session = std::make_unique<Session>("m", Assistant::create(config, file, registry), fixed_clock);
    session->put_user_fact("x", "1");
    return {skill, std::move(session)};
}

}  // namespace

TEST_CASE("plan runs until the first question") {
    Session session = banking_session();
    TurnOutput out = say(session, "I'd like to apply for a loan");
    REQUIRE(out.asked);
    CHECK(out.asked->kind == PendingQuestion::Kind::slot_fill);
    CHECK(out.asked->subject == "email");
    CHECK(out.intent.kind == Intent::Kind::goal);
    CHECK(session.goal_stack().current() == ElementSet{"loan_decision"});
    CHECK(session.plans().size() == 1);
}

TEST_CASE("a second goal digresses and the first resumes") {
    Session session = banking_session();
    say(session, "I'd like to apply for a loan");
    say(session, "jane@example.com");
    TurnOutput out = say(session, "can I get a credit card?");
    CHECK(session.goal_stack().size() == 2);
    CHECK(session.goal_stack().current() == ElementSet{"card_decision"});
    CHECK(joined(out).find("We'll come back to your loan application afterwards.") != std::string::npos);
    TurnOutput done = say(session, "jane_id.png");
    CHECK(joined(done).find("Back to your loan application.") != std::string::npos);
    CHECK(session.goal_stack().current() == ElementSet{"loan_decision"});
    CHECK(session.ltm().contains("card_approved"));
    CHECK(session.pursuits().at(1).status == GoalStatus::completed);
    CHECK(session.pursuits().at(0).resumed);
}

TEST_CASE("a goal that already holds completes without skills") {
    Session session = banking_session();
    session.put_user_fact("credit_score", "700");
    TurnOutput out = say(session, "what is my credit score?");
    REQUIRE(out.achieved);
    CHECK(*out.achieved == ElementSet{"credit_score"});
    CHECK(session.history().empty());
    CHECK(session.goal_stack().empty());
}

TEST_CASE("asking for the current goal again re-asks the question") {
    Session session = banking_session();
    say(session, "I'd like to apply for a loan");
    TurnOutput out = say(session, "I need a loan");
    CHECK(joined(out).find("We're already working on your loan application.") != std::string::npos);
    REQUIRE(out.asked);
    CHECK(out.asked->subject == "email");
    CHECK(session.goal_stack().size() == 1);
}

TEST_CASE("other outcome counts only the missed desired element") {
    auto setup = maker_session([] { return InvocationResult::outcome(1, {{"z", "1"}}); });
    say(*setup.session, "make y");
    const auto& counters = setup.session->retry_counters();
    CHECK(counters.at({"maker.p", "y"}) == 2);
    CHECK_FALSE(counters.count({"maker.p", "z"}));
    CHECK(setup.session->learned() == FluentSet{Fluent::cannot_establish("maker.p", "y")});
    CHECK(setup.skill->calls == 2);
    CHECK(setup.session->ltm().contains("z"));
    CHECK(setup.session->history().records().front().status == "other_outcome");
    CHECK(setup.session->goal_stack().empty());
}

TEST_CASE("failure is learned at the retry limit and not before") {
    auto setup = maker_session([] { return InvocationResult::failed("down"); }, 3);
    TurnOutput out = say(*setup.session, "make y");
    CHECK(setup.skill->calls == 3);
    CHECK(setup.session->retry_counters().at({"maker.p", "y"}) == 3);
    CHECK(setup.session->learned().count(Fluent::cannot_establish("maker.p", "y")));
    CHECK(joined(out).find("down") != std::string::npos);
    // Each failed plan before the limit still chose the skill.
    for (std::size_t i = 0; i + 1 < setup.session->plans().size(); ++i)
        CHECK(setup.session->plans()[i].result.solved());
    CHECK_FALSE(setup.session->plans().back().result.solved());
}

TEST_CASE("an invalid invocation prunes the action") {
    auto setup = maker_session([] { return InvocationResult::outcome(0, {{"y", "1"}, {"x", "2"}}); });
    say(*setup.session, "make y");
    CHECK(setup.skill->calls == 1);
    CHECK(setup.session->pruned() == std::set<std::string>{"maker.p.0"});
    CHECK(setup.session->history().records().front().invalid_invocation);
    CHECK_FALSE(setup.session->ltm().contains("y"));
    CHECK(setup.session->retry_counters().empty());
    CHECK_FALSE(setup.session->compile_for({"y"}).actions.count("maker.p.0"));
}

TEST_CASE("replanning stops at max_replans") {
    auto setup = maker_session([] { return InvocationResult::failed(); }, 100, 3);
    TurnOutput out = say(*setup.session, "make y");
    CHECK(setup.session->plans().size() == 3);
    CHECK(setup.skill->calls == 3);
    CHECK(joined(out).find("Sorry, I couldn't make progress on your") != std::string::npos);
    CHECK(setup.session->goal_stack().empty());
    CHECK(setup.session->pursuits().front().status == GoalStatus::stopped);
}

TEST_CASE("authorization gate") {
    Session session = banking_session();
    PlanningModel model = session.compile_for({"loan_decision"});
    CHECK(session.authorization_gate(model.action("loan_submit.application.0")) == GateDecision::require_authorization);
    CHECK(session.authorization_gate(model.action("db_retrieve.by_email.0")) == GateDecision::allow);
    CHECK(session.authorization_gate(model.action("db_retrieve.by_account.0")) == GateDecision::require_authorization);
    CHECK(session.authorization_gate(model.action("slot_fill.ask.salary")) == GateDecision::allow);
}

TEST_CASE("granting permission lets the sensitive skill run") {
    Session session = banking_session();
    for (auto text : {"I'd like to apply for a loan", "jane@example.com", "Jane Doe", "20000"})
        say(session, text);
    TurnOutput ask = say(session, "85000");
    REQUIRE(ask.asked);
    CHECK(ask.asked->kind == PendingQuestion::Kind::authorize);
    CHECK(testing::privacy_violations(session).empty());
    TurnOutput out = say(session, "yes");
    CHECK(session.authorized() == std::set<std::string>{"loan_submit"});
    CHECK(session.ltm().contains("loan_approved"));
    CHECK(testing::privacy_violations(session).empty());
    CHECK(session.authorization_gate(session.compile_for({"loan_decision"}).action("loan_submit.application.0")) ==
          GateDecision::allow);
    (void)out;
}

TEST_CASE("denying permission prunes the authorize action") {
    Session session = banking_session();
    for (auto text : {"I'd like to apply for a loan", "sam@example.com", "Sam Smith", "5000", "40000"})
        say(session, text);
    TurnOutput out = say(session, "no");
    CHECK(session.pruned().count("authorize.confirm.loan_submit"));
    CHECK(session.authorized().empty());
    CHECK_FALSE(session.ltm().contains("loan_rejected"));
    CHECK(joined(out).find("without your permission") != std::string::npos);
    for (const auto& record : session.history().records())
        CHECK(record.skill_id != "loan_submit");
}

TEST_CASE("top-k selector examples") {
    std::vector<SkillScore> scores{{"a", 0.9}, {"b", 0.4}};
    CHECK(s3_top_k_selector(scores, 0.5, 1) == std::vector<SkillScore>{{"a", 0.9}});
    CHECK(s3_top_k_selector(scores, 0.95, 1).empty());
    CHECK(s3_top_k_selector(scores, 0.3, 2) == std::vector<SkillScore>{{"a", 0.9}, {"b", 0.4}});
    CHECK(s3_top_k_selector({{"b", 0.4}, {"a", 0.9}}, 0.3, 2) == std::vector<SkillScore>{{"a", 0.9}, {"b", 0.4}});
    CHECK(s3_top_k_selector(scores, 0.3, 0).empty());
    CHECK(s3_score_order_sequencer({{"b", 0.5}, {"c", 0.7}, {"a", 0.5}}) ==
          std::vector<SkillScore>{{"c", 0.7}, {"a", 0.5}, {"b", 0.5}});
    CHECK(s3_identity_scorer(scores) == scores);
}

TEST_CASE("top-k selector satisfies its condition on random inputs") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        std::vector<SkillScore> scores;
        int n = std::uniform_int_distribution<int>(0, 6)(rng);
        for (int s = 0; s < n; ++s)
            scores.push_back({"s" + std::to_string(s), std::round(unit(rng) * 4) / 4});
        double delta = unit(rng);
        std::size_t k = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
        std::string why;
        CHECK_MESSAGE(testing::top_k_condition(scores, delta, k, s3_top_k_selector(scores, delta, k), &why), why);
    }
}

TEST_CASE("s3 mode falls back when no skill is confident") {
    Session session = banking_session(OrchestrationMode::s3);
    TurnOutput out = say(session, "hello there");
    CHECK(out.messages == std::vector<std::string>{"Sorry, none of my skills can help with that."});
    CHECK(session.history().empty());
}

TEST_CASE("s3 mode runs the top skill when its inputs are known") {
    Session session = banking_session(OrchestrationMode::s3);
    session.put_user_fact("email", "jane@example.com");
    TurnOutput out = say(session, "show my balance");
    CHECK(joined(out).find("$4,250.00") != std::string::npos);
    REQUIRE(session.history().size() == 1);
    CHECK(session.history().records().front().skill_id == "db_retrieve");

    Session missing = banking_session(OrchestrationMode::s3);
    TurnOutput need = say(missing, "show my balance");
    CHECK(joined(need).find("The customer database needs your email address") != std::string::npos);
}

TEST_CASE("s3 mode asks permission before sensitive inputs") {
    Session session = banking_session(OrchestrationMode::s3);
    for (auto [element, value] : std::map<std::string, std::string>{
             {"full_name", "Jane Doe"}, {"credit_score", "742"}, {"salary", "85000"}, {"loan_amount", "1000"}})
        session.put_user_fact(element, value);
    TurnOutput out = say(session, "I need a loan");
    REQUIRE(out.asked);
    CHECK(out.asked->subject == "loan_submit");
    CHECK(session.history().empty());
    say(session, "yes");
    CHECK(testing::privacy_violations(session).empty());
}

TEST_CASE("state masks sensitive values") {
    Session session = banking_session();
    session.put_user_fact("salary", "85000");
    session.put_user_fact("email", "a@b.co");
    Json state = session.state_json();
    for (const auto& fact : state["ltm"]) {
        if (fact["element"] == "salary")
            CHECK(fact["value"] == "•••");
        if (fact["element"] == "email")
            CHECK(fact["value"] == "a@b.co");
    }
    CHECK(session.state_json(false).dump().find("85000") != std::string::npos);
    CHECK(state.dump().find("85000") == std::string::npos);
}

TEST_CASE("traces are deterministic") {
    auto run = [] {
        Session session = banking_session();
        for (auto text : {"I want a credit card", "jane@example.com", "blurry_scan.png", "12 Elm Street", "Jane Doe"})
            say(session, text);
        return session.trace_json();
    };
    Json first = run();
    CHECK(first == run());
    CHECK(first.dump().find("cannot_establish(ocr.scan,full_name)") != std::string::npos);
}
