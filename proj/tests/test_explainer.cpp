#include "oracles.hpp"

#include "skillweave/banking.hpp"
#include "skillweave/explainer.hpp"

#include <doctest.h>

using namespace skillweave;

namespace {

std::int64_t fixed_clock() {
    return 1000;
}

std::unique_ptr<Session> play(std::initializer_list<const char*> lines) {
    auto session = std::make_unique<Session>("e", Assistant::create(banking_config()), fixed_clock);
    for (const char* line : lines)
        session->handle_event(Event::utterance(line));
    return session;
}

std::unique_ptr<Session> approved_loan() {
    return play({"I'd like to apply for a loan", "jane@example.com", "Jane Doe", "20000", "85000", "yes"});
}

std::unique_ptr<Session> rejected_loan() {
    return play({"I'd like to apply for a loan", "sam@example.com", "Sam Smith", "5000", "40000", "yes"});
}

std::int64_t seq_of(const Session& session, const std::string& skill_id) {
    for (const auto& record : session.history().records())
        if (record.skill_id == skill_id && record.success)
            return record.seq;
    FAIL("no successful record for " << skill_id);
    return -1;
}

}  // namespace

TEST_CASE("summary lists landmark establishers") {
    auto session = approved_loan();
    REQUIRE(session->ltm().contains("loan_approved"));
    Summary summary = summarize(*session);
    CHECK(summary.goal == ElementSet{"loan_decision"});
    CHECK(summary.text.rfind("Here is what I did for your loan application:", 0) == 0);
    CHECK(summary.text.find("I established your credit score using the customer database.") != std::string::npos);
    std::set<std::string> sources;
    for (const auto& item : summary.items)
        sources.insert(item.source);
    CHECK(sources.count("skill"));
    CHECK(to_json(summary)["kind"] == "what");
    CHECK_THROWS_AS(summarize(*play({})), ExplainError);
}

TEST_CASE("how names the skill and its inputs") {
    auto session = approved_loan();
    HowAnswer record = explain_how(*session, "bank_record");
    CHECK(record.skill_id == "db_retrieve");
    CHECK(record.inputs == ElementSet{"email"});
    CHECK(record.record == seq_of(*session, "db_retrieve"));
    CHECK(record.text == "I got your bank record from the customer database, using your email address.");

    HowAnswer email = explain_how(*session, "email");
    CHECK(email.user_provided);
    CHECK(email.text == "You provided your email address.");

    HowAnswer decision = explain_how(*session, "loan_decision");
    CHECK(decision.element == "loan_approved");
    CHECK(decision.skill_id == "loan_submit");

    CHECK_THROWS_AS(explain_how(*session, "warp_drive"), ExplainError);
    CHECK_THROWS_AS(explain_how(*session, "address"), ExplainError);
}

TEST_CASE("why in chain and final modes") {
    auto session = approved_loan();
    Justification chain = explain_why(*session, {"loan_decision"}, "email", WhyMode::chain);
    REQUIRE(chain.contributed);
    REQUIRE(chain.links.size() == 2);
    CHECK(chain.links[0].skill_id == "db_retrieve");
    CHECK(chain.links[1].skill_id == "loan_submit");
    CHECK(chain.text == "I needed your email address because the customer database used your email address to "
                        "establish your credit score and the loan application service used your credit score to "
                        "establish your loan approval.");

    Justification final = explain_why(*session, {"loan_decision"}, "email", WhyMode::final);
    REQUIRE(final.links.size() == 1);
    CHECK(final.links.front() == chain.links.front());
    CHECK(final.text.find("on the way to your loan application") != std::string::npos);

    Justification salary = explain_why(*session, {"loan_decision"}, "salary", WhyMode::chain);
    REQUIRE(salary.links.size() == 1);
    CHECK(salary.links.front().skill_id == "loan_submit");

    Justification goal = explain_why(*session, {"loan_decision"}, "loan_approved", WhyMode::final);
    CHECK(goal.contributed);
    REQUIRE(goal.links.size() == 1);
    CHECK(goal.links.front().seq == seq_of(*session, "loan_submit"));

    Justification other = explain_why(*session, {"loan_decision"}, "loan_rejected", WhyMode::chain);
    CHECK_FALSE(other.contributed);
    CHECK(other.links.empty());
    Justification parent = explain_why(*session, {"loan_decision"}, "loan_decision", WhyMode::chain);
    CHECK(parent.contributed);
    CHECK(parent.links == goal.links);

    CHECK(to_json(chain)["contributed"] == true);
    CHECK(parse_why_mode("final") == WhyMode::final);
    CHECK_THROWS(parse_why_mode("sideways"));
}

TEST_CASE("why agrees with the oracle on every element") {
    auto session = approved_loan();
    const Pursuit& pursuit = session->pursuits().front();
    CHECK(testing::replay_justification(*session, pursuit).empty());
    for (const auto& [element, type] : session->assistant().ontology().elements())
        CHECK_MESSAGE(testing::check_final_matches_chain(*session, pursuit, element).empty(), element);
}

TEST_CASE("a misstep did not contribute") {
    auto session = play({"I want a credit card", "jane@example.com", "blurry_scan.png", "12 Elm Street", "Jane Doe"});
    REQUIRE(session->ltm().contains("card_approved"));
    Justification why = explain_why(*session, {"card_decision"}, "id_document", WhyMode::chain);
    CHECK_FALSE(why.contributed);
    CHECK(why.links.empty());
    CHECK(why.text == "Your ID document did not contribute to your credit card application.");
    CHECK(explain_why(*session, {"card_decision"}, "address", WhyMode::chain).contributed);
    CHECK_THROWS_AS(explain_why(*session, {"loan_decision"}, "email", WhyMode::chain), ExplainError);
    CHECK_THROWS_AS(explain_why(*session, {"card_decision"}, "nothing", WhyMode::chain), ExplainError);
}

TEST_CASE("chain for a rejected loan follows the heaviest inputs") {
    auto session = rejected_loan();
    REQUIRE(session->ltm().contains("loan_rejected"));
    ChainExplanation chain = explain_chain(*session, "loan_decision");
    CHECK(chain.element == "loan_rejected");
    REQUIRE(chain.steps.size() == 2);
    CHECK(chain.steps[0].skill_id == "loan_submit");
    CHECK(chain.steps[0].attribution->element == "credit_score");
    CHECK(chain.steps[1].skill_id == "db_retrieve");
    CHECK(chain.steps[1].attribution->element == "email");
    CHECK(chain.terminal == ChainExplanation::Terminal::user_provided);
    CHECK(chain.terminal_element == "email");
    CHECK(chain.text.find("which relied most on your credit score") != std::string::npos);
    CHECK(chain.steps[0].seq > chain.steps[1].seq);
}

TEST_CASE("chain stops at a skill without attributions") {
    CatalogFile file;
    file.ontology = Ontology({{"x", std::nullopt, false, false, "x value"}, {"y", std::nullopt, false, false, "y value"}});
    file.catalog.skills["maker"] = {"maker", "http://127.0.0.1:9/maker", "maker service", 1,
                                    {IoPair{"p", {"x"}, {{"y"}}}}, false};
    file.catalog.skills["authorize"] = {"authorize", std::string(authorize_endpoint), "permission request", 1,
                                        {IoPair{"confirm", {}, {{"authorized"}}}}, true};
    struct Maker : SkillRuntime {
        InvocationResult execute(const InvocationRequest&) const override {
            return InvocationResult::outcome(0, {{"y", "made"}});
        }
    };
    SkillRegistry registry = build_registry(file);
    registry.add("maker", std::make_shared<Maker>());
    AssistantConfig config;
    config.intents = Json::array({{{"pattern", "make"}, {"intent", "goal"}, {"args", {{"element", "y"}}}}});
    Session session("o", Assistant::create(config, file, registry), fixed_clock);
    session.put_user_fact("x", "1");
    session.handle_event(Event::utterance("make"));
    REQUIRE(session.ltm().contains("y"));
    ChainExplanation chain = explain_chain(session, "y");
    CHECK(chain.terminal == ChainExplanation::Terminal::opaque);
    CHECK(chain.terminal_element == "y");
    CHECK(chain.steps.size() == 1);
    CHECK(to_json(chain)["terminal"] == "opaque");
    CHECK(explain_chain(session, "x").terminal == ChainExplanation::Terminal::user_provided);
}
