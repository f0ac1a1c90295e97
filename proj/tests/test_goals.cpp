#include "skillweave/config.hpp"
#include "skillweave/goals.hpp"

#include <doctest.h>

using namespace skillweave;

namespace {

const IntentRules& rules() {
    static auto assistant = Assistant::create(banking_config());
    return assistant->rules();
}

Intent derive(const std::string& text) {
    return derive_goal(Event::utterance(text), rules());
}

}  // namespace

TEST_CASE("utterances map to goals") {
    Intent loan = derive("I want to apply for a loan");
    CHECK(loan.kind == Intent::Kind::goal);
    CHECK(loan.goal == ElementSet{"loan_decision"});
    CHECK(derive("can I get a credit card?").goal == ElementSet{"card_decision"});
    CHECK(derive("what's my account balance?").goal == ElementSet{"account_balance"});
}

TEST_CASE("explanation questions") {
    Intent why = derive("why did you need my email?");
    CHECK(why.kind == Intent::Kind::why);
    CHECK(why.element == "email");
    CHECK(derive("Why was my loan rejected?").kind == Intent::Kind::why);
    Intent how = derive("how did you get my credit score?");
    CHECK(how.kind == Intent::Kind::how);
    CHECK(how.element == "credit_score");
    CHECK(derive("what did you do?").kind == Intent::Kind::summary);
    CHECK(derive("stop").kind == Intent::Kind::stop);
}

TEST_CASE("values and permission replies") {
    Intent email = derive("jane@example.com");
    CHECK(email.kind == Intent::Kind::provide_value);
    CHECK(email.element == "email");
    CHECK(email.value == "jane@example.com");
    Intent name = derive("my name is Sam Smith");
    CHECK(name.element == "full_name");
    CHECK(name.value == "Sam Smith");
    CHECK(derive("yes").kind == Intent::Kind::authorize_response);
    CHECK(derive("yes").granted);
    CHECK_FALSE(derive("no").granted);
}

TEST_CASE("no rule means unknown") {
    CHECK(derive("blorp").kind == Intent::Kind::unknown);
    CHECK(derive_goal(Event::alert("disk_full"), rules()).kind == Intent::Kind::unknown);
}

TEST_CASE("first matching rule wins") {
    Ontology ontology({{"a", std::nullopt, false, false, "alpha"}, {"b", std::nullopt, false, false, "beta"}});
    std::vector<IntentRule> list;
    list.push_back(parse_intent_rule({{"pattern", "go"}, {"intent", "goal"}, {"args", {{"goal", {"a"}}}}}));
    list.push_back(parse_intent_rule({{"pattern", "go (\\w+)"}, {"intent", "goal"}, {"args", {{"goal", {"$1"}}}}}));
    list.push_back(parse_intent_rule({{"on", "alert"}, {"pattern", "^cpu$"}, {"intent", "goal"},
                                      {"args", {{"goal", {"b"}}}}}));
    IntentRules rules(list, ElementResolver(ontology, {}));
    CHECK(rules.derive(Event::utterance("go beta")).goal == ElementSet{"a"});
    CHECK(rules.derive(Event::alert("cpu")).goal == ElementSet{"b"});
    CHECK(rules.derive(Event::utterance("cpu")).kind == Intent::Kind::unknown);
    CHECK_THROWS(parse_intent_rule({{"pattern", "("}, {"intent", "goal"}}));
    CHECK_THROWS(parse_intent_rule({{"pattern", "x"}, {"intent", "dance"}}));
}

TEST_CASE("element resolver") {
    Ontology ontology({{"email", std::nullopt, false, false, "email address"},
                       {"credit_score", std::nullopt, false, false, "credit score"}});
    ElementResolver resolver(ontology, {{"email", {"e-mail", "mail"}}});
    CHECK(resolver.resolve("email") == "email");
    CHECK(resolver.resolve("E-Mail") == "email");
    CHECK(resolver.resolve("email address") == "email");
    CHECK(resolver.resolve("credit score") == "credit_score");
    CHECK(resolver.resolve("credit_score") == "credit_score");
    CHECK_FALSE(resolver.resolve("fax").has_value());
}

TEST_CASE("events round trip and reject empty text") {
    Event event = Event::utterance("hello");
    CHECK(event_from_json(to_json(event)) == event);
    CHECK(event_from_json(Json{{"kind", "alert"}, {"tag", "cpu"}}).kind == Event::Kind::alert);
    CHECK_THROWS_AS(event_from_json(Json{{"kind", "utterance"}, {"text", "  "}}), EventError);
    CHECK_THROWS_AS(event_from_json(Json{{"kind", "shout"}, {"text", "x"}}), EventError);
    CHECK_THROWS_AS(event_from_json(Json::array()), EventError);
}

TEST_CASE("digression resumes the earlier goal") {
    GoalStack stack;
    stack.push({"loan_decision"});
    stack.push({"card_decision"});
    CHECK(stack.current() == ElementSet{"card_decision"});
    auto pop = stack.complete_current();
    CHECK(pop.finished == ElementSet{"card_decision"});
    CHECK(pop.resumed == ElementSet{"loan_decision"});
    CHECK(stack.current() == ElementSet{"loan_decision"});
}

TEST_CASE("popping an empty stack is a no-op") {
    GoalStack stack;
    auto pop = stack.complete_current();
    CHECK_FALSE(pop.finished);
    CHECK_FALSE(pop.resumed);
    stack.push({"g1"});
    CHECK(stack.current() == ElementSet{"g1"});
    auto stopped = stack.stop_current();
    CHECK(stopped.finished == ElementSet{"g1"});
    CHECK_FALSE(stopped.resumed);
    CHECK(stack.empty());
    auto again = stack.stop_current();
    CHECK_FALSE(again.finished);
    CHECK(stack.empty());
}
