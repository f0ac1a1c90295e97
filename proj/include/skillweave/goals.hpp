#pragma once

#include "skillweave/catalog.hpp"

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace skillweave {

struct Event {
    enum class Kind { utterance, alert, system };

    Kind kind = Kind::utterance;
    // Utterance text, or the alert/system tag.
    std::string text;
    Json payload = Json::object();

    static Event utterance(std::string text) { return {Kind::utterance, std::move(text), Json::object()}; }
    static Event alert(std::string tag) { return {Kind::alert, std::move(tag), Json::object()}; }

    bool operator==(const Event&) const = default;
};

class EventError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json to_json(const Event& event);
// Throws EventError on malformed input, including an empty utterance.
Event event_from_json(const Json& json);

struct Intent {
    enum class Kind { goal, why, how, summary, stop, provide_value, authorize_response, unknown };

    Kind kind = Kind::unknown;
    ElementSet goal;
    ElementId element;
    std::string value;
    std::string skill_id;
    bool granted = false;
    // Unresolved phrase, kept for messages when element lookup failed.
    std::string phrase;

    bool operator==(const Intent&) const = default;
};

std::string_view to_string(Intent::Kind kind);
Json to_json(const Intent& intent);

// Maps free-text references ("e-mail", "credit score") to element ids via the
// id itself, the display name, and configured aliases.
class ElementResolver {
public:
    ElementResolver() = default;
    ElementResolver(const Ontology& ontology, const std::map<ElementId, std::vector<std::string>>& aliases);

    std::optional<ElementId> resolve(std::string_view phrase) const;

private:
    std::vector<std::pair<std::string, ElementId>> names_;
};

std::string normalize_phrase(std::string_view text);

struct IntentRule {
    Event::Kind on = Event::Kind::utterance;
    std::string pattern;
    Intent::Kind intent = Intent::Kind::unknown;
    // Template arguments; "$1".."$9" expand to capture groups.
    Json args = Json::object();
    bool case_sensitive = false;
    std::regex compiled;
};

class IntentRules {
public:
    IntentRules() = default;
    IntentRules(std::vector<IntentRule> rules, ElementResolver resolver);

    // Ordered rules: the first match wins. No match gives Intent::Kind::unknown.
    Intent derive(const Event& event) const;

    const std::vector<IntentRule>& rules() const { return rules_; }
    const ElementResolver& resolver() const { return resolver_; }

private:
    std::vector<IntentRule> rules_;
    ElementResolver resolver_;
};

IntentRule parse_intent_rule(const Json& json);

Intent derive_goal(const Event& event, const IntentRules& rules);

enum class GoalStatus { active, completed, stopped };

struct GoalEntry {
    ElementSet goal;
    GoalStatus status = GoalStatus::active;

    bool operator==(const GoalEntry&) const = default;
};

// LIFO of user goals. The top entry is the one being pursued.
class GoalStack {
public:
    struct Pop {
        std::optional<ElementSet> finished;
        std::optional<ElementSet> resumed;
    };

    void push(ElementSet goal);
    std::optional<ElementSet> current() const;
    Pop complete_current();
    Pop stop_current();

    const std::vector<GoalEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    bool operator==(const GoalStack&) const = default;

private:
    Pop pop(GoalStatus status);

    std::vector<GoalEntry> entries_;
};

std::string_view to_string(GoalStatus status);

}  // namespace skillweave
