#pragma once

#include "skillweave/orchestrator.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skillweave {

class ExplainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SummaryItem {
    Fluent fluent;
    // "initial", "user" or "skill".
    std::string source;
    std::optional<std::int64_t> record;
    std::string sentence;
};

struct Summary {
    ElementSet goal;
    std::vector<SummaryItem> items;
    // Steps of the pursuit that established no landmark.
    std::size_t omitted = 0;
    std::string text;
};

struct HowAnswer {
    ElementId element;
    bool user_provided = false;
    std::optional<std::int64_t> record;
    std::string skill_id;
    std::string description;
    ElementSet inputs;
    std::string text;
};

enum class WhyMode { final, chain };

std::string_view to_string(WhyMode mode);
WhyMode parse_why_mode(std::string_view text);

struct JustificationLink {
    std::int64_t seq = 0;
    std::string skill_id;
    ElementSet consumed;
    ElementSet produced;

    bool operator==(const JustificationLink&) const = default;
};

struct Justification {
    WhyMode mode = WhyMode::chain;
    ElementId element;
    ElementSet goal;
    bool contributed = false;
    // Ordered from the step that used the element towards the goal.
    std::vector<JustificationLink> links;
    std::string text;
};

struct ChainStep {
    std::int64_t seq = 0;
    std::string skill_id;
    ElementId focus;
    std::optional<Attribution> attribution;
};

struct ChainExplanation {
    enum class Terminal { user_provided, opaque };

    ElementId element;
    std::vector<ChainStep> steps;
    Terminal terminal = Terminal::user_provided;
    // The user-provided element the chain ended at, or the focus left unexplained.
    ElementId terminal_element;
    std::string text;
};

// Landmark summary of a goal pursued this session.
Summary summarize(const Session& session, const ElementSet& goal);
// Summary of the pursuit a "what did you do" question refers to.
Summary summarize(const Session& session);

HowAnswer explain_how(const Session& session, const ElementId& element);

Justification explain_why(const Session& session, const ElementSet& goal, const ElementId& element, WhyMode mode);
// Against the pursuit a question refers to.
Justification explain_why(const Session& session, const ElementId& element, WhyMode mode);

// Every record regression from goal keeps, goal-first, without stopping at any element.
std::vector<JustificationLink> full_regression(const Session& session, const ElementSet& goal,
                                               std::optional<std::int64_t> end_seq = std::nullopt);

ChainExplanation explain_chain(const Session& session, const ElementId& element);

Json to_json(const Summary& summary);
Json to_json(const HowAnswer& answer);
Json to_json(const Justification& justification);
Json to_json(const ChainExplanation& chain);

}  // namespace skillweave
