#pragma once

#include "skillweave/catalog.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace skillweave {

enum class FluentKind { known, cannot_establish, authorized };

// known(element), cannot_establish(pair_ref, element) or authorized(skill_id).
struct Fluent {
    FluentKind kind = FluentKind::known;
    std::string first;
    std::string second;

    static Fluent known(ElementId element) { return {FluentKind::known, std::move(element), {}}; }
    static Fluent cannot_establish(std::string pair_ref, ElementId element) {
        return {FluentKind::cannot_establish, std::move(pair_ref), std::move(element)};
    }
    static Fluent authorized(std::string skill_id) { return {FluentKind::authorized, std::move(skill_id), {}}; }

    bool is_known() const { return kind == FluentKind::known; }
    std::string to_string() const;

    auto operator<=>(const Fluent&) const = default;
};

using FluentSet = std::set<Fluent>;

// Parses the to_string() form back into a fluent.
Fluent parse_fluent(std::string_view text);

// Pair ids are only unique per skill, so learned facts name "skill.pair".
std::string pair_ref(std::string_view skill_id, std::string_view pair_id);

enum class ActionKind { skill, slot_fill, authorize };

struct GroundedAction {
    std::string id;
    ActionKind kind = ActionKind::skill;
    std::string skill_id;
    std::string pair_id;
    std::size_t outcome_index = 0;
    // Element being filled or skill being authorized, for built-in skills.
    std::string subject;
    // Declared outcome elements this action aims for.
    ElementSet outcome;
    FluentSet preconditions;
    // cannot_establish fluents; the action is inapplicable if any is true.
    FluentSet blocked_by;
    FluentSet add_effects;
    double cost = 1.0;

    bool operator==(const GroundedAction&) const = default;
};

// All-outcome determinization of the catalog for one planning call.
struct PlanningModel {
    std::map<std::string, GroundedAction> actions;
    FluentSet initial_state;
    FluentSet static_true;
    FluentSet goal;
    std::set<std::string> pruned;

    const GroundedAction& action(const std::string& id) const;
    bool applicable(const GroundedAction& action, const FluentSet& state) const;

    bool operator==(const PlanningModel&) const = default;
};

struct Plan {
    std::vector<std::string> steps;

    bool operator==(const Plan&) const = default;
};

struct CompileOptions {
    double skill_cost = 1.0;
    double slot_fill_cost = 2.0;
    double authorize_cost = 1.0;
};

struct CompileInput {
    ElementSet known;
    std::set<std::string> authorized;
    FluentSet learned;
    std::set<std::string> pruned;
    ElementSet goal;
};

class CompileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

PlanningModel compile(const Catalog& catalog, const Ontology& ontology, const CompileInput& input,
                      const CompileOptions& options = {});

// Slot-fill and authorize actions. Folded into compile().
std::vector<GroundedAction> compile_internal(const Catalog& catalog, const Ontology& ontology,
                                             const CompileOptions& options = {});

// Skills with at least one sensitive input element.
std::set<std::string> skills_needing_authorization(const Catalog& catalog, const Ontology& ontology);

bool pair_is_sensitive(const IoPair& pair, const Ontology& ontology);

// known(e) plus known(a) for every ancestor a of e.
FluentSet known_closure(const Ontology& ontology, const ElementId& element);

// Simulates plan from the initial state. Throws CompileError on unknown ids.
bool validate_plan(const PlanningModel& model, const Plan& plan);

// Removes the action; it stays listed in model.pruned.
void prune_action(PlanningModel& model, const std::string& action_id);

// State reached by applying the plan (delete-free, so the union of effects).
FluentSet apply_plan(const PlanningModel& model, const Plan& plan);

Json to_json(const Fluent& fluent);
Json to_json(const GroundedAction& action);
Json to_json(const PlanningModel& model);

std::string to_pddl_domain(const PlanningModel& model, std::string_view name = "assistant");
std::string to_pddl_problem(const PlanningModel& model, std::string_view name = "assistant");

}  // namespace skillweave
