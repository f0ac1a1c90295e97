#include "skillweave/compiler.hpp"

#include <sstream>

namespace skillweave {

std::string Fluent::to_string() const {
    switch (kind) {
    case FluentKind::known: return "known(" + first + ")";
    case FluentKind::cannot_establish: return "cannot_establish(" + first + "," + second + ")";
    case FluentKind::authorized: return "authorized(" + first + ")";
    }
    return "?";
}

Fluent parse_fluent(std::string_view text) {
    auto open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')')
        throw CompileError("malformed fluent '" + std::string(text) + "'");
    auto name = text.substr(0, open);
    auto args = text.substr(open + 1, text.size() - open - 2);
    if (name == "known")
        return Fluent::known(std::string(args));
    if (name == "authorized")
        return Fluent::authorized(std::string(args));
    if (name == "cannot_establish") {
        auto comma = args.find(',');
        if (comma == std::string_view::npos)
            throw CompileError("malformed fluent '" + std::string(text) + "'");
        return Fluent::cannot_establish(std::string(args.substr(0, comma)), std::string(args.substr(comma + 1)));
    }
    throw CompileError("unknown fluent '" + std::string(text) + "'");
}

std::string pair_ref(std::string_view skill_id, std::string_view pair_id) {
    return std::string(skill_id) + "." + std::string(pair_id);
}

const GroundedAction& PlanningModel::action(const std::string& id) const {
    auto it = actions.find(id);
    if (it == actions.end())
        throw CompileError("unknown action '" + id + "'");
    return it->second;
}

bool PlanningModel::applicable(const GroundedAction& action, const FluentSet& state) const {
    for (const auto& fluent : action.blocked_by)
        if (static_true.count(fluent))
            return false;
    for (const auto& fluent : action.preconditions)
        if (!state.count(fluent))
            return false;
    return true;
}

FluentSet known_closure(const Ontology& ontology, const ElementId& element) {
    FluentSet result{Fluent::known(element)};
    for (const auto& ancestor : ontology.ancestors(element))
        result.insert(Fluent::known(ancestor));
    return result;
}

bool pair_is_sensitive(const IoPair& pair, const Ontology& ontology) {
    for (const auto& input : pair.inputs)
        if (ontology.contains(input) && ontology.at(input).sensitive)
            return true;
    return false;
}

std::set<std::string> skills_needing_authorization(const Catalog& catalog, const Ontology& ontology) {
    std::set<std::string> result;
    for (const auto& [id, skill] : catalog.skills) {
        if (skill.internal)
            continue;
        for (const auto& pair : skill.pairs)
            if (pair_is_sensitive(pair, ontology))
                result.insert(id);
    }
    return result;
}

namespace {

std::string internal_pair_id(const SkillSpec& skill, const char* fallback) {
    return skill.pairs.empty() ? fallback : skill.pairs.front().pair_id;
}

}  // namespace

std::vector<GroundedAction> compile_internal(const Catalog& catalog, const Ontology& ontology,
                                             const CompileOptions& options) {
    std::vector<GroundedAction> actions;
    if (const SkillSpec* fill = catalog.slot_fill_skill()) {
        std::string pid = internal_pair_id(*fill, "ask");
        std::string ref = pair_ref(fill->skill_id, pid);
        for (const auto& [id, element] : ontology.elements()) {
            if (!element.slot_fillable)
                continue;
            GroundedAction action;
            action.id = ref + "." + id;
            action.kind = ActionKind::slot_fill;
            action.skill_id = fill->skill_id;
            action.pair_id = pid;
            action.subject = id;
            action.outcome = {id};
            action.blocked_by = {Fluent::cannot_establish(ref, id)};
            action.add_effects = known_closure(ontology, id);
            action.cost = options.slot_fill_cost;
            actions.push_back(std::move(action));
        }
    }
    if (const SkillSpec* auth = catalog.authorize_skill()) {
        std::string pid = internal_pair_id(*auth, "confirm");
        std::string ref = pair_ref(auth->skill_id, pid);
        for (const auto& skill_id : skills_needing_authorization(catalog, ontology)) {
            GroundedAction action;
            action.id = ref + "." + skill_id;
            action.kind = ActionKind::authorize;
            action.skill_id = auth->skill_id;
            action.pair_id = pid;
            action.subject = skill_id;
            action.add_effects = {Fluent::authorized(skill_id)};
            action.cost = options.authorize_cost;
            actions.push_back(std::move(action));
        }
    }
    return actions;
}

PlanningModel compile(const Catalog& catalog, const Ontology& ontology, const CompileInput& input,
                      const CompileOptions& options) {
    if (auto issues = validate(catalog, ontology); !issues.empty()) {
        const auto& first = issues.front();
        throw CompileError("invalid catalog: " + std::string(to_string(first.kind)) + " " + first.skill_id +
                           (first.pair_id.empty() ? "" : "." + first.pair_id) + " " + first.message);
    }
    for (const auto& element : input.goal)
        if (!ontology.contains(element))
            throw CompileError("unknown goal element '" + element + "'");

    PlanningModel model;
    for (const auto& [id, skill] : catalog.skills) {
        if (skill.internal)
            continue;
        for (const auto& pair : skill.pairs) {
            std::string ref = pair_ref(id, pair.pair_id);
            FluentSet preconditions;
            for (const auto& element : pair.inputs)
                preconditions.insert(Fluent::known(element));
            if (pair_is_sensitive(pair, ontology))
                preconditions.insert(Fluent::authorized(id));
            for (std::size_t j = 0; j < pair.outcomes.size(); ++j) {
                GroundedAction action;
                action.id = ref + "." + std::to_string(j);
                action.kind = ActionKind::skill;
                action.skill_id = id;
                action.pair_id = pair.pair_id;
                action.outcome_index = j;
                action.outcome = pair.outcomes[j];
                action.preconditions = preconditions;
                for (const auto& element : pair.outcomes[j]) {
                    action.blocked_by.insert(Fluent::cannot_establish(ref, element));
                    auto closure = known_closure(ontology, element);
                    action.add_effects.insert(closure.begin(), closure.end());
                }
                action.cost = options.skill_cost;
                model.actions.emplace(action.id, std::move(action));
            }
        }
    }
    for (auto& action : compile_internal(catalog, ontology, options))
        model.actions.emplace(action.id, std::move(action));

    for (const auto& id : input.pruned) {
        if (model.actions.erase(id))
            model.pruned.insert(id);
    }
    for (const auto& element : input.known) {
        if (!ontology.contains(element))
            throw CompileError("unknown known element '" + element + "'");
        auto closure = known_closure(ontology, element);
        model.initial_state.insert(closure.begin(), closure.end());
    }
    for (const auto& skill_id : input.authorized)
        model.initial_state.insert(Fluent::authorized(skill_id));
    for (const auto& fluent : input.learned) {
        if (fluent.kind != FluentKind::cannot_establish)
            throw CompileError("learned fact must be cannot_establish: " + fluent.to_string());
        model.static_true.insert(fluent);
    }
    for (const auto& element : input.goal)
        model.goal.insert(Fluent::known(element));
    return model;
}

FluentSet apply_plan(const PlanningModel& model, const Plan& plan) {
    FluentSet state = model.initial_state;
    for (const auto& id : plan.steps) {
        const auto& action = model.action(id);
        state.insert(action.add_effects.begin(), action.add_effects.end());
    }
    return state;
}

bool validate_plan(const PlanningModel& model, const Plan& plan) {
    for (const auto& id : plan.steps)
        model.action(id);
    FluentSet state = model.initial_state;
    for (const auto& id : plan.steps) {
        const auto& action = model.action(id);
        if (!model.applicable(action, state))
            return false;
        state.insert(action.add_effects.begin(), action.add_effects.end());
    }
    for (const auto& fluent : model.goal)
        if (!state.count(fluent))
            return false;
    return true;
}

void prune_action(PlanningModel& model, const std::string& action_id) {
    if (!model.actions.erase(action_id))
        throw CompileError("cannot prune unknown action '" + action_id + "'");
    model.pruned.insert(action_id);
}

Json to_json(const Fluent& fluent) {
    return fluent.to_string();
}

namespace {

Json fluent_list(const FluentSet& fluents) {
    Json list = Json::array();
    for (const auto& fluent : fluents)
        list.push_back(fluent.to_string());
    return list;
}

std::string_view kind_name(ActionKind kind) {
    switch (kind) {
    case ActionKind::skill: return "skill";
    case ActionKind::slot_fill: return "slot_fill";
    case ActionKind::authorize: return "authorize";
    }
    return "skill";
}

std::string pddl_name(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '.')
            out += "__";
        else
            out += c;
    }
    return out;
}

std::string pddl_atom(const Fluent& fluent) {
    switch (fluent.kind) {
    case FluentKind::known: return "(known " + pddl_name(fluent.first) + ")";
    case FluentKind::cannot_establish:
        return "(cannot_establish " + pddl_name(fluent.first) + " " + pddl_name(fluent.second) + ")";
    case FluentKind::authorized: return "(authorized " + pddl_name(fluent.first) + ")";
    }
    return "()";
}

struct PddlObjects {
    std::set<std::string> elements;
    std::set<std::string> pairs;
    std::set<std::string> skills;

    void add(const Fluent& fluent) {
        switch (fluent.kind) {
        case FluentKind::known: elements.insert(pddl_name(fluent.first)); break;
        case FluentKind::cannot_establish:
            pairs.insert(pddl_name(fluent.first));
            elements.insert(pddl_name(fluent.second));
            break;
        case FluentKind::authorized: skills.insert(pddl_name(fluent.first)); break;
        }
    }
};

PddlObjects collect_objects(const PlanningModel& model) {
    PddlObjects objects;
    for (const auto& [id, action] : model.actions) {
        for (const auto& f : action.preconditions)
            objects.add(f);
        for (const auto& f : action.blocked_by)
            objects.add(f);
        for (const auto& f : action.add_effects)
            objects.add(f);
    }
    for (const auto* set : {&model.initial_state, &model.static_true, &model.goal})
        for (const auto& f : *set)
            objects.add(f);
    return objects;
}

}  // namespace

Json to_json(const GroundedAction& action) {
    return {
        {"id", action.id},
        {"kind", kind_name(action.kind)},
        {"skill_id", action.skill_id},
        {"pair_id", action.pair_id},
        {"outcome_index", action.outcome_index},
        {"subject", action.subject},
        {"outcome", action.outcome},
        {"preconditions", fluent_list(action.preconditions)},
        {"negative_static_preconditions", fluent_list(action.blocked_by)},
        {"add_effects", fluent_list(action.add_effects)},
        {"cost", action.cost},
    };
}

Json to_json(const PlanningModel& model) {
    Json actions = Json::array();
    for (const auto& [id, action] : model.actions)
        actions.push_back(to_json(action));
    return {
        {"actions", actions},
        {"initial_state", fluent_list(model.initial_state)},
        {"static_true", fluent_list(model.static_true)},
        {"goal", fluent_list(model.goal)},
        {"pruned", model.pruned},
    };
}

std::string to_pddl_domain(const PlanningModel& model, std::string_view name) {
    PddlObjects objects = collect_objects(model);
    std::ostringstream out;
    out << "(define (domain " << name << ")\n";
    out << "  (:requirements :strips :typing :negative-preconditions :action-costs)\n";
    out << "  (:types element pair skill)\n";
    out << "  (:constants\n";
    auto constants = [&](const std::set<std::string>& names, const char* type) {
        if (names.empty())
            return;
        out << "   ";
        for (const auto& n : names)
            out << " " << n;
        out << " - " << type << "\n";
    };
    constants(objects.elements, "element");
    constants(objects.pairs, "pair");
    constants(objects.skills, "skill");
    out << "  )\n";
    out << "  (:predicates (known ?x - element) (cannot_establish ?p - pair ?x - element)"
           " (authorized ?s - skill))\n";
    out << "  (:functions (total-cost) - number)\n";
    for (const auto& [id, action] : model.actions) {
        out << "  (:action " << pddl_name(id) << "\n";
        out << "   :parameters ()\n";
        out << "   :precondition (and";
        for (const auto& f : action.preconditions)
            out << " " << pddl_atom(f);
        for (const auto& f : action.blocked_by)
            out << " (not " << pddl_atom(f) << ")";
        out << ")\n";
        out << "   :effect (and";
        for (const auto& f : action.add_effects)
            out << " " << pddl_atom(f);
        out << " (increase (total-cost) " << static_cast<long long>(action.cost) << ")))\n";
    }
    out << ")\n";
    return out.str();
}

std::string to_pddl_problem(const PlanningModel& model, std::string_view name) {
    std::ostringstream out;
    out << "(define (problem " << name << "-problem)\n";
    out << "  (:domain " << name << ")\n";
    out << "  (:init (= (total-cost) 0)";
    for (const auto& f : model.initial_state)
        out << " " << pddl_atom(f);
    for (const auto& f : model.static_true)
        out << " " << pddl_atom(f);
    out << ")\n";
    out << "  (:goal (and";
    for (const auto& f : model.goal)
        out << " " << pddl_atom(f);
    out << "))\n";
    out << "  (:metric minimize (total-cost))\n";
    out << ")\n";
    return out.str();
}

}  // namespace skillweave
