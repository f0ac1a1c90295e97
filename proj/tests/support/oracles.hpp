#pragma once

#include "skillweave/compiler.hpp"
#include "skillweave/explainer.hpp"
#include "skillweave/orchestrator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace skillweave::testing {

// Breadth-first search over the exact state space with unit action costs.
// nullopt when the goal is unreachable or the state budget runs out.
std::optional<std::size_t> bfs_plan_length(const PlanningModel& model, std::size_t max_states = 2'000'000);

// Intersection of the fact sets of every valid plan with at most max_length
// steps, found by enumerating action subsets. nullopt when there is none.
std::optional<FluentSet> plan_fact_intersection(const PlanningModel& model, std::size_t max_length = 8);

// True when no step can make after true from a state where before is false,
// so before holds strictly earlier than after in every plan that reaches after.
bool strictly_precedes(const PlanningModel& model, const Fluent& before, const Fluent& after);

// Action count predicted by the determinization: one action per declared
// outcome, one per slot-fillable element, one per skill with sensitive input.
std::size_t determinization_count(const Catalog& catalog, const Ontology& ontology);

// Sensitive-consuming records that ran without an earlier granted authorization.
std::vector<std::int64_t> privacy_violations(const Session& session);

// The top-k-above-delta condition on a selection.
bool top_k_condition(const std::vector<SkillScore>& scores, double delta, std::size_t k,
                     const std::vector<SkillScore>& selected, std::string* why = nullptr);

// Replays the records kept by regression from the pursuit's starting facts
// plus everything the user supplied. Empty when the goal is re-established,
// else a description of the first problem.
std::string replay_justification(const Session& session, const Pursuit& pursuit);

// Checks that the final-mode link for element is the latest link of the
// chain that consumes it (or something it subsumes), or for a goal outcome
// the link that produced it.
std::string check_final_matches_chain(const Session& session, const Pursuit& pursuit, const ElementId& element);

}  // namespace skillweave::testing
