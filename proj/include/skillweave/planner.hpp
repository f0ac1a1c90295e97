#pragma once

#include "skillweave/compiler.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace skillweave {

enum class SearchStrategy {
    // A* on f = g + h_max, ties broken by h_add then action id. Cost-optimal.
    astar,
    // Greedy best-first on h_add, ties broken by action id.
    greedy,
};

struct PlannerOptions {
    SearchStrategy strategy = SearchStrategy::astar;
    std::size_t max_expansions = 1'000'000;
};

struct SearchStats {
    std::size_t expanded = 0;
    std::size_t generated = 0;
    double time_ms = 0.0;
};

struct SearchResult {
    enum class Status { plan, unreachable };

    Status status = Status::unreachable;
    Plan plan;
    double cost = 0.0;
    SearchStats stats;

    bool solved() const { return status == Status::plan; }
};

class PlannerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

SearchResult plan(const PlanningModel& model, const PlannerOptions& options = {});

// Fixpoint of the delete relaxation from the initial state, ignoring every
// action that adds a fluent in excluded_achievers. Exact reachability when
// nothing is excluded, since the model has no delete effects.
FluentSet relaxed_reachable(const PlanningModel& model, const FluentSet& excluded_achievers = {});

// First relaxed layer at which each reachable fluent appears (0 = initial).
std::map<Fluent, int> relaxed_layers(const PlanningModel& model);

// Fluents that can matter for the goal: goal fluents and, transitively, the
// preconditions of actions adding a relevant fluent.
FluentSet relevant_fluents(const PlanningModel& model);

struct LandmarkGraph {
    // Topological order: by first relaxed layer, then by name.
    std::vector<Fluent> landmarks;
    // (before, after) pairs, transitively reduced.
    std::set<std::pair<Fluent, Fluent>> orderings;
    std::map<Fluent, int> layer;
    FluentSet initially_true;

    bool contains(const Fluent& fluent) const;
    FluentSet set() const { return {landmarks.begin(), landmarks.end()}; }
};

struct LandmarkOptions {
    // Also test authorized(...) fluents. Off for user-facing summaries.
    bool include_compilation_fluents = false;
};

// Fact landmarks of the delete-free model. Throws PlannerError when the goal
// is not relaxed-reachable.
LandmarkGraph extract_landmarks(const PlanningModel& model, const LandmarkOptions& options = {});

Json to_json(const SearchResult& result, bool with_time = true);
Json to_json(const LandmarkGraph& graph);

}  // namespace skillweave
