#include "skillweave/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <queue>
#include <unordered_map>

namespace skillweave {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

using Bits = std::vector<std::uint64_t>;

bool test(const Bits& bits, int i) {
    return (bits[i >> 6] >> (i & 63)) & 1u;
}

void set(Bits& bits, int i) {
    bits[i >> 6] |= std::uint64_t{1} << (i & 63);
}

struct BitsHash {
    std::size_t operator()(const Bits& bits) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (auto word : bits)
            h ^= word + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

struct Operator {
    const GroundedAction* action;
    std::vector<int> pre;
    std::vector<int> add;
    double cost;
};

// Integer-indexed view of the applicable part of a model. Operators are kept
// in action-id order so that the index doubles as the lexicographic tie-break.
struct Task {
    std::vector<Fluent> fluents;
    std::map<Fluent, int> index;
    std::vector<Operator> ops;
    std::vector<int> goal;
    Bits init;
    std::size_t words = 0;

    int intern(const Fluent& fluent) {
        auto [it, inserted] = index.emplace(fluent, static_cast<int>(fluents.size()));
        if (inserted)
            fluents.push_back(fluent);
        return it->second;
    }
};

bool blocked(const PlanningModel& model, const GroundedAction& action) {
    for (const auto& fluent : action.blocked_by)
        if (model.static_true.count(fluent))
            return true;
    return false;
}

Task build_task(const PlanningModel& model, bool relevant_only) {
    FluentSet relevant;
    if (relevant_only)
        relevant = relevant_fluents(model);

    Task task;
    for (const auto& fluent : model.initial_state)
        task.intern(fluent);
    for (const auto& fluent : model.goal)
        task.goal.push_back(task.intern(fluent));
    for (const auto& [id, action] : model.actions) {
        if (blocked(model, action))
            continue;
        if (relevant_only && std::none_of(action.add_effects.begin(), action.add_effects.end(),
                                          [&](const Fluent& f) { return relevant.count(f) != 0; }))
            continue;
        Operator op{&action, {}, {}, action.cost};
        for (const auto& fluent : action.preconditions)
            op.pre.push_back(task.intern(fluent));
        for (const auto& fluent : action.add_effects)
            op.add.push_back(task.intern(fluent));
        task.ops.push_back(std::move(op));
    }
    task.words = (task.fluents.size() + 63) / 64;
    task.init.assign(task.words, 0);
    for (const auto& fluent : model.initial_state)
        set(task.init, task.index.at(fluent));
    return task;
}

bool applicable(const Operator& op, const Bits& state) {
    return std::all_of(op.pre.begin(), op.pre.end(), [&](int f) { return test(state, f); });
}

bool adds_something(const Operator& op, const Bits& state) {
    return std::any_of(op.add.begin(), op.add.end(), [&](int f) { return !test(state, f); });
}

struct Heuristics {
    double hmax = 0.0;
    double hadd = 0.0;
};

// Relaxed fluent costs by fixpoint iteration; the tasks here are tiny.
std::vector<double> relaxed_costs(const Task& task, const Bits& state, bool additive) {
    std::vector<double> cost(task.fluents.size(), infinity);
    for (std::size_t f = 0; f < task.fluents.size(); ++f)
        if (test(state, static_cast<int>(f)))
            cost[f] = 0.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& op : task.ops) {
            double base = 0.0;
            for (int p : op.pre) {
                if (cost[p] == infinity) {
                    base = infinity;
                    break;
                }
                base = additive ? base + cost[p] : std::max(base, cost[p]);
            }
            if (base == infinity)
                continue;
            double reach = base + op.cost;
            for (int a : op.add) {
                if (reach < cost[a]) {
                    cost[a] = reach;
                    changed = true;
                }
            }
        }
    }
    return cost;
}

Heuristics evaluate(const Task& task, const Bits& state) {
    Heuristics h;
    auto max_costs = relaxed_costs(task, state, false);
    auto add_costs = relaxed_costs(task, state, true);
    for (int g : task.goal) {
        h.hmax = std::max(h.hmax, max_costs[g]);
        h.hadd += add_costs[g];
    }
    return h;
}

bool goal_reached(const Task& task, const Bits& state) {
    return std::all_of(task.goal.begin(), task.goal.end(), [&](int g) { return test(state, g); });
}

struct SearchNode {
    Bits state;
    double g = 0.0;
    int parent = -1;
    int op = -1;
    bool closed = false;
};

struct OpenEntry {
    double primary;
    double secondary;
    int op;
    std::size_t order;
    int node;

    bool operator>(const OpenEntry& other) const {
        if (primary != other.primary)
            return primary > other.primary;
        if (secondary != other.secondary)
            return secondary > other.secondary;
        if (op != other.op)
            return op > other.op;
        return order > other.order;
    }
};

}  // namespace

FluentSet relevant_fluents(const PlanningModel& model) {
    FluentSet relevant = model.goal;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [id, action] : model.actions) {
            if (blocked(model, action))
                continue;
            bool contributes = std::any_of(action.add_effects.begin(), action.add_effects.end(),
                                           [&](const Fluent& f) { return relevant.count(f) != 0; });
            if (!contributes)
                continue;
            for (const auto& pre : action.preconditions)
                changed |= relevant.insert(pre).second;
        }
    }
    return relevant;
}

SearchResult plan(const PlanningModel& model, const PlannerOptions& options) {
    auto started = std::chrono::steady_clock::now();
    SearchResult result;
    auto finish = [&]() -> SearchResult {
        result.stats.time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        return result;
    };

    Task task = build_task(model, true);
    const bool astar = options.strategy == SearchStrategy::astar;

    std::vector<SearchNode> nodes;
    std::unordered_map<Bits, int, BitsHash> lookup;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
    std::size_t order = 0;

    auto push = [&](int node, int op) -> bool {
        Heuristics h = evaluate(task, nodes[node].state);
        if (h.hmax == infinity)
            return false;
        double primary = astar ? nodes[node].g + h.hmax : h.hadd;
        double secondary = astar ? h.hadd : nodes[node].g;
        open.push({primary, secondary, op, order++, node});
        return true;
    };

    nodes.push_back({task.init, 0.0, -1, -1, false});
    lookup.emplace(task.init, 0);
    if (!push(0, -1))
        return finish();

    while (!open.empty()) {
        OpenEntry entry = open.top();
        open.pop();
        SearchNode& current = nodes[entry.node];
        if (current.closed)
            continue;
        current.closed = true;

        if (goal_reached(task, current.state)) {
            std::vector<std::string> steps;
            for (int n = entry.node; nodes[n].parent >= 0; n = nodes[n].parent)
                steps.push_back(task.ops[nodes[n].op].action->id);
            std::reverse(steps.begin(), steps.end());
            result.status = SearchResult::Status::plan;
            result.plan.steps = std::move(steps);
            result.cost = current.g;
            return finish();
        }
        if (++result.stats.expanded > options.max_expansions)
            break;

        Bits state = current.state;
        double g = current.g;
        for (int i = 0; i < static_cast<int>(task.ops.size()); ++i) {
            const Operator& op = task.ops[i];
            if (!applicable(op, state) || !adds_something(op, state))
                continue;
            Bits successor = state;
            for (int a : op.add)
                set(successor, a);
            double succ_g = g + op.cost;
            ++result.stats.generated;
            auto it = lookup.find(successor);
            if (it != lookup.end()) {
                SearchNode& known = nodes[it->second];
                // Greedy search never reopens; A* reopens on a cheaper path.
                if (!astar || known.g <= succ_g)
                    continue;
                known.g = succ_g;
                known.parent = entry.node;
                known.op = i;
                known.closed = false;
                push(it->second, i);
                continue;
            }
            int id = static_cast<int>(nodes.size());
            nodes.push_back({std::move(successor), succ_g, entry.node, i, false});
            lookup.emplace(nodes.back().state, id);
            push(id, i);
        }
    }
    return finish();
}

FluentSet relaxed_reachable(const PlanningModel& model, const FluentSet& excluded_achievers) {
    FluentSet reached = model.initial_state;
    std::vector<const GroundedAction*> usable;
    for (const auto& [id, action] : model.actions) {
        if (blocked(model, action))
            continue;
        bool excluded = std::any_of(action.add_effects.begin(), action.add_effects.end(),
                                    [&](const Fluent& f) { return excluded_achievers.count(f) != 0; });
        if (!excluded)
            usable.push_back(&action);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto* action : usable) {
            if (!model.applicable(*action, reached))
                continue;
            for (const auto& fluent : action->add_effects)
                changed |= reached.insert(fluent).second;
        }
    }
    return reached;
}

namespace {

// Fluents that can become true in a step taken while avoided is still false.
FluentSet reachable_avoiding(const PlanningModel& model, const Fluent& avoided) {
    FluentSet before = relaxed_reachable(model, {avoided});
    FluentSet out = before;
    for (const auto& [id, action] : model.actions)
        if (!blocked(model, action) && model.applicable(action, before))
            out.insert(action.add_effects.begin(), action.add_effects.end());
    return out;
}

}  // namespace

std::map<Fluent, int> relaxed_layers(const PlanningModel& model) {
    std::map<Fluent, int> layer;
    for (const auto& fluent : model.initial_state)
        layer.emplace(fluent, 0);
    FluentSet reached = model.initial_state;
    for (int depth = 1;; ++depth) {
        FluentSet next;
        for (const auto& [id, action] : model.actions) {
            if (!model.applicable(action, reached))
                continue;
            for (const auto& fluent : action.add_effects)
                if (!reached.count(fluent))
                    next.insert(fluent);
        }
        if (next.empty())
            break;
        for (const auto& fluent : next) {
            layer.emplace(fluent, depth);
            reached.insert(fluent);
        }
    }
    return layer;
}

bool LandmarkGraph::contains(const Fluent& fluent) const {
    return std::find(landmarks.begin(), landmarks.end(), fluent) != landmarks.end();
}

namespace {

bool goal_within(const PlanningModel& model, const FluentSet& reached) {
    return std::all_of(model.goal.begin(), model.goal.end(),
                       [&](const Fluent& f) { return reached.count(f) != 0; });
}

}  // namespace

LandmarkGraph extract_landmarks(const PlanningModel& model, const LandmarkOptions& options) {
    FluentSet reachable = relaxed_reachable(model);
    if (!goal_within(model, reachable))
        throw PlannerError("goal is not relaxed-reachable; no landmarks");

    LandmarkGraph graph;
    graph.layer = relaxed_layers(model);

    auto candidate = [&](const Fluent& f) {
        return f.kind == FluentKind::known ||
               (options.include_compilation_fluents && f.kind == FluentKind::authorized);
    };

    std::vector<Fluent> achieved;
    for (const auto& fluent : reachable) {
        if (!candidate(fluent))
            continue;
        if (model.initial_state.count(fluent)) {
            graph.landmarks.push_back(fluent);
            graph.initially_true.insert(fluent);
            continue;
        }
        if (!goal_within(model, relaxed_reachable(model, {fluent}))) {
            graph.landmarks.push_back(fluent);
            achieved.push_back(fluent);
        }
    }

    std::sort(graph.landmarks.begin(), graph.landmarks.end(), [&](const Fluent& a, const Fluent& b) {
        int la = graph.layer.at(a);
        int lb = graph.layer.at(b);
        if (la != lb)
            return la < lb;
        return a.to_string() < b.to_string();
    });

    // before < after when no step taken while before is false can add after,
    // so before must hold strictly earlier in every plan.
    std::map<Fluent, FluentSet> without;
    for (const auto& fluent : achieved)
        without.emplace(fluent, reachable_avoiding(model, fluent));
    std::set<std::pair<Fluent, Fluent>> orderings;
    for (const auto& [before, reached] : without)
        for (const auto& [after, unused] : without)
            if (before != after && !reached.count(after))
                orderings.emplace(before, after);

    for (const auto& edge : orderings) {
        bool implied = false;
        for (const auto& [middle, unused] : without) {
            if (middle == edge.first || middle == edge.second)
                continue;
            if (orderings.count({edge.first, middle}) && orderings.count({middle, edge.second})) {
                implied = true;
                break;
            }
        }
        if (!implied)
            graph.orderings.insert(edge);
    }
    return graph;
}

Json to_json(const SearchResult& result, bool with_time) {
    Json stats = {{"expanded", result.stats.expanded}, {"generated", result.stats.generated}};
    if (with_time)
        stats["time_ms"] = result.stats.time_ms;
    Json json = {
        {"status", result.solved() ? "plan" : "unreachable"},
        {"stats", stats},
    };
    if (result.solved()) {
        json["plan"] = result.plan.steps;
        json["cost"] = result.cost;
    }
    return json;
}

Json to_json(const LandmarkGraph& graph) {
    Json landmarks = Json::array();
    for (const auto& fluent : graph.landmarks)
        landmarks.push_back({{"fluent", fluent.to_string()},
                             {"layer", graph.layer.at(fluent)},
                             {"initially_true", graph.initially_true.count(fluent) != 0}});
    Json orderings = Json::array();
    for (const auto& [before, after] : graph.orderings)
        orderings.push_back({{"before", before.to_string()}, {"after", after.to_string()}});
    return {{"landmarks", landmarks}, {"orderings", orderings}};
}

}  // namespace skillweave
