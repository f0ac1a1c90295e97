#pragma once

#include "skillweave/compiler.hpp"
#include "skillweave/config.hpp"
#include "skillweave/goals.hpp"
#include "skillweave/memory.hpp"
#include "skillweave/planner.hpp"
#include "skillweave/skills.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace skillweave {

// A plan step waiting on the user: a slot-fill question or a permission request.
struct PendingQuestion {
    enum class Kind { slot_fill, authorize };

    Kind kind = Kind::slot_fill;
    std::string action_id;
    std::string skill_id;
    std::string pair_id;
    // Element being asked for, or skill asking for permission.
    std::string subject;
    std::string prompt;

    bool operator==(const PendingQuestion&) const = default;
};

Json to_json(const PendingQuestion& pending);

// One goal from the moment it was pushed until it was popped.
struct Pursuit {
    ElementSet goal;
    ElementSet initial_known;
    std::set<std::string> initial_authorized;
    GoalStatus status = GoalStatus::active;
    int started_turn = 0;
    // Position in the order goals finished; 0 while still on the stack.
    int finished_order = 0;
    // History is bounded by this seq for regression (exclusive); unset while active.
    std::optional<std::int64_t> end_seq;
    // Records executed while this goal was current.
    std::vector<std::int64_t> records;
    bool resumed = false;
};

struct PlanSnapshot {
    int turn = 0;
    ElementSet goal;
    SearchResult result;
    FluentSet learned;
    std::set<std::string> pruned;
};

struct TurnOutput {
    std::vector<std::string> messages;
    std::optional<PendingQuestion> asked;
    std::optional<ElementSet> achieved;
    std::vector<std::int64_t> trace_delta;
    Intent intent;
    // Structured answer for what/how/why questions; null otherwise.
    Json explanation;
};

Json to_json(const TurnOutput& output);

enum class GateDecision { allow, require_authorization };

struct SkillScore {
    std::string skill_id;
    double score = 0.0;

    bool operator==(const SkillScore&) const = default;
};

using S3Scorer = std::function<std::vector<SkillScore>(std::vector<SkillScore>)>;
using S3Selector = std::function<std::vector<SkillScore>(const std::vector<SkillScore>&, double delta, std::size_t k)>;
using S3Sequencer = std::function<std::vector<SkillScore>(std::vector<SkillScore>)>;

// Identity scorer.
std::vector<SkillScore> s3_identity_scorer(std::vector<SkillScore> scores);
// Up to k skills scoring at least delta, taking the highest scores first
// (ties by skill id) so that no excluded skill outscores an included one.
std::vector<SkillScore> s3_top_k_selector(const std::vector<SkillScore>& scores, double delta, std::size_t k);
// Highest score first, ties by skill id.
std::vector<SkillScore> s3_score_order_sequencer(std::vector<SkillScore> selected);

using Clock = std::function<std::int64_t()>;
std::int64_t system_clock_ms();

class Session {
public:
    Session(std::string id, std::shared_ptr<const Assistant> assistant, Clock clock = system_clock_ms);

    TurnOutput handle_event(const Event& event);

    // Mode s3: preview every skill, select, sequence and execute.
    TurnOutput s3_orchestrate(const Event& event, const S3Scorer& scorer = s3_identity_scorer,
                              const S3Selector& selector = s3_top_k_selector,
                              const S3Sequencer& sequencer = s3_score_order_sequencer);

    GateDecision authorization_gate(const GroundedAction& action) const;

    // Compiles the current session state against goal.
    PlanningModel compile_for(const ElementSet& goal) const;
    // known_set of the LTM with ancestors added.
    ElementSet known_closure_set() const;
    bool satisfied(const ElementSet& goal) const;

    const std::string& id() const { return id_; }
    const Assistant& assistant() const { return *assistant_; }
    std::shared_ptr<const Assistant> assistant_ptr() const { return assistant_; }
    OrchestrationMode mode() const { return mode_; }
    void set_mode(OrchestrationMode mode) { mode_ = mode; }
    const LongTermMemory& ltm() const { return ltm_; }
    const History& history() const { return history_; }
    const GoalStack& goal_stack() const { return goal_stack_; }
    const FluentSet& learned() const { return learned_; }
    const std::set<std::string>& pruned() const { return pruned_; }
    const std::set<std::string>& authorized() const { return authorized_; }
    const std::map<std::pair<std::string, ElementId>, int>& retry_counters() const { return retry_counters_; }
    const std::optional<PendingQuestion>& pending() const { return pending_; }
    const std::vector<Pursuit>& pursuits() const { return pursuits_; }
    const std::vector<PlanSnapshot>& plans() const { return plans_; }
    int turn() const { return turn_; }

    // Pursuit a what/why question refers to: the current goal, else the one
    // that finished last. Optionally restricted to pursuits of goal.
    const Pursuit* pursuit_for(const std::optional<ElementSet>& goal = std::nullopt) const;

    // Writes a user-provided fact directly, as if the user had stated it.
    void put_user_fact(const ElementId& element, const std::string& value);

    Json state_json(bool mask_sensitive = true) const;
    // Deterministic document of everything the session did; no timestamps.
    Json trace_json() const;

private:
    enum class StepResult { done, suspended, diverged };

    TurnOutput process(const Event& event);
    void handle_pending(const Intent& intent, const Event& event, TurnOutput& out);
    void handle_intent(const Intent& intent, TurnOutput& out);
    void answer_question(const Intent& intent, TurnOutput& out);
    void push_goal(const ElementSet& goal, TurnOutput& out);
    void stop_goal(TurnOutput& out);
    void provide_value(const ElementId& element, const std::string& value, TurnOutput& out);
    void answer_slot(const std::string& raw, TurnOutput& out);
    void answer_authorization(bool granted, TurnOutput& out);
    void s3_step(const Event& event, TurnOutput& out, const S3Scorer& scorer, const S3Selector& selector,
                 const S3Sequencer& sequencer);
    bool store_value(const ElementId& element, const std::string& value, TurnOutput& out);
    void log_turn(const Event& event, TurnOutput& out);
    void run(TurnOutput& out);
    StepResult execute_step(const PlanningModel& model, const GroundedAction& action, TurnOutput& out);
    void finish_goal(TurnOutput& out);
    void abandon_goal(GoalStatus status, TurnOutput& out);
    void notify_resumed(const std::optional<ElementSet>& resumed, TurnOutput& out);
    std::string unreachable_message(const ElementSet& goal) const;
    void count_failure(const std::string& skill_id, const std::string& pair_id, const ElementSet& elements);
    std::int64_t append_record(ExecutionRecord record, TurnOutput& out);
    void reask(TurnOutput& out);
    std::string render_fact(const ElementId& element) const;

    std::string id_;
    std::shared_ptr<const Assistant> assistant_;
    Clock clock_;
    OrchestrationMode mode_;
    LongTermMemory ltm_;
    History history_;
    GoalStack goal_stack_;
    FluentSet learned_;
    std::set<std::string> pruned_;
    std::set<std::string> authorized_;
    std::map<std::pair<std::string, ElementId>, int> retry_counters_;
    std::optional<PendingQuestion> pending_;
    std::vector<Pursuit> pursuits_;
    // Indices into pursuits_, parallel to the goal stack.
    std::vector<std::size_t> active_pursuits_;
    std::vector<PlanSnapshot> plans_;
    std::vector<Json> turns_;
    int turn_ = 0;
    int finished_ = 0;
};

}  // namespace skillweave
