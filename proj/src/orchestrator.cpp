#include "skillweave/orchestrator.hpp"

#include "skillweave/explainer.hpp"

#include <algorithm>
#include <chrono>

namespace skillweave {

namespace {

const char* const masked = "•••";

std::string trim(std::string_view text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos)
        return "";
    auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

ElementSet closure(const Ontology& ontology, const ElementSet& elements) {
    ElementSet out = elements;
    for (const auto& element : elements)
        for (const auto& ancestor : ontology.ancestors(element))
            out.insert(ancestor);
    return out;
}

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
        text.replace(pos, key.size(), value);
    return text;
}

std::string_view kind_name(PendingQuestion::Kind kind) {
    return kind == PendingQuestion::Kind::authorize ? "authorize" : "slot_fill";
}

Json fluent_strings(const FluentSet& fluents) {
    Json out = Json::array();
    for (const auto& fluent : fluents)
        out.push_back(fluent.to_string());
    return out;
}

}  // namespace

Json to_json(const PendingQuestion& pending) {
    return {
        {"kind", kind_name(pending.kind)},
        {"action_id", pending.action_id},
        {"skill_id", pending.skill_id},
        {"pair_id", pending.pair_id},
        {"subject", pending.subject},
        {"prompt", pending.prompt},
    };
}

Json to_json(const TurnOutput& output) {
    return {
        {"messages", output.messages},
        {"asked", output.asked ? to_json(*output.asked) : Json()},
        {"achieved", output.achieved ? Json(*output.achieved) : Json()},
        {"trace_delta", output.trace_delta},
        {"intent", to_json(output.intent)},
        {"explanation", output.explanation},
    };
}

std::vector<SkillScore> s3_identity_scorer(std::vector<SkillScore> scores) {
    return scores;
}

namespace {

bool by_score(const SkillScore& a, const SkillScore& b) {
    if (a.score != b.score)
        return a.score > b.score;
    return a.skill_id < b.skill_id;
}

}  // namespace

std::vector<SkillScore> s3_top_k_selector(const std::vector<SkillScore>& scores, double delta, std::size_t k) {
    std::vector<SkillScore> eligible;
    for (const auto& score : scores)
        if (score.score >= delta)
            eligible.push_back(score);
    std::stable_sort(eligible.begin(), eligible.end(), by_score);
    if (eligible.size() > k)
        eligible.resize(k);
    return eligible;
}

std::vector<SkillScore> s3_score_order_sequencer(std::vector<SkillScore> selected) {
    std::stable_sort(selected.begin(), selected.end(), by_score);
    return selected;
}

std::int64_t system_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Session::Session(std::string id, std::shared_ptr<const Assistant> assistant, Clock clock)
    : id_(std::move(id)), assistant_(std::move(assistant)), clock_(std::move(clock)), mode_(assistant_->config().mode) {
}

TurnOutput Session::handle_event(const Event& event) {
    TurnOutput out = process(event);
    log_turn(event, out);
    return out;
}

TurnOutput Session::s3_orchestrate(const Event& event, const S3Scorer& scorer, const S3Selector& selector,
                                   const S3Sequencer& sequencer) {
    ++turn_;
    TurnOutput out;
    s3_step(event, out, scorer, selector, sequencer);
    log_turn(event, out);
    return out;
}

void Session::log_turn(const Event& event, TurnOutput& out) {
    if (out.messages.empty())
        out.messages.push_back("OK.");
    turns_.push_back({{"turn", turn_}, {"event", to_json(event)}, {"output", to_json(out)}});
}

TurnOutput Session::process(const Event& event) {
    ++turn_;
    TurnOutput out;
    Intent intent = assistant_->rules().derive(event);
    out.intent = intent;

    if (mode_ == OrchestrationMode::s3) {
        switch (intent.kind) {
        case Intent::Kind::why:
        case Intent::Kind::how:
        case Intent::Kind::summary: answer_question(intent, out); return out;
        case Intent::Kind::provide_value: store_value(intent.element, intent.value, out); return out;
        case Intent::Kind::authorize_response:
            if (pending_ && pending_->kind == PendingQuestion::Kind::authorize) {
                answer_authorization(intent.granted, out);
                return out;
            }
            break;
        default: break;
        }
        pending_.reset();
        s3_step(event, out, s3_identity_scorer, s3_top_k_selector, s3_score_order_sequencer);
        return out;
    }

    if (pending_)
        handle_pending(intent, event, out);
    else
        handle_intent(intent, out);
    return out;
}

void Session::handle_pending(const Intent& intent, const Event& event, TurnOutput& out) {
    bool slot = pending_->kind == PendingQuestion::Kind::slot_fill;
    switch (intent.kind) {
    case Intent::Kind::goal:
        if (goal_stack_.current() == intent.goal) {
            out.messages.push_back("We're already working on your " + assistant_->goal_name(intent.goal) + ".");
            reask(out);
            return;
        }
        pending_.reset();
        push_goal(intent.goal, out);
        return;
    case Intent::Kind::why:
    case Intent::Kind::how:
    case Intent::Kind::summary:
        answer_question(intent, out);
        reask(out);
        return;
    case Intent::Kind::stop:
        pending_.reset();
        stop_goal(out);
        return;
    case Intent::Kind::provide_value:
        if (slot && intent.element == pending_->subject) {
            answer_slot(intent.value, out);
        } else if (slot) {
            pending_.reset();
            provide_value(intent.element, intent.value, out);
        } else {
            store_value(intent.element, intent.value, out);
            reask(out);
        }
        return;
    case Intent::Kind::authorize_response:
        if (!slot) {
            answer_authorization(intent.granted, out);
            return;
        }
        break;
    default: break;
    }
    if (slot) {
        answer_slot(event.text, out);
    } else {
        out.messages.push_back("Please answer yes or no.");
        reask(out);
    }
}

void Session::handle_intent(const Intent& intent, TurnOutput& out) {
    switch (intent.kind) {
    case Intent::Kind::goal: push_goal(intent.goal, out); return;
    case Intent::Kind::why:
    case Intent::Kind::how:
    case Intent::Kind::summary: answer_question(intent, out); return;
    case Intent::Kind::stop: stop_goal(out); return;
    case Intent::Kind::provide_value: provide_value(intent.element, intent.value, out); return;
    case Intent::Kind::authorize_response:
        out.messages.push_back("There is nothing waiting for your confirmation right now.");
        return;
    case Intent::Kind::unknown:
        out.messages.push_back("Sorry, I didn't understand that.");
        return;
    }
}

void Session::reask(TurnOutput& out) {
    if (!pending_)
        return;
    out.messages.push_back(pending_->prompt);
    out.asked = pending_;
}

void Session::answer_question(const Intent& intent, TurnOutput& out) {
    const Ontology& ontology = assistant_->ontology();
    try {
        if (intent.kind == Intent::Kind::summary) {
            Summary summary = summarize(*this);
            out.messages.push_back(summary.text);
            out.explanation = to_json(summary);
            return;
        }
        if (intent.element.empty()) {
            std::string what = intent.phrase.empty() ? "that" : "\"" + intent.phrase + "\"";
            out.messages.push_back("Sorry, I don't know what you mean by " + what + ".");
            return;
        }
        if (intent.kind == Intent::Kind::how) {
            HowAnswer answer = explain_how(*this, intent.element);
            out.messages.push_back(answer.text);
            out.explanation = to_json(answer);
            return;
        }
        const Pursuit* pursuit = pursuit_for();
        if (!pursuit) {
            out.messages.push_back("I haven't worked on anything that used your " +
                                   assistant_->display_name(intent.element) + ".");
            return;
        }
        bool outcome = std::any_of(pursuit->goal.begin(), pursuit->goal.end(), [&](const ElementId& g) {
            return subsumes(ontology, g, intent.element) || subsumes(ontology, intent.element, g);
        });
        if (outcome) {
            const Fact* fact = ltm_.find_subsumed(ontology, intent.element);
            if (fact) {
                ChainExplanation chain = explain_chain(*this, fact->element);
                out.messages.push_back(chain.text);
                out.explanation = to_json(chain);
                return;
            }
        }
        Justification why = explain_why(*this, intent.element, WhyMode::chain);
        out.messages.push_back(why.text);
        out.explanation = to_json(why);
    } catch (const ExplainError& e) {
        out.messages.push_back(e.what());
    }
}

void Session::push_goal(const ElementSet& goal, TurnOutput& out) {
    auto previous = goal_stack_.current();
    if (previous == goal) {
        out.messages.push_back("We're already working on your " + assistant_->goal_name(goal) + ".");
        run(out);
        return;
    }
    goal_stack_.push(goal);
    Pursuit pursuit;
    pursuit.goal = goal;
    pursuit.initial_known = ltm_.known_set();
    pursuit.initial_authorized = authorized_;
    pursuit.started_turn = turn_;
    pursuits_.push_back(std::move(pursuit));
    active_pursuits_.push_back(pursuits_.size() - 1);
    if (previous)
        out.messages.push_back("Sure, let's look at your " + assistant_->goal_name(goal) +
                               " first. We'll come back to your " + assistant_->goal_name(*previous) + " afterwards.");
    else
        out.messages.push_back("Sure, let's work on your " + assistant_->goal_name(goal) + ".");
    run(out);
}

void Session::stop_goal(TurnOutput& out) {
    auto current = goal_stack_.current();
    if (!current) {
        out.messages.push_back("There's nothing to stop.");
        return;
    }
    out.messages.push_back("OK, I've stopped your " + assistant_->goal_name(*current) + ".");
    abandon_goal(GoalStatus::stopped, out);
    run(out);
}

bool Session::store_value(const ElementId& element, const std::string& raw, TurnOutput& out) {
    std::string value = trim(raw);
    if (value.empty() || assistant_->valid_value(element, value) == false) {
        out.messages.push_back("That doesn't look like a valid " + assistant_->display_name(element) + ".");
        return false;
    }
    ltm_.put(assistant_->ontology(), element, value, Provenance::user());
    out.messages.push_back("Thanks, I've noted your " + assistant_->display_name(element) + ".");
    return true;
}

void Session::provide_value(const ElementId& element, const std::string& value, TurnOutput& out) {
    if (store_value(element, value, out) && goal_stack_.current())
        run(out);
}

void Session::put_user_fact(const ElementId& element, const std::string& value) {
    ltm_.put(assistant_->ontology(), element, value, Provenance::user());
}

void Session::answer_slot(const std::string& raw, TurnOutput& out) {
    PendingQuestion question = *pending_;
    pending_.reset();
    std::string value = trim(raw);
    const ElementId& element = question.subject;

    ExecutionRecord record;
    record.skill_id = question.skill_id;
    record.pair_id = question.pair_id;
    record.action_id = question.action_id;
    record.subject = element;
    if (value.empty() || assistant_->valid_value(element, value) == false) {
        record.status = "invalid_answer";
        append_record(std::move(record), out);
        count_failure(question.skill_id, question.pair_id, {element});
        out.messages.push_back("Sorry, that doesn't look like a valid " + assistant_->display_name(element) + ".");
    } else {
        ltm_.put(assistant_->ontology(), element, value, Provenance::user());
        record.actual_outcome = {element};
        record.success = true;
        record.status = "answered";
        append_record(std::move(record), out);
    }
    run(out);
}

void Session::answer_authorization(bool granted, TurnOutput& out) {
    PendingQuestion question = *pending_;
    pending_.reset();
    ExecutionRecord record;
    record.skill_id = question.skill_id;
    record.pair_id = question.pair_id;
    record.action_id = question.action_id;
    record.subject = question.subject;
    record.success = granted;
    record.status = granted ? "authorized" : "denied";
    append_record(std::move(record), out);
    if (granted) {
        authorized_.insert(question.subject);
        out.messages.push_back("Thank you.");
        if (mode_ == OrchestrationMode::s3)
            out.messages.push_back("Please ask again and I'll carry on.");
    } else {
        // Declining removes the only way to authorize this skill for the session.
        pruned_.insert(question.action_id);
        out.messages.push_back("Understood, I won't share that information.");
    }
    run(out);
}

PlanningModel Session::compile_for(const ElementSet& goal) const {
    CompileInput input;
    input.known = ltm_.known_set();
    input.authorized = authorized_;
    input.learned = learned_;
    input.pruned = pruned_;
    input.goal = goal;
    return compile(assistant_->catalog().catalog, assistant_->ontology(), input, assistant_->compile_options());
}

ElementSet Session::known_closure_set() const {
    return closure(assistant_->ontology(), ltm_.known_set());
}

bool Session::satisfied(const ElementSet& goal) const {
    ElementSet known = known_closure_set();
    return std::includes(known.begin(), known.end(), goal.begin(), goal.end());
}

GateDecision Session::authorization_gate(const GroundedAction& action) const {
    if (action.kind != ActionKind::skill)
        return GateDecision::allow;
    const SkillSpec* skill = assistant_->catalog().catalog.find(action.skill_id);
    if (!skill)
        return GateDecision::allow;
    const IoPair* pair = skill->find_pair(action.pair_id);
    if (!pair || !pair_is_sensitive(*pair, assistant_->ontology()))
        return GateDecision::allow;
    return authorized_.count(action.skill_id) ? GateDecision::allow : GateDecision::require_authorization;
}

void Session::run(TurnOutput& out) {
    if (mode_ != OrchestrationMode::planner)
        return;
    int plans = 0;
    while (auto goal = goal_stack_.current()) {
        if (satisfied(*goal)) {
            finish_goal(out);
            continue;
        }
        if (plans >= assistant_->config().max_replans) {
            out.messages.push_back("Sorry, I couldn't make progress on your " + assistant_->goal_name(*goal) +
                                   ", so I've stopped working on it.");
            abandon_goal(GoalStatus::stopped, out);
            continue;
        }
        ++plans;
        PlanningModel model = compile_for(*goal);
        SearchResult result = plan(model);
        plans_.push_back({turn_, *goal, result, learned_, pruned_});
        if (!result.solved()) {
            out.messages.push_back(unreachable_message(*goal));
            abandon_goal(GoalStatus::stopped, out);
            continue;
        }
        for (const auto& id : result.plan.steps) {
            StepResult step = execute_step(model, model.action(id), out);
            if (step == StepResult::suspended)
                return;
            if (step == StepResult::diverged)
                break;
        }
    }
}

Session::StepResult Session::execute_step(const PlanningModel& model, const GroundedAction& action, TurnOutput& out) {
    const Ontology& ontology = assistant_->ontology();
    const SkillSpec& skill = assistant_->catalog().catalog.at(action.skill_id);
    const IoPair* pair = skill.find_pair(action.pair_id);
    const SkillRuntime* runtime = assistant_->registry().find(action.skill_id);

    ExecutionRecord record;
    record.skill_id = action.skill_id;
    record.pair_id = action.pair_id;
    record.action_id = action.id;
    record.subject = action.subject;
    record.desired_outcome_index = action.outcome_index;

    if (!runtime || !pair) {
        record.status = "invalid_invocation";
        record.invalid_invocation = true;
        append_record(std::move(record), out);
        pruned_.insert(action.id);
        return StepResult::diverged;
    }

    InvocationRequest request;
    request.skill_id = action.skill_id;
    request.pair_id = action.pair_id;
    request.desired_outcome = action.outcome_index;
    request.subject = action.subject;

    if (action.kind != ActionKind::skill) {
        InvocationResult result = runtime->execute(request);
        if (result.status == InvocationResult::Status::needs_user) {
            pending_ = PendingQuestion{action.kind == ActionKind::authorize ? PendingQuestion::Kind::authorize
                                                                             : PendingQuestion::Kind::slot_fill,
                                       action.id, action.skill_id, action.pair_id, action.subject, result.prompt};
            out.messages.push_back(result.prompt);
            out.asked = pending_;
            return StepResult::suspended;
        }
        record.status = std::string(to_string(result.status));
        if (result.status == InvocationResult::Status::invalid_invocation) {
            record.invalid_invocation = true;
            append_record(std::move(record), out);
            pruned_.insert(action.id);
        } else {
            append_record(std::move(record), out);
            count_failure(action.skill_id, action.pair_id, action.outcome);
        }
        return StepResult::diverged;
    }

    if (authorization_gate(action) == GateDecision::require_authorization) {
        const SkillSpec* auth = assistant_->catalog().catalog.authorize_skill();
        if (auth && !auth->pairs.empty()) {
            auto it = model.actions.find(pair_ref(auth->skill_id, auth->pairs.front().pair_id) + "." + action.skill_id);
            if (it != model.actions.end())
                return execute_step(model, it->second, out);
        }
        return StepResult::diverged;
    }

    for (const auto& input : pair->inputs) {
        const Fact* fact = ltm_.find_subsumed(ontology, input);
        if (!fact)
            return StepResult::diverged;
        request.inputs[input] = fact->value;
    }
    record.inputs_consumed = pair->inputs;
    record.input_values = request.inputs;

    InvocationResult result;
    try {
        result = runtime->execute(request);
    } catch (const std::exception& e) {
        result = InvocationResult::failed(e.what());
    }
    if (result.status == InvocationResult::Status::needs_user)
        result = InvocationResult::failed("skill asked for user input");
    result = conform(*pair, std::move(result));
    record.status = std::string(to_string(result.status));

    switch (result.status) {
    case InvocationResult::Status::outcome: {
        std::int64_t seq = history_.next_seq();
        for (const auto& [element, value] : result.outputs) {
            ltm_.put(ontology, element, value, Provenance::skill(seq));
            record.actual_outcome.insert(element);
        }
        const ElementSet& desired = pair->outcomes[action.outcome_index];
        record.success = record.actual_outcome == desired;
        if (!record.success)
            record.status = "other_outcome";
        for (auto attribution : result.attributions) {
            attribution.weight = std::clamp(attribution.weight, 0.0, 1.0);
            record.attributions.push_back(attribution);
        }
        append_record(std::move(record), out);
        if (result.outcome_index == action.outcome_index)
            return StepResult::done;
        ElementSet missed;
        for (const auto& element : desired)
            if (!result.outputs.count(element))
                missed.insert(element);
        count_failure(action.skill_id, action.pair_id, missed);
        return StepResult::diverged;
    }
    case InvocationResult::Status::invalid_invocation:
        record.invalid_invocation = true;
        append_record(std::move(record), out);
        pruned_.insert(action.id);
        return StepResult::diverged;
    default:
        append_record(std::move(record), out);
        count_failure(action.skill_id, action.pair_id, action.outcome);
        if (result.message)
            out.messages.push_back(*result.message);
        return StepResult::diverged;
    }
}

void Session::count_failure(const std::string& skill_id, const std::string& pair_id, const ElementSet& elements) {
    const SkillSpec& skill = assistant_->catalog().catalog.at(skill_id);
    std::string ref = pair_ref(skill_id, pair_id);
    for (const auto& element : elements) {
        int count = ++retry_counters_[{ref, element}];
        if (count >= skill.retry_limit)
            learned_.insert(Fluent::cannot_establish(ref, element));
    }
}

std::int64_t Session::append_record(ExecutionRecord record, TurnOutput& out) {
    record.seq = history_.next_seq();
    record.timestamp_ms = clock_();
    std::int64_t seq = record.seq;
    history_.append(std::move(record));
    out.trace_delta.push_back(seq);
    if (!active_pursuits_.empty())
        pursuits_[active_pursuits_.back()].records.push_back(seq);
    return seq;
}

std::string Session::render_fact(const ElementId& element) const {
    const Fact* fact = ltm_.find_subsumed(assistant_->ontology(), element);
    if (!fact)
        return "I don't know your " + assistant_->display_name(element) + " yet.";
    const auto& templates = assistant_->config().templates;
    std::string text = "Your {display} is {value}.";
    if (auto it = templates.find(fact->element); it != templates.end())
        text = it->second;
    else if (auto it2 = templates.find(element); it2 != templates.end())
        text = it2->second;
    std::string value = assistant_->ontology().at(fact->element).sensitive ? masked : fact->value;
    text = replace_all(text, "{display}", assistant_->display_name(fact->element));
    return replace_all(text, "{value}", value);
}

void Session::finish_goal(TurnOutput& out) {
    ElementSet goal = *goal_stack_.current();
    const Ontology& ontology = assistant_->ontology();
    for (const auto& element : goal)
        out.messages.push_back(render_fact(element));
    out.achieved = goal;
    for (const auto& extension : assistant_->config().goal_extensions) {
        if (!ontology.contains(extension.after) || !ltm_.contains(extension.after))
            continue;
        bool related = std::any_of(goal.begin(), goal.end(),
                                   [&](const ElementId& g) { return subsumes(ontology, g, extension.after); });
        if (related)
            out.messages.push_back(extension.prompt);
    }

    Pursuit& pursuit = pursuits_[active_pursuits_.back()];
    pursuit.status = GoalStatus::completed;
    pursuit.finished_order = ++finished_;
    pursuit.end_seq = history_.next_seq();
    active_pursuits_.pop_back();
    notify_resumed(goal_stack_.complete_current().resumed, out);
}

void Session::abandon_goal(GoalStatus status, TurnOutput& out) {
    pending_.reset();
    if (active_pursuits_.empty())
        return;
    Pursuit& pursuit = pursuits_[active_pursuits_.back()];
    pursuit.status = status;
    pursuit.finished_order = ++finished_;
    pursuit.end_seq = history_.next_seq();
    active_pursuits_.pop_back();
    auto pop = status == GoalStatus::completed ? goal_stack_.complete_current() : goal_stack_.stop_current();
    notify_resumed(pop.resumed, out);
}

void Session::notify_resumed(const std::optional<ElementSet>& resumed, TurnOutput& out) {
    if (!resumed)
        return;
    if (!active_pursuits_.empty())
        pursuits_[active_pursuits_.back()].resumed = true;
    out.messages.push_back("Back to your " + assistant_->goal_name(*resumed) + ".");
}

std::string Session::unreachable_message(const ElementSet& goal) const {
    CompileInput input;
    input.known = ltm_.known_set();
    input.authorized = authorized_;
    input.goal = goal;
    const auto& catalog = assistant_->catalog().catalog;
    PlanningModel unrestricted = compile(catalog, assistant_->ontology(), input, assistant_->compile_options());
    FluentSet reachable = relaxed_reachable(compile_for(goal));

    std::optional<Fluent> blocking;
    try {
        LandmarkGraph landmarks = extract_landmarks(unrestricted, {true});
        for (const auto& fluent : landmarks.landmarks) {
            if (!reachable.count(fluent)) {
                blocking = fluent;
                break;
            }
        }
    } catch (const PlannerError&) {
    }
    if (!blocking)
        blocking = Fluent::known(*goal.begin());

    std::string name = assistant_->goal_name(goal);
    if (blocking->kind == FluentKind::authorized) {
        const SkillSpec* skill = catalog.find(blocking->first);
        std::string service = skill ? skill->description : blocking->first;
        return "Sorry, I can't complete your " + name + " without your permission to use the " + service + ".";
    }
    return "Sorry, I can't complete your " + name + ": I have no way to establish your " +
           assistant_->display_name(blocking->first) + ".";
}

void Session::s3_step(const Event& event, TurnOutput& out, const S3Scorer& scorer, const S3Selector& selector,
                      const S3Sequencer& sequencer) {
    const auto& catalog = assistant_->catalog().catalog;
    std::vector<SkillScore> scores;
    for (const auto& [id, runtime] : assistant_->registry().runtimes()) {
        // No preview means the skill cannot bid.
        double score = runtime->preview(event).value_or(0.0);
        scores.push_back({id, std::clamp(score, 0.0, 1.0)});
    }
    auto chosen = sequencer(selector(scorer(std::move(scores)), assistant_->config().s3.delta, assistant_->config().s3.k));
    if (chosen.empty()) {
        out.messages.push_back("Sorry, none of my skills can help with that.");
        return;
    }
    ElementSet known = known_closure_set();
    for (const auto& choice : chosen) {
        const SkillSpec* skill = catalog.find(choice.skill_id);
        if (!skill || skill->internal)
            continue;
        const IoPair* ready = nullptr;
        for (const auto& pair : skill->pairs) {
            if (std::includes(known.begin(), known.end(), pair.inputs.begin(), pair.inputs.end())) {
                ready = &pair;
                break;
            }
        }
        if (!ready) {
            std::string missing;
            for (const auto& input : skill->pairs.front().inputs) {
                if (known.count(input))
                    continue;
                missing += (missing.empty() ? "your " : ", your ") + assistant_->display_name(input);
            }
            out.messages.push_back("The " + skill->description + " needs " + missing + ".");
            continue;
        }
        GroundedAction action;
        action.id = pair_ref(skill->skill_id, ready->pair_id) + ".0";
        action.skill_id = skill->skill_id;
        action.pair_id = ready->pair_id;
        action.outcome = ready->outcomes.front();
        if (authorization_gate(action) == GateDecision::require_authorization) {
            const SkillSpec* auth = catalog.authorize_skill();
            const SkillRuntime* runtime = auth ? assistant_->registry().find(auth->skill_id) : nullptr;
            if (!auth || auth->pairs.empty() || !runtime)
                continue;
            InvocationRequest request{auth->skill_id, auth->pairs.front().pair_id, 0, skill->skill_id, {}};
            InvocationResult result = runtime->execute(request);
            if (result.status != InvocationResult::Status::needs_user)
                continue;
            pending_ = PendingQuestion{PendingQuestion::Kind::authorize,
                                       pair_ref(auth->skill_id, request.pair_id) + "." + skill->skill_id,
                                       auth->skill_id, request.pair_id, skill->skill_id, result.prompt};
            out.messages.push_back(result.prompt);
            out.asked = pending_;
            return;
        }
        PlanningModel empty;
        auto before = history_.next_seq();
        StepResult step = execute_step(empty, action, out);
        if (step == StepResult::suspended)
            return;
        const ExecutionRecord* record = history_.find(before);
        if (record && !record->actual_outcome.empty()) {
            for (const auto& element : record->actual_outcome)
                out.messages.push_back(render_fact(element));
        } else if (record && (out.messages.empty() || record->status != "failed")) {
            out.messages.push_back("The " + skill->description + " couldn't help with that.");
        }
    }
}

const Pursuit* Session::pursuit_for(const std::optional<ElementSet>& goal) const {
    if (!active_pursuits_.empty()) {
        const Pursuit& current = pursuits_[active_pursuits_.back()];
        if (!goal || current.goal == *goal)
            return &current;
    }
    if (goal) {
        for (auto it = pursuits_.rbegin(); it != pursuits_.rend(); ++it)
            if (it->goal == *goal)
                return &*it;
        return nullptr;
    }
    const Pursuit* best = nullptr;
    for (const auto& pursuit : pursuits_)
        if (pursuit.finished_order > 0 && (!best || pursuit.finished_order > best->finished_order))
            best = &pursuit;
    return best;
}

Json Session::state_json(bool mask_sensitive) const {
    const Ontology& ontology = assistant_->ontology();
    Json facts = Json::array();
    for (const auto& [element, fact] : ltm_.facts()) {
        bool sensitive = ontology.at(element).sensitive;
        facts.push_back({
            {"element", element},
            {"display_name", ontology.display_name(element)},
            {"value", sensitive && mask_sensitive ? std::string(masked) : fact.value},
            {"sensitive", sensitive},
            {"provenance", to_string(fact.provenance)},
        });
    }
    Json stack = Json::array();
    for (std::size_t i = 0; i < goal_stack_.entries().size(); ++i) {
        const auto& entry = goal_stack_.entries()[i];
        bool resumed = i < active_pursuits_.size() && pursuits_[active_pursuits_[i]].resumed;
        stack.push_back({{"goal", entry.goal},
                         {"name", assistant_->goal_name(entry.goal)},
                         {"status", to_string(entry.status)},
                         {"current", i + 1 == goal_stack_.entries().size()},
                         {"resumed", resumed}});
    }
    Json counters = Json::array();
    for (const auto& [key, count] : retry_counters_)
        counters.push_back({{"pair", key.first}, {"element", key.second}, {"count", count}});
    return {
        {"session_id", id_},
        {"mode", to_string(mode_)},
        {"turn", turn_},
        {"ltm", facts},
        {"goal_stack", stack},
        {"learned", fluent_strings(learned_)},
        {"pruned", pruned_},
        {"authorized", authorized_},
        {"retry_counters", counters},
        {"pending", pending_ ? to_json(*pending_) : Json()},
    };
}

Json Session::trace_json() const {
    const Ontology& ontology = assistant_->ontology();
    Json records = Json::array();
    for (const auto& record : history_.records()) {
        Json item = to_json(record, false);
        for (auto& [element, value] : item["input_values"].items())
            if (ontology.contains(element) && ontology.at(element).sensitive)
                value = masked;
        records.push_back(std::move(item));
    }
    Json plans = Json::array();
    for (const auto& snapshot : plans_) {
        plans.push_back({{"turn", snapshot.turn},
                         {"goal", snapshot.goal},
                         {"result", to_json(snapshot.result, false)},
                         {"learned", fluent_strings(snapshot.learned)},
                         {"pruned", snapshot.pruned}});
    }
    Json pursuits = Json::array();
    for (const auto& pursuit : pursuits_) {
        pursuits.push_back({{"goal", pursuit.goal},
                            {"status", to_string(pursuit.status)},
                            {"started_turn", pursuit.started_turn},
                            {"initial_known", pursuit.initial_known},
                            {"records", pursuit.records},
                            {"resumed", pursuit.resumed}});
    }
    Json state = state_json(true);
    return {
        {"session_id", id_},
        {"mode", to_string(mode_)},
        {"turns", turns_},
        {"records", records},
        {"plans", plans},
        {"pursuits", pursuits},
        {"state", state},
    };
}

}  // namespace skillweave
