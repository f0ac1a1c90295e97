#include "skillweave/explainer.hpp"

#include <algorithm>
#include <cstdio>

namespace skillweave {

namespace {

ElementSet closure(const Ontology& ontology, const ElementSet& elements) {
    ElementSet out = elements;
    for (const auto& element : elements)
        for (const auto& ancestor : ontology.ancestors(element))
            out.insert(ancestor);
    return out;
}

bool intersects(const ElementSet& a, const ElementSet& b) {
    return std::any_of(a.begin(), a.end(), [&](const ElementId& e) { return b.count(e) != 0; });
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0)
            out += i + 1 == items.size() ? " and " : ", ";
        out += items[i];
    }
    return out;
}

std::string your(const Session& session, const ElementSet& elements) {
    std::vector<std::string> names;
    for (const auto& element : elements)
        names.push_back(session.assistant().display_name(element));
    return names.empty() ? "nothing" : "your " + join(names);
}

std::string service(const Session& session, const std::string& skill_id) {
    const SkillSpec* skill = session.assistant().catalog().catalog.find(skill_id);
    return "the " + (skill ? skill->description : skill_id);
}

bool is_slot_fill(const Session& session, const std::string& skill_id) {
    const SkillSpec* skill = session.assistant().catalog().catalog.find(skill_id);
    return skill && skill->is_slot_fill();
}

// Most recent record before end_seq whose outcome covers element.
const ExecutionRecord* establisher(const Session& session, const ElementId& element,
                                   std::optional<std::int64_t> end_seq = std::nullopt) {
    const Ontology& ontology = session.assistant().ontology();
    const auto& records = session.history().records();
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
        if (end_seq && it->seq >= *end_seq)
            continue;
        if (closure(ontology, it->actual_outcome).count(element))
            return &*it;
    }
    return nullptr;
}

std::string weight_text(double weight) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", weight);
    return buffer;
}

}  // namespace

std::string_view to_string(WhyMode mode) {
    return mode == WhyMode::final ? "final" : "chain";
}

WhyMode parse_why_mode(std::string_view text) {
    if (text == "final")
        return WhyMode::final;
    if (text == "chain")
        return WhyMode::chain;
    throw ExplainError("unknown why mode '" + std::string(text) + "'");
}

Summary summarize(const Session& session, const ElementSet& goal) {
    const Pursuit* pursuit = session.pursuit_for(goal);
    if (!pursuit)
        throw ExplainError("I haven't worked on your " + session.assistant().goal_name(goal) + " in this session.");
    const Assistant& assistant = session.assistant();
    const Ontology& ontology = assistant.ontology();

    // The model as it looked when the goal was first pursued, with what has
    // been learned since folded in.
    CompileInput input;
    input.known = pursuit->initial_known;
    input.authorized = pursuit->initial_authorized;
    input.learned = session.learned();
    input.pruned = session.pruned();
    input.goal = goal;
    PlanningModel model = compile(assistant.catalog().catalog, ontology, input, assistant.compile_options());

    std::vector<Fluent> landmarks;
    if (std::includes(model.initial_state.begin(), model.initial_state.end(), model.goal.begin(), model.goal.end())) {
        landmarks.assign(model.goal.begin(), model.goal.end());
    } else {
        try {
            LandmarkGraph graph = extract_landmarks(model);
            FluentSet relevant = relevant_fluents(model);
            for (const auto& fluent : graph.landmarks)
                if (fluent.is_known() && relevant.count(fluent))
                    landmarks.push_back(fluent);
        } catch (const PlannerError&) {
            landmarks.assign(model.goal.begin(), model.goal.end());
        }
    }

    Summary summary;
    summary.goal = goal;
    ElementSet landmark_elements;
    for (const auto& fluent : landmarks) {
        const ElementId& element = fluent.first;
        landmark_elements.insert(element);
        SummaryItem item;
        item.fluent = fluent;
        std::string name = assistant.display_name(element);
        const Fact* fact = session.ltm().find_subsumed(ontology, element);
        const ExecutionRecord* record = establisher(session, element, pursuit->end_seq);
        if (pursuit->initial_known.count(element) ||
            (closure(ontology, pursuit->initial_known).count(element) && !record)) {
            item.source = "initial";
            item.sentence = "I already knew your " + name + ".";
        } else if ((record && is_slot_fill(session, record->skill_id)) ||
                   (!record && fact && fact->provenance.kind == Provenance::Kind::user)) {
            item.source = "user";
            if (record)
                item.record = record->seq;
            item.sentence = "You provided your " + name + ".";
        } else if (record) {
            item.source = "skill";
            item.record = record->seq;
            item.sentence = "I established your " + name + " using " + service(session, record->skill_id) + ".";
        } else {
            item.source = "pending";
            item.sentence = "I still need your " + name + ".";
        }
        summary.items.push_back(std::move(item));
    }
    for (auto seq : pursuit->records) {
        const ExecutionRecord* record = session.history().find(seq);
        if (!record || !intersects(closure(ontology, record->actual_outcome), landmark_elements))
            ++summary.omitted;
    }

    summary.text = "Here is what I did for your " + assistant.goal_name(goal) + ":";
    for (const auto& item : summary.items)
        summary.text += " " + item.sentence;
    if (summary.omitted > 0)
        summary.text += " (" + std::to_string(summary.omitted) + " other step" + (summary.omitted == 1 ? "" : "s") +
                        " omitted; ask how for details.)";
    return summary;
}

Summary summarize(const Session& session) {
    const Pursuit* pursuit = session.pursuit_for();
    if (!pursuit)
        throw ExplainError("I haven't worked on any goal yet.");
    return summarize(session, pursuit->goal);
}

HowAnswer explain_how(const Session& session, const ElementId& element) {
    const Assistant& assistant = session.assistant();
    const Ontology& ontology = assistant.ontology();
    if (!ontology.contains(element))
        throw ExplainError("I don't know what '" + element + "' is.");
    const Fact* fact = session.ltm().find_subsumed(ontology, element);
    if (!fact)
        throw ExplainError("I haven't established your " + assistant.display_name(element) + ".");

    HowAnswer answer;
    answer.element = fact->element;
    std::string name = assistant.display_name(fact->element);
    if (fact->provenance.kind == Provenance::Kind::user) {
        answer.user_provided = true;
        answer.text = "You provided your " + name + ".";
        return answer;
    }
    if (fact->provenance.kind == Provenance::Kind::seed) {
        answer.text = "Your " + name + " was on file when the session started.";
        return answer;
    }
    const ExecutionRecord* record = establisher(session, fact->element);
    if (!record)
        throw ExplainError("I have no record of how your " + name + " was established.");
    const SkillSpec* skill = assistant.catalog().catalog.find(record->skill_id);
    answer.record = record->seq;
    answer.skill_id = record->skill_id;
    answer.description = skill ? skill->description : record->skill_id;
    answer.inputs = record->inputs_consumed;
    answer.text = "I got your " + name + " from the " + answer.description;
    if (!answer.inputs.empty())
        answer.text += ", using " + your(session, answer.inputs);
    answer.text += ".";
    return answer;
}

namespace {

// Walks history backwards from the goal. Returns links goal-first; stop_at
// ends the walk at the first kept record that consumes that element.
std::vector<JustificationLink> regress(const Session& session, const ElementSet& goal,
                                       std::optional<std::int64_t> end_seq, const std::optional<ElementId>& stop_at,
                                       bool& stopped) {
    const Ontology& ontology = session.assistant().ontology();
    ElementSet frontier = goal;
    std::vector<JustificationLink> links;
    stopped = false;
    const auto& records = session.history().records();
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
        if (end_seq && it->seq >= *end_seq)
            continue;
        ElementSet produced = closure(ontology, it->actual_outcome);
        if (!intersects(produced, frontier))
            continue;
        links.push_back({it->seq, it->skill_id, it->inputs_consumed, it->actual_outcome});
        for (const auto& element : produced)
            frontier.erase(element);
        frontier.insert(it->inputs_consumed.begin(), it->inputs_consumed.end());
        if (stop_at) {
            bool consumes = std::any_of(it->inputs_consumed.begin(), it->inputs_consumed.end(),
                                        [&](const ElementId& input) { return subsumes(ontology, input, *stop_at); });
            if (consumes) {
                stopped = true;
                break;
            }
        }
    }
    return links;
}

}  // namespace

std::vector<JustificationLink> full_regression(const Session& session, const ElementSet& goal,
                                               std::optional<std::int64_t> end_seq) {
    bool stopped = false;
    return regress(session, goal, end_seq, std::nullopt, stopped);
}

Justification explain_why(const Session& session, const ElementSet& goal, const ElementId& element, WhyMode mode) {
    const Assistant& assistant = session.assistant();
    const Ontology& ontology = assistant.ontology();
    if (!ontology.contains(element))
        throw ExplainError("I don't know what '" + element + "' is.");
    const Pursuit* pursuit = session.pursuit_for(goal);
    if (!pursuit)
        throw ExplainError("I haven't worked on your " + assistant.goal_name(goal) + " in this session.");

    Justification why;
    why.mode = mode;
    why.element = element;
    why.goal = goal;
    std::string name = assistant.display_name(element);
    std::string goal_name = assistant.goal_name(goal);

    bool is_goal = std::any_of(goal.begin(), goal.end(), [&](const ElementId& g) { return subsumes(ontology, g, element); });
    bool stopped = false;
    auto links = regress(session, goal, pursuit->end_seq, is_goal ? std::nullopt : std::optional(element), stopped);
    if (is_goal) {
        // Only the record that produced this outcome (or a more specific one) counts.
        for (const auto& link : links) {
            if (std::any_of(link.produced.begin(), link.produced.end(),
                            [&](const ElementId& output) { return subsumes(ontology, element, output); })) {
                why.contributed = true;
                why.links = {link};
                why.text = "Your " + name + " is what you asked me for.";
                return why;
            }
        }
        why.contributed = false;
        why.text = "Your " + name + " did not come about while working on your " + goal_name + ".";
        return why;
    }
    if (!stopped) {
        why.contributed = false;
        why.text = "Your " + name + " did not contribute to your " + goal_name + ".";
        return why;
    }
    why.contributed = true;
    std::reverse(links.begin(), links.end());
    if (mode == WhyMode::final)
        why.links = {links.front()};
    else
        why.links = links;

    // Narrate the path the element took, skipping parallel branches.
    ElementSet carried = closure(ontology, {element});
    std::vector<std::string> steps;
    for (std::size_t i = 0; i < why.links.size(); ++i) {
        const auto& link = why.links[i];
        ElementSet used;
        for (const auto& input : link.consumed)
            if (carried.count(input))
                used.insert(input);
        if (used.empty())
            continue;
        ElementSet gave = link.produced;
        if (i + 1 < why.links.size()) {
            ElementSet onward;
            for (std::size_t j = i + 1; j < why.links.size(); ++j)
                for (const auto& input : why.links[j].consumed)
                    if (closure(ontology, gave).count(input))
                        onward.insert(input);
            if (!onward.empty())
                gave = onward;
        }
        steps.push_back(service(session, link.skill_id) + " used " + your(session, used) + " to establish " +
                        your(session, gave));
        carried = closure(ontology, link.produced);
    }
    why.text = "I needed your " + name + " because " + join(steps);
    if (mode == WhyMode::final && !is_goal)
        why.text += ", on the way to your " + goal_name;
    why.text += ".";
    return why;
}

Justification explain_why(const Session& session, const ElementId& element, WhyMode mode) {
    const Pursuit* pursuit = session.pursuit_for();
    if (!pursuit)
        throw ExplainError("I haven't worked on any goal yet.");
    return explain_why(session, pursuit->goal, element, mode);
}

ChainExplanation explain_chain(const Session& session, const ElementId& element) {
    const Assistant& assistant = session.assistant();
    const Ontology& ontology = assistant.ontology();
    if (!ontology.contains(element))
        throw ExplainError("I don't know what '" + element + "' is.");
    const Fact* fact = session.ltm().find_subsumed(ontology, element);
    if (!fact)
        throw ExplainError("I haven't established your " + assistant.display_name(element) + ".");

    ChainExplanation chain;
    chain.element = fact->element;
    ElementId focus = fact->element;
    std::optional<std::int64_t> before;
    std::vector<std::string> sentences;
    while (true) {
        const Fact* current = session.ltm().find_subsumed(ontology, focus);
        if (!current || current->provenance.kind != Provenance::Kind::skill) {
            chain.terminal = ChainExplanation::Terminal::user_provided;
            chain.terminal_element = focus;
            sentences.push_back("You provided your " + assistant.display_name(focus) + ".");
            break;
        }
        const ExecutionRecord* record = establisher(session, focus, before);
        if (!record || is_slot_fill(session, record->skill_id)) {
            chain.terminal = ChainExplanation::Terminal::user_provided;
            chain.terminal_element = focus;
            sentences.push_back("You provided your " + assistant.display_name(focus) + ".");
            break;
        }
        ChainStep step;
        step.seq = record->seq;
        step.skill_id = record->skill_id;
        step.focus = focus;
        const SkillRuntime* runtime = assistant.registry().find(record->skill_id);
        auto attributions = runtime ? runtime->explain(focus, *record) : std::nullopt;
        if (!attributions || attributions->empty()) {
            chain.steps.push_back(step);
            chain.terminal = ChainExplanation::Terminal::opaque;
            chain.terminal_element = focus;
            sentences.push_back("Your " + assistant.display_name(focus) + " came from " +
                                service(session, record->skill_id) + ", which does not explain its results.");
            break;
        }
        Attribution top = attributions->front();
        for (const auto& attribution : *attributions)
            if (attribution.weight > top.weight || (attribution.weight == top.weight && attribution.element < top.element))
                top = attribution;
        step.attribution = top;
        chain.steps.push_back(step);
        sentences.push_back("Your " + assistant.display_name(focus) + " came from " + service(session, record->skill_id) +
                            ", which relied most on your " + assistant.display_name(top.element) + " (weight " +
                            weight_text(top.weight) + ").");
        if (!ontology.contains(top.element) || !session.ltm().find_subsumed(ontology, top.element)) {
            chain.terminal = ChainExplanation::Terminal::opaque;
            chain.terminal_element = top.element;
            break;
        }
        // Each step moves strictly back in history, so the walk terminates.
        focus = top.element;
        before = record->seq;
    }
    for (const auto& sentence : sentences)
        chain.text += (chain.text.empty() ? "" : " ") + sentence;
    return chain;
}

Json to_json(const Summary& summary) {
    Json items = Json::array();
    for (const auto& item : summary.items) {
        items.push_back({{"fluent", item.fluent.to_string()},
                         {"element", item.fluent.first},
                         {"source", item.source},
                         {"record", item.record ? Json(*item.record) : Json()},
                         {"sentence", item.sentence}});
    }
    return {{"kind", "what"}, {"goal", summary.goal}, {"items", items}, {"omitted", summary.omitted}, {"text", summary.text}};
}

Json to_json(const HowAnswer& answer) {
    Json json = {{"kind", "how"}, {"element", answer.element}, {"user_provided", answer.user_provided}, {"text", answer.text}};
    if (answer.record) {
        json["record"] = *answer.record;
        json["skill_id"] = answer.skill_id;
        json["description"] = answer.description;
        json["inputs"] = answer.inputs;
    }
    return json;
}

Json to_json(const Justification& justification) {
    Json links = Json::array();
    for (const auto& link : justification.links)
        links.push_back({{"seq", link.seq}, {"skill_id", link.skill_id}, {"consumed", link.consumed}, {"produced", link.produced}});
    return {
        {"kind", "why"},
        {"mode", to_string(justification.mode)},
        {"element", justification.element},
        {"goal", justification.goal},
        {"contributed", justification.contributed},
        {"links", links},
        {"text", justification.text},
    };
}

Json to_json(const ChainExplanation& chain) {
    Json steps = Json::array();
    for (const auto& step : chain.steps) {
        Json item = {{"seq", step.seq}, {"skill_id", step.skill_id}, {"focus", step.focus}};
        if (step.attribution)
            item["attribution"] = {{"element", step.attribution->element}, {"weight", step.attribution->weight}};
        else
            item["attribution"] = nullptr;
        steps.push_back(item);
    }
    return {
        {"kind", "chain"},
        {"element", chain.element},
        {"steps", steps},
        {"terminal", chain.terminal == ChainExplanation::Terminal::user_provided ? "user_provided" : "opaque"},
        {"terminal_element", chain.terminal_element},
        {"text", chain.text},
    };
}

}  // namespace skillweave
