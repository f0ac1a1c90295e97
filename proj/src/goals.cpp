#include "skillweave/goals.hpp"

#include <algorithm>
#include <cctype>

namespace skillweave {

namespace {

std::string_view kind_name(Event::Kind kind) {
    switch (kind) {
    case Event::Kind::utterance: return "utterance";
    case Event::Kind::alert: return "alert";
    case Event::Kind::system: return "system";
    }
    return "utterance";
}

Event::Kind parse_event_kind(const std::string& name) {
    if (name == "utterance")
        return Event::Kind::utterance;
    if (name == "alert")
        return Event::Kind::alert;
    if (name == "system")
        return Event::Kind::system;
    throw EventError("unknown event kind '" + name + "'");
}

Intent::Kind parse_intent_kind(const std::string& name) {
    static const std::map<std::string, Intent::Kind> kinds = {
        {"goal", Intent::Kind::goal},
        {"why", Intent::Kind::why},
        {"how", Intent::Kind::how},
        {"summary", Intent::Kind::summary},
        {"stop", Intent::Kind::stop},
        {"provide_value", Intent::Kind::provide_value},
        {"authorize_response", Intent::Kind::authorize_response},
        {"unknown", Intent::Kind::unknown},
    };
    auto it = kinds.find(name);
    if (it == kinds.end())
        throw EventError("unknown intent kind '" + name + "'");
    return it->second;
}

std::string trim(std::string_view text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos)
        return "";
    auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

std::string expand(const std::string& pattern, const std::smatch& match) {
    std::string out;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] == '$' && i + 1 < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[i + 1]))) {
            std::size_t group = static_cast<std::size_t>(pattern[i + 1] - '0');
            if (group < match.size())
                out += match[group].str();
            ++i;
        } else {
            out += pattern[i];
        }
    }
    return trim(out);
}

}  // namespace

Json to_json(const Event& event) {
    Json json = {{"kind", kind_name(event.kind)}};
    if (event.kind == Event::Kind::utterance)
        json["text"] = event.text;
    else
        json["tag"] = event.text;
    if (!event.payload.empty())
        json["payload"] = event.payload;
    return json;
}

Event event_from_json(const Json& json) {
    if (!json.is_object())
        throw EventError("event must be an object");
    Event event;
    event.kind = parse_event_kind(json.value("kind", "utterance"));
    const char* key = event.kind == Event::Kind::utterance ? "text" : "tag";
    auto it = json.find(key);
    if (it == json.end() || !it->is_string())
        throw EventError(std::string("event is missing string field '") + key + "'");
    event.text = it->get<std::string>();
    if (event.kind == Event::Kind::utterance && trim(event.text).empty())
        throw EventError("utterance text must not be empty");
    if (auto p = json.find("payload"); p != json.end() && !p->is_null()) {
        if (!p->is_object())
            throw EventError("event payload must be an object");
        event.payload = *p;
    }
    return event;
}

std::string_view to_string(Intent::Kind kind) {
    switch (kind) {
    case Intent::Kind::goal: return "goal";
    case Intent::Kind::why: return "why";
    case Intent::Kind::how: return "how";
    case Intent::Kind::summary: return "summary";
    case Intent::Kind::stop: return "stop";
    case Intent::Kind::provide_value: return "provide_value";
    case Intent::Kind::authorize_response: return "authorize_response";
    case Intent::Kind::unknown: return "unknown";
    }
    return "unknown";
}

Json to_json(const Intent& intent) {
    Json json = {{"kind", to_string(intent.kind)}};
    switch (intent.kind) {
    case Intent::Kind::goal: json["goal"] = intent.goal; break;
    case Intent::Kind::why:
    case Intent::Kind::how: json["element"] = intent.element; break;
    case Intent::Kind::provide_value:
        json["element"] = intent.element;
        json["value"] = intent.value;
        break;
    case Intent::Kind::authorize_response: json["granted"] = intent.granted; break;
    default: break;
    }
    return json;
}

std::string normalize_phrase(std::string_view text) {
    std::string out;
    bool space = false;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            if (space && !out.empty())
                out += ' ';
            out += static_cast<char>(std::tolower(u));
            space = false;
        } else {
            space = true;
        }
    }
    return out;
}

ElementResolver::ElementResolver(const Ontology& ontology,
                                 const std::map<ElementId, std::vector<std::string>>& aliases) {
    for (const auto& [id, element] : ontology.elements()) {
        names_.emplace_back(normalize_phrase(id), id);
        if (!element.display_name.empty())
            names_.emplace_back(normalize_phrase(element.display_name), id);
    }
    for (const auto& [id, list] : aliases)
        for (const auto& alias : list)
            names_.emplace_back(normalize_phrase(alias), id);
    // Longer names first so "account number" beats "account".
    std::stable_sort(names_.begin(), names_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
}

std::optional<ElementId> ElementResolver::resolve(std::string_view phrase) const {
    std::string wanted = normalize_phrase(phrase);
    if (wanted.empty())
        return std::nullopt;
    for (const auto& [name, id] : names_)
        if (name == wanted)
            return id;
    // Fall back to a whole-word containment match ("my credit score please").
    std::string padded = " " + wanted + " ";
    for (const auto& [name, id] : names_)
        if (!name.empty() && padded.find(" " + name + " ") != std::string::npos)
            return id;
    return std::nullopt;
}

IntentRule parse_intent_rule(const Json& json) {
    IntentRule rule;
    rule.on = parse_event_kind(json.value("on", "utterance"));
    rule.pattern = json.at("pattern").get<std::string>();
    rule.intent = parse_intent_kind(json.at("intent").get<std::string>());
    rule.args = json.value("args", Json::object());
    rule.case_sensitive = json.value("case_sensitive", false);
    auto flags = std::regex::ECMAScript;
    if (!rule.case_sensitive)
        flags |= std::regex::icase;
    try {
        rule.compiled = std::regex(rule.pattern, flags);
    } catch (const std::regex_error& e) {
        throw EventError("bad intent pattern '" + rule.pattern + "': " + e.what());
    }
    return rule;
}

IntentRules::IntentRules(std::vector<IntentRule> rules, ElementResolver resolver)
    : rules_(std::move(rules)), resolver_(std::move(resolver)) {
}

Intent IntentRules::derive(const Event& event) const {
    for (const auto& rule : rules_) {
        if (rule.on != event.kind)
            continue;
        std::smatch match;
        if (!std::regex_search(event.text, match, rule.compiled))
            continue;

        Intent intent;
        intent.kind = rule.intent;
        auto arg = [&](const char* key) -> std::string {
            auto it = rule.args.find(key);
            if (it == rule.args.end() || !it->is_string())
                return "";
            return expand(it->get<std::string>(), match);
        };
        auto element_arg = [&](const char* key) -> std::optional<ElementId> {
            std::string phrase = arg(key);
            intent.phrase = phrase;
            return resolver_.resolve(phrase);
        };

        switch (rule.intent) {
        case Intent::Kind::goal: {
            auto it = rule.args.find("goal");
            if (it != rule.args.end() && it->is_array()) {
                for (const auto& item : *it)
                    if (auto id = resolver_.resolve(expand(item.get<std::string>(), match)))
                        intent.goal.insert(*id);
            } else if (auto id = element_arg("element")) {
                intent.goal.insert(*id);
            }
            if (intent.goal.empty())
                continue;
            break;
        }
        case Intent::Kind::why:
        case Intent::Kind::how: {
            auto id = element_arg("element");
            if (!id) {
                // A recognised question about an unknown element.
                intent.element.clear();
                return intent;
            }
            intent.element = *id;
            break;
        }
        case Intent::Kind::provide_value: {
            auto id = element_arg("element");
            if (!id)
                continue;
            intent.element = *id;
            intent.value = arg("value");
            if (intent.value.empty())
                continue;
            break;
        }
        case Intent::Kind::authorize_response: {
            auto it = rule.args.find("granted");
            intent.granted = it != rule.args.end() && it->is_boolean() && it->get<bool>();
            intent.skill_id = arg("skill");
            break;
        }
        default: break;
        }
        return intent;
    }
    return Intent{};
}

Intent derive_goal(const Event& event, const IntentRules& rules) {
    return rules.derive(event);
}

void GoalStack::push(ElementSet goal) {
    entries_.push_back({std::move(goal), GoalStatus::active});
}

std::optional<ElementSet> GoalStack::current() const {
    if (entries_.empty())
        return std::nullopt;
    return entries_.back().goal;
}

GoalStack::Pop GoalStack::pop(GoalStatus status) {
    Pop result;
    if (entries_.empty())
        return result;
    entries_.back().status = status;
    result.finished = entries_.back().goal;
    entries_.pop_back();
    result.resumed = current();
    return result;
}

GoalStack::Pop GoalStack::complete_current() {
    return pop(GoalStatus::completed);
}

GoalStack::Pop GoalStack::stop_current() {
    return pop(GoalStatus::stopped);
}

std::string_view to_string(GoalStatus status) {
    switch (status) {
    case GoalStatus::active: return "active";
    case GoalStatus::completed: return "completed";
    case GoalStatus::stopped: return "stopped";
    }
    return "active";
}

}  // namespace skillweave
