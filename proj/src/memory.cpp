#include "skillweave/memory.hpp"

namespace skillweave {

std::string to_string(const Provenance& provenance) {
    switch (provenance.kind) {
    case Provenance::Kind::user: return "user";
    case Provenance::Kind::seed: return "seed";
    case Provenance::Kind::skill: return "skill#" + std::to_string(provenance.record.value_or(-1));
    }
    return "unknown";
}

void LongTermMemory::put(const Ontology& ontology, const ElementId& element, std::string value,
                         Provenance provenance) {
    if (!ontology.contains(element))
        throw MemoryError("unknown element '" + element + "'");
    facts_[element] = Fact{element, std::move(value), provenance};
}

const Fact* LongTermMemory::get(const ElementId& element) const {
    auto it = facts_.find(element);
    return it == facts_.end() ? nullptr : &it->second;
}

ElementSet LongTermMemory::known_set() const {
    ElementSet known;
    for (const auto& [element, fact] : facts_)
        known.insert(element);
    return known;
}

const Fact* LongTermMemory::find_subsumed(const Ontology& ontology, const ElementId& element) const {
    if (auto* exact = get(element))
        return exact;
    for (const auto& [id, fact] : facts_)
        if (ontology.contains(id) && ontology.contains(element) && subsumes(ontology, element, id))
            return &fact;
    return nullptr;
}

void History::append(ExecutionRecord record) {
    if (record.seq != next_seq())
        throw MemoryError("record seq " + std::to_string(record.seq) + " does not follow " +
                          std::to_string(next_seq() - 1));
    records_.push_back(std::move(record));
}

const ExecutionRecord* History::find(std::int64_t seq) const {
    if (seq < 0 || static_cast<std::size_t>(seq) >= records_.size())
        return nullptr;
    return &records_[static_cast<std::size_t>(seq)];
}

Json to_json(const Fact& fact) {
    Json json = {{"element", fact.element}, {"value", fact.value}};
    switch (fact.provenance.kind) {
    case Provenance::Kind::user: json["provenance"] = {{"kind", "user"}}; break;
    case Provenance::Kind::seed: json["provenance"] = {{"kind", "seed"}}; break;
    case Provenance::Kind::skill:
        json["provenance"] = {{"kind", "skill"}, {"record", fact.provenance.record.value_or(-1)}};
        break;
    }
    return json;
}

Json to_json(const ExecutionRecord& record, bool with_timestamp) {
    Json attributions = Json::array();
    for (const auto& a : record.attributions)
        attributions.push_back({{"element", a.element}, {"weight", a.weight}});
    Json json = {
        {"seq", record.seq},
        {"skill_id", record.skill_id},
        {"pair_id", record.pair_id},
        {"action_id", record.action_id},
        {"subject", record.subject},
        {"inputs_consumed", record.inputs_consumed},
        {"input_values", record.input_values},
        {"desired_outcome_index", record.desired_outcome_index},
        {"actual_outcome", record.actual_outcome},
        {"success", record.success},
        {"invalid_invocation", record.invalid_invocation},
        {"status", record.status},
        {"attributions", attributions},
    };
    if (with_timestamp)
        json["timestamp_ms"] = record.timestamp_ms;
    return json;
}

ExecutionRecord record_from_json(const Json& json) {
    ExecutionRecord record;
    record.seq = json.at("seq").get<std::int64_t>();
    record.skill_id = json.at("skill_id").get<std::string>();
    record.pair_id = json.at("pair_id").get<std::string>();
    record.action_id = json.value("action_id", "");
    record.subject = json.value("subject", "");
    record.inputs_consumed = json.at("inputs_consumed").get<ElementSet>();
    record.input_values = json.value("input_values", std::map<ElementId, std::string>{});
    record.desired_outcome_index = json.value("desired_outcome_index", std::size_t{0});
    record.actual_outcome = json.at("actual_outcome").get<ElementSet>();
    record.success = json.at("success").get<bool>();
    record.invalid_invocation = json.value("invalid_invocation", false);
    record.status = json.value("status", "");
    if (auto it = json.find("attributions"); it != json.end())
        for (const auto& a : *it)
            record.attributions.push_back({a.at("element").get<std::string>(), a.at("weight").get<double>()});
    record.timestamp_ms = json.value("timestamp_ms", std::int64_t{0});
    return record;
}

}  // namespace skillweave
