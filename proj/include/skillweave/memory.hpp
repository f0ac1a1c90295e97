#pragma once

#include "skillweave/catalog.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skillweave {

struct Provenance {
    enum class Kind { user, skill, seed };

    Kind kind = Kind::user;
    // Sequence number of the establishing record when kind == skill.
    std::optional<std::int64_t> record;

    static Provenance user() { return {Kind::user, std::nullopt}; }
    static Provenance seed() { return {Kind::seed, std::nullopt}; }
    static Provenance skill(std::int64_t seq) { return {Kind::skill, seq}; }

    bool operator==(const Provenance&) const = default;
};

std::string to_string(const Provenance& provenance);

struct Fact {
    ElementId element;
    std::string value;
    Provenance provenance;

    bool operator==(const Fact&) const = default;
};

class MemoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Session fact store: at most one fact per element.
class LongTermMemory {
public:
    // Last writer wins; overwriting replaces both value and provenance.
    void put(const Ontology& ontology, const ElementId& element, std::string value, Provenance provenance);

    const Fact* get(const ElementId& element) const;
    bool contains(const ElementId& element) const { return facts_.count(element) != 0; }
    std::size_t size() const { return facts_.size(); }
    bool empty() const { return facts_.empty(); }

    const std::map<ElementId, Fact>& facts() const { return facts_; }
    ElementSet known_set() const;

    // A fact for element or for any element it subsumes, preferring an exact match.
    const Fact* find_subsumed(const Ontology& ontology, const ElementId& element) const;

    bool operator==(const LongTermMemory&) const = default;

private:
    std::map<ElementId, Fact> facts_;
};

struct Attribution {
    ElementId element;
    double weight = 0.0;

    bool operator==(const Attribution&) const = default;
};

struct ExecutionRecord {
    std::int64_t seq = 0;
    std::string skill_id;
    std::string pair_id;
    std::string action_id;
    // For built-in skills: the element being slot-filled or the skill being authorized.
    std::string subject;
    ElementSet inputs_consumed;
    std::map<ElementId, std::string> input_values;
    std::size_t desired_outcome_index = 0;
    ElementSet actual_outcome;
    bool success = false;
    bool invalid_invocation = false;
    std::string status;
    std::vector<Attribution> attributions;
    std::int64_t timestamp_ms = 0;

    bool operator==(const ExecutionRecord&) const = default;
};

class History {
public:
    // Throws MemoryError unless record.seq continues the sequence (0 for the first).
    void append(ExecutionRecord record);

    const std::vector<ExecutionRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::int64_t next_seq() const { return records_.empty() ? 0 : records_.back().seq + 1; }
    const ExecutionRecord* find(std::int64_t seq) const;

    bool operator==(const History&) const = default;

private:
    std::vector<ExecutionRecord> records_;
};

Json to_json(const Fact& fact);
Json to_json(const ExecutionRecord& record, bool with_timestamp = true);
ExecutionRecord record_from_json(const Json& json);

}  // namespace skillweave
