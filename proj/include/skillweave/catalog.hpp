#pragma once

#include "skillweave/document.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skillweave {

using ElementId = std::string;
using ElementSet = std::set<ElementId>;

// Endpoint tags for the two built-in skills. Internal skills carry one of
// these instead of a network locator.
inline constexpr std::string_view slot_fill_endpoint = "builtin:slot_fill";
inline constexpr std::string_view authorize_endpoint = "builtin:authorize";

struct ElementType {
    ElementId id;
    std::optional<ElementId> parent;
    bool sensitive = false;
    bool slot_fillable = false;
    std::string display_name;

    bool operator==(const ElementType&) const = default;
};

// Vocabulary shared by every skill. Parent links encode "is a kind of".
class Ontology {
public:
    Ontology() = default;
    explicit Ontology(std::vector<ElementType> elements);

    void add(ElementType element);

    bool contains(const ElementId& id) const { return elements_.count(id) != 0; }
    const ElementType& at(const ElementId& id) const;
    const std::map<ElementId, ElementType>& elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }

    // Strict ancestors of id, nearest first. Stops early on a parent cycle or
    // a dangling parent so that it is safe on unvalidated input.
    std::vector<ElementId> ancestors(const ElementId& id) const;

    std::string display_name(const ElementId& id) const;

    bool operator==(const Ontology&) const = default;

private:
    std::map<ElementId, ElementType> elements_;
};

struct IoPair {
    std::string pair_id;
    ElementSet inputs;
    std::vector<ElementSet> outcomes;

    bool operator==(const IoPair&) const = default;
};

struct SkillSpec {
    std::string skill_id;
    std::string endpoint;
    std::string description;
    int retry_limit = 1;
    std::vector<IoPair> pairs;
    bool internal = false;

    const IoPair* find_pair(std::string_view pair_id) const;
    bool is_slot_fill() const { return internal && endpoint == slot_fill_endpoint; }
    bool is_authorize() const { return internal && endpoint == authorize_endpoint; }

    bool operator==(const SkillSpec&) const = default;
};

struct Catalog {
    std::map<std::string, SkillSpec> skills;
    std::map<std::string, std::vector<std::string>> agent_groups;

    const SkillSpec* find(std::string_view skill_id) const;
    const SkillSpec& at(std::string_view skill_id) const;
    const SkillSpec* slot_fill_skill() const;
    const SkillSpec* authorize_skill() const;

    bool operator==(const Catalog&) const = default;
};

// The full contents of a catalog file.
struct CatalogFile {
    Ontology ontology;
    Catalog catalog;

    bool operator==(const CatalogFile&) const = default;
};

class CatalogError : public std::runtime_error {
public:
    explicit CatalogError(const std::string& message, std::size_t line = 0, std::size_t column = 0);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

inline constexpr int catalog_schema_version = 1;

CatalogFile parse_catalog(const Json& document);
CatalogFile parse_catalog(std::string_view text, DocumentFormat format = DocumentFormat::json);
inline CatalogFile parse_catalog(const char* text, DocumentFormat format = DocumentFormat::json) {
    return parse_catalog(std::string_view(text), format);
}
CatalogFile load_catalog(const std::filesystem::path& path);

Json to_json(const CatalogFile& file);

enum class IssueKind {
    unknown_element,
    unknown_parent,
    parent_cycle,
    bad_identifier,
    bad_retry_limit,
    duplicate_pair,
    empty_pairs,
    empty_outcomes,
    empty_outcome_set,
    duplicate_outcome_set,
    unknown_group_member,
    missing_builtin,
};

std::string_view to_string(IssueKind kind);

struct Issue {
    IssueKind kind;
    std::string skill_id;
    std::string pair_id;
    std::string element;
    std::string message;

    bool operator==(const Issue&) const = default;
    auto operator<=>(const Issue&) const = default;
};

// Checks the catalog against the ontology. The result is sorted, so it does
// not depend on declaration order.
std::vector<Issue> validate(const Catalog& catalog, const Ontology& ontology);

// True iff specific == general or general is an ancestor of specific.
bool subsumes(const Ontology& ontology, const ElementId& general, const ElementId& specific);

bool is_identifier(std::string_view text);

}  // namespace skillweave
