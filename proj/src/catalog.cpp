#include "skillweave/catalog.hpp"

#include <algorithm>
#include <cctype>

namespace skillweave {

Ontology::Ontology(std::vector<ElementType> elements) {
    for (auto& element : elements)
        add(std::move(element));
}

void Ontology::add(ElementType element) {
    auto id = element.id;
    if (!elements_.emplace(id, std::move(element)).second)
        throw CatalogError("duplicate element id '" + id + "'");
}

const ElementType& Ontology::at(const ElementId& id) const {
    auto it = elements_.find(id);
    if (it == elements_.end())
        throw CatalogError("unknown element '" + id + "'");
    return it->second;
}

std::vector<ElementId> Ontology::ancestors(const ElementId& id) const {
    std::vector<ElementId> result;
    auto it = elements_.find(id);
    std::set<ElementId> seen{id};
    while (it != elements_.end() && it->second.parent) {
        const ElementId& parent = *it->second.parent;
        if (!seen.insert(parent).second)
            break;
        auto next = elements_.find(parent);
        if (next == elements_.end())
            break;
        result.push_back(parent);
        it = next;
    }
    return result;
}

std::string Ontology::display_name(const ElementId& id) const {
    auto it = elements_.find(id);
    if (it == elements_.end() || it->second.display_name.empty()) {
        std::string name = id;
        std::replace(name.begin(), name.end(), '_', ' ');
        return name;
    }
    return it->second.display_name;
}

const IoPair* SkillSpec::find_pair(std::string_view pair_id) const {
    for (const auto& pair : pairs)
        if (pair.pair_id == pair_id)
            return &pair;
    return nullptr;
}

const SkillSpec* Catalog::find(std::string_view skill_id) const {
    auto it = skills.find(std::string(skill_id));
    return it == skills.end() ? nullptr : &it->second;
}

const SkillSpec& Catalog::at(std::string_view skill_id) const {
    if (auto* skill = find(skill_id))
        return *skill;
    throw CatalogError("unknown skill '" + std::string(skill_id) + "'");
}

const SkillSpec* Catalog::slot_fill_skill() const {
    for (const auto& [id, skill] : skills)
        if (skill.is_slot_fill())
            return &skill;
    return nullptr;
}

const SkillSpec* Catalog::authorize_skill() const {
    for (const auto& [id, skill] : skills)
        if (skill.is_authorize())
            return &skill;
    return nullptr;
}

CatalogError::CatalogError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(line == 0 ? message
                                   : message + " (line " + std::to_string(line) + ", column " +
                                         std::to_string(column) + ")"),
      line_(line),
      column_(column) {
}

bool is_identifier(std::string_view text) {
    if (text.empty())
        return false;
    auto head = static_cast<unsigned char>(text.front());
    if (!(std::isalpha(head) || head == '_'))
        return false;
    return std::all_of(text.begin(), text.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_' || u == '-';
    });
}

namespace {

const Json& require(const Json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end() || it->is_null())
        throw CatalogError(where + ": missing required field '" + key + "'");
    return *it;
}

std::string require_string(const Json& object, const char* key, const std::string& where) {
    const Json& value = require(object, key, where);
    if (!value.is_string())
        throw CatalogError(where + ": field '" + key + "' must be a string");
    return value.get<std::string>();
}

ElementSet element_set(const Json& value, const std::string& where) {
    if (!value.is_array())
        throw CatalogError(where + ": expected a list of element ids");
    ElementSet result;
    for (const auto& item : value) {
        if (!item.is_string())
            throw CatalogError(where + ": element ids must be strings");
        result.insert(item.get<std::string>());
    }
    return result;
}

bool optional_bool(const Json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end() || it->is_null())
        return false;
    if (!it->is_boolean())
        throw CatalogError(where + ": field '" + key + "' must be a boolean");
    return it->get<bool>();
}

ElementType parse_element(const Json& item, std::size_t index) {
    std::string where = "ontology[" + std::to_string(index) + "]";
    if (!item.is_object())
        throw CatalogError(where + ": expected an object");
    ElementType element;
    element.id = require_string(item, "id", where);
    where += " '" + element.id + "'";
    if (auto it = item.find("parent"); it != item.end() && !it->is_null()) {
        if (!it->is_string())
            throw CatalogError(where + ": field 'parent' must be a string");
        element.parent = it->get<std::string>();
    }
    element.sensitive = optional_bool(item, "sensitive", where);
    element.slot_fillable = optional_bool(item, "slot_fillable", where);
    element.display_name = require_string(item, "display_name", where);
    return element;
}

IoPair parse_pair(const Json& item, const std::string& where) {
    if (!item.is_object())
        throw CatalogError(where + ": expected an object");
    IoPair pair;
    pair.pair_id = require_string(item, "pair_id", where);
    std::string here = where + " '" + pair.pair_id + "'";
    pair.inputs = element_set(require(item, "inputs", here), here + ".inputs");
    const Json& outcomes = require(item, "outcomes", here);
    if (!outcomes.is_array())
        throw CatalogError(here + ": field 'outcomes' must be a list of lists");
    for (const auto& outcome : outcomes)
        pair.outcomes.push_back(element_set(outcome, here + ".outcomes"));
    return pair;
}

SkillSpec parse_skill(const Json& item, std::size_t index) {
    std::string where = "skills[" + std::to_string(index) + "]";
    if (!item.is_object())
        throw CatalogError(where + ": expected an object");
    SkillSpec skill;
    skill.skill_id = require_string(item, "skill_id", where);
    where += " '" + skill.skill_id + "'";
    skill.endpoint = require_string(item, "endpoint", where);
    skill.description = require_string(item, "description", where);
    const Json& retry = require(item, "retry_limit", where);
    if (!retry.is_number_integer())
        throw CatalogError(where + ": field 'retry_limit' must be an integer");
    skill.retry_limit = retry.get<int>();
    skill.internal = optional_bool(item, "internal", where);
    const Json& pairs = require(item, "pairs", where);
    if (!pairs.is_array())
        throw CatalogError(where + ": field 'pairs' must be a list");
    for (std::size_t i = 0; i < pairs.size(); ++i)
        skill.pairs.push_back(parse_pair(pairs[i], where + ".pairs[" + std::to_string(i) + "]"));
    return skill;
}

}  // namespace

CatalogFile parse_catalog(const Json& document) {
    if (!document.is_object())
        throw CatalogError("catalog document must be an object");
    if (auto it = document.find("schema_version"); it != document.end()) {
        if (!it->is_number_integer() || it->get<int>() != catalog_schema_version)
            throw CatalogError("unsupported schema_version (expected " +
                               std::to_string(catalog_schema_version) + ")");
    }

    CatalogFile file;
    if (auto it = document.find("ontology"); it != document.end() && !it->is_null()) {
        if (!it->is_array())
            throw CatalogError("'ontology' must be a list");
        for (std::size_t i = 0; i < it->size(); ++i)
            file.ontology.add(parse_element((*it)[i], i));
    }
    if (auto it = document.find("skills"); it != document.end() && !it->is_null()) {
        if (!it->is_array())
            throw CatalogError("'skills' must be a list");
        for (std::size_t i = 0; i < it->size(); ++i) {
            SkillSpec skill = parse_skill((*it)[i], i);
            std::string id = skill.skill_id;
            if (!file.catalog.skills.emplace(id, std::move(skill)).second)
                throw CatalogError("duplicate skill_id '" + id + "'");
        }
    }
    if (auto it = document.find("agent_groups"); it != document.end() && !it->is_null()) {
        if (!it->is_object())
            throw CatalogError("'agent_groups' must be a map of group name to skill ids");
        for (const auto& [group, members] : it->items()) {
            if (!members.is_array())
                throw CatalogError("agent_groups." + group + " must be a list");
            auto& list = file.catalog.agent_groups[group];
            for (const auto& member : members)
                list.push_back(member.get<std::string>());
        }
    }
    return file;
}

CatalogFile parse_catalog(std::string_view text, DocumentFormat format) {
    try {
        return parse_catalog(parse_document(text, format));
    } catch (const DocumentError& e) {
        throw CatalogError(e.message(), e.line(), e.column());
    }
}

CatalogFile load_catalog(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const DocumentError& e) {
        throw CatalogError(e.what());
    }
    try {
        return parse_catalog(text, format_for_path(path));
    } catch (const CatalogError& e) {
        throw CatalogError(path.string() + ": " + e.what());
    }
}

Json to_json(const CatalogFile& file) {
    Json ontology = Json::array();
    for (const auto& [id, element] : file.ontology.elements()) {
        Json item = {{"id", element.id}, {"display_name", element.display_name}};
        if (element.parent)
            item["parent"] = *element.parent;
        if (element.sensitive)
            item["sensitive"] = true;
        if (element.slot_fillable)
            item["slot_fillable"] = true;
        ontology.push_back(std::move(item));
    }
    Json skills = Json::array();
    for (const auto& [id, skill] : file.catalog.skills) {
        Json pairs = Json::array();
        for (const auto& pair : skill.pairs) {
            Json outcomes = Json::array();
            for (const auto& outcome : pair.outcomes)
                outcomes.push_back(outcome);
            pairs.push_back({{"pair_id", pair.pair_id}, {"inputs", pair.inputs}, {"outcomes", outcomes}});
        }
        Json item = {{"skill_id", skill.skill_id},
                     {"endpoint", skill.endpoint},
                     {"description", skill.description},
                     {"retry_limit", skill.retry_limit},
                     {"pairs", pairs}};
        if (skill.internal)
            item["internal"] = true;
        skills.push_back(std::move(item));
    }
    Json document = {{"schema_version", catalog_schema_version}, {"ontology", ontology}, {"skills", skills}};
    if (!file.catalog.agent_groups.empty())
        document["agent_groups"] = file.catalog.agent_groups;
    return document;
}

std::string_view to_string(IssueKind kind) {
    switch (kind) {
    case IssueKind::unknown_element: return "unknown_element";
    case IssueKind::unknown_parent: return "unknown_parent";
    case IssueKind::parent_cycle: return "parent_cycle";
    case IssueKind::bad_identifier: return "bad_identifier";
    case IssueKind::bad_retry_limit: return "bad_retry_limit";
    case IssueKind::duplicate_pair: return "duplicate_pair";
    case IssueKind::empty_pairs: return "empty_pairs";
    case IssueKind::empty_outcomes: return "empty_outcomes";
    case IssueKind::empty_outcome_set: return "empty_outcome_set";
    case IssueKind::duplicate_outcome_set: return "duplicate_outcome_set";
    case IssueKind::unknown_group_member: return "unknown_group_member";
    case IssueKind::missing_builtin: return "missing_builtin";
    }
    return "unknown";
}

namespace {

void validate_ontology(const Ontology& ontology, std::vector<Issue>& issues) {
    for (const auto& [id, element] : ontology.elements()) {
        if (!is_identifier(id))
            issues.push_back({IssueKind::bad_identifier, "", "", id, "element id is not an identifier"});
        if (!element.parent)
            continue;
        if (!ontology.contains(*element.parent)) {
            issues.push_back({IssueKind::unknown_parent, "", "", id,
                              "parent '" + *element.parent + "' is not in the ontology"});
            continue;
        }
        // Walk at most |ontology| links; getting back to id means a cycle.
        ElementId cursor = *element.parent;
        for (std::size_t steps = 0; steps < ontology.size(); ++steps) {
            if (cursor == id) {
                issues.push_back({IssueKind::parent_cycle, "", "", id, "parent links form a cycle"});
                break;
            }
            const auto& next = ontology.at(cursor);
            if (!next.parent || !ontology.contains(*next.parent))
                break;
            cursor = *next.parent;
        }
    }
}

void validate_skill(const SkillSpec& skill, const Ontology& ontology, std::vector<Issue>& issues) {
    const std::string& sid = skill.skill_id;
    if (!is_identifier(sid))
        issues.push_back({IssueKind::bad_identifier, sid, "", "", "skill id is not an identifier"});
    if (skill.retry_limit < 1)
        issues.push_back({IssueKind::bad_retry_limit, sid, "", "", "retry_limit must be at least 1"});
    if (skill.pairs.empty())
        issues.push_back({IssueKind::empty_pairs, sid, "", "", "skill declares no input/outcome pairs"});

    std::set<std::string> pair_ids;
    for (const auto& pair : skill.pairs) {
        const std::string& pid = pair.pair_id;
        if (!is_identifier(pid))
            issues.push_back({IssueKind::bad_identifier, sid, pid, "", "pair id is not an identifier"});
        if (!pair_ids.insert(pid).second)
            issues.push_back({IssueKind::duplicate_pair, sid, pid, "", "pair id repeated within skill"});
        if (pair.outcomes.empty())
            issues.push_back({IssueKind::empty_outcomes, sid, pid, "", "pair declares no outcomes"});
        std::set<ElementSet> seen;
        for (const auto& outcome : pair.outcomes) {
            if (outcome.empty())
                issues.push_back({IssueKind::empty_outcome_set, sid, pid, "", "empty outcome set"});
            else if (!seen.insert(outcome).second)
                issues.push_back({IssueKind::duplicate_outcome_set, sid, pid, "", "outcome set repeated"});
        }
        // Internal skills may use keywords in place of ontology elements.
        if (skill.internal)
            continue;
        std::set<ElementId> referenced = pair.inputs;
        for (const auto& outcome : pair.outcomes)
            referenced.insert(outcome.begin(), outcome.end());
        for (const auto& element : referenced)
            if (!ontology.contains(element))
                issues.push_back({IssueKind::unknown_element, sid, pid, element,
                                  "element '" + element + "' is not in the ontology"});
    }
}

}  // namespace

std::vector<Issue> validate(const Catalog& catalog, const Ontology& ontology) {
    std::vector<Issue> issues;
    validate_ontology(ontology, issues);

    bool needs_authorize = false;
    for (const auto& [id, skill] : catalog.skills) {
        validate_skill(skill, ontology, issues);
        if (skill.internal)
            continue;
        for (const auto& pair : skill.pairs)
            for (const auto& input : pair.inputs)
                if (ontology.contains(input) && ontology.at(input).sensitive)
                    needs_authorize = true;
    }
    if (needs_authorize && catalog.authorize_skill() == nullptr)
        issues.push_back({IssueKind::missing_builtin, "", "", "",
                          "sensitive inputs are declared but no authorize skill is in the catalog"});

    for (const auto& [group, members] : catalog.agent_groups)
        for (const auto& member : members)
            if (!catalog.find(member))
                issues.push_back({IssueKind::unknown_group_member, member, "", "",
                                  "agent group '" + group + "' lists unknown skill"});

    std::sort(issues.begin(), issues.end());
    return issues;
}

bool subsumes(const Ontology& ontology, const ElementId& general, const ElementId& specific) {
    if (!ontology.contains(general))
        throw CatalogError("unknown element '" + general + "'");
    if (!ontology.contains(specific))
        throw CatalogError("unknown element '" + specific + "'");
    if (general == specific)
        return true;
    for (const auto& ancestor : ontology.ancestors(specific))
        if (ancestor == general)
            return true;
    return false;
}

}  // namespace skillweave
