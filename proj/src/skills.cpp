#include "skillweave/skills.hpp"

#include "skillweave/banking.hpp"
#include "skillweave/compiler.hpp"

#include <stdexcept>

namespace skillweave {

InvocationResult InvocationResult::outcome(std::size_t index, std::map<ElementId, std::string> outputs) {
    InvocationResult result;
    result.status = Status::outcome;
    result.outcome_index = index;
    result.outputs = std::move(outputs);
    return result;
}

InvocationResult InvocationResult::failed(std::string message) {
    InvocationResult result;
    result.status = Status::failed;
    if (!message.empty())
        result.message = std::move(message);
    return result;
}

InvocationResult InvocationResult::invalid(std::string message) {
    InvocationResult result;
    result.status = Status::invalid_invocation;
    if (!message.empty())
        result.message = std::move(message);
    return result;
}

InvocationResult InvocationResult::needs_user(std::string prompt, std::string subject) {
    InvocationResult result;
    result.status = Status::needs_user;
    result.prompt = std::move(prompt);
    result.subject = std::move(subject);
    return result;
}

std::string_view to_string(InvocationResult::Status status) {
    switch (status) {
    case InvocationResult::Status::outcome: return "outcome";
    case InvocationResult::Status::failed: return "failed";
    case InvocationResult::Status::invalid_invocation: return "invalid_invocation";
    case InvocationResult::Status::needs_user: return "needs_user";
    }
    return "failed";
}

std::optional<double> SkillRuntime::preview(const Event&) const {
    return std::nullopt;
}

std::optional<std::vector<Attribution>> SkillRuntime::explain(const ElementId&, const ExecutionRecord& record) const {
    if (record.attributions.empty())
        return std::nullopt;
    return record.attributions;
}

InvocationResult conform(const IoPair& pair, InvocationResult result) {
    if (result.status != InvocationResult::Status::outcome)
        return result;
    if (result.outcome_index >= pair.outcomes.size())
        return InvocationResult::invalid("outcome index " + std::to_string(result.outcome_index) +
                                         " is not declared for pair " + pair.pair_id);
    ElementSet produced;
    for (const auto& [element, value] : result.outputs)
        produced.insert(element);
    if (produced != pair.outcomes[result.outcome_index])
        return InvocationResult::invalid("outputs do not match the declared outcome set");
    return result;
}

SlotFillSkill::SlotFillSkill(const Ontology& ontology, std::optional<ElementSet> fillable,
                             std::map<ElementId, std::string> prompts)
    : prompts_(std::move(prompts)) {
    for (const auto& [id, element] : ontology.elements()) {
        display_[id] = ontology.display_name(id);
        if (!fillable && element.slot_fillable)
            fillable_.insert(id);
    }
    if (fillable)
        fillable_ = std::move(*fillable);
}

std::string SlotFillSkill::prompt_for(const ElementId& element) const {
    if (auto it = prompts_.find(element); it != prompts_.end())
        return it->second;
    auto it = display_.find(element);
    return "What is your " + (it == display_.end() ? element : it->second) + "?";
}

InvocationResult SlotFillSkill::execute(const InvocationRequest& request) const {
    if (!can_fill(request.subject))
        return InvocationResult::invalid("I can't ask for " + request.subject + " directly");
    return InvocationResult::needs_user(prompt_for(request.subject), request.subject);
}

AuthorizeSkill::AuthorizeSkill(const Catalog& catalog, const Ontology& ontology) {
    for (const auto& skill_id : skills_needing_authorization(catalog, ontology)) {
        const SkillSpec& skill = catalog.at(skill_id);
        ElementSet sensitive;
        for (const auto& pair : skill.pairs)
            for (const auto& input : pair.inputs)
                if (ontology.contains(input) && ontology.at(input).sensitive)
                    sensitive.insert(input);
        std::vector<std::string> names;
        for (const auto& element : sensitive)
            names.push_back(ontology.display_name(element));
        targets_[skill_id] = {skill.description, names};
    }
}

InvocationResult AuthorizeSkill::execute(const InvocationRequest& request) const {
    auto it = targets_.find(request.subject);
    if (it == targets_.end())
        return InvocationResult::invalid("skill " + request.subject + " takes no sensitive information");
    const auto& [description, names] = it->second;
    std::string items;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0)
            items += i + 1 == names.size() ? " and " : ", ";
        items += "your " + names[i];
    }
    std::string prompt = "May I share " + items + " with the " + description + "? (yes/no)";
    return InvocationResult::needs_user(prompt, request.subject);
}

void SkillRegistry::add(const std::string& skill_id, std::shared_ptr<const SkillRuntime> runtime) {
    runtimes_[skill_id] = std::move(runtime);
}

const SkillRuntime* SkillRegistry::find(const std::string& skill_id) const {
    auto it = runtimes_.find(skill_id);
    return it == runtimes_.end() ? nullptr : it->second.get();
}

const SkillRuntime& SkillRegistry::at(const std::string& skill_id) const {
    if (auto* runtime = find(skill_id))
        return *runtime;
    throw std::out_of_range("no runtime registered for skill '" + skill_id + "'");
}

SkillRegistry build_registry(const CatalogFile& file, const RegistryOptions& options) {
    SkillRegistry registry;
    for (const auto& [id, skill] : file.catalog.skills) {
        const std::string& endpoint = skill.endpoint;
        if (skill.is_slot_fill()) {
            registry.add(id, std::make_shared<SlotFillSkill>(file.ontology, options.slot_fill_elements, options.prompts));
        } else if (skill.is_authorize()) {
            registry.add(id, std::make_shared<AuthorizeSkill>(file.catalog, file.ontology));
        } else if (endpoint.rfind("fixture:", 0) == 0) {
            registry.add(id, make_fixture_skill(endpoint.substr(8), options.seed));
        } else if (endpoint.rfind("http://", 0) == 0 || endpoint.rfind("https://", 0) == 0) {
            registry.add(id, std::make_shared<WebhookSkill>(endpoint, options.webhook_timeout));
        } else {
            throw CatalogError("skill '" + id + "' has unsupported endpoint '" + endpoint + "'");
        }
    }
    return registry;
}

}  // namespace skillweave
