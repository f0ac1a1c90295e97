#pragma once

#include "skillweave/catalog.hpp"
#include "skillweave/goals.hpp"
#include "skillweave/memory.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace skillweave {

inline constexpr int webhook_schema_version = 1;

struct InvocationRequest {
    std::string skill_id;
    std::string pair_id;
    std::size_t desired_outcome = 0;
    // Element to fill or skill to authorize, for the built-in skills.
    std::string subject;
    std::map<ElementId, std::string> inputs;
};

struct InvocationResult {
    enum class Status { outcome, failed, invalid_invocation, needs_user };

    Status status = Status::failed;
    std::size_t outcome_index = 0;
    std::map<ElementId, std::string> outputs;
    // needs_user: the question to put to the user and what it is about.
    std::string prompt;
    std::string subject;
    std::optional<std::string> message;
    std::vector<Attribution> attributions;

    static InvocationResult outcome(std::size_t index, std::map<ElementId, std::string> outputs);
    static InvocationResult failed(std::string message = {});
    static InvocationResult invalid(std::string message = {});
    static InvocationResult needs_user(std::string prompt, std::string subject);
};

std::string_view to_string(InvocationResult::Status status);

// execute / preview / explain contract of a skill. Implementations must be
// safe to call from several sessions at once.
class SkillRuntime {
public:
    virtual ~SkillRuntime() = default;

    virtual InvocationResult execute(const InvocationRequest& request) const = 0;

    // Confidence in [0, 1] that the skill can do something useful with the
    // event. Must not have side effects. nullopt when the skill has no preview.
    virtual std::optional<double> preview(const Event& event) const;

    // Input attributions for an output of the given record. The default reads
    // what the skill reported at execution time; nullopt means opaque.
    virtual std::optional<std::vector<Attribution>> explain(const ElementId& output,
                                                            const ExecutionRecord& record) const;
};

// Checks a result against the pair's declared outcomes: an outcome whose
// output keys are not exactly one declared outcome set becomes invalid_invocation.
InvocationResult conform(const IoPair& pair, InvocationResult result);

class SlotFillSkill : public SkillRuntime {
public:
    SlotFillSkill(const Ontology& ontology, std::optional<ElementSet> fillable,
                  std::map<ElementId, std::string> prompts);

    InvocationResult execute(const InvocationRequest& request) const override;
    std::string prompt_for(const ElementId& element) const;
    bool can_fill(const ElementId& element) const { return fillable_.count(element) != 0; }

private:
    std::map<ElementId, std::string> display_;
    ElementSet fillable_;
    std::map<ElementId, std::string> prompts_;
};

class AuthorizeSkill : public SkillRuntime {
public:
    AuthorizeSkill(const Catalog& catalog, const Ontology& ontology);

    InvocationResult execute(const InvocationRequest& request) const override;

private:
    // skill id -> (description, display names of its sensitive inputs)
    std::map<std::string, std::pair<std::string, std::vector<std::string>>> targets_;
};

// Calls an external skill over HTTP with a JSON body.
class WebhookSkill : public SkillRuntime {
public:
    WebhookSkill(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(10));

    InvocationResult execute(const InvocationRequest& request) const override;

    const std::string& endpoint() const { return endpoint_; }

private:
    std::string endpoint_;
    std::string origin_;
    std::string path_;
    std::chrono::milliseconds timeout_;
};

Json webhook_request_body(const InvocationRequest& request);
// Maps a webhook reply body onto an InvocationResult (before conform()).
InvocationResult parse_webhook_response(const Json& body);

struct RegistryOptions {
    std::uint64_t seed = 7;
    std::chrono::milliseconds webhook_timeout = std::chrono::seconds(10);
    std::optional<ElementSet> slot_fill_elements;
    std::map<ElementId, std::string> prompts;
};

class SkillRegistry {
public:
    void add(const std::string& skill_id, std::shared_ptr<const SkillRuntime> runtime);
    const SkillRuntime& at(const std::string& skill_id) const;
    const SkillRuntime* find(const std::string& skill_id) const;
    const std::map<std::string, std::shared_ptr<const SkillRuntime>>& runtimes() const { return runtimes_; }

private:
    std::map<std::string, std::shared_ptr<const SkillRuntime>> runtimes_;
};

// Resolves each catalog endpoint: builtin:*, fixture:banking/<name>, http://...
SkillRegistry build_registry(const CatalogFile& file, const RegistryOptions& options = {});

}  // namespace skillweave
