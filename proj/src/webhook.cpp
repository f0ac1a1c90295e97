#include "skillweave/skills.hpp"

#include <httplib.h>

namespace skillweave {

WebhookSkill::WebhookSkill(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
    auto scheme_end = endpoint_.find("://");
    auto path_start = scheme_end == std::string::npos ? std::string::npos : endpoint_.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        origin_ = endpoint_;
        path_ = "/";
    } else {
        origin_ = endpoint_.substr(0, path_start);
        path_ = endpoint_.substr(path_start);
    }
}

Json webhook_request_body(const InvocationRequest& request) {
    return {
        {"schema_version", webhook_schema_version},
        {"skill_id", request.skill_id},
        {"pair_id", request.pair_id},
        {"inputs", request.inputs},
    };
}

InvocationResult parse_webhook_response(const Json& body) {
    if (!body.is_object() || !body.contains("status") || !body["status"].is_string())
        return InvocationResult::failed("malformed skill response");
    std::string status = body["status"].get<std::string>();
    std::optional<std::string> message;
    if (auto it = body.find("message"); it != body.end() && it->is_string())
        message = it->get<std::string>();

    InvocationResult result;
    if (status == "outcome") {
        std::map<ElementId, std::string> outputs;
        if (auto it = body.find("outputs"); it != body.end() && it->is_object()) {
            for (const auto& [element, value] : it->items())
                outputs[element] = value.is_string() ? value.get<std::string>() : value.dump();
        }
        auto index = body.value("outcome_index", std::size_t{0});
        result = InvocationResult::outcome(index, std::move(outputs));
    } else if (status == "failed") {
        result = InvocationResult::failed();
    } else if (status == "invalid_invocation") {
        result = InvocationResult::invalid();
    } else {
        return InvocationResult::failed("unknown skill status '" + status + "'");
    }
    result.message = message;
    if (auto it = body.find("explain"); it != body.end() && it->is_array()) {
        for (const auto& item : *it) {
            if (!item.is_object() || !item.contains("element") || !item.contains("weight"))
                continue;
            result.attributions.push_back({item["element"].get<std::string>(), item["weight"].get<double>()});
        }
    }
    return result;
}

InvocationResult WebhookSkill::execute(const InvocationRequest& request) const {
    if (origin_.rfind("https://", 0) == 0)
        return InvocationResult::failed("https endpoints are not supported in this build");
    httplib::Client client(origin_);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    auto response = client.Post(path_, webhook_request_body(request).dump(), "application/json");
    if (!response)
        return InvocationResult::failed("skill endpoint unreachable: " + httplib::to_string(response.error()));
    if (response->status != 200)
        return InvocationResult::failed("skill endpoint returned HTTP " + std::to_string(response->status));
    Json body = Json::parse(response->body, nullptr, false);
    if (body.is_discarded())
        return InvocationResult::failed("skill endpoint returned malformed JSON");
    return parse_webhook_response(body);
}

}  // namespace skillweave
