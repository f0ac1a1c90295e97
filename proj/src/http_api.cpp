#include "skillweave/http_api.hpp"

#include <httplib.h>

#include <regex>

namespace skillweave {

namespace {

ApiResponse error(int status, const std::string& code, const std::string& message) {
    return {status, error_body(code, message)};
}

std::string query(const ApiRequest& request, const std::string& key) {
    auto it = request.query.find(key);
    return it == request.query.end() ? std::string{} : it->second;
}

}  // namespace

ApiResponse route(SessionManager& manager, const ApiRequest& request) {
    static const std::regex sessions("^/v1/sessions/?$");
    static const std::regex session_path("^/v1/sessions/([A-Za-z0-9_-]+)/(events|state|trace|plan|explain)/?$");
    try {
        std::smatch match;
        if (std::regex_match(request.path, sessions)) {
            if (request.method != "POST")
                return error(405, "method_not_allowed", "use POST to create a session");
            Json body = Json::object();
            if (request.body.find_first_not_of(" \t\r\n") != std::string::npos) {
                body = Json::parse(request.body, nullptr, false);
                if (body.is_discarded())
                    return error(400, "bad_request", "request body is not valid JSON");
            }
            std::string id = manager.create_session(body);
            Json reply = to_json(manager.envelope(id));
            return {201, reply};
        }
        if (!std::regex_match(request.path, match, session_path))
            return error(404, "not_found", "no route for " + request.path);
        std::string id = match[1].str();
        std::string resource = match[2].str();
        if (resource == "events") {
            if (request.method != "POST")
                return error(405, "method_not_allowed", "use POST to send an event");
            Json body = Json::parse(request.body, nullptr, false);
            if (body.is_discarded())
                return error(400, "bad_request", "request body is not valid JSON");
            return {200, manager.post_event(id, body)};
        }
        if (request.method != "GET")
            return error(405, "method_not_allowed", "use GET for " + resource);
        if (resource == "state")
            return {200, manager.get_state(id)};
        if (resource == "trace")
            return {200, manager.get_trace(id)};
        if (resource == "plan")
            return {200, manager.get_plan(id)};
        return {200, manager.explain(id, query(request, "kind"), query(request, "element"), query(request, "mode"))};
    } catch (const ServiceError& e) {
        return error(e.status(), e.code(), e.what());
    } catch (const std::exception& e) {
        return error(500, "internal", e.what());
    }
}

void mount_api(httplib::Server& server, SessionManager& manager) {
    auto handler = [&manager](const httplib::Request& req, httplib::Response& res) {
        ApiRequest request{req.method, req.path, {}, req.body};
        for (const auto& [key, value] : req.params)
            request.query.emplace(key, value);
        ApiResponse response = route(manager, request);
        res.status = response.status;
        res.set_content(response.body.dump(), "application/json");
    };
    server.Post(R"(/v1/.*)", handler);
    server.Get(R"(/v1/.*)", handler);
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_default_headers({
        {"Access-Control-Allow-Origin", "*"},
        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
        {"Access-Control-Allow-Headers", "Content-Type"},
    });
}

bool serve(SessionManager& manager, const std::string& host, int port) {
    httplib::Server server;
    mount_api(server, manager);
    return server.listen(host, port);
}

}  // namespace skillweave
