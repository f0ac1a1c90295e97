#pragma once

#include "skillweave/service.hpp"

#include <map>
#include <string>

namespace httplib {
class Server;
}

namespace skillweave {

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    Json body;
};

// Routes one request of the /v1 API. Never throws; failures come back as
// {error:{code, message}} with a matching status.
ApiResponse route(SessionManager& manager, const ApiRequest& request);

// Registers the /v1 routes on server.
void mount_api(httplib::Server& server, SessionManager& manager);

// Blocks serving the API until the server is stopped.
bool serve(SessionManager& manager, const std::string& host, int port);

}  // namespace skillweave
