#pragma once

#include "skillweave/config.hpp"
#include "skillweave/orchestrator.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skillweave {

class ServiceError : public std::runtime_error {
public:
    ServiceError(int status, std::string code, const std::string& message)
        : std::runtime_error(message), status_(status), code_(std::move(code)) {}

    int status() const { return status_; }
    const std::string& code() const { return code_; }

private:
    int status_;
    std::string code_;
};

Json error_body(const std::string& code, const std::string& message);

struct LogEntry {
    std::int64_t seq = 0;
    // "meta", "event" or "output".
    std::string direction;
    Json payload;
    std::int64_t timestamp = 0;
};

Json to_json(const LogEntry& entry);

// Append-only newline-delimited log. Each append is flushed before returning.
class EventLog {
public:
    EventLog() = default;
    explicit EventLog(std::filesystem::path path, Clock clock = system_clock_ms);

    void append(const std::string& direction, Json payload);
    const std::filesystem::path& path() const { return path_; }
    bool enabled() const { return !path_.empty(); }

    static std::vector<LogEntry> read(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::ofstream stream_;
    Clock clock_;
    std::int64_t next_seq_ = 0;
};

struct SessionEnvelope {
    std::string session_id;
    std::int64_t created_at = 0;
    std::string config_fingerprint;
    std::string catalog_fingerprint;
    std::filesystem::path log_path;
};

Json to_json(const SessionEnvelope& envelope);

// Meta record written as the first line of every session log.
Json session_meta(const Session& session);

struct ReplayResult {
    std::unique_ptr<Session> session;
    std::size_t events = 0;
    // Turns whose recomputed output differs from the logged one.
    std::size_t mismatches = 0;
};

// Rebuilds a session by feeding the logged events through a fresh session
// with the logged config. Throws ServiceError (incompatible) if the catalog
// the config points at no longer has the logged fingerprint.
ReplayResult replay(const std::filesystem::path& log_path);
ReplayResult replay(const std::vector<LogEntry>& entries);

class SessionManager {
public:
    // Logs go to log_dir when it is set; otherwise sessions are memory-only.
    SessionManager(AssistantConfig default_config, std::optional<std::filesystem::path> log_dir = std::nullopt,
                   Clock clock = system_clock_ms);

    // Request: optional {config: object or path, mode, seed, session_id}.
    std::string create_session(const Json& request = Json::object());
    Json post_event(const std::string& session_id, const Json& event);
    Json get_state(const std::string& session_id);
    Json get_trace(const std::string& session_id);
    Json get_plan(const std::string& session_id);
    Json explain(const std::string& session_id, const std::string& kind, const std::string& element,
                 const std::string& mode);
    SessionEnvelope envelope(const std::string& session_id);
    std::vector<std::string> session_ids() const;

private:
    struct Entry {
        std::mutex mutex;
        std::unique_ptr<Session> session;
        EventLog log;
        SessionEnvelope envelope;
    };

    std::shared_ptr<Entry> find(const std::string& session_id) const;
    std::string next_id();

    AssistantConfig default_config_;
    std::shared_ptr<const Assistant> default_assistant_;
    std::optional<std::filesystem::path> log_dir_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t counter_ = 0;
    std::uint64_t salt_ = 0;
};

}  // namespace skillweave
