#include "skillweave/service.hpp"

#include "skillweave/explainer.hpp"

#include <random>
#include <sstream>

namespace skillweave {

Json error_body(const std::string& code, const std::string& message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

Json to_json(const LogEntry& entry) {
    return {{"seq", entry.seq}, {"direction", entry.direction}, {"payload", entry.payload}, {"timestamp", entry.timestamp}};
}

EventLog::EventLog(std::filesystem::path path, Clock clock) : path_(std::move(path)), clock_(std::move(clock)) {
    if (path_.has_parent_path())
        std::filesystem::create_directories(path_.parent_path());
    stream_.open(path_, std::ios::out | std::ios::trunc);
    if (!stream_)
        throw ServiceError(500, "log_error", "cannot open session log " + path_.string());
}

void EventLog::append(const std::string& direction, Json payload) {
    if (!enabled())
        return;
    LogEntry entry{next_seq_++, direction, std::move(payload), clock_()};
    stream_ << to_json(entry).dump() << '\n';
    stream_.flush();
    if (!stream_)
        throw ServiceError(500, "log_error", "cannot write session log " + path_.string());
}

std::vector<LogEntry> EventLog::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ServiceError(404, "not_found", "cannot read log " + path.string());
    std::vector<LogEntry> entries;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        Json json = Json::parse(line, nullptr, false);
        if (json.is_discarded() || !json.is_object())
            throw ServiceError(400, "bad_log", path.string() + ":" + std::to_string(number) + ": malformed log line");
        LogEntry entry;
        entry.seq = json.value("seq", std::int64_t{0});
        entry.direction = json.value("direction", "");
        entry.payload = json.value("payload", Json());
        entry.timestamp = json.value("timestamp", std::int64_t{0});
        entries.push_back(std::move(entry));
    }
    return entries;
}

Json to_json(const SessionEnvelope& envelope) {
    return {
        {"session_id", envelope.session_id},
        {"created_at", envelope.created_at},
        {"config_fingerprint", envelope.config_fingerprint},
        {"catalog_fingerprint", envelope.catalog_fingerprint},
        {"log_path", envelope.log_path.string()},
    };
}

Json session_meta(const Session& session) {
    const Assistant& assistant = session.assistant();
    return {
        {"session_id", session.id()},
        {"mode", to_string(session.mode())},
        {"seed", assistant.config().seed},
        {"config", assistant.config().source},
        {"base_dir", assistant.config().base_dir.string()},
        {"config_fingerprint", assistant.config_fingerprint()},
        {"catalog_fingerprint", assistant.catalog_fingerprint()},
    };
}

ReplayResult replay(const std::filesystem::path& log_path) {
    return replay(EventLog::read(log_path));
}

ReplayResult replay(const std::vector<LogEntry>& entries) {
    ReplayResult result;
    if (entries.empty()) {
        result.session = std::make_unique<Session>("replay", Assistant::create(banking_config()));
        return result;
    }
    const LogEntry& meta = entries.front();
    if (meta.direction != "meta" || !meta.payload.is_object())
        throw ServiceError(400, "bad_log", "log does not start with a meta record");

    std::shared_ptr<const Assistant> assistant;
    try {
        AssistantConfig config = parse_config(meta.payload.at("config"), meta.payload.value("base_dir", ""));
        assistant = Assistant::create(std::move(config));
    } catch (const std::exception& e) {
        throw ServiceError(409, "incompatible", std::string("cannot rebuild the logged configuration: ") + e.what());
    }
    std::string logged = meta.payload.value("catalog_fingerprint", "");
    if (assistant->catalog_fingerprint() != logged)
        throw ServiceError(409, "incompatible",
                           "the catalog has changed since this session was recorded (fingerprint " +
                               assistant->catalog_fingerprint() + ", log has " + logged + ")");

    result.session = std::make_unique<Session>(meta.payload.value("session_id", "replay"), assistant);
    result.session->set_mode(parse_mode(meta.payload.value("mode", "planner")));
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].direction != "event")
            continue;
        TurnOutput output = result.session->handle_event(event_from_json(entries[i].payload));
        ++result.events;
        if (i + 1 < entries.size() && entries[i + 1].direction == "output") {
            Json logged_output = entries[i + 1].payload;
            logged_output.erase("session_id");
            if (logged_output != to_json(output))
                ++result.mismatches;
        }
    }
    return result;
}

SessionManager::SessionManager(AssistantConfig default_config, std::optional<std::filesystem::path> log_dir, Clock clock)
    : default_config_(std::move(default_config)), log_dir_(std::move(log_dir)), clock_(std::move(clock)) {
    default_assistant_ = Assistant::create(default_config_);
    salt_ = std::random_device{}();
}

std::string SessionManager::next_id() {
    std::uint64_t n = ++counter_;
    return "s-" + hex64(fingerprint(std::to_string(salt_) + ":" + std::to_string(n))).substr(0, 12);
}

std::string SessionManager::create_session(const Json& request) {
    if (!request.is_object())
        throw ServiceError(400, "bad_request", "session request must be an object");
    std::shared_ptr<const Assistant> assistant = default_assistant_;
    try {
        bool custom = request.contains("config") || request.contains("mode") || request.contains("seed");
        if (custom) {
            AssistantConfig config = default_config_;
            if (auto it = request.find("config"); it != request.end()) {
                if (it->is_string())
                    config = load_config(it->get<std::string>());
                else if (it->is_object())
                    config = parse_config(*it, std::filesystem::current_path());
                else
                    throw ConfigError("config must be a path or an object");
            }
            if (auto it = request.find("mode"); it != request.end())
                set_mode(config, parse_mode(it->get<std::string>()));
            if (auto it = request.find("seed"); it != request.end())
                set_seed(config, it->get<std::uint64_t>());
            assistant = Assistant::create(std::move(config));
        }
    } catch (const ServiceError&) {
        throw;
    } catch (const std::exception& e) {
        throw ServiceError(400, "config_error", e.what());
    }

    auto entry = std::make_shared<Entry>();
    std::string id;
    {
        std::lock_guard lock(mutex_);
        id = request.contains("session_id") ? request["session_id"].get<std::string>() : next_id();
        if (!is_identifier(id) || sessions_.count(id))
            throw ServiceError(400, "bad_request", "session id '" + id + "' is invalid or already in use");
        sessions_[id] = entry;
    }
    entry->session = std::make_unique<Session>(id, assistant, clock_);
    entry->envelope.session_id = id;
    entry->envelope.created_at = clock_();
    entry->envelope.config_fingerprint = assistant->config_fingerprint();
    entry->envelope.catalog_fingerprint = assistant->catalog_fingerprint();
    if (log_dir_) {
        entry->envelope.log_path = *log_dir_ / (id + ".ndjson");
        entry->log = EventLog(entry->envelope.log_path, clock_);
        entry->log.append("meta", session_meta(*entry->session));
    }
    return id;
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end())
        throw ServiceError(404, "not_found", "no session '" + session_id + "'");
    return it->second;
}

Json SessionManager::post_event(const std::string& session_id, const Json& event_json) {
    auto entry = find(session_id);
    Event event;
    try {
        event = event_from_json(event_json);
    } catch (const EventError& e) {
        throw ServiceError(400, "bad_event", e.what());
    }
    std::lock_guard lock(entry->mutex);
    entry->log.append("event", to_json(event));
    TurnOutput output = entry->session->handle_event(event);
    Json payload = to_json(output);
    entry->log.append("output", payload);
    payload["session_id"] = session_id;
    return payload;
}

Json SessionManager::get_state(const std::string& session_id) {
    auto entry = find(session_id);
    std::lock_guard lock(entry->mutex);
    return entry->session->state_json(true);
}

Json SessionManager::get_trace(const std::string& session_id) {
    auto entry = find(session_id);
    std::lock_guard lock(entry->mutex);
    return entry->session->trace_json();
}

Json SessionManager::get_plan(const std::string& session_id) {
    auto entry = find(session_id);
    std::lock_guard lock(entry->mutex);
    const auto& plans = entry->session->plans();
    if (plans.empty())
        return {{"session_id", session_id}, {"plan", nullptr}};
    const PlanSnapshot& snapshot = plans.back();
    Json steps = Json::array();
    const auto& catalog = entry->session->assistant().catalog().catalog;
    for (const auto& id : snapshot.result.plan.steps) {
        Json step = {{"action_id", id}};
        auto ref = id.find('.');
        std::string skill_id = id.substr(0, ref);
        step["skill_id"] = skill_id;
        if (const SkillSpec* skill = catalog.find(skill_id))
            step["description"] = skill->description;
        steps.push_back(step);
    }
    return {
        {"session_id", session_id},
        {"turn", snapshot.turn},
        {"goal", snapshot.goal},
        {"status", snapshot.result.solved() ? "plan" : "unreachable"},
        {"plan", snapshot.result.plan.steps},
        {"steps", steps},
        {"cost", snapshot.result.cost},
        {"stats", to_json(snapshot.result, true)["stats"]},
        {"count", plans.size()},
    };
}

Json SessionManager::explain(const std::string& session_id, const std::string& kind, const std::string& element_ref,
                             const std::string& mode) {
    auto entry = find(session_id);
    std::lock_guard lock(entry->mutex);
    const Session& session = *entry->session;
    const Assistant& assistant = session.assistant();

    std::optional<ElementId> element;
    if (!element_ref.empty()) {
        if (assistant.ontology().contains(element_ref))
            element = element_ref;
        else
            element = assistant.rules().resolver().resolve(element_ref);
        if (!element)
            throw ServiceError(400, "bad_request", "unknown element '" + element_ref + "'");
    }
    WhyMode why_mode = WhyMode::chain;
    try {
        if (!mode.empty())
            why_mode = parse_why_mode(mode);
    } catch (const ExplainError& e) {
        throw ServiceError(400, "bad_request", e.what());
    }
    try {
        if (kind == "what") {
            return to_json(element ? summarize(session, {*element}) : summarize(session));
        }
        if (!element)
            throw ServiceError(400, "bad_request", "explain kind '" + kind + "' needs an element");
        if (kind == "how")
            return to_json(explain_how(session, *element));
        if (kind == "why")
            return to_json(explain_why(session, *element, why_mode));
        if (kind == "chain")
            return to_json(explain_chain(session, *element));
    } catch (const ExplainError& e) {
        throw ServiceError(422, "cannot_explain", e.what());
    }
    throw ServiceError(400, "bad_request", "unknown explain kind '" + kind + "' (expected what, how, why or chain)");
}

SessionEnvelope SessionManager::envelope(const std::string& session_id) {
    return find(session_id)->envelope;
}

std::vector<std::string> SessionManager::session_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, entry] : sessions_)
        ids.push_back(id);
    return ids;
}

}  // namespace skillweave
