#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "psm/session.hpp"

namespace httplib {
class Server;
}

namespace psm {

/// Append-only NDJSON file. Every event is written with a single write(2);
/// events flagged `durable` are followed by fsync.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path);
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    /// Complete events currently in the file. A torn final line (a crash in
    /// the middle of a write) is dropped and cut from the file.
    std::vector<nlohmann::json> replay();

    /// Stamps `seq` and writes one line.
    void append(nlohmann::json event, bool durable);

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    int fd_ = -1;
    std::uint64_t seq_ = 0;
    std::mutex mu_;
};

/// Sessions kept in memory and mirrored to an event log; the log is
/// replayed on construction so a restarted store resumes every session.
/// Errors are reported as psm::Error (OverBudget for over-budget answers).
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path log_path);

    /// Returns {"session_id", "created_at", "round": descriptor}.
    nlohmann::json create(const nlohmann::json& config_overrides);
    nlohmann::json current_round(const std::string& id) const;
    /// Returns {"accepted", "status", "next_round": descriptor or null}.
    nlohmann::json submit(const std::string& id, std::size_t round_index, const Answer& answer);
    Dataset export_dataset(const std::string& id) const;
    nlohmann::json list() const;
    SessionState snapshot(const std::string& id) const;

private:
    struct Entry {
        std::string created_at;
        SessionState state;
        mutable std::mutex mu;
        Entry(std::string created, SessionState s) : created_at(std::move(created)), state(std::move(s)) {}
    };

    void apply(const nlohmann::json& event);
    Entry& find(const std::string& id) const;
    std::string new_id();

    EventLog log_;
    mutable std::shared_mutex map_mu_;
    std::map<std::string, std::unique_ptr<Entry>> sessions_;
    std::mutex id_mu_;
};

/// JSON description of the round a respondent should answer next.
nlohmann::json round_descriptor(const std::string& id, const SessionState& state);

/// {"code", "message", "details"} body and HTTP status for an error.
int http_status(Errc code);
nlohmann::json error_body(const Error& error);

/// Routes:
///   POST /sessions                  body: config overrides (optional)
///   GET  /sessions                  list
///   GET  /sessions/:id/round        current round
///   POST /sessions/:id/answer       body: {"round": i, "answer": [...]}
///   GET  /sessions/:id/export       save_dataset() of the finished session
void register_routes(httplib::Server& server, SessionStore& store);

} // namespace psm
