#include "psm/service.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <httplib.h>

#include "psm/dataset_io.hpp"

namespace psm {

using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

[[noreturn]] void throw_errno(const std::string& what) {
    throw Error(Errc::io, what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("event log write");
        }
        done += static_cast<std::size_t>(n);
    }
}

json answer_to_json(const Answer& a) { return a.values; }

Answer answer_from_json(const json& j) {
    if (!j.is_array()) throw Error(Errc::invalid_argument, "answer must be an array of integers");
    Answer a;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw Error(Errc::invalid_argument, "answer must be an array of integers");
        a.values.push_back(v.get<int>());
    }
    return a;
}

} // namespace

// ---------------------------------------------------------------- EventLog

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw_errno("cannot open event log " + path_.string());
}

EventLog::~EventLog() {
    if (fd_ >= 0) ::close(fd_);
}

std::vector<json> EventLog::replay() {
    std::lock_guard lock(mu_);
    std::ifstream in(path_, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const std::size_t complete = content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1;
    if (complete != content.size() && ::ftruncate(fd_, static_cast<off_t>(complete)) != 0)
        throw_errno("cannot truncate torn event log tail");

    std::vector<json> events;
    std::istringstream lines(content.substr(0, complete));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            events.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw Error(Errc::io, path_.string() + ":" + std::to_string(lineno) + ": corrupt event: " + e.what());
        }
        if (events.back().contains("seq")) seq_ = std::max(seq_, events.back()["seq"].get<std::uint64_t>());
    }
    return events;
}

void EventLog::append(json event, bool durable) {
    std::lock_guard lock(mu_);
    event["seq"] = ++seq_;
    write_all(fd_, event.dump() + "\n");
    if (durable && ::fsync(fd_) != 0) throw_errno("event log fsync");
}

// ------------------------------------------------------------ SessionStore

SessionStore::SessionStore(std::filesystem::path log_path) : log_(std::move(log_path)) {
    for (const json& event : log_.replay()) {
        try {
            apply(event);
        } catch (const Error& e) {
            throw Error(Errc::io, "event " + event.value("seq", json()).dump() + " does not replay: " + e.what());
        }
    }
}

void SessionStore::apply(const json& event) {
    const std::string kind = event.at("event").get<std::string>();
    const std::string id = event.at("session").get<std::string>();
    if (kind == "session_created") {
        SessionState state(config_from_json(event.at("config")));
        sessions_[id] = std::make_unique<Entry>(event.at("ts").get<std::string>(), std::move(state));
    } else if (kind == "answer_submitted") {
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw Error(Errc::not_found, "answer for unknown session " + id);
        it->second->state.submit(event.at("round").get<std::size_t>(), answer_from_json(event.at("answer")));
    } else {
        throw Error(Errc::schema, "unknown event kind \"" + kind + "\"");
    }
}

std::string SessionStore::new_id() {
    std::lock_guard lock(id_mu_);
    std::random_device rd;
    char buf[33];
    for (;;) {
        const std::uint64_t hi = (static_cast<std::uint64_t>(rd()) << 32) | rd();
        const std::uint64_t lo = (static_cast<std::uint64_t>(rd()) << 32) | rd();
        std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                      static_cast<unsigned long long>(lo));
        std::shared_lock map_lock(map_mu_);
        if (!sessions_.count(buf)) return buf;
    }
}

SessionStore::Entry& SessionStore::find(const std::string& id) const {
    std::shared_lock lock(map_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(Errc::not_found, "no session " + id);
    return *it->second;
}

json SessionStore::create(const json& config_overrides) {
    SessionConfig config = config_from_json(config_overrides);
    if (!config_overrides.is_object() || !config_overrides.contains("shuffle_seed"))
        config.shuffle_seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) | std::random_device{}();
    const std::string id = new_id();
    const std::string ts = utc_now();
    auto entry = std::make_unique<Entry>(ts, SessionState(config));
    json out{{"session_id", id}, {"created_at", ts}, {"round", round_descriptor(id, entry->state)}};

    std::unique_lock lock(map_mu_);
    log_.append({{"event", "session_created"}, {"session", id}, {"ts", ts}, {"config", config_to_json(config)}},
                false);
    sessions_.emplace(id, std::move(entry));
    return out;
}

json SessionStore::current_round(const std::string& id) const {
    Entry& entry = find(id);
    std::lock_guard lock(entry.mu);
    if (entry.state.status() == SessionStatus::complete)
        throw Error(Errc::session_complete, "session " + id + " is complete; fetch /sessions/" + id + "/export");
    return round_descriptor(id, entry.state);
}

json SessionStore::submit(const std::string& id, std::size_t round_index, const Answer& answer) {
    Entry& entry = find(id);
    std::lock_guard lock(entry.mu);
    SessionState next = entry.state;
    next.submit(round_index, answer);
    const bool completes = next.status() == SessionStatus::complete;
    log_.append({{"event", "answer_submitted"},
                 {"session", id},
                 {"ts", utc_now()},
                 {"round", round_index},
                 {"answer", answer_to_json(answer)}},
                completes);
    entry.state = std::move(next);
    return {{"accepted", true},
            {"status", std::string(to_string(entry.state.status()))},
            {"next_round", completes ? json(nullptr) : round_descriptor(id, entry.state)}};
}

Dataset SessionStore::export_dataset(const std::string& id) const {
    Entry& entry = find(id);
    std::lock_guard lock(entry.mu);
    return entry.state.to_dataset();
}

SessionState SessionStore::snapshot(const std::string& id) const {
    Entry& entry = find(id);
    std::lock_guard lock(entry.mu);
    return entry.state;
}

json SessionStore::list() const {
    std::shared_lock lock(map_mu_);
    json out = json::array();
    for (const auto& [id, entry] : sessions_) {
        std::lock_guard entry_lock(entry->mu);
        const auto current = entry->state.current_round();
        out.push_back({{"session_id", id},
                       {"created_at", entry->created_at},
                       {"status", std::string(to_string(entry->state.status()))},
                       {"current_round", current ? json(*current) : json(nullptr)}});
    }
    return {{"sessions", std::move(out)}};
}

// ------------------------------------------------------------------- wire

json round_descriptor(const std::string& id, const SessionState& state) {
    const auto current = state.current_round();
    if (!current) throw Error(Errc::session_complete, "session " + id + " is complete");
    const AnswerSpace& space = state.config().space;
    std::size_t excluded = 0;
    for (const auto& r : state.rounds()) excluded += r.excluded ? 1 : 0;

    json d{{"session_id", id},
           {"index", *current},
           {"total_rounds", 1 + state.rounds().size() - excluded},
           {"scales", std::vector<int>(space.scales().begin(), space.scales().end())},
           {"excluded", false},
           {"excluded_rounds", excluded}};
    if (*current == 0) {
        d["corner"] = space.zero_corner().coords;
        d["prices"] = nullptr;
        d["budget"] = nullptr;
    } else {
        const Round& round = state.rounds()[*current - 1].round;
        json prices = json::array();
        for (const auto& p : round.prices) prices.push_back(rational_to_json(p));
        d["corner"] = round.corner.coords;
        d["prices"] = std::move(prices);
        d["budget"] = rational_to_json(round.budget);
    }
    return d;
}

int http_status(Errc code) {
    switch (code) {
    case Errc::invalid_argument:
    case Errc::dimension_mismatch:
    case Errc::schema: return 400;
    case Errc::not_found: return 404;
    case Errc::wrong_round:
    case Errc::session_complete:
    case Errc::incomplete: return 409;
    case Errc::out_of_range:
    case Errc::over_budget: return 422;
    default: return 500;
    }
}

json error_body(const Error& error) {
    json details = json::object();
    if (const auto* ob = dynamic_cast<const OverBudget*>(&error)) {
        details["shortfall"] = rational_to_json(ob->shortfall());
        details["shortfall_tokens"] = ob->shortfall().to_double();
    }
    return {{"code", std::string(to_string(error.code()))}, {"message", error.what()}, {"details", std::move(details)}};
}

void register_routes(httplib::Server& server, SessionStore& store) {
    auto reply = [](httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    };
    auto guarded = [reply](auto handler) {
        return [reply, handler](const httplib::Request& req, httplib::Response& res) {
            try {
                handler(req, res);
            } catch (const Error& e) {
                reply(res, http_status(e.code()), error_body(e));
            } catch (const json::exception& e) {
                reply(res, 400, error_body(Error(Errc::invalid_argument, e.what())));
            } catch (const std::exception& e) {
                reply(res, 500, error_body(Error(Errc::io, e.what())));
            }
        };
    };
    auto parse_body = [](const httplib::Request& req) {
        if (req.body.empty()) return json::object();
        return json::parse(req.body);
    };

    server.Post("/sessions", guarded([&store, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
                    reply(res, 201, store.create(parse_body(req)));
                }));
    server.Get("/sessions", guarded([&store, reply](const httplib::Request&, httplib::Response& res) {
                   reply(res, 200, store.list());
               }));
    server.Get("/sessions/:id/round", guarded([&store, reply](const httplib::Request& req, httplib::Response& res) {
                   reply(res, 200, store.current_round(req.path_params.at("id")));
               }));
    server.Post("/sessions/:id/answer",
                guarded([&store, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
                    const json body = parse_body(req);
                    if (!body.contains("round") || !body["round"].is_number_unsigned())
                        throw Error(Errc::invalid_argument, "body needs a non-negative integer \"round\"");
                    if (!body.contains("answer")) throw Error(Errc::invalid_argument, "body needs \"answer\"");
                    reply(res, 200,
                          store.submit(req.path_params.at("id"), body["round"].get<std::size_t>(),
                                       answer_from_json(body["answer"])));
                }));
    server.Get("/sessions/:id/export", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   res.status = 200;
                   res.set_content(save_dataset(store.export_dataset(req.path_params.at("id"))), "application/json");
               }));
}

} // namespace psm
