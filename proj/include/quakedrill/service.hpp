#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "quakedrill/cohort.hpp"
#include "quakedrill/knowledge.hpp"
#include "quakedrill/runtime.hpp"
#include "quakedrill/scenario.hpp"
#include "quakedrill/serialization.hpp"

namespace quakedrill::service {

/// Milliseconds on a clock that keeps counting across process restarts.
using Clock = std::function<long long()>;

/// Milliseconds since the Unix epoch.
long long system_clock_ms();

class ServiceError : public std::runtime_error {
public:
    enum class Kind { not_found, conflict, validation };

    ServiceError(Kind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}
    Kind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }
    int http_status() const noexcept;

private:
    Kind kind_;
    std::string code_;
};

/// Raised while opening the service: unreadable directories, invalid
/// scenarios, a corrupt index.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Participant {
    std::string id;
    std::string group;  // staff | visitor
    std::map<std::string, std::string> metadata;
};

enum class SessionStatus { active, finished };
std::string_view to_string(SessionStatus status);

struct StoredSession {
    std::string id;
    std::string participant_id;
    std::string scenario_id;
    std::string log_file;  // relative to the data directory
    SessionStatus status = SessionStatus::active;
    long long started_at_ms = 0;  // clock value at session_start
};

namespace batteries {
inline constexpr std::string_view self_efficacy = "self_efficacy";
inline constexpr std::string_view training_efficacy = "training_efficacy";
inline constexpr std::string_view engagement = "engagement";
}  // namespace batteries

struct QuestionnaireRecord {
    std::string participant_id;
    TestPhase phase = TestPhase::pre;
    std::string battery;
    std::vector<int> values;
};

struct ServiceConfig {
    std::filesystem::path scenario_dir;
    std::filesystem::path data_dir;
};

/// Live sessions plus file-backed storage.
///
/// data_dir/index.json holds participants, session metadata, questionnaires
/// and coder checklists; it is replaced by atomic rename on every change.
/// data_dir/sessions/<id>.log holds each session's event log, appended and
/// synced before a command returns. Opening a data directory rebuilds every
/// session by replaying its log.
class Service {
public:
    Service(ServiceConfig config, Clock clock = system_clock_ms);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Json create_participant(const Json& body);
    Json create_session(const Json& body);
    Json get_state(const std::string& session_id);
    Json post_choice(const std::string& session_id, const Json& body);
    Json get_assessment(const std::string& session_id);
    Json submit_questionnaire(const std::string& participant_id, const Json& body);
    Json submit_knowledge(const std::string& participant_id, const Json& body);
    Json get_cohort_analysis(const std::optional<std::string>& group, const std::optional<std::string>& measure);

    /// Fires every timeout that is due on the clock. Returns the number of
    /// sessions that changed.
    int sweep();

    /// Runs sweep() on a background thread every `period_ms` until
    /// stop_sweeper() or destruction.
    void start_sweeper(int period_ms = 100);
    void stop_sweeper();

    /// Cohort records assembled from stored questionnaires and checklists.
    /// Participants without complete pre and post data for a measure are left
    /// out of it, with a note per exclusion.
    std::vector<stats::CohortRecord> cohort_records(std::vector<std::string>* notes = nullptr) const;

    std::vector<std::string> scenario_ids() const;
    const std::filesystem::path& data_dir() const { return config_.data_dir; }
    std::filesystem::path log_path(const std::string& session_id) const;

private:
    struct LiveSession {
        StoredSession meta;
        const Scenario* scenario = nullptr;
        SessionState state;
        std::mutex mutex;
    };

    void load_scenarios();
    void load_index();
    void save_index_locked() const;
    Json index_json_locked() const;

    std::shared_ptr<LiveSession> find_session(const std::string& id) const;
    const Participant& find_participant_locked(const std::string& id) const;
    long long session_now(const LiveSession& s) const;
    // Brings the session clock up to now and persists any timeout that fired.
    bool catch_up(LiveSession& s);
    void persist_new_events(LiveSession& s, std::size_t from);
    Json state_json(const LiveSession& s) const;

    ServiceConfig config_;
    Clock clock_;
    std::map<std::string, Scenario> scenarios_;

    mutable std::mutex store_mutex_;  // guards everything below except per-session state
    std::map<std::string, Participant> participants_;
    std::vector<std::string> participant_order_;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
    std::vector<std::string> session_order_;
    std::vector<QuestionnaireRecord> questionnaires_;
    std::vector<KnowledgeResponse> knowledge_;
    long long next_session_ = 1;
    long long next_participant_ = 1;

    std::thread sweeper_;
    std::mutex sweeper_mutex_;
    std::condition_variable sweeper_cv_;
    bool sweeper_stop_ = false;
};

}  // namespace quakedrill::service
