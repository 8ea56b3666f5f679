#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quakedrill/scenario.hpp"

namespace quakedrill {

enum class EventKind { session_start, enter_node, choice, feedback, timeout_fired, session_end };

/// Immediate feedback flash shown after a choice.
enum class FeedbackColor { green, red };

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view text);
std::string_view to_string(FeedbackColor color);
std::optional<FeedbackColor> feedback_color_from_string(std::string_view text);

struct SessionEvent {
    long long at_ms = 0;  // session-relative
    EventKind kind = EventKind::session_start;
    std::optional<std::string> node_id;
    std::optional<std::string> option_id;
    std::optional<FeedbackColor> feedback;
    std::string detail;

    friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

using EventLog = std::vector<SessionEvent>;

struct SessionState {
    std::string scenario_id;
    std::string participant_id;
    NodeTarget current_node;  // nullopt once the drill has ended
    long long elapsed_ms = 0;
    long long node_entered_at_ms = 0;
    std::set<std::pair<std::string, std::string>> performed;  // (node id, option id)
    EventLog log;
    bool finished = false;

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

class SessionError : public std::runtime_error {
public:
    enum class Code { invalid_scenario, finished, unknown_option, negative_time, replay_mismatch };

    SessionError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

struct ChoiceResult {
    FeedbackColor color;
    SessionState state;
};

/// Opens a session at the scenario's start node. Rejects scenarios that do
/// not validate cleanly.
SessionState start_session(const Scenario& scenario, const std::string& participant_id);

/// Options at the current node, in authored order.
std::vector<ActionOption> available_actions(const Scenario& scenario, const SessionState& state);

/// Applies a choice: logs choice and feedback at the current clock, cancels
/// the node's pending timeout, and moves to the option's target.
ChoiceResult choose(const Scenario& scenario, const SessionState& state, std::string_view option_id);

/// Moves the session clock forward and fires the current node's timeout
/// once the dwell time reaches its threshold. A timeout fires at its
/// deadline, so its timestamp does not depend on how time was chunked.
SessionState advance_time(const Scenario& scenario, const SessionState& state, long long delta_ms);

/// Rebuilds a session by re-executing the commands recorded in the log.
/// The clock ends at the last logged timestamp unless `clock_ms` is given
/// (idle time after the last event is not part of the log).
SessionState replay(const EventLog& log, const Scenario& scenario,
                    std::optional<long long> clock_ms = std::nullopt);

/// Milliseconds until the current node's timeout fires, if it has one.
std::optional<long long> timeout_remaining_ms(const Scenario& scenario, const SessionState& state);

/// Scenario and participant ids carried by a session_start event.
struct SessionHeader {
    std::string scenario_id;
    std::string participant_id;
};
std::string format_session_header(const SessionHeader& header);
std::optional<SessionHeader> parse_session_header(std::string_view detail);

/// Kind of hazard recorded by a timeout_fired event (text before ": ").
std::string timeout_event_kind(const SessionEvent& event);

}  // namespace quakedrill
