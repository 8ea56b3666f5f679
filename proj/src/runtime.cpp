#include "quakedrill/runtime.hpp"

#include <unordered_set>

namespace quakedrill {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::session_start: return "session_start";
        case EventKind::enter_node: return "enter_node";
        case EventKind::choice: return "choice";
        case EventKind::feedback: return "feedback";
        case EventKind::timeout_fired: return "timeout_fired";
        case EventKind::session_end: return "session_end";
    }
    return "session_start";
}

std::optional<EventKind> event_kind_from_string(std::string_view text) {
    for (auto kind : {EventKind::session_start, EventKind::enter_node, EventKind::choice,
                      EventKind::feedback, EventKind::timeout_fired, EventKind::session_end})
        if (to_string(kind) == text) return kind;
    return std::nullopt;
}

std::string_view to_string(FeedbackColor color) {
    return color == FeedbackColor::green ? "green" : "red";
}

std::optional<FeedbackColor> feedback_color_from_string(std::string_view text) {
    if (text == "green") return FeedbackColor::green;
    if (text == "red") return FeedbackColor::red;
    return std::nullopt;
}

std::string format_session_header(const SessionHeader& header) {
    return "scenario=" + header.scenario_id + " participant=" + header.participant_id;
}

std::optional<SessionHeader> parse_session_header(std::string_view detail) {
    constexpr std::string_view scenario_key = "scenario=";
    constexpr std::string_view participant_key = " participant=";
    if (!detail.starts_with(scenario_key)) return std::nullopt;
    detail.remove_prefix(scenario_key.size());
    const auto split = detail.find(participant_key);
    if (split == std::string_view::npos) return std::nullopt;
    SessionHeader header{std::string(detail.substr(0, split)),
                         std::string(detail.substr(split + participant_key.size()))};
    if (header.scenario_id.empty() || header.participant_id.empty()) return std::nullopt;
    return header;
}

std::string timeout_event_kind(const SessionEvent& event) {
    const auto colon = event.detail.find(": ");
    return colon == std::string::npos ? event.detail : event.detail.substr(0, colon);
}

namespace {

const DecisionNode& current_node(const Scenario& scenario, const SessionState& state) {
    if (state.finished || !state.current_node)
        throw SessionError(SessionError::Code::finished, "session has already finished");
    const auto* node = scenario.find_node(*state.current_node);
    if (!node)
        throw SessionError(SessionError::Code::replay_mismatch,
                           "session is at node '" + *state.current_node + "' which the scenario lacks");
    return *node;
}

void enter(const Scenario& scenario, SessionState& state, const NodeTarget& target) {
    state.current_node = target;
    state.node_entered_at_ms = state.elapsed_ms;
    if (target) {
        state.log.push_back({state.elapsed_ms, EventKind::enter_node, *target, std::nullopt,
                             std::nullopt, scenario.find_node(*target)->waypoint});
    } else {
        state.finished = true;
        state.log.push_back({state.elapsed_ms, EventKind::session_end, std::nullopt, std::nullopt,
                             std::nullopt, ""});
    }
}

FeedbackColor apply_choice(const Scenario& scenario, SessionState& state, std::string_view option_id) {
    const auto& node = current_node(scenario, state);
    const auto* option = node.find_option(option_id);
    if (!option)
        throw SessionError(SessionError::Code::unknown_option,
                           "option '" + std::string(option_id) + "' is not offered at node '" + node.id + "'");
    const auto color = option->recommended ? FeedbackColor::green : FeedbackColor::red;
    state.log.push_back({state.elapsed_ms, EventKind::choice, node.id, option->id, std::nullopt, option->label});
    state.log.push_back({state.elapsed_ms, EventKind::feedback, node.id, option->id, color, ""});
    state.performed.emplace(node.id, option->id);
    enter(scenario, state, option->next_node);
    return color;
}

void apply_time(const Scenario& scenario, SessionState& state, long long delta_ms) {
    if (delta_ms < 0)
        throw SessionError(SessionError::Code::negative_time, "time cannot run backwards");
    current_node(scenario, state);
    const long long target = state.elapsed_ms + delta_ms;
    std::unordered_set<std::string> fired;
    while (!state.finished) {
        const auto& node = current_node(scenario, state);
        if (!node.timeout || fired.contains(node.id)) break;
        const long long deadline = state.node_entered_at_ms + node.timeout->after_ms;
        if (deadline > target) break;
        fired.insert(node.id);
        state.elapsed_ms = deadline;
        state.log.push_back({deadline, EventKind::timeout_fired, node.id, std::nullopt, std::nullopt,
                             node.timeout->outcome_event + ": " + node.timeout->outcome_text});
        enter(scenario, state, node.timeout->next_node);
    }
    state.elapsed_ms = target;
}

}  // namespace

SessionState start_session(const Scenario& scenario, const std::string& participant_id) {
    const auto report = validate_scenario(scenario);
    if (!report.ok())
        throw SessionError(SessionError::Code::invalid_scenario,
                           "scenario '" + scenario.id + "' has validation errors: " +
                               report.errors.front().code + " at " + report.errors.front().location);
    SessionState state;
    state.scenario_id = scenario.id;
    state.participant_id = participant_id;
    state.log.push_back({0, EventKind::session_start, std::nullopt, std::nullopt, std::nullopt,
                         format_session_header({scenario.id, participant_id})});
    enter(scenario, state, scenario.start_node);
    return state;
}

std::vector<ActionOption> available_actions(const Scenario& scenario, const SessionState& state) {
    return current_node(scenario, state).options;
}

ChoiceResult choose(const Scenario& scenario, const SessionState& state, std::string_view option_id) {
    SessionState next = state;
    const auto color = apply_choice(scenario, next, option_id);
    return {color, std::move(next)};
}

SessionState advance_time(const Scenario& scenario, const SessionState& state, long long delta_ms) {
    SessionState next = state;
    apply_time(scenario, next, delta_ms);
    return next;
}

std::optional<long long> timeout_remaining_ms(const Scenario& scenario, const SessionState& state) {
    if (state.finished || !state.current_node) return std::nullopt;
    const auto* node = scenario.find_node(*state.current_node);
    if (!node || !node->timeout) return std::nullopt;
    const long long remaining = state.node_entered_at_ms + node->timeout->after_ms - state.elapsed_ms;
    return remaining > 0 ? remaining : 0;
}

SessionState replay(const EventLog& log, const Scenario& scenario, std::optional<long long> clock_ms) {
    using Code = SessionError::Code;
    if (log.empty() || log.front().kind != EventKind::session_start)
        throw SessionError(Code::replay_mismatch, "log must begin with session_start");
    for (std::size_t i = 1; i < log.size(); ++i)
        if (log[i].at_ms < log[i - 1].at_ms)
            throw SessionError(Code::replay_mismatch,
                               "timestamps decrease at record " + std::to_string(i + 1));
    const auto header = parse_session_header(log.front().detail);
    if (!header) throw SessionError(Code::replay_mismatch, "session_start lacks scenario/participant ids");
    if (header->scenario_id != scenario.id)
        throw SessionError(Code::replay_mismatch, "log belongs to scenario '" + header->scenario_id +
                                                      "', not '" + scenario.id + "'");

    SessionState state = start_session(scenario, header->participant_id);
    auto check_prefix = [&](std::size_t upto) {
        if (state.log.size() > log.size())
            throw SessionError(Code::replay_mismatch,
                               "re-execution produced events beyond the end of the log");
        for (std::size_t i = upto; i < state.log.size(); ++i)
            if (!(state.log[i] == log[i]))
                throw SessionError(Code::replay_mismatch,
                                   "record " + std::to_string(i + 1) + " does not match re-execution");
    };
    check_prefix(0);

    try {
        while (state.log.size() < log.size()) {
            const std::size_t cursor = state.log.size();
            const auto& event = log[cursor];
            if (state.finished)
                throw SessionError(Code::replay_mismatch, "events recorded after session_end");
            if (event.at_ms < state.elapsed_ms)
                throw SessionError(Code::replay_mismatch, "record " + std::to_string(cursor + 1) +
                                                              " precedes the session clock");
            switch (event.kind) {
                case EventKind::choice:
                    if (!event.option_id)
                        throw SessionError(Code::replay_mismatch, "choice record lacks an option id");
                    if (event.node_id != state.current_node)
                        throw SessionError(Code::replay_mismatch,
                                           "choice at record " + std::to_string(cursor + 1) +
                                               " names a node other than the current one");
                    // the log is authoritative on whether a timeout fired before the choice
                    state.elapsed_ms = event.at_ms;
                    apply_choice(scenario, state, *event.option_id);
                    break;
                case EventKind::timeout_fired:
                    apply_time(scenario, state, event.at_ms - state.elapsed_ms);
                    break;
                default:
                    throw SessionError(Code::replay_mismatch,
                                       "record " + std::to_string(cursor + 1) + " (" +
                                           std::string(to_string(event.kind)) + ") is not a command result");
            }
            if (state.log.size() == cursor)
                throw SessionError(Code::replay_mismatch,
                                   "record " + std::to_string(cursor + 1) + " could not be reproduced");
            check_prefix(cursor);
        }
    } catch (const SessionError& e) {
        if (e.code() == Code::replay_mismatch) throw;
        throw SessionError(Code::replay_mismatch, std::string("log does not replay: ") + e.what());
    }

    if (clock_ms) {
        if (*clock_ms < state.elapsed_ms)
            throw SessionError(Code::replay_mismatch, "clock precedes the last logged event");
        if (!state.finished) state.elapsed_ms = *clock_ms;
    }
    return state;
}

}  // namespace quakedrill
