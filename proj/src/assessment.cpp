#include "quakedrill/assessment.hpp"

#include <unordered_map>
#include <unordered_set>

namespace quakedrill {

std::string_view to_string(BehaviorStatus status) {
    switch (status) {
        case BehaviorStatus::performed: return "performed";
        case BehaviorStatus::declined: return "declined";
        case BehaviorStatus::not_encountered: return "not_encountered";
        case BehaviorStatus::timed_out: return "timed_out";
    }
    return "not_encountered";
}

AssessmentReport build_report(const EventLog& log, const Scenario& scenario, const std::string& session_id) {
    SessionState state;
    try {
        state = replay(log, scenario);
    } catch (const SessionError& e) {
        throw AssessmentError(std::string("log does not match scenario: ") + e.what());
    }
    if (!state.finished) throw AssessmentError("session has not finished");

    AssessmentReport report;
    report.session_id = session_id;

    struct Performed {
        std::string node_id;
        std::string rationale;
    };
    std::unordered_map<std::string, Performed> performed;  // tag -> first green choice
    std::unordered_set<std::string> visited;
    std::unordered_set<std::string> chosen_at;

    for (const auto& event : log) {
        if (event.kind == EventKind::enter_node && event.node_id) {
            visited.insert(*event.node_id);
        } else if (event.kind == EventKind::choice && event.node_id && event.option_id) {
            const auto* node = scenario.find_node(*event.node_id);
            const auto* option = node->find_option(*event.option_id);
            chosen_at.insert(node->id);
            report.playback.push_back(
                {node->id, option->id, option->label, option->recommended, option->rationale});
            if (option->recommended && option->behavior_tag)
                performed.try_emplace(*option->behavior_tag, Performed{node->id, option->rationale});
        }
    }

    const auto coverage = behavior_coverage(scenario);
    for (const auto& behavior : scenario.behaviors) {
        BehaviorOutcome outcome;
        outcome.behavior_tag = behavior.tag;
        if (auto it = performed.find(behavior.tag); it != performed.end()) {
            outcome.status = BehaviorStatus::performed;
            outcome.node_id = it->second.node_id;
            outcome.rationale = it->second.rationale;
        } else {
            const auto& offering = coverage.at(behavior.tag);
            const std::string* first_visit = nullptr;
            const std::string* first_declined = nullptr;
            for (const auto& node_id : offering) {
                if (!visited.contains(node_id)) continue;
                if (!first_visit) first_visit = &node_id;
                if (!first_declined && chosen_at.contains(node_id)) first_declined = &node_id;
            }
            if (first_declined) {
                outcome.status = BehaviorStatus::declined;
                outcome.node_id = *first_declined;
            } else if (first_visit) {
                // a finished session leaves every visited node by a choice or a timeout
                outcome.status = BehaviorStatus::timed_out;
                outcome.node_id = *first_visit;
            } else {
                outcome.status = BehaviorStatus::not_encountered;
            }
            if (!offering.empty()) {
                for (const auto& option : scenario.find_node(offering.front())->options)
                    if (option.recommended && option.behavior_tag == behavior.tag) {
                        outcome.rationale = option.rationale;
                        break;
                    }
            }
        }
        switch (outcome.status) {
            case BehaviorStatus::performed: ++report.score_summary.performed; break;
            case BehaviorStatus::declined: ++report.score_summary.declined; break;
            case BehaviorStatus::not_encountered: ++report.score_summary.not_encountered; break;
            case BehaviorStatus::timed_out: ++report.score_summary.timed_out; break;
        }
        report.outcomes.push_back(std::move(outcome));
    }
    return report;
}

std::vector<std::pair<std::string, std::string>> playback_script(const AssessmentReport& report) {
    std::vector<std::pair<std::string, std::string>> script;
    script.reserve(report.playback.size());
    for (const auto& entry : report.playback) script.emplace_back(entry.label, entry.rationale);
    return script;
}

}  // namespace quakedrill
