#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "quakedrill/runtime.hpp"

namespace quakedrill {

enum class BehaviorStatus { performed, declined, not_encountered, timed_out };

std::string_view to_string(BehaviorStatus status);

struct BehaviorOutcome {
    std::string behavior_tag;
    BehaviorStatus status = BehaviorStatus::not_encountered;
    std::optional<std::string> node_id;
    std::string rationale;

    friend bool operator==(const BehaviorOutcome&, const BehaviorOutcome&) = default;
};

/// One choice as it is walked through in the post-game playback.
struct PlaybackEntry {
    std::string node_id;
    std::string option_id;
    std::string label;
    bool recommended = false;
    std::string rationale;

    friend bool operator==(const PlaybackEntry&, const PlaybackEntry&) = default;
};

struct ScoreSummary {
    int performed = 0;
    int declined = 0;
    int not_encountered = 0;
    int timed_out = 0;

    friend bool operator==(const ScoreSummary&, const ScoreSummary&) = default;
};

struct AssessmentReport {
    std::string session_id;
    std::vector<BehaviorOutcome> outcomes;  // catalog order, one per behavior
    std::vector<PlaybackEntry> playback;   // choice order
    ScoreSummary score_summary;

    friend bool operator==(const AssessmentReport&, const AssessmentReport&) = default;
};

class AssessmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Classifies every catalog behavior against a finished session log:
///   performed        a recommended option carrying the tag was chosen
///   timed_out        offering nodes were visited, but each was left by a timeout
///   declined         an offering node was visited and a different option chosen there
///   not_encountered  no offering node was visited
AssessmentReport build_report(const EventLog& log, const Scenario& scenario,
                              const std::string& session_id = "");

/// (caption, rationale) pairs for the playback screen, in choice order.
std::vector<std::pair<std::string, std::string>> playback_script(const AssessmentReport& report);

}  // namespace quakedrill
