#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quakedrill {

/// The three drill phases a recommended behavior belongs to.
enum class Phase { indoor_earthquake, pre_evacuation_indoor, outdoor_evacuation };

std::string_view to_string(Phase phase);
std::optional<Phase> phase_from_string(std::string_view text);

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// A learning outcome the drill is meant to teach.
struct Behavior {
    std::string tag;
    Phase phase = Phase::indoor_earthquake;
    std::string description;

    friend bool operator==(const Behavior&, const Behavior&) = default;
};

/// A coordinate-tagged stopping point. Positions are carried for authoring
/// only; the engine moves point to point without simulating distance.
struct Waypoint {
    std::string id;
    Vec3 position;
    std::string label;

    friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct Route {
    std::string from;
    std::string to;
    std::vector<Vec3> path;  // empty means straight line

    friend bool operator==(const Route&, const Route&) = default;
};

/// Target of a transition: a node id, or std::nullopt for the end of the drill.
using NodeTarget = std::optional<std::string>;

/// One action panel offered at a stopping point.
struct ActionOption {
    std::string id;
    std::string label;
    bool recommended = false;
    std::optional<std::string> behavior_tag;
    std::string rationale;
    NodeTarget next_node;

    friend bool operator==(const ActionOption&, const ActionOption&) = default;
};

/// Hazard applied when the trainee does nothing at a node for after_ms.
struct TimeoutRule {
    long long after_ms = 0;
    std::string outcome_event;
    std::string outcome_text;
    NodeTarget next_node;

    friend bool operator==(const TimeoutRule&, const TimeoutRule&) = default;
};

struct DecisionNode {
    std::string id;
    std::string waypoint;
    std::string prompt;
    std::vector<ActionOption> options;
    std::optional<TimeoutRule> timeout;

    const ActionOption* find_option(std::string_view option_id) const;

    friend bool operator==(const DecisionNode&, const DecisionNode&) = default;
};

struct Scenario {
    std::string id;
    std::string title;
    std::vector<Behavior> behaviors;
    std::vector<Waypoint> waypoints;
    std::vector<Route> routes;
    std::vector<DecisionNode> nodes;
    std::string start_node;

    const DecisionNode* find_node(std::string_view node_id) const;
    const Behavior* find_behavior(std::string_view tag) const;
    const Waypoint* find_waypoint(std::string_view waypoint_id) const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ValidationIssue {
    std::string code;
    std::string location;
    std::string message;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

/// Behavior tag -> ids of nodes that offer a recommended option carrying it.
using CoverageMap = std::map<std::string, std::vector<std::string>>;

struct ValidationReport {
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;
    CoverageMap coverage;

    bool ok() const { return errors.empty(); }

    friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Error codes emitted by validate_scenario.
namespace issue {
inline constexpr std::string_view duplicate_behavior = "duplicate_behavior";
inline constexpr std::string_view duplicate_waypoint = "duplicate_waypoint";
inline constexpr std::string_view duplicate_node = "duplicate_node";
inline constexpr std::string_view duplicate_option = "duplicate_option";
inline constexpr std::string_view nonfinite_position = "nonfinite_position";
inline constexpr std::string_view route_unknown_waypoint = "route_unknown_waypoint";
inline constexpr std::string_view route_self_loop = "route_self_loop";
inline constexpr std::string_view unknown_waypoint = "unknown_waypoint";
inline constexpr std::string_view empty_options = "empty_options";
inline constexpr std::string_view unknown_behavior_tag = "unknown_behavior_tag";
inline constexpr std::string_view dangling_next_node = "dangling_next_node";
inline constexpr std::string_view nonpositive_timeout = "nonpositive_timeout";
inline constexpr std::string_view missing_start = "missing_start";
inline constexpr std::string_view unreachable_node = "unreachable_node";
inline constexpr std::string_view no_exit_to_terminal = "no_exit_to_terminal";
// warnings
inline constexpr std::string_view uncovered_behavior = "uncovered_behavior";
inline constexpr std::string_view tag_on_not_recommended = "tag_on_not_recommended";
}  // namespace issue

/// Checks every structural invariant of a scenario. Never throws; problems
/// are reported as issues.
ValidationReport validate_scenario(const Scenario& scenario);

/// Every catalog behavior mapped to the nodes whose recommended options carry
/// it, in authored node order.
CoverageMap behavior_coverage(const Scenario& scenario);

}  // namespace quakedrill
