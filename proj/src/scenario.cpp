#include "quakedrill/scenario.hpp"

#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace quakedrill {

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::indoor_earthquake: return "indoor_earthquake";
        case Phase::pre_evacuation_indoor: return "pre_evacuation_indoor";
        case Phase::outdoor_evacuation: return "outdoor_evacuation";
    }
    return "indoor_earthquake";
}

std::optional<Phase> phase_from_string(std::string_view text) {
    if (text == "indoor_earthquake") return Phase::indoor_earthquake;
    if (text == "pre_evacuation_indoor") return Phase::pre_evacuation_indoor;
    if (text == "outdoor_evacuation") return Phase::outdoor_evacuation;
    return std::nullopt;
}

const ActionOption* DecisionNode::find_option(std::string_view option_id) const {
    for (const auto& option : options)
        if (option.id == option_id) return &option;
    return nullptr;
}

const DecisionNode* Scenario::find_node(std::string_view node_id) const {
    for (const auto& node : nodes)
        if (node.id == node_id) return &node;
    return nullptr;
}

const Behavior* Scenario::find_behavior(std::string_view tag) const {
    for (const auto& behavior : behaviors)
        if (behavior.tag == tag) return &behavior;
    return nullptr;
}

const Waypoint* Scenario::find_waypoint(std::string_view waypoint_id) const {
    for (const auto& waypoint : waypoints)
        if (waypoint.id == waypoint_id) return &waypoint;
    return nullptr;
}

CoverageMap behavior_coverage(const Scenario& scenario) {
    CoverageMap coverage;
    for (const auto& behavior : scenario.behaviors) coverage[behavior.tag];
    for (const auto& node : scenario.nodes) {
        for (const auto& option : node.options) {
            if (!option.recommended || !option.behavior_tag) continue;
            auto it = coverage.find(*option.behavior_tag);
            if (it == coverage.end()) continue;
            auto& nodes = it->second;
            if (nodes.empty() || nodes.back() != node.id) nodes.push_back(node.id);
        }
    }
    return coverage;
}

namespace {

std::string node_loc(const DecisionNode& node) { return "node:" + node.id; }

std::string option_loc(const DecisionNode& node, const ActionOption& option) {
    return "node:" + node.id + "/option:" + option.id;
}

bool finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

class Validator {
public:
    explicit Validator(const Scenario& scenario) : scenario_(scenario) {}

    ValidationReport run() {
        check_catalog();
        check_waypoints();
        check_routes();
        check_nodes();
        check_graph();
        report_.coverage = behavior_coverage(scenario_);
        for (const auto& [tag, nodes] : report_.coverage)
            if (nodes.empty())
                warn(issue::uncovered_behavior, "behavior:" + tag,
                     "behavior '" + tag + "' is not offered by any recommended option");
        return std::move(report_);
    }

private:
    void error(std::string_view code, std::string location, std::string message) {
        report_.errors.push_back({std::string(code), std::move(location), std::move(message)});
    }
    void warn(std::string_view code, std::string location, std::string message) {
        report_.warnings.push_back({std::string(code), std::move(location), std::move(message)});
    }

    void check_catalog() {
        std::unordered_set<std::string> seen;
        for (const auto& behavior : scenario_.behaviors)
            if (!seen.insert(behavior.tag).second)
                error(issue::duplicate_behavior, "behavior:" + behavior.tag,
                      "behavior tag '" + behavior.tag + "' declared more than once");
    }

    void check_waypoints() {
        std::unordered_set<std::string> seen;
        for (const auto& waypoint : scenario_.waypoints) {
            if (!seen.insert(waypoint.id).second)
                error(issue::duplicate_waypoint, "waypoint:" + waypoint.id,
                      "waypoint '" + waypoint.id + "' declared more than once");
            if (!finite(waypoint.position))
                error(issue::nonfinite_position, "waypoint:" + waypoint.id,
                      "waypoint position must be finite");
        }
    }

    void check_routes() {
        for (const auto& route : scenario_.routes) {
            const std::string loc = "route:" + route.from + "->" + route.to;
            if (route.from == route.to)
                error(issue::route_self_loop, loc, "route must connect two distinct waypoints");
            for (const auto* end : {&route.from, &route.to})
                if (!scenario_.find_waypoint(*end))
                    error(issue::route_unknown_waypoint, loc,
                          "route references unknown waypoint '" + *end + "'");
            for (const auto& point : route.path)
                if (!finite(point)) {
                    error(issue::nonfinite_position, loc, "route path point must be finite");
                    break;
                }
        }
    }

    void check_target(const NodeTarget& target, std::string location) {
        if (target && !scenario_.find_node(*target))
            error(issue::dangling_next_node, std::move(location),
                  "transition targets unknown node '" + *target + "'");
    }

    void check_nodes() {
        std::unordered_set<std::string> seen;
        for (const auto& node : scenario_.nodes) {
            if (!seen.insert(node.id).second)
                error(issue::duplicate_node, node_loc(node),
                      "node '" + node.id + "' declared more than once");
            if (!scenario_.find_waypoint(node.waypoint))
                error(issue::unknown_waypoint, node_loc(node),
                      "node is placed at unknown waypoint '" + node.waypoint + "'");
            if (node.options.empty())
                error(issue::empty_options, node_loc(node), "node offers no options");

            std::unordered_set<std::string> option_ids;
            for (const auto& option : node.options) {
                if (!option_ids.insert(option.id).second)
                    error(issue::duplicate_option, option_loc(node, option),
                          "option '" + option.id + "' appears more than once in the node");
                if (option.behavior_tag) {
                    if (!scenario_.find_behavior(*option.behavior_tag))
                        error(issue::unknown_behavior_tag, option_loc(node, option),
                              "option references unknown behavior '" + *option.behavior_tag + "'");
                    else if (!option.recommended)
                        warn(issue::tag_on_not_recommended, option_loc(node, option),
                             "behavior tag on a not-recommended option is ignored by scoring");
                }
                check_target(option.next_node, option_loc(node, option));
            }
            if (node.timeout) {
                if (node.timeout->after_ms <= 0)
                    error(issue::nonpositive_timeout, node_loc(node) + "/timeout",
                          "timeout duration must be positive");
                check_target(node.timeout->next_node, node_loc(node) + "/timeout");
            }
        }
    }

    // Reachability from start, plus co-reachability of the terminal marker.
    // A reachable node that cannot reach the end sits on a cycle with no exit
    // (every node has at least one outgoing transition).
    void check_graph() {
        const auto* start = scenario_.find_node(scenario_.start_node);
        if (!start) {
            error(issue::missing_start, "scenario",
                  scenario_.start_node.empty()
                      ? std::string("no start node declared")
                      : "start node '" + scenario_.start_node + "' does not exist");
        }

        std::unordered_map<std::string, std::vector<std::string>> successors;
        std::unordered_map<std::string, std::vector<std::string>> predecessors;
        std::unordered_set<std::string> exits;  // nodes with a direct transition to the end
        for (const auto& node : scenario_.nodes) {
            auto& succ = successors[node.id];
            auto add = [&](const NodeTarget& target) {
                if (!target) {
                    exits.insert(node.id);
                } else if (scenario_.find_node(*target)) {
                    succ.push_back(*target);
                    predecessors[*target].push_back(node.id);
                }
            };
            for (const auto& option : node.options) add(option.next_node);
            if (node.timeout) add(node.timeout->next_node);
        }

        std::unordered_set<std::string> reachable;
        if (start) {
            std::queue<std::string> frontier;
            frontier.push(start->id);
            reachable.insert(start->id);
            while (!frontier.empty()) {
                auto current = frontier.front();
                frontier.pop();
                for (const auto& next : successors[current])
                    if (reachable.insert(next).second) frontier.push(next);
            }
        }

        std::unordered_set<std::string> can_finish(exits.begin(), exits.end());
        {
            std::queue<std::string> frontier;
            for (const auto& id : exits) frontier.push(id);
            while (!frontier.empty()) {
                auto current = frontier.front();
                frontier.pop();
                for (const auto& prev : predecessors[current])
                    if (can_finish.insert(prev).second) frontier.push(prev);
            }
        }

        std::set<std::string> reported;
        for (const auto& node : scenario_.nodes) {
            if (!reported.insert(node.id).second) continue;
            if (start && !reachable.contains(node.id))
                error(issue::unreachable_node, node_loc(node),
                      "node cannot be reached from start node '" + start->id + "'");
            else if (!can_finish.contains(node.id) && !node.options.empty())
                error(issue::no_exit_to_terminal, node_loc(node),
                      "no path from this node reaches the end of the drill");
        }
    }

    const Scenario& scenario_;
    ValidationReport report_;
};

}  // namespace

ValidationReport validate_scenario(const Scenario& scenario) { return Validator(scenario).run(); }

}  // namespace quakedrill
