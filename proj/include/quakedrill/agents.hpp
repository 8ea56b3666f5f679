#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "quakedrill/runtime.hpp"

namespace quakedrill {

/// Always a recommended option; ties broken by authored order.
struct OptimalAgent {};

/// A not-recommended option when one exists, else the first option.
struct WorstAgent {};

/// Seeded uniform choice over the current options. With probability
/// `stall` the agent does nothing at a node that has a timeout and lets it fire.
struct RandomAgent {
    std::uint64_t seed = 0;
    double stall = 0.0;
};

/// Explicit steps: an option id to choose, or "wait <ms>" to let time pass.
struct ScriptAgent {
    std::vector<std::string> steps;
};

using AgentPolicy = std::variant<OptimalAgent, WorstAgent, RandomAgent, ScriptAgent>;

class ScriptError : public std::runtime_error {
public:
    ScriptError(std::size_t step, const std::string& message)
        : std::runtime_error("step " + std::to_string(step) + ": " + message), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Deliberation time the deterministic agents spend at each node.
inline constexpr long long kAgentThinkMs = 2000;

/// Plays the scenario to the end under the given policy. Deterministic for
/// every policy (the random agent is a pure function of its seed).
SessionState run_agent(const Scenario& scenario, const std::string& participant_id,
                       const AgentPolicy& policy);

/// Reads a script file: one step per line, blank lines and '#' comments ignored.
ScriptAgent parse_script(std::string_view text);

}  // namespace quakedrill
