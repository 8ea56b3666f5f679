#include "quakedrill/agents.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <random>

namespace quakedrill {

namespace {

constexpr std::size_t kMaxSteps = 100000;

const ActionOption& pick_optimal(const std::vector<ActionOption>& options) {
    auto it = std::find_if(options.begin(), options.end(), [](const auto& o) { return o.recommended; });
    return it != options.end() ? *it : options.front();
}

const ActionOption& pick_worst(const std::vector<ActionOption>& options) {
    auto it = std::find_if(options.begin(), options.end(), [](const auto& o) { return !o.recommended; });
    return it != options.end() ? *it : options.front();
}

SessionState think_then_choose(const Scenario& scenario, SessionState state, const ActionOption& option,
                               long long think_ms) {
    if (auto remaining = timeout_remaining_ms(scenario, state))
        think_ms = std::min(think_ms, std::max(0LL, *remaining - 1));
    state = advance_time(scenario, state, think_ms);
    return choose(scenario, state, option.id).state;
}

SessionState run(const Scenario& scenario, SessionState state, const OptimalAgent&) {
    for (std::size_t step = 0; !state.finished; ++step) {
        if (step == kMaxSteps) throw ScriptError(step, "optimal agent did not finish");
        const auto options = available_actions(scenario, state);
        state = think_then_choose(scenario, std::move(state), pick_optimal(options), kAgentThinkMs);
    }
    return state;
}

SessionState run(const Scenario& scenario, SessionState state, const WorstAgent&) {
    for (std::size_t step = 0; !state.finished; ++step) {
        if (step == kMaxSteps) throw ScriptError(step, "worst agent did not finish");
        const auto options = available_actions(scenario, state);
        state = think_then_choose(scenario, std::move(state), pick_worst(options), kAgentThinkMs);
    }
    return state;
}

SessionState run(const Scenario& scenario, SessionState state, const RandomAgent& agent) {
    std::mt19937_64 rng(agent.seed);
    std::uniform_int_distribution<long long> think(500, 6000);
    std::bernoulli_distribution stall(std::clamp(agent.stall, 0.0, 1.0));
    for (std::size_t step = 0; !state.finished; ++step) {
        if (step == kMaxSteps) throw ScriptError(step, "random agent did not finish");
        const auto options = available_actions(scenario, state);
        std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
        const auto remaining = timeout_remaining_ms(scenario, state);
        if (remaining && stall(rng)) {
            state = advance_time(scenario, state, *remaining);
            continue;
        }
        state = think_then_choose(scenario, std::move(state), options[pick(rng)], think(rng));
    }
    return state;
}

SessionState run(const Scenario& scenario, SessionState state, const ScriptAgent& agent) {
    std::size_t step = 0;
    for (const auto& raw : agent.steps) {
        ++step;
        if (state.finished) throw ScriptError(step, "drill already finished");
        std::string_view text = raw;
        if (text.starts_with("wait ")) {
            text.remove_prefix(5);
            long long ms = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), ms);
            if (ec != std::errc() || ptr != text.data() + text.size() || ms < 0)
                throw ScriptError(step, "malformed wait '" + raw + "'");
            state = advance_time(scenario, state, ms);
            continue;
        }
        const auto options = available_actions(scenario, state);
        auto it = std::find_if(options.begin(), options.end(), [&](const auto& o) { return o.id == raw; });
        if (it == options.end())
            throw ScriptError(step, "option '" + raw + "' is not offered at node '" + *state.current_node + "'");
        state = think_then_choose(scenario, std::move(state), *it, kAgentThinkMs);
    }
    if (!state.finished) throw ScriptError(step + 1, "script ended before the drill finished");
    return state;
}

}  // namespace

SessionState run_agent(const Scenario& scenario, const std::string& participant_id,
                       const AgentPolicy& policy) {
    auto state = start_session(scenario, participant_id);
    return std::visit([&](const auto& agent) { return run(scenario, std::move(state), agent); }, policy);
}

ScriptAgent parse_script(std::string_view text) {
    ScriptAgent script;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        auto end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(begin, end - begin);
        begin = end + 1;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
        if (!line.empty()) script.steps.emplace_back(line);
        if (end == text.size()) break;
    }
    return script;
}

}  // namespace quakedrill
