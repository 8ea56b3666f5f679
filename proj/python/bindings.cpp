#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quakedrill/agents.hpp"
#include "quakedrill/assessment.hpp"
#include "quakedrill/cohort.hpp"
#include "quakedrill/dsl.hpp"
#include "quakedrill/event_log.hpp"
#include "quakedrill/knowledge.hpp"
#include "quakedrill/serialization.hpp"
#include "quakedrill/simulate.hpp"

namespace py = pybind11;
using namespace quakedrill;

// Structured results cross the boundary as JSON text; the Python package
// decodes them into plain dicts and lists.
namespace {

KnowledgeAspect aspect_arg(const std::string& text) {
    const auto aspect = knowledge_aspect_from_string(text);
    if (!aspect) throw py::value_error("unknown knowledge aspect '" + text + "'");
    return *aspect;
}

AgentPolicy policy_arg(const std::string& agent, std::uint64_t seed, double stall,
                       const std::optional<std::vector<std::string>>& script) {
    if (agent == "optimal") return OptimalAgent{};
    if (agent == "worst") return WorstAgent{};
    if (agent == "random") return RandomAgent{seed, stall};
    if (agent == "script") {
        if (!script) throw py::value_error("the script agent needs a list of steps");
        return ScriptAgent{*script};
    }
    throw py::value_error("unknown agent '" + agent + "'");
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.at(j));
    return out;
}

}  // namespace

PYBIND11_MODULE(_quakedrill, m) {
    m.doc() = "Earthquake drill scenario engine and pre/post statistics";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<SessionError>(m, "SessionError", PyExc_RuntimeError);
    py::register_exception<ScriptError>(m, "ScriptError", PyExc_ValueError);
    py::register_exception<LogFormatError>(m, "LogFormatError", PyExc_ValueError);
    py::register_exception<AssessmentError>(m, "AssessmentError", PyExc_ValueError);
    py::register_exception<KnowledgeError>(m, "KnowledgeError", PyExc_ValueError);
    py::register_exception<stats::StatsError>(m, "StatsError", PyExc_ValueError);
    py::register_exception<stats::CohortError>(m, "CohortError", PyExc_ValueError);

    m.def("validate", [](const std::string& source) { return to_json(validate_scenario(parse_scenario(source))).dump(); },
          py::arg("source"));
    m.def("render", [](const std::string& source) { return render_scenario(parse_scenario(source)); }, py::arg("source"));

    m.def(
        "run_agent",
        [](const std::string& source, const std::string& agent, std::uint64_t seed, double stall,
           const std::optional<std::vector<std::string>>& script, const std::string& participant) {
            const auto scenario = parse_scenario(source);
            const auto state = run_agent(scenario, participant, policy_arg(agent, seed, stall, script));
            return py::make_tuple(format_log(state.log), dump_report(build_report(state.log, scenario)));
        },
        py::arg("source"), py::arg("agent") = "optimal", py::arg("seed") = 0, py::arg("stall") = 0.0,
        py::arg("script") = py::none(), py::arg("participant") = "agent");

    m.def(
        "assess_log",
        [](const std::string& source, const std::string& log_text, const std::string& session_id) {
            return dump_report(build_report(parse_log(log_text), parse_scenario(source), session_id));
        },
        py::arg("source"), py::arg("log"), py::arg("session_id") = "");

    m.def(
        "score_knowledge",
        [](const std::string& aspect, const std::vector<std::string>& items) {
            return score_knowledge(aspect_arg(aspect), ItemSet(items.begin(), items.end())).score;
        },
        py::arg("aspect"), py::arg("items"));

    m.def(
        "merge_coders",
        [](const std::string& aspect, const std::vector<std::vector<std::string>>& coders) {
            std::vector<KnowledgeResponse> responses;
            int coder = 1;
            for (const auto& items : coders) {
                KnowledgeResponse r;
                r.aspect = aspect_arg(aspect);
                r.coder_id = coder++;
                r.items = ItemSet(items.begin(), items.end());
                responses.push_back(std::move(r));
            }
            const auto merged = merge_coders(responses);
            return std::vector<std::string>(merged.begin(), merged.end());
        },
        py::arg("aspect"), py::arg("coders"));

    m.def(
        "wilcoxon",
        [](const std::vector<double>& pre, const std::vector<double>& post, bool continuity_correction) {
            stats::WilcoxonOptions options;
            options.continuity_correction = continuity_correction;
            return stats::to_json(stats::wilcoxon_signed_rank(pre, post, options)).dump();
        },
        py::arg("pre"), py::arg("post"), py::arg("continuity_correction") = true);
    m.def("wilcoxon_exact_p", &stats::wilcoxon_exact_p, py::arg("n"), py::arg("w_plus"));
    m.def("shapiro_wilk", [](const std::vector<double>& x) { return stats::to_json(stats::shapiro_wilk(x)).dump(); },
          py::arg("samples"));
    m.def("descriptives", [](const std::vector<double>& x) { return stats::to_json(stats::descriptives(x)).dump(); },
          py::arg("samples"));

    m.def(
        "factor_scores",
        [](const std::vector<std::vector<double>>& rows) {
            if (rows.empty()) throw stats::StatsError("no responses");
            const auto cols = rows.front().size();
            Eigen::MatrixXd x(rows.size(), cols);
            for (std::size_t j = 0; j < cols; ++j) {
                const auto c = column(rows, j);
                for (std::size_t i = 0; i < rows.size(); ++i) x(i, j) = c[i];
            }
            const auto f = stats::factor_scores(x);
            return py::make_tuple(std::vector<double>(f.scores.begin(), f.scores.end()),
                                  std::vector<double>(f.loadings.begin(), f.loadings.end()));
        },
        py::arg("rows"));

    m.def(
        "simulate_cohort",
        [](int participants, std::optional<int> staff, std::uint64_t seed, const std::string& profile) {
            CohortSpec spec;
            spec.participants = participants;
            spec.staff = staff ? *staff : default_staff_count(participants);
            spec.seed = seed;
            spec.profile = parse_profile(profile);
            return stats::format_cohort_csv(simulate_cohort(spec));
        },
        py::arg("participants") = 87, py::arg("staff") = py::none(), py::arg("seed") = 0,
        py::arg("profile") = "default");

    m.def(
        "analyze",
        [](const std::string& csv, bool as_text) {
            const auto table = stats::cohort_analysis(stats::parse_cohort_csv(csv));
            return as_text ? stats::render_cohort_text(table) : stats::to_json(table).dump();
        },
        py::arg("csv"), py::arg("as_text") = false);
}
