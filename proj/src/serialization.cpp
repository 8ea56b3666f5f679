#include "quakedrill/serialization.hpp"

#include <cmath>

namespace quakedrill {

namespace {

Json issues(const std::vector<ValidationIssue>& list) {
    Json out = Json::array();
    for (const auto& i : list) out.push_back({{"code", i.code}, {"location", i.location}, {"message", i.message}});
    return out;
}

Json optional_string(const std::optional<std::string>& value) { return value ? Json(*value) : Json(nullptr); }

Json number_or_null(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

}  // namespace

Json to_json(const ValidationReport& report) {
    Json coverage = Json::object();
    for (const auto& [tag, nodes] : report.coverage) coverage[tag] = nodes;
    return {{"ok", report.ok()},
            {"errors", issues(report.errors)},
            {"warnings", issues(report.warnings)},
            {"coverage", coverage}};
}

Json to_json(const SessionEvent& event) {
    return {{"at_ms", event.at_ms},
            {"kind", to_string(event.kind)},
            {"node_id", optional_string(event.node_id)},
            {"option_id", optional_string(event.option_id)},
            {"color", event.feedback ? Json(to_string(*event.feedback)) : Json(nullptr)},
            {"detail", event.detail}};
}

Json to_json(const AssessmentReport& report) {
    Json outcomes = Json::array();
    for (const auto& o : report.outcomes)
        outcomes.push_back({{"behavior_tag", o.behavior_tag},
                            {"status", to_string(o.status)},
                            {"node_id", optional_string(o.node_id)},
                            {"rationale", o.rationale}});
    Json playback = Json::array();
    for (const auto& p : report.playback)
        playback.push_back({{"node_id", p.node_id},
                            {"option_id", p.option_id},
                            {"label", p.label},
                            {"recommended", p.recommended},
                            {"rationale", p.rationale}});
    const auto& s = report.score_summary;
    return {{"session_id", report.session_id},
            {"outcomes", outcomes},
            {"playback", playback},
            {"score_summary",
             {{"performed", s.performed},
              {"declined", s.declined},
              {"not_encountered", s.not_encountered},
              {"timed_out", s.timed_out}}}};
}

Json to_json(const KnowledgeScore& score) {
    return {{"aspect", to_string(score.aspect)}, {"score", score.score}};
}

std::string dump_report(const AssessmentReport& report) { return to_json(report).dump(2) + "\n"; }

namespace stats {

Json to_json(const Descriptives& d) {
    return {{"n", d.n},
            {"mean", number_or_null(d.mean)},
            {"sd", number_or_null(d.sd)},
            {"min", d.min},
            {"q1", d.q1},
            {"median", d.median},
            {"q3", d.q3},
            {"max", d.max}};
}

Json to_json(const ShapiroWilkResult& sw) { return {{"w", sw.w}, {"p", sw.p}}; }

Json to_json(const WilcoxonResult& w) {
    return {{"n_effective", w.n_effective},
            {"w_plus", w.w_plus},
            {"w_minus", w.w_minus},
            {"z", w.z},
            {"p", w.p},
            {"exact", w.exact},
            {"p_normal", w.p_normal},
            {"p_exact", w.p_exact ? Json(*w.p_exact) : Json(nullptr)},
            {"formatted", format_z_p(w)}};
}

Json to_json(const CohortTable& table) {
    Json rows = Json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"group", r.group},
                        {"measure", r.measure},
                        {"caption", measure_caption(r.measure)},
                        {"pre", to_json(r.pre)},
                        {"post", to_json(r.post)},
                        {"pre_normality", r.pre_normality ? to_json(*r.pre_normality) : Json(nullptr)},
                        {"post_normality", r.post_normality ? to_json(*r.post_normality) : Json(nullptr)},
                        {"wilcoxon", r.wilcoxon ? to_json(*r.wilcoxon) : Json(nullptr)},
                        {"notes", r.notes}});
    }
    Json ratings = Json::array();
    for (const auto& r : table.ratings)
        ratings.push_back({{"group", r.group},
                           {"measure", r.measure},
                           {"caption", measure_caption(r.measure)},
                           {"post", to_json(r.post)}});
    return {{"rows", rows}, {"ratings", ratings}, {"notes", table.notes}};
}

}  // namespace stats

}  // namespace quakedrill
