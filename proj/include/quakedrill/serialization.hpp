#pragma once

#include <json.hpp>

#include "quakedrill/assessment.hpp"
#include "quakedrill/cohort.hpp"
#include "quakedrill/knowledge.hpp"
#include "quakedrill/runtime.hpp"
#include "quakedrill/scenario.hpp"

namespace quakedrill {

// Key order is fixed by insertion, so dumps are stable for golden files.
using Json = nlohmann::ordered_json;

Json to_json(const ValidationReport& report);
Json to_json(const SessionEvent& event);
Json to_json(const AssessmentReport& report);
Json to_json(const KnowledgeScore& score);

/// Canonical textual form of a report (2-space indent, trailing newline).
std::string dump_report(const AssessmentReport& report);

namespace stats {
Json to_json(const Descriptives& d);
Json to_json(const ShapiroWilkResult& sw);
Json to_json(const WilcoxonResult& w);
Json to_json(const CohortTable& table);
}  // namespace stats

}  // namespace quakedrill
