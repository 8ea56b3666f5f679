#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quakedrill/stats.hpp"

namespace quakedrill::stats {

/// One participant's pre/post values for one measure. Post-only ratings
/// (training_efficacy, engagement) leave `pre` empty.
struct CohortRecord {
    std::string participant;
    std::string group;  // staff | visitor
    std::string measure;
    std::optional<double> pre;
    std::optional<double> post;

    friend bool operator==(const CohortRecord&, const CohortRecord&) = default;
};

namespace measures {
inline constexpr std::string_view knowledge_during_indoor = "knowledge_during_indoor";
inline constexpr std::string_view knowledge_after_indoor = "knowledge_after_indoor";
inline constexpr std::string_view knowledge_after_outdoor = "knowledge_after_outdoor";
inline constexpr std::string_view self_efficacy = "self_efficacy";
inline constexpr std::string_view training_efficacy = "training_efficacy";
inline constexpr std::string_view engagement = "engagement";
/// Item measures se1..se6 of the self-efficacy battery.
std::string self_efficacy_item(int statement);
bool is_self_efficacy_item(std::string_view measure);
bool is_post_only(std::string_view measure);
}  // namespace measures

/// Human-readable row caption for a measure.
std::string measure_caption(std::string_view measure);

struct CohortRow {
    std::string group;  // staff | visitor | all
    std::string measure;
    Descriptives pre;
    Descriptives post;
    std::optional<ShapiroWilkResult> pre_normality;
    std::optional<ShapiroWilkResult> post_normality;
    std::optional<WilcoxonResult> wilcoxon;
    std::vector<std::string> notes;
};

/// Descriptives of a rating collected only after training.
struct RatingRow {
    std::string group;
    std::string measure;
    Descriptives post;
};

struct CohortTable {
    std::vector<CohortRow> rows;
    std::vector<RatingRow> ratings;
    std::vector<std::string> notes;
};

class CohortError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CohortOptions {
    WilcoxonOptions wilcoxon;
};

/// Per group (and pooled "all"), per measure: pre/post descriptives,
/// Shapiro-Wilk on both sides and a Wilcoxon signed-rank comparison. The
/// six self-efficacy items are reduced to one regression factor score fitted
/// over every pre and post response in the cohort.
CohortTable cohort_analysis(const std::vector<CohortRecord>& records, const CohortOptions& options = {});

/// Header `participant,group,measure,pre,post`. Throws CohortError naming
/// every malformed row.
std::vector<CohortRecord> parse_cohort_csv(std::string_view text);
std::string format_cohort_csv(const std::vector<CohortRecord>& records);

/// "M = 2.44 SD = 1.16"
std::string format_mean_sd(const Descriptives& d);
/// "Z = -2.452, p = 0.014"
std::string format_z_p(const WilcoxonResult& w);
/// Three decimals; anything below 0.0005 renders as 0.000.
std::string format_p(double p);

/// Aligned plain-text comparison tables, one block per measure.
std::string render_cohort_text(const CohortTable& table);

}  // namespace quakedrill::stats
