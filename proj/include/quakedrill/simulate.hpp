#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "quakedrill/cohort.hpp"

namespace quakedrill {

/// Generative parameters for a synthetic pre/post cohort.
struct ImprovementProfile {
    double baseline = 0.25;        // mean probability of knowing each rubric item before training
    double knowledge_gain = 0.5;   // fraction of the unknown items learned during training
    double efficacy_shift = 1.2;   // latent self-efficacy gain, in SD units
    double coder_noise = 0.1;      // chance a coder misses an item the participant stated
};

/// "default", "none" (no improvement), or a comma-separated
/// key=value list overriding the defaults, e.g. "knowledge_gain=0.3,baseline=0.2".
/// Throws std::invalid_argument on unknown keys or out-of-range values.
ImprovementProfile parse_profile(std::string_view text);

struct CohortSpec {
    int participants = 87;
    int staff = 25;  // the remainder are visitors
    std::uint64_t seed = 0;
    ImprovementProfile profile;
};

/// Staff count for a cohort of n, keeping the 25/87 split.
int default_staff_count(int participants);

/// Synthetic cohort: three-coder knowledge checklists merged and scored with
/// the rubric, six Likert self-efficacy statements, and post-only training
/// efficacy and engagement ratings. Deterministic in its arguments.
std::vector<stats::CohortRecord> simulate_cohort(const CohortSpec& spec);

}  // namespace quakedrill
