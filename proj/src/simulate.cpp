#include "quakedrill/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "quakedrill/knowledge.hpp"

namespace quakedrill {

ImprovementProfile parse_profile(std::string_view text) {
    ImprovementProfile profile;
    if (text.empty() || text == "default") return profile;
    if (text == "none") {
        profile.knowledge_gain = 0.0;
        profile.efficacy_shift = 0.0;
        return profile;
    }
    std::size_t begin = 0;
    while (begin <= text.size()) {
        auto end = text.find(',', begin);
        if (end == std::string_view::npos) end = text.size();
        const auto item = text.substr(begin, end - begin);
        begin = end + 1;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("profile entry '" + std::string(item) + "' is not key=value");
        const auto key = item.substr(0, eq);
        const auto raw = item.substr(eq + 1);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
        if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size() || !std::isfinite(value))
            throw std::invalid_argument("profile value for '" + std::string(key) + "' is not a number");
        auto in_range = [&](double lo, double hi) {
            if (value < lo || value > hi)
                throw std::invalid_argument("profile value " + std::string(key) + " must lie in [" +
                                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return value;
        };
        if (key == "baseline") profile.baseline = in_range(0.0, 1.0);
        else if (key == "knowledge_gain") profile.knowledge_gain = in_range(0.0, 1.0);
        else if (key == "efficacy_shift") profile.efficacy_shift = in_range(-5.0, 5.0);
        else if (key == "coder_noise") profile.coder_noise = in_range(0.0, 0.5);
        else throw std::invalid_argument("unknown profile key '" + std::string(key) + "'");
        if (end == text.size()) break;
    }
    return profile;
}

int default_staff_count(int participants) {
    return static_cast<int>(std::lround(participants * 25.0 / 87.0));
}

namespace {

struct Rng {
    std::mt19937_64 engine;

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine); }
    double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine); }
    bool chance(double p) { return uniform() < p; }
};

int likert(double value) { return static_cast<int>(std::clamp(std::lround(value), -3L, 3L)); }

std::string participant_id(char prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%03d", prefix, index);
    return buf;
}

// Items the participant states, as seen by three independent coders and merged.
double coded_score(Rng& rng, KnowledgeAspect aspect, double know_prob, double noise) {
    const auto vocab = knowledge_vocabulary(aspect);
    ItemSet stated;
    for (const auto item : vocab) {
        double p = know_prob;
        // the vaguer answers are stated more often by people without the precise knowledge
        if (item == knowledge_items::generic_cover || item == knowledge_items::assembly_point_only) p = 0.5;
        if (rng.chance(p)) stated.emplace(item);
    }
    if (aspect == KnowledgeAspect::after_outdoor && stated.contains(std::string(knowledge_items::open_space_away)))
        stated.erase(std::string(knowledge_items::assembly_point_only));

    std::vector<KnowledgeResponse> coders;
    for (int coder = 1; coder <= 3; ++coder) {
        KnowledgeResponse r;
        r.aspect = aspect;
        r.coder_id = coder;
        for (const auto& item : stated)
            if (!rng.chance(noise)) r.items.insert(item);
        coders.push_back(std::move(r));
    }
    return score_knowledge(aspect, merge_coders(coders)).score;
}

}  // namespace

std::vector<stats::CohortRecord> simulate_cohort(const CohortSpec& spec) {
    if (spec.participants < 1) throw std::invalid_argument("cohort needs at least one participant");
    if (spec.staff < 0 || spec.staff > spec.participants)
        throw std::invalid_argument("staff count must lie between 0 and the cohort size");
    const auto& profile = spec.profile;
    Rng rng{std::mt19937_64(spec.seed)};

    std::vector<stats::CohortRecord> records;
    const struct {
        KnowledgeAspect aspect;
        std::string_view measure;
    } aspects[] = {
        {KnowledgeAspect::during_indoor, stats::measures::knowledge_during_indoor},
        {KnowledgeAspect::after_indoor, stats::measures::knowledge_after_indoor},
        {KnowledgeAspect::after_outdoor, stats::measures::knowledge_after_outdoor},
    };
    constexpr double kLoading = 0.8;

    for (int i = 0; i < spec.participants; ++i) {
        const bool staff = i < spec.staff;
        const std::string group = staff ? "staff" : "visitor";
        const std::string id = staff ? participant_id('S', i + 1) : participant_id('V', i - spec.staff + 1);

        for (const auto& [aspect, measure] : aspects) {
            const double pre_p = std::clamp(profile.baseline + rng.normal(0.0, 0.1), 0.0, 1.0);
            const double post_p = std::clamp(pre_p + profile.knowledge_gain * (1.0 - pre_p), 0.0, 1.0);
            const double pre = coded_score(rng, aspect, pre_p, profile.coder_noise);
            const double post = coded_score(rng, aspect, post_p, profile.coder_noise);
            records.push_back({id, group, std::string(measure), pre, post});
        }

        const double latent_pre = rng.normal(0.0, 1.0);
        const double latent_post = latent_pre + profile.efficacy_shift + rng.normal(0.0, 0.5);
        for (int statement = 1; statement <= 6; ++statement) {
            const double noise_sd = std::sqrt(1.0 - kLoading * kLoading);
            const int pre = likert(1.2 * (kLoading * latent_pre + rng.normal(0.0, noise_sd)));
            const int post = likert(1.2 * (kLoading * latent_post + rng.normal(0.0, noise_sd)));
            records.push_back({id, group, stats::measures::self_efficacy_item(statement), double(pre), double(post)});
        }

        records.push_back({id, group, std::string(stats::measures::training_efficacy), std::nullopt,
                           double(likert(rng.normal(2.5, 0.7)))});
        records.push_back({id, group, std::string(stats::measures::engagement), std::nullopt,
                           double(likert(rng.normal(2.0, 1.0)))});
    }
    return records;
}

}  // namespace quakedrill
