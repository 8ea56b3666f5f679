#include "quakedrill/knowledge.hpp"

#include <algorithm>
#include <map>

namespace quakedrill {

namespace {

constexpr std::array<std::string_view, 3> kDuringIndoor = {
    knowledge_items::dch_under_table, knowledge_items::attention_falling, knowledge_items::generic_cover};

constexpr std::array<std::string_view, 11> kAfterIndoor = {
    "stay_under_cover_aftershocks",  // (i)
    "collect_personal_items",        // (ii)
    "first_aid_kit",                 // (iii)
    "help_people_around",            // (iv)
    "search_alternative_exits",      // (v)
    "attention_fire",                // (vi)
    "fire_extinguisher_or_call",     // (vii)
    "attention_electric_leakage",    // (viii)
    "unplug_equipment",              // (ix)
    "listen_radio",                  // (x)
    "use_stairs",                    // (xi)
};

constexpr std::array<std::string_view, 3> kAfterOutdoor = {
    knowledge_items::open_space_away, knowledge_items::no_return_until_safe,
    knowledge_items::assembly_point_only};

}  // namespace

std::string_view to_string(KnowledgeAspect aspect) {
    switch (aspect) {
        case KnowledgeAspect::during_indoor: return "during_indoor";
        case KnowledgeAspect::after_indoor: return "after_indoor";
        case KnowledgeAspect::after_outdoor: return "after_outdoor";
    }
    return "during_indoor";
}

std::optional<KnowledgeAspect> knowledge_aspect_from_string(std::string_view text) {
    if (text == "during_indoor") return KnowledgeAspect::during_indoor;
    if (text == "after_indoor") return KnowledgeAspect::after_indoor;
    if (text == "after_outdoor") return KnowledgeAspect::after_outdoor;
    return std::nullopt;
}

std::string_view to_string(TestPhase phase) { return phase == TestPhase::pre ? "pre" : "post"; }

std::optional<TestPhase> test_phase_from_string(std::string_view text) {
    if (text == "pre") return TestPhase::pre;
    if (text == "post") return TestPhase::post;
    return std::nullopt;
}

std::span<const std::string_view> knowledge_vocabulary(KnowledgeAspect aspect) {
    switch (aspect) {
        case KnowledgeAspect::during_indoor: return kDuringIndoor;
        case KnowledgeAspect::after_indoor: return kAfterIndoor;
        case KnowledgeAspect::after_outdoor: return kAfterOutdoor;
    }
    return kDuringIndoor;
}

void check_items(KnowledgeAspect aspect, const ItemSet& items) {
    const auto vocab = knowledge_vocabulary(aspect);
    for (const auto& item : items)
        if (std::find(vocab.begin(), vocab.end(), item) == vocab.end())
            throw KnowledgeError("item '" + item + "' is not in the " + std::string(to_string(aspect)) +
                                 " vocabulary");
}

KnowledgeScore score_knowledge(KnowledgeAspect aspect, const ItemSet& items) {
    check_items(aspect, items);
    auto has = [&](std::string_view item) { return items.contains(std::string(item)); };
    double score = 1.0;
    switch (aspect) {
        case KnowledgeAspect::during_indoor: {
            using namespace knowledge_items;
            if (has(dch_under_table) && has(attention_falling))
                score = 4.0;
            else if (has(dch_under_table))
                score = 3.0;
            else if (has(generic_cover) || has(attention_falling))
                score = 2.0;  // hazard awareness alone counts as weak knowledge
            break;
        }
        case KnowledgeAspect::after_indoor: {
            const auto known = items.size();
            if (known >= 9) score = 4.0;
            else if (known >= 7) score = 3.5;
            else if (known >= 5) score = 3.0;
            else if (known >= 3) score = 2.5;
            else if (known >= 1) score = 2.0;
            break;
        }
        case KnowledgeAspect::after_outdoor: {
            using namespace knowledge_items;
            if (has(open_space_away) && has(no_return_until_safe))
                score = 4.0;
            else if (has(open_space_away))
                score = 3.0;
            else if (has(assembly_point_only) || has(no_return_until_safe))
                score = 2.0;
            break;
        }
    }
    return {aspect, score};
}

ItemSet merge_coders(std::span<const KnowledgeResponse> responses) {
    if (responses.size() != 3)
        throw KnowledgeError("merge needs exactly 3 coder responses, got " + std::to_string(responses.size()));
    const auto& first = responses.front();
    std::set<int> coders;
    for (const auto& r : responses) {
        if (r.participant_id != first.participant_id || r.phase != first.phase || r.aspect != first.aspect)
            throw KnowledgeError("coder responses disagree on participant, phase or aspect");
        coders.insert(r.coder_id);
    }
    if (coders != std::set<int>{1, 2, 3}) throw KnowledgeError("coder ids must be exactly 1, 2 and 3");

    std::map<std::string, int> votes;
    for (const auto& r : responses) {
        check_items(r.aspect, r.items);
        for (const auto& item : r.items) ++votes[item];
    }
    ItemSet merged;
    for (const auto& [item, count] : votes)
        if (count >= 2) merged.insert(item);
    return merged;
}

}  // namespace quakedrill
