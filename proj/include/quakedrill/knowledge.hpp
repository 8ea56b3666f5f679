#pragma once

#include <array>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace quakedrill {

/// The three knowledge aspects probed by the five open-ended questions.
enum class KnowledgeAspect { during_indoor, after_indoor, after_outdoor };

std::string_view to_string(KnowledgeAspect aspect);
std::optional<KnowledgeAspect> knowledge_aspect_from_string(std::string_view text);

enum class TestPhase { pre, post };

std::string_view to_string(TestPhase phase);
std::optional<TestPhase> test_phase_from_string(std::string_view text);

namespace knowledge_items {
// during_indoor
inline constexpr std::string_view dch_under_table = "dch_under_table";
inline constexpr std::string_view attention_falling = "attention_falling";
inline constexpr std::string_view generic_cover = "generic_cover";
// after_outdoor
inline constexpr std::string_view open_space_away = "open_space_away";
inline constexpr std::string_view no_return_until_safe = "no_return_until_safe";
inline constexpr std::string_view assembly_point_only = "assembly_point_only";
}  // namespace knowledge_items

/// Codable items for an aspect. after_indoor lists the eleven rubric items
/// (i)-(xi) in order.
std::span<const std::string_view> knowledge_vocabulary(KnowledgeAspect aspect);

using ItemSet = std::set<std::string>;

/// Rubric score in {1, 2, 2.5, 3, 3.5, 4}.
struct KnowledgeScore {
    KnowledgeAspect aspect = KnowledgeAspect::during_indoor;
    double score = 1.0;

    friend bool operator==(const KnowledgeScore&, const KnowledgeScore&) = default;
};

class KnowledgeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

KnowledgeScore score_knowledge(KnowledgeAspect aspect, const ItemSet& items);

/// One coder's checklist for one participant, phase and aspect.
struct KnowledgeResponse {
    std::string participant_id;
    TestPhase phase = TestPhase::pre;
    KnowledgeAspect aspect = KnowledgeAspect::during_indoor;
    int coder_id = 1;  // 1..3
    ItemSet items;
};

/// Throws KnowledgeError when an item is outside the aspect's vocabulary.
void check_items(KnowledgeAspect aspect, const ItemSet& items);

/// Majority-of-three merge: an item survives if at least two coders list it.
ItemSet merge_coders(std::span<const KnowledgeResponse> responses);

}  // namespace quakedrill
