#include <gtest/gtest.h>

#include <map>
#include <set>

#include "quakedrill/cohort.hpp"
#include "quakedrill/simulate.hpp"

using namespace quakedrill;
using namespace quakedrill::stats;

namespace {

std::vector<CohortRecord> two_group_knowledge() {
    std::vector<CohortRecord> r;
    for (int i = 0; i < 8; ++i) {
        const std::string g = i < 4 ? "staff" : "visitor";
        r.push_back({"p" + std::to_string(i), g, "knowledge_during_indoor", 1.0 + i % 3, 2.0 + i % 3 + (i % 2)});
    }
    return r;
}

std::size_t rows_for(const CohortTable& t, const std::string& measure) {
    return std::count_if(t.rows.begin(), t.rows.end(), [&](const auto& r) { return r.measure == measure; });
}

}  // namespace

TEST(Cohort, TwoGroupsGiveThreeRowsPerMeasure) {
    const auto t = cohort_analysis(two_group_knowledge());
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_EQ(t.rows[0].group, "staff");
    EXPECT_EQ(t.rows[1].group, "visitor");
    EXPECT_EQ(t.rows[2].group, "all");
    EXPECT_EQ(t.rows[2].pre.n, 8u);
    for (const auto& row : t.rows) EXPECT_EQ(row.pre.n, row.post.n);
}

TEST(Cohort, IdenticalPrePostBecomesRowNote) {
    std::vector<CohortRecord> r;
    for (int i = 0; i < 5; ++i) r.push_back({"p" + std::to_string(i), "staff", "knowledge_after_indoor", 2.5, 2.5});
    const auto t = cohort_analysis(r);
    ASSERT_FALSE(t.rows.empty());
    const auto& row = t.rows[0];
    EXPECT_FALSE(row.wilcoxon);
    EXPECT_EQ(row.pre.mean, 2.5);
    ASSERT_FALSE(row.notes.empty());
    bool mentioned = false;
    for (const auto& n : row.notes) mentioned = mentioned || n.find("all differences zero") != std::string::npos;
    EXPECT_TRUE(mentioned);
}

TEST(Cohort, SingleParticipantStillGetsDescriptives) {
    const std::vector<CohortRecord> r = {{"p", "visitor", "knowledge_after_outdoor", 3.0, 3.0}};
    const auto t = cohort_analysis(r);
    ASSERT_EQ(t.rows.size(), 2u);  // visitor + all
    EXPECT_EQ(t.rows[0].pre.n, 1u);
    EXPECT_FALSE(t.rows[0].notes.empty());
}

TEST(Cohort, UnpairedParticipantsNamed) {
    auto r = two_group_knowledge();
    r[2].post.reset();
    r[5].pre.reset();
    try {
        cohort_analysis(r);
        FAIL();
    } catch (const CohortError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("p2"), std::string::npos);
        EXPECT_NE(msg.find("p5"), std::string::npos);
    }
    EXPECT_THROW(cohort_analysis({}), CohortError);
}

TEST(Cohort, RejectsBadGroupAndDuplicates) {
    auto r = two_group_knowledge();
    r[0].group = "guest";
    EXPECT_THROW(cohort_analysis(r), CohortError);
    r = two_group_knowledge();
    r.push_back(r[0]);
    EXPECT_THROW(cohort_analysis(r), CohortError);
}

TEST(Cohort, CsvRoundTripAndErrors) {
    const auto r = two_group_knowledge();
    const auto text = format_cohort_csv(r);
    EXPECT_EQ(text.rfind("participant,group,measure,pre,post\n", 0), 0u);
    EXPECT_EQ(parse_cohort_csv(text), r);
    try {
        parse_cohort_csv("participant,group,measure,pre,post\np1,staff,knowledge_during_indoor,1,2\n"
                         "p2,staff,knowledge_during_indoor,x,2\np3,staff\n");
        FAIL();
    } catch (const CohortError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("3"), std::string::npos);
        EXPECT_NE(msg.find("4"), std::string::npos);
    }
    EXPECT_THROW(parse_cohort_csv(""), CohortError);
    EXPECT_THROW(parse_cohort_csv("name,group\n"), CohortError);
}

TEST(Cohort, RenderedTextUsesReportFormat) {
    const auto t = cohort_analysis(two_group_knowledge());
    const auto text = render_cohort_text(t);
    EXPECT_NE(text.find("M = "), std::string::npos);
    EXPECT_NE(text.find(" SD = "), std::string::npos);
    EXPECT_NE(text.find("Z = -"), std::string::npos);
    EXPECT_NE(text.find(", p = "), std::string::npos);
    EXPECT_NE(text.find("Behavioral responses inside a building during an earthquake"), std::string::npos);
}

TEST(Cohort, OutdoorRowCaptionSaysOutside) {
    EXPECT_NE(measure_caption(measures::knowledge_after_outdoor).find("outside"), std::string::npos);
}

// ---- simulated cohorts ----------------------------------------------------------

TEST(Simulate, StaffVisitorSplitAndDeterminism) {
    CohortSpec spec;
    spec.seed = 5;
    spec.staff = default_staff_count(87);
    EXPECT_EQ(spec.staff, 25);
    const auto a = simulate_cohort(spec);
    EXPECT_EQ(format_cohort_csv(a), format_cohort_csv(simulate_cohort(spec)));
    std::map<std::string, std::string> groups;
    for (const auto& r : a) groups[r.participant] = r.group;
    int staff = 0, visitors = 0;
    for (const auto& [_, g] : groups) (g == "staff" ? staff : visitors)++;
    EXPECT_EQ(staff, 25);
    EXPECT_EQ(visitors, 62);
}

TEST(Simulate, ValuesStayOnTheirScales) {
    CohortSpec spec;
    spec.seed = 9;
    const std::set<double> rubric = {1, 2, 2.5, 3, 3.5, 4};
    for (const auto& r : simulate_cohort(spec)) {
        if (r.measure.rfind("knowledge_", 0) == 0) {
            EXPECT_TRUE(rubric.count(*r.pre) && rubric.count(*r.post)) << r.measure;
        } else {
            EXPECT_GE(*r.post, -3);
            EXPECT_LE(*r.post, 3);
            EXPECT_EQ(*r.post, std::round(*r.post));
            if (measures::is_post_only(r.measure)) EXPECT_FALSE(r.pre);
        }
    }
}

TEST(Simulate, ProfileParsing) {
    EXPECT_EQ(parse_profile("none").knowledge_gain, 0.0);
    EXPECT_EQ(parse_profile("default").knowledge_gain, ImprovementProfile{}.knowledge_gain);
    const auto p = parse_profile("knowledge_gain=0.3,baseline=0.2");
    EXPECT_DOUBLE_EQ(p.knowledge_gain, 0.3);
    EXPECT_DOUBLE_EQ(p.baseline, 0.2);
    EXPECT_THROW(parse_profile("knowledge_gain=2"), std::invalid_argument);
    EXPECT_THROW(parse_profile("warp=1"), std::invalid_argument);
    EXPECT_THROW(parse_profile("baseline"), std::invalid_argument);
    CohortSpec spec;
    spec.participants = 0;
    EXPECT_THROW(simulate_cohort(spec), std::invalid_argument);
}

TEST(Simulate, AnalysisFindsTheImprovement) {
    CohortSpec spec;
    spec.seed = 17;
    const auto t = cohort_analysis(simulate_cohort(spec));
    EXPECT_EQ(rows_for(t, "self_efficacy"), 3u);
    for (const auto& row : t.rows) {
        ASSERT_TRUE(row.wilcoxon) << row.measure;
        EXPECT_GT(row.post.mean, row.pre.mean) << row.group << " " << row.measure;
        EXPECT_LT(row.wilcoxon->p, 0.05) << row.group << " " << row.measure;
    }
    EXPECT_EQ(t.ratings.size(), 6u);
}

TEST(Simulate, NoImprovementProfileRarelySignificant) {
    int significant = 0, rows = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CohortSpec spec;
        spec.seed = seed;
        spec.profile = parse_profile("none");
        for (const auto& row : cohort_analysis(simulate_cohort(spec)).rows) {
            ++rows;
            significant += row.wilcoxon && row.wilcoxon->p < 0.05;
        }
    }
    EXPECT_LT(significant, rows / 4);
}
