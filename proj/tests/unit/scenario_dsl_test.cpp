#include <gtest/gtest.h>

#include <random>
#include <string>

#include "helpers.hpp"
#include "quakedrill/dsl.hpp"
#include "quakedrill/scenario.hpp"

using namespace quakedrill;
using quakedrill::testing::ach;
using quakedrill::testing::minimal_source;

namespace {

bool has_code(const std::vector<ValidationIssue>& issues, std::string_view code) {
    return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.code == code; });
}

ParseError parse_error_of(const std::string& source) {
    try {
        parse_scenario(source);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "expected a parse error";
    return ParseError(0, 0, "", "");
}

int line_count(const std::string& s) { return 1 + static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Validate, MinimalScenarioIsCleanAndCovered) {
    const auto s = parse_scenario(minimal_source());
    const auto report = validate_scenario(s);
    EXPECT_TRUE(report.errors.empty());
    EXPECT_TRUE(report.warnings.empty());
    ASSERT_EQ(report.coverage.size(), 1u);
    EXPECT_EQ(report.coverage.at("dch"), std::vector<std::string>{"cover"});
}

TEST(Validate, DanglingNextNodeReportedOnce) {
    auto s = parse_scenario(minimal_source());
    s.nodes[0].options[0].next_node = "nowhere";
    const auto report = validate_scenario(s);
    // The broken edge also leaves the node without a path to the end.
    int dangling = 0;
    for (const auto& e : report.errors)
        if (e.code == issue::dangling_next_node) {
            ++dangling;
            EXPECT_EQ(e.location, "node:cover/option:table");
        }
    EXPECT_EQ(dangling, 1);
}

TEST(Validate, AchReferenceCoversThirteenBehaviors) {
    const auto report = validate_scenario(ach());
    EXPECT_TRUE(report.ok());
    EXPECT_TRUE(report.warnings.empty());
    ASSERT_EQ(report.coverage.size(), 13u);
    for (const auto& [tag, nodes] : report.coverage) EXPECT_FALSE(nodes.empty()) << tag;
}

TEST(Validate, UncoveredBehaviorIsWarningWithEmptyCoverage) {
    auto s = parse_scenario(minimal_source());
    s.behaviors.push_back({"radio", Phase::pre_evacuation_indoor, "Listen to the radio"});
    const auto report = validate_scenario(s);
    EXPECT_TRUE(report.ok());
    EXPECT_TRUE(has_code(report.warnings, issue::uncovered_behavior));
    EXPECT_TRUE(report.coverage.at("radio").empty());
    EXPECT_EQ(behavior_coverage(s).at("radio"), std::vector<std::string>{});
}

TEST(Validate, IsPureAndIdempotent) {
    auto s = parse_scenario(minimal_source());
    s.nodes[0].options[0].behavior_tag = "ghost";
    s.start_node = "missing";
    EXPECT_EQ(validate_scenario(s), validate_scenario(s));
}

TEST(Validate, ReportsEachStructuralProblem) {
    Scenario s;
    s.id = "broken";
    s.behaviors = {{"dch", Phase::indoor_earthquake, "d"}, {"dch", Phase::indoor_earthquake, "d"}};
    s.waypoints = {{"room", {0, 0, 0}, ""}, {"far", {std::nan(""), 0, 0}, ""}};
    s.routes = {{"room", "room", {}}, {"room", "nowhere", {}}};
    DecisionNode a{"a", "room", "p", {}, std::nullopt};
    a.options.push_back({"x", "x", true, "ghost", "r", "a"});
    a.options.push_back({"x", "x", false, std::nullopt, "r", "a"});
    a.timeout = TimeoutRule{0, "injury", "t", "a"};
    DecisionNode b{"b", "attic", "p", {}, std::nullopt};
    s.nodes = {a, b};
    s.start_node = "a";
    const auto r = validate_scenario(s);
    for (auto code : {issue::duplicate_behavior, issue::nonfinite_position, issue::route_self_loop,
                      issue::route_unknown_waypoint, issue::duplicate_option, issue::unknown_behavior_tag,
                      issue::nonpositive_timeout, issue::unknown_waypoint, issue::empty_options,
                      issue::unreachable_node, issue::no_exit_to_terminal})
        EXPECT_TRUE(has_code(r.errors, code)) << code;
}

TEST(Validate, MissingStartNode) {
    auto s = parse_scenario(minimal_source());
    s.start_node = "lobby";
    EXPECT_TRUE(has_code(validate_scenario(s).errors, issue::missing_start));
}

TEST(Validate, CycleWithEscapeIsAllowed) {
    const auto s = parse_scenario(R"(scenario loop "Loop" {
  behavior dch indoor_earthquake "d"
  waypoint room at (0,0,0)
  start a
  node a at room { prompt "a" option go "go" recommended behavior dch rationale "r" goto b }
  node b at room { prompt "b"
    option back "back" not_recommended rationale "r" goto a
    option out "out" recommended rationale "r" end }
})");
    EXPECT_TRUE(validate_scenario(s).ok());
}

TEST(Validate, CycleWithoutEscapeIsRejected) {
    const auto s = parse_scenario(R"(scenario trap "Trap" {
  behavior dch indoor_earthquake "d"
  waypoint room at (0,0,0)
  start a
  node a at room { prompt "a" option go "go" recommended behavior dch rationale "r" end }
  node b at room { prompt "b" option c "c" not_recommended rationale "r" goto c }
  node c at room { prompt "c" option b "b" not_recommended rationale "r" goto b }
})");
    auto r = validate_scenario(s);
    EXPECT_TRUE(has_code(r.errors, issue::unreachable_node));
    // Make the trap reachable: now it cannot finish.
    auto t = s;
    t.nodes[0].options.push_back({"trap", "trap", false, std::nullopt, "r", "b"});
    r = validate_scenario(t);
    EXPECT_TRUE(has_code(r.errors, issue::no_exit_to_terminal));
}

TEST(Validate, TagOnNotRecommendedIsOnlyAWarning) {
    auto s = parse_scenario(minimal_source());
    s.nodes[0].options.push_back({"shelf", "Beside shelf", false, "dch", "r", std::nullopt});
    const auto r = validate_scenario(s);
    EXPECT_TRUE(r.ok());
    EXPECT_TRUE(has_code(r.warnings, issue::tag_on_not_recommended));
    EXPECT_EQ(r.coverage.at("dch"), std::vector<std::string>{"cover"});
}

// ---- parsing -------------------------------------------------------------

TEST(Parse, MinimalSourceKeepsIds) {
    const auto s = parse_scenario(minimal_source());
    EXPECT_EQ(s.id, "tiny");
    EXPECT_EQ(s.title, "Tiny drill");
    ASSERT_EQ(s.behaviors.size(), 1u);
    EXPECT_EQ(s.behaviors[0].tag, "dch");
    ASSERT_EQ(s.waypoints.size(), 1u);
    EXPECT_EQ(s.waypoints[0].id, "room");
    ASSERT_EQ(s.nodes.size(), 1u);
    EXPECT_EQ(s.nodes[0].id, "cover");
    EXPECT_EQ(s.nodes[0].options[0].id, "table");
    EXPECT_FALSE(s.nodes[0].options[0].next_node.has_value());
}

TEST(Parse, IdIsDerivedFromTitleWhenOmitted) {
    const auto s = parse_scenario(R"(scenario "Hospital Drill: Level 2" {
  behavior dch indoor_earthquake "d" waypoint r at (0,0,0) start n
  node n at r { prompt "p" option o "o" recommended rationale "x" end } })");
    EXPECT_EQ(s.id, "hospital_drill_level_2");
}

TEST(Parse, TimeoutDurations) {
    const auto s = parse_scenario(R"(scenario t "T" {
  behavior dch indoor_earthquake "d" waypoint r at (0,0,0) start n
  node n at r { prompt "p" timeout 10s -> injury "tile" goto m
    option o "o" recommended rationale "x" goto m }
  node m at r { prompt "q" timeout 1500ms -> smoke "cough" end
    option o "o" recommended rationale "x" end } })");
    ASSERT_TRUE(s.nodes[0].timeout);
    EXPECT_EQ(s.nodes[0].timeout->after_ms, 10000);
    EXPECT_EQ(s.nodes[0].timeout->outcome_event, "injury");
    EXPECT_EQ(s.nodes[0].timeout->next_node, NodeTarget("m"));
    EXPECT_EQ(s.nodes[1].timeout->after_ms, 1500);
    EXPECT_FALSE(s.nodes[1].timeout->next_node.has_value());
}

TEST(Parse, DuplicateNodeNamesSecondDeclarationLine) {
    const std::string src =
        "scenario d \"D\" {\n"
        "  behavior dch indoor_earthquake \"d\"\n"
        "  waypoint r at (0,0,0)\n"
        "  start n\n"
        "  node n at r { prompt \"p\" option o \"o\" recommended rationale \"x\" end }\n"
        "  node n at r { prompt \"p\" option o \"o\" recommended rationale \"x\" end }\n"
        "}\n";
    const auto e = parse_error_of(src);
    EXPECT_EQ(e.line(), 6);
    EXPECT_EQ(e.column(), 8);
    EXPECT_EQ(e.found(), "duplicate 'n'");
}

TEST(Parse, ErrorLocations) {
    struct Case {
        std::string source;
        int line;
        int column;
        std::string expected_fragment;
    };
    const std::vector<Case> cases = {
        {"scenario x \"X\" {\n  behaviour dch indoor_earthquake \"d\"\n}", 2, 3, "declaration keyword"},
        {"scenario x \"X\" {\n  waypoint r at (0, zero, 0)\n}", 2, 21, "coordinate"},
        {"scenario x \"X\" {\n  waypoint r at (0, 1e999, 0)\n}", 2, 21, "coordinate"},
        {"scenario x \"X\" {\n  node n at r { prompt \"p\" timeout 10 -> injury \"t\" end\n", 2, 36, "duration"},
        {"scenario x \"X\" {\n  node n at r { prompt \"p\" timeout 10min -> injury \"t\" end\n", 2, 36, "duration"},
        {"scenario x \"X\" {\n  behavior dch indoors \"d\"\n}", 2, 16, "phase"},
        {"scenario x \"X\" {\n  start a\n  start b\n}", 3, 3, "single start"},
        {"scenario x \"X\" {\n  node n at r { prompt \"p\" option o \"o\" maybe", 2, 41, "'recommended' or"},
        {"scenario x \"unterminated\n", 1, 12, "closing"},
        // End of input is reported just past the last token.
        {"scenario x \"X\" {\n", 1, 17, "declaration keyword"},
        {"", 1, 1, "'scenario'"},
    };
    for (const auto& c : cases) {
        const auto e = parse_error_of(c.source);
        EXPECT_EQ(e.line(), c.line) << c.source << "\n" << e.what();
        EXPECT_EQ(e.column(), c.column) << c.source << "\n" << e.what();
        EXPECT_NE(e.expected().find(c.expected_fragment), std::string::npos) << e.what();
        EXPECT_LE(e.line(), line_count(c.source));
    }
}

TEST(Parse, ColumnsCountCodePoints) {
    const auto e = parse_error_of("scenario x \"Zürich ☃\" ?");
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 23);
}

TEST(Parse, CommentsAndEscapes) {
    const auto s = parse_scenario(R"(# leading comment
scenario x "Say \"hi\"\tnow" {  # trailing
  behavior dch indoor_earthquake "back\\slash"
  waypoint r at (-1.5, 2e3, 0) label "line\nbreak"
  start n
  node n at r { prompt "p" option o "o" recommended rationale "He said \"duck\"" end }
})");
    EXPECT_EQ(s.title, "Say \"hi\"\tnow");
    EXPECT_EQ(s.behaviors[0].description, "back\\slash");
    EXPECT_EQ(s.waypoints[0].position, (Vec3{-1.5, 2000.0, 0.0}));
    EXPECT_EQ(s.waypoints[0].label, "line\nbreak");
    EXPECT_EQ(s.nodes[0].options[0].rationale, "He said \"duck\"");
}

TEST(Parse, RouteWithViaPoints) {
    const auto s = parse_scenario(R"(scenario x "X" {
  waypoint a at (0,0,0) waypoint b at (1,0,0)
  route a -> b via (0.5, 0, 0) (0.75, 1, 0)
  route b -> a
})");
    ASSERT_EQ(s.routes.size(), 2u);
    EXPECT_EQ(s.routes[0].path.size(), 2u);
    EXPECT_TRUE(s.routes[1].path.empty());
}

// ---- rendering -----------------------------------------------------------

TEST(Render, MinimalRoundTrip) {
    const auto s = parse_scenario(minimal_source());
    EXPECT_EQ(parse_scenario(render_scenario(s)), s);
}

TEST(Render, AchRoundTripKeepsThirteenBehaviors) {
    const auto text = render_scenario(ach());
    const auto back = parse_scenario(text);
    EXPECT_EQ(back, ach());
    EXPECT_EQ(back.behaviors.size(), 13u);
    EXPECT_EQ(text.find('\r'), std::string::npos);
    EXPECT_EQ(render_scenario(back), text);
}

TEST(Render, RationaleTextPreservedByteForByte) {
    auto s = parse_scenario(minimal_source());
    s.nodes[0].options[0].rationale = "Quote \" backslash \\ tab \t newline \n snowman \xE2\x98\x83 done";
    EXPECT_EQ(parse_scenario(render_scenario(s)).nodes[0].options[0].rationale, s.nodes[0].options[0].rationale);
}

namespace {

class ScenarioGenerator {
public:
    explicit ScenarioGenerator(unsigned seed) : rng_(seed) {}

    Scenario next() {
        Scenario s;
        s.id = ident("sc");
        s.title = text();
        const int n_beh = pick(0, 4), n_wp = pick(1, 4), n_nodes = pick(1, 6);
        for (int i = 0; i < n_beh; ++i)
            s.behaviors.push_back({"b" + std::to_string(i), static_cast<Phase>(pick(0, 2)), text()});
        for (int i = 0; i < n_wp; ++i)
            s.waypoints.push_back({"w" + std::to_string(i), {num(), num(), num()}, coin() ? text() : ""});
        for (int i = 0; i + 1 < n_wp; ++i) {
            Route r{"w" + std::to_string(i), "w" + std::to_string(i + 1), {}};
            for (int k = pick(0, 2); k > 0; --k) r.path.push_back({num(), num(), num()});
            s.routes.push_back(r);
        }
        auto target = [&]() -> NodeTarget {
            if (coin()) return std::nullopt;
            return "n" + std::to_string(pick(0, n_nodes - 1));
        };
        for (int i = 0; i < n_nodes; ++i) {
            DecisionNode node;
            node.id = "n" + std::to_string(i);
            node.waypoint = "w" + std::to_string(pick(0, n_wp - 1));
            node.prompt = text();
            if (coin())
                node.timeout = TimeoutRule{coin() ? 1000LL * pick(1, 30) : pick(1, 99999), ident("ev"), text(), target()};
            for (int k = pick(1, 3); k > 0; --k) {
                ActionOption o;
                o.id = "o" + std::to_string(k);
                o.label = text();
                o.recommended = coin();
                if (o.recommended && n_beh > 0 && coin()) o.behavior_tag = "b" + std::to_string(pick(0, n_beh - 1));
                o.rationale = text();
                o.next_node = target();
                node.options.push_back(o);
            }
            s.nodes.push_back(node);
        }
        s.start_node = "n0";
        return s;
    }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return pick(0, 1) == 1; }
    double num() {
        switch (pick(0, 3)) {
            case 0: return pick(-100, 100);
            case 1: return std::uniform_real_distribution<double>(-1e6, 1e6)(rng_);
            case 2: return std::uniform_real_distribution<double>(-1, 1)(rng_) * 1e-7;
            default: return pick(-9, 9) * 0.25;
        }
    }
    std::string ident(const std::string& prefix) { return prefix + "_" + std::to_string(pick(0, 999)); }
    std::string text() {
        static const std::vector<std::string> pieces = {"Duck", " ", "\"", "\\", "\n", "\t", "é", "☃", "#no comment",
                                                        "goto", "{", "}", "->", "(1, 2)", "end", ""};
        std::string out;
        for (int k = pick(0, 6); k > 0; --k) out += pieces[pick(0, pieces.size() - 1)];
        return out;
    }

    std::mt19937 rng_;
};

}  // namespace

TEST(RenderProperty, ParseRenderIsIdentityOnGeneratedScenarios) {
    ScenarioGenerator gen(1234);
    for (int i = 0; i < 500; ++i) {
        const auto s = gen.next();
        const auto text = render_scenario(s);
        Scenario back;
        ASSERT_NO_THROW(back = parse_scenario(text)) << text;
        ASSERT_EQ(back, s) << text;
    }
}
