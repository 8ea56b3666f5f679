#include "quakedrill/dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <vector>

namespace quakedrill {

ParseError::ParseError(int line, int column, std::string expected, std::string found)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": expected " + expected + ", found " + found),
      line_(line),
      column_(column),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

enum class TokenKind { word, string, punct, end };

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;
    int line = 1;
    int column = 1;
};

std::string describe(const Token& token) {
    switch (token.kind) {
        case TokenKind::end: return "end of input";
        case TokenKind::string: return "string \"" + token.text + "\"";
        default: return "'" + token.text + "'";
    }
}

bool is_word_char(char c) {
    switch (c) {
        case ' ': case '\t': case '\r': case '\n':
        case '(': case ')': case '{': case '}': case ',': case '"': case '#':
            return false;
        default:
            return true;
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source) {}

    std::vector<Token> tokenize() {
        std::vector<Token> tokens;
        for (;;) {
            skip_blank();
            Token token;
            token.line = line_;
            token.column = column_;
            if (pos_ >= src_.size()) {
                token.kind = TokenKind::end;
                if (!tokens.empty()) {
                    token.line = last_line_;
                    token.column = last_column_;
                }
                tokens.push_back(std::move(token));
                return tokens;
            }
            const char c = src_[pos_];
            if (c == '"') {
                token.kind = TokenKind::string;
                token.text = read_string(token);
            } else if (c == '(' || c == ')' || c == '{' || c == '}' || c == ',') {
                token.kind = TokenKind::punct;
                token.text = std::string(1, c);
                advance();
            } else if (c == '-' && peek(1) == '>') {
                token.kind = TokenKind::punct;
                token.text = "->";
                advance();
                advance();
            } else {
                token.kind = TokenKind::word;
                while (pos_ < src_.size() && is_word_char(src_[pos_]) &&
                       !(src_[pos_] == '-' && peek(1) == '>'))
                    token.text += advance();
            }
            last_line_ = line_;
            last_column_ = column_;
            tokens.push_back(std::move(token));
        }
    }

private:
    char peek(std::size_t ahead) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    char advance() {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
            // continuation bytes of a UTF-8 sequence share the lead byte's column
            ++column_;
        }
        return c;
    }

    void skip_blank() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    std::string read_string(const Token& open) {
        advance();  // opening quote
        std::string out;
        for (;;) {
            if (pos_ >= src_.size() || src_[pos_] == '\n')
                throw ParseError(open.line, open.column, "closing '\"'", "unterminated string");
            const char c = advance();
            if (c == '"') return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            const int esc_line = line_;
            const int esc_column = column_;
            if (pos_ >= src_.size())
                throw ParseError(open.line, open.column, "closing '\"'", "unterminated string");
            const char e = advance();
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default:
                    throw ParseError(esc_line, esc_column - 1, "escape sequence", std::string("\\") + e);
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    int last_line_ = 1;
    int last_column_ = 1;
};

bool is_identifier(std::string_view text) {
    if (text.empty()) return false;
    const auto head = static_cast<unsigned char>(text.front());
    if (!(std::isalpha(head) || head == '_')) return false;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || u == '_' || u == '.')) return false;
    }
    return true;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    Scenario parse() {
        expect_word("scenario");
        Scenario scenario;
        if (current().kind == TokenKind::word) scenario.id = expect_id("scenario id");
        scenario.title = expect_string("scenario title");
        if (scenario.id.empty()) scenario.id = slug(scenario.title);
        expect_punct("{");
        while (!check_punct("}")) parse_item(scenario);
        expect_punct("}");
        if (current().kind != TokenKind::end) fail("end of input");
        return scenario;
    }

private:
    const Token& current() const { return tokens_[index_]; }

    Token take() {
        Token token = tokens_[index_];
        if (index_ + 1 < tokens_.size()) ++index_;
        return token;
    }

    [[noreturn]] void fail(const std::string& expected) const { fail_at(current(), expected); }

    [[noreturn]] static void fail_at(const Token& token, const std::string& expected) {
        throw ParseError(token.line, token.column, expected, describe(token));
    }

    bool check_punct(std::string_view text) const {
        return current().kind == TokenKind::punct && current().text == text;
    }
    bool check_word(std::string_view text) const {
        return current().kind == TokenKind::word && current().text == text;
    }

    void expect_punct(std::string_view text) {
        if (!check_punct(text)) fail("'" + std::string(text) + "'");
        take();
    }
    void expect_word(std::string_view text) {
        if (!check_word(text)) fail("'" + std::string(text) + "'");
        take();
    }

    std::string expect_string(const std::string& what) {
        if (current().kind != TokenKind::string) fail(what + " (quoted string)");
        return take().text;
    }

    std::string expect_id(const std::string& what) {
        if (current().kind != TokenKind::word || !is_identifier(current().text)) fail(what);
        return take().text;
    }

    double expect_number() {
        const Token& token = current();
        double value = 0.0;
        if (token.kind == TokenKind::word) {
            const char* first = token.text.data();
            const char* last = first + token.text.size();
            if (*first == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec == std::errc() && ptr == last && std::isfinite(value)) {
                take();
                return value;
            }
        }
        fail("coordinate (finite number)");
    }

    long long expect_duration() {
        const Token& token = current();
        if (token.kind == TokenKind::word) {
            std::string_view text = token.text;
            long long scale = 0;
            if (text.ends_with("ms")) {
                scale = 1;
                text.remove_suffix(2);
            } else if (text.ends_with("s")) {
                scale = 1000;
                text.remove_suffix(1);
            }
            long long amount = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), amount);
            if (scale != 0 && !text.empty() && ec == std::errc() && ptr == text.data() + text.size() &&
                amount >= 0 && amount <= (1LL << 40)) {
                take();
                return amount * scale;
            }
        }
        fail("duration such as 10s or 1500ms");
    }

    NodeTarget expect_target() {
        if (check_word("end")) {
            take();
            return std::nullopt;
        }
        if (check_word("goto")) {
            take();
            return expect_id("target node id");
        }
        fail("'goto' or 'end'");
    }

    Vec3 expect_point() {
        expect_punct("(");
        Vec3 p;
        p.x = expect_number();
        expect_punct(",");
        p.y = expect_number();
        expect_punct(",");
        p.z = expect_number();
        expect_punct(")");
        return p;
    }

    void claim(std::unordered_set<std::string>& seen, const Token& at, const std::string& id,
               const std::string& what) {
        if (!seen.insert(id).second)
            throw ParseError(at.line, at.column, "unique " + what, "duplicate '" + id + "'");
    }

    void parse_item(Scenario& scenario) {
        const Token keyword = current();
        if (keyword.kind != TokenKind::word)
            fail("declaration keyword (behavior, waypoint, route, start, node)");
        if (keyword.text == "behavior") {
            take();
            Behavior behavior;
            const Token at = current();
            behavior.tag = expect_id("behavior tag");
            claim(behavior_ids_, at, behavior.tag, "behavior tag");
            const Token phase_token = current();
            if (phase_token.kind != TokenKind::word) fail("phase");
            auto phase = phase_from_string(phase_token.text);
            if (!phase) fail("phase (indoor_earthquake, pre_evacuation_indoor, outdoor_evacuation)");
            take();
            behavior.phase = *phase;
            behavior.description = expect_string("behavior description");
            scenario.behaviors.push_back(std::move(behavior));
        } else if (keyword.text == "waypoint") {
            take();
            Waypoint waypoint;
            const Token at = current();
            waypoint.id = expect_id("waypoint id");
            claim(waypoint_ids_, at, waypoint.id, "waypoint id");
            expect_word("at");
            waypoint.position = expect_point();
            if (check_word("label")) {
                take();
                waypoint.label = expect_string("waypoint label");
            }
            scenario.waypoints.push_back(std::move(waypoint));
        } else if (keyword.text == "route") {
            take();
            Route route;
            route.from = expect_id("route origin waypoint id");
            expect_punct("->");
            route.to = expect_id("route destination waypoint id");
            if (check_word("via")) {
                take();
                do {
                    route.path.push_back(expect_point());
                } while (check_punct("("));
            }
            scenario.routes.push_back(std::move(route));
        } else if (keyword.text == "start") {
            take();
            if (!scenario.start_node.empty())
                throw ParseError(keyword.line, keyword.column, "a single start declaration",
                                 "second 'start'");
            scenario.start_node = expect_id("start node id");
        } else if (keyword.text == "node") {
            take();
            scenario.nodes.push_back(parse_node());
        } else {
            fail("declaration keyword (behavior, waypoint, route, start, node)");
        }
    }

    DecisionNode parse_node() {
        DecisionNode node;
        const Token at = current();
        node.id = expect_id("node id");
        claim(node_ids_, at, node.id, "node id");
        expect_word("at");
        node.waypoint = expect_id("waypoint id");
        expect_punct("{");
        expect_word("prompt");
        node.prompt = expect_string("prompt text");
        if (check_word("timeout")) {
            take();
            TimeoutRule rule;
            rule.after_ms = expect_duration();
            expect_punct("->");
            rule.outcome_event = expect_id("event kind");
            rule.outcome_text = expect_string("timeout outcome text");
            rule.next_node = expect_target();
            node.timeout = std::move(rule);
        }
        std::unordered_set<std::string> option_ids;
        do {
            node.options.push_back(parse_option(option_ids));
        } while (check_word("option"));
        expect_punct("}");
        return node;
    }

    ActionOption parse_option(std::unordered_set<std::string>& option_ids) {
        expect_word("option");
        ActionOption option;
        const Token at = current();
        option.id = expect_id("option id");
        claim(option_ids, at, option.id, "option id within the node");
        option.label = expect_string("option label");
        if (check_word("recommended")) {
            take();
            option.recommended = true;
            if (check_word("behavior")) {
                take();
                option.behavior_tag = expect_id("behavior tag");
            }
        } else if (check_word("not_recommended")) {
            take();
        } else {
            fail("'recommended' or 'not_recommended'");
        }
        expect_word("rationale");
        option.rationale = expect_string("rationale text");
        option.next_node = expect_target();
        return option;
    }

    static std::string slug(std::string_view title) {
        std::string out;
        for (char c : title) {
            const auto u = static_cast<unsigned char>(c);
            if (std::isalnum(u) && u < 0x80)
                out += static_cast<char>(std::tolower(u));
            else if (!out.empty() && out.back() != '_')
                out += '_';
        }
        while (!out.empty() && out.back() == '_') out.pop_back();
        if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(0, "s_");
        return out;
    }

    std::vector<Token> tokens_;
    std::size_t index_ = 0;
    std::unordered_set<std::string> behavior_ids_;
    std::unordered_set<std::string> waypoint_ids_;
    std::unordered_set<std::string> node_ids_;
};

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string point(const Vec3& p) {
    return "(" + number(p.x) + ", " + number(p.y) + ", " + number(p.z) + ")";
}

std::string duration(long long ms) {
    if (ms != 0 && ms % 1000 == 0) return std::to_string(ms / 1000) + "s";
    return std::to_string(ms) + "ms";
}

std::string target(const NodeTarget& next) { return next ? "goto " + *next : std::string("end"); }

}  // namespace

Scenario parse_scenario(std::string_view source) {
    return Parser(Lexer(source).tokenize()).parse();
}

std::string render_scenario(const Scenario& scenario) {
    std::ostringstream out;
    out << "scenario " << scenario.id << ' ' << quote(scenario.title) << " {\n";
    for (const auto& b : scenario.behaviors)
        out << "  behavior " << b.tag << ' ' << to_string(b.phase) << ' ' << quote(b.description) << '\n';
    if (!scenario.behaviors.empty()) out << '\n';
    for (const auto& w : scenario.waypoints) {
        out << "  waypoint " << w.id << " at " << point(w.position);
        if (!w.label.empty()) out << " label " << quote(w.label);
        out << '\n';
    }
    for (const auto& r : scenario.routes) {
        out << "  route " << r.from << " -> " << r.to;
        if (!r.path.empty()) {
            out << " via";
            for (const auto& p : r.path) out << ' ' << point(p);
        }
        out << '\n';
    }
    if (!scenario.start_node.empty()) out << "\n  start " << scenario.start_node << '\n';
    for (const auto& node : scenario.nodes) {
        out << "\n  node " << node.id << " at " << node.waypoint << " {\n";
        out << "    prompt " << quote(node.prompt) << '\n';
        if (node.timeout) {
            const auto& t = *node.timeout;
            out << "    timeout " << duration(t.after_ms) << " -> " << t.outcome_event << ' '
                << quote(t.outcome_text) << ' ' << target(t.next_node) << '\n';
        }
        for (const auto& o : node.options) {
            out << "    option " << o.id << ' ' << quote(o.label) << ' ';
            if (o.recommended) {
                out << "recommended";
                if (o.behavior_tag) out << " behavior " << *o.behavior_tag;
            } else {
                out << "not_recommended";
            }
            out << "\n      rationale " << quote(o.rationale) << ' ' << target(o.next_node) << '\n';
        }
        out << "  }\n";
    }
    out << "}\n";
    return out.str();
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

}  // namespace quakedrill
