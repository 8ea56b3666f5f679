#include "quakedrill/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace quakedrill::stats {

namespace measures {

std::string self_efficacy_item(int statement) { return "se" + std::to_string(statement); }

bool is_self_efficacy_item(std::string_view measure) {
    return measure.size() == 3 && measure.starts_with("se") && measure[2] >= '1' && measure[2] <= '6';
}

bool is_post_only(std::string_view measure) { return measure == training_efficacy || measure == engagement; }

}  // namespace measures

std::string measure_caption(std::string_view measure) {
    if (measure == measures::knowledge_during_indoor)
        return "Behavioral responses inside a building during an earthquake";
    if (measure == measures::knowledge_after_indoor)
        return "Behavioral responses inside a building after an earthquake";
    if (measure == measures::knowledge_after_outdoor)
        return "Behavioral responses outside a building after an earthquake";
    if (measure == measures::self_efficacy) return "Self-efficacy (factor score)";
    if (measure == measures::training_efficacy) return "Training efficacy";
    if (measure == measures::engagement) return "Engagement";
    return std::string(measure);
}

namespace {

const std::vector<std::string>& group_order() {
    static const std::vector<std::string> order = {"staff", "visitor", "all"};
    return order;
}

int measure_rank(std::string_view m) {
    if (m == measures::knowledge_during_indoor) return 0;
    if (m == measures::knowledge_after_indoor) return 1;
    if (m == measures::knowledge_after_outdoor) return 2;
    if (m == measures::self_efficacy) return 3;
    if (m == measures::training_efficacy) return 10;
    if (m == measures::engagement) return 11;
    return 5;
}

bool measure_less(const std::string& a, const std::string& b) {
    const int ra = measure_rank(a), rb = measure_rank(b);
    return ra != rb ? ra < rb : a < b;
}

std::string join_ids(const std::set<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
    return out;
}

struct Pair {
    std::string participant;
    std::string group;
    double pre;
    double post;
};

CohortRow compare(const std::string& group, const std::string& measure, const std::vector<Pair>& pairs,
                  const CohortOptions& options) {
    CohortRow row;
    row.group = group;
    row.measure = measure;
    std::vector<double> pre, post;
    for (const auto& p : pairs) {
        pre.push_back(p.pre);
        post.push_back(p.post);
    }
    row.pre = descriptives(pre);
    row.post = descriptives(post);
    auto normality = [&](const std::vector<double>& xs, const char* side) -> std::optional<ShapiroWilkResult> {
        try {
            return shapiro_wilk(xs);
        } catch (const StatsError& e) {
            row.notes.push_back(std::string("Shapiro-Wilk (") + side + ") not computed: " + e.what());
            return std::nullopt;
        }
    };
    row.pre_normality = normality(pre, "pre");
    row.post_normality = normality(post, "post");
    try {
        row.wilcoxon = wilcoxon_signed_rank(pre, post, options.wilcoxon);
    } catch (const StatsError& e) {
        row.notes.push_back(std::string("Wilcoxon not computed: ") + e.what());
    }
    return row;
}

}  // namespace

CohortTable cohort_analysis(const std::vector<CohortRecord>& records, const CohortOptions& options) {
    if (records.empty()) throw CohortError("no cohort records");

    std::map<std::string, std::string> group_of;
    std::map<std::pair<std::string, std::string>, const CohortRecord*> by_key;  // (measure, participant)
    std::set<std::string> unpaired;
    for (const auto& r : records) {
        if (r.group != "staff" && r.group != "visitor")
            throw CohortError("participant " + r.participant + " has unknown group '" + r.group + "'");
        auto [it, fresh] = group_of.emplace(r.participant, r.group);
        if (!fresh && it->second != r.group)
            throw CohortError("participant " + r.participant + " appears in both groups");
        if (!by_key.emplace(std::make_pair(r.measure, r.participant), &r).second)
            throw CohortError("participant " + r.participant + " has two rows for measure " + r.measure);
        const bool post_only = measures::is_post_only(r.measure);
        if (!r.post || (post_only ? r.pre.has_value() : !r.pre.has_value())) unpaired.insert(r.participant);
    }
    if (!unpaired.empty()) throw CohortError("unpaired participants: " + join_ids(unpaired));

    CohortTable table;
    std::map<std::string, std::vector<Pair>, decltype(&measure_less)> paired(&measure_less);
    std::map<std::string, std::vector<Pair>, decltype(&measure_less)> rated(&measure_less);
    std::map<std::string, std::map<int, std::pair<double, double>>> battery;  // participant -> item -> pre/post

    for (const auto& [key, r] : by_key) {
        if (measures::is_self_efficacy_item(r->measure)) {
            battery[r->participant][r->measure[2] - '0'] = {*r->pre, *r->post};
        } else if (measures::is_post_only(r->measure)) {
            rated[r->measure].push_back({r->participant, r->group, 0.0, *r->post});
        } else {
            paired[r->measure].push_back({r->participant, r->group, *r->pre, *r->post});
        }
    }

    if (!battery.empty()) {
        std::set<std::string> incomplete;
        for (const auto& [participant, items] : battery)
            if (items.size() != 6) incomplete.insert(participant);
        if (!incomplete.empty())
            throw CohortError("incomplete self-efficacy battery for: " + join_ids(incomplete));

        const auto n = static_cast<Eigen::Index>(battery.size());
        Eigen::MatrixXd responses(2 * n, 6);
        Eigen::Index row = 0;
        for (const auto& [participant, items] : battery) {
            for (const auto& [statement, values] : items) {
                responses(row, statement - 1) = values.first;
                responses(row + n, statement - 1) = values.second;
            }
            ++row;
        }
        try {
            const auto fitted = factor_scores(responses);
            row = 0;
            auto& pairs = paired[std::string(measures::self_efficacy)];
            for (const auto& [participant, items] : battery) {
                pairs.push_back({participant, group_of.at(participant), fitted.scores(row), fitted.scores(row + n)});
                ++row;
            }
        } catch (const StatsError& e) {
            table.notes.push_back(std::string("self-efficacy factor scores not computed: ") + e.what());
        }
    }

    for (const auto& [measure, pairs] : paired) {
        for (const auto& group : group_order()) {
            std::vector<Pair> subset;
            for (const auto& p : pairs)
                if (group == "all" || p.group == group) subset.push_back(p);
            if (!subset.empty()) table.rows.push_back(compare(group, measure, subset, options));
        }
    }
    for (const auto& [measure, pairs] : rated) {
        for (const auto& group : group_order()) {
            std::vector<double> post;
            for (const auto& p : pairs)
                if (group == "all" || p.group == group) post.push_back(p.post);
            if (!post.empty()) table.ratings.push_back({group, measure, descriptives(post)});
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    for (;;) {
        const auto comma = line.find(',', begin);
        fields.push_back(line.substr(begin, comma == std::string_view::npos ? std::string_view::npos : comma - begin));
        if (comma == std::string_view::npos) break;
        begin = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_value(std::string_view field, std::optional<double>& out) {
    field = trim(field);
    if (field.empty()) {
        out.reset();
        return true;
    }
    double value = 0.0;
    const char* first = field.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) return false;
    out = value;
    return true;
}

std::string number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

}  // namespace

std::vector<CohortRecord> parse_cohort_csv(std::string_view text) {
    std::vector<CohortRecord> records;
    std::vector<int> bad_rows;
    int line_no = 0;
    bool saw_header = false;
    std::size_t begin = 0;
    while (begin < text.size()) {
        auto end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(begin, end - begin));
        begin = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != "participant,group,measure,pre,post")
                throw CohortError("line " + std::to_string(line_no) +
                                  ": expected header participant,group,measure,pre,post");
            saw_header = true;
            continue;
        }
        const auto fields = split_fields(line);
        CohortRecord r;
        bool ok = fields.size() == 5;
        if (ok) {
            r.participant = std::string(trim(fields[0]));
            r.group = std::string(trim(fields[1]));
            r.measure = std::string(trim(fields[2]));
            ok = !r.participant.empty() && (r.group == "staff" || r.group == "visitor") && !r.measure.empty() &&
                 parse_value(fields[3], r.pre) && parse_value(fields[4], r.post);
        }
        if (!ok) {
            bad_rows.push_back(line_no);
            continue;
        }
        records.push_back(std::move(r));
    }
    if (!saw_header) throw CohortError("empty cohort file");
    if (!bad_rows.empty()) {
        std::string list;
        for (int row : bad_rows) list += (list.empty() ? "" : ", ") + std::to_string(row);
        throw CohortError("malformed rows: " + list);
    }
    if (records.empty()) throw CohortError("cohort file has no records");
    return records;
}

std::string format_cohort_csv(const std::vector<CohortRecord>& records) {
    std::string out = "participant,group,measure,pre,post\n";
    for (const auto& r : records) {
        out += r.participant + ',' + r.group + ',' + r.measure + ',';
        if (r.pre) out += number(*r.pre);
        out += ',';
        if (r.post) out += number(*r.post);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text rendering

namespace {

std::string fixed(double value, int decimals) {
    if (!std::isfinite(value)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s(buf);
    if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);  // no "-0.00"
    return s;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string normality_cell(const CohortRow& row) {
    auto one = [](const std::optional<ShapiroWilkResult>& sw) {
        return sw ? "W = " + fixed(sw->w, 3) + ", p = " + format_p(sw->p) : std::string("n/a");
    };
    return one(row.pre_normality) + " / " + one(row.post_normality);
}

}  // namespace

std::string format_p(double p) { return fixed(std::clamp(p, 0.0, 1.0), 3); }

std::string format_mean_sd(const Descriptives& d) {
    return "M = " + fixed(d.mean, 2) + " SD = " + fixed(d.sd, 2);
}

std::string format_z_p(const WilcoxonResult& w) {
    return "Z = " + fixed(w.z, 3) + ", p = " + format_p(w.p);
}

std::string render_cohort_text(const CohortTable& table) {
    std::ostringstream out;
    if (!table.rows.empty()) {
        std::size_t caption_width = std::string("Measure").size();
        for (const auto& row : table.rows) caption_width = std::max(caption_width, measure_caption(row.measure).size());
        caption_width += 2;
        out << "Wilcoxon signed-rank comparisons, pre- vs post-training\n\n";
        out << pad("Measure", caption_width) << pad("Group", 9) << pad("Pre-training", 22)
            << pad("Post-training", 22) << pad("Wilcoxon", 32) << "Shapiro-Wilk (pre / post)\n";
        for (const auto& row : table.rows) {
            out << pad(measure_caption(row.measure), caption_width) << pad(row.group, 9)
                << pad(format_mean_sd(row.pre), 22) << pad(format_mean_sd(row.post), 22)
                << pad(row.wilcoxon ? format_z_p(*row.wilcoxon) : std::string("n/a"), 32) << normality_cell(row)
                << '\n';
            for (const auto& note : row.notes) out << "    note: " << note << '\n';
        }
    }
    if (!table.ratings.empty()) {
        if (!table.rows.empty()) out << '\n';
        out << "Post-training ratings\n\n";
        for (const auto& rating : table.ratings)
            out << pad(measure_caption(rating.measure), 20) << pad(rating.group, 9) << "M = "
                << fixed(rating.post.mean, 2) << ", SD = " << fixed(rating.post.sd, 2) << '\n';
    }
    for (const auto& note : table.notes) out << "note: " << note << '\n';
    return out.str();
}

}  // namespace quakedrill::stats
