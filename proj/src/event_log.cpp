#include "quakedrill/event_log.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace quakedrill {

namespace {

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out + '"';
}

std::string unquote(std::string_view field, int record) {
    if (field.size() < 2 || field.front() != '"' || field.back() != '"')
        throw LogFormatError(record, "detail must be a quoted string");
    field = field.substr(1, field.size() - 2);
    std::string out;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] == '"') throw LogFormatError(record, "unescaped quote in detail");
        if (field[i] != '\\') {
            out += field[i];
            continue;
        }
        if (++i == field.size()) throw LogFormatError(record, "dangling escape in detail");
        switch (field[i]) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            default: throw LogFormatError(record, "unknown escape in detail");
        }
    }
    return out;
}

std::string opt(const std::optional<std::string>& value) { return value ? *value : std::string("-"); }

std::optional<std::string> field_or_absent(std::string_view field, int record, const char* what) {
    if (field == "-") return std::nullopt;
    if (field.empty()) throw LogFormatError(record, std::string("empty ") + what);
    return std::string(field);
}

}  // namespace

std::string format_event(const SessionEvent& event) {
    std::string line = std::to_string(event.at_ms);
    line += '\t';
    line += to_string(event.kind);
    line += '\t' + opt(event.node_id);
    line += '\t' + opt(event.option_id);
    line += '\t';
    line += event.feedback ? std::string(to_string(*event.feedback)) : std::string("-");
    line += '\t' + quote(event.detail);
    return line;
}

SessionEvent parse_event(std::string_view line, int record) {
    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    for (int i = 0; i < 5; ++i) {
        const auto tab = line.find('\t', begin);
        if (tab == std::string_view::npos) throw LogFormatError(record, "expected 6 tab-separated fields");
        fields.push_back(line.substr(begin, tab - begin));
        begin = tab + 1;
    }
    fields.push_back(line.substr(begin));

    SessionEvent event;
    const auto& ts = fields[0];
    auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), event.at_ms);
    if (ts.empty() || ec != std::errc() || ptr != ts.data() + ts.size() || event.at_ms < 0)
        throw LogFormatError(record, "malformed timestamp '" + std::string(ts) + "'");
    const auto kind = event_kind_from_string(fields[1]);
    if (!kind) throw LogFormatError(record, "unknown event kind '" + std::string(fields[1]) + "'");
    event.kind = *kind;
    event.node_id = field_or_absent(fields[2], record, "node id");
    event.option_id = field_or_absent(fields[3], record, "option id");
    if (fields[4] != "-") {
        event.feedback = feedback_color_from_string(fields[4]);
        if (!event.feedback) throw LogFormatError(record, "unknown color '" + std::string(fields[4]) + "'");
    }
    event.detail = unquote(fields[5], record);
    return event;
}

std::string format_log(const EventLog& log) {
    std::string out;
    for (const auto& event : log) out += format_event(event) + '\n';
    return out;
}

EventLog parse_log(std::string_view text) {
    EventLog log;
    int record = 0;
    std::size_t begin = 0;
    while (begin < text.size()) {
        auto end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(begin, end - begin);
        begin = end + 1;
        ++record;
        if (line.empty()) continue;
        log.push_back(parse_event(line, record));
    }
    if (!log.empty() && log.front().kind != EventKind::session_start)
        throw LogFormatError(1, "first record must be session_start");
    if (!log.empty() && !parse_session_header(log.front().detail))
        throw LogFormatError(1, "session_start must carry scenario and participant ids");
    return log;
}

EventLog read_log_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read event log '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_log(buffer.str());
}

void write_log_file(const std::filesystem::path& path, const EventLog& log) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write event log '" + path.string() + "'");
    out << format_log(log);
    if (!out.flush()) throw std::runtime_error("failed writing event log '" + path.string() + "'");
}

}  // namespace quakedrill
