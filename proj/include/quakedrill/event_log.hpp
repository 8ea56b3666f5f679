#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "quakedrill/runtime.hpp"

namespace quakedrill {

class LogFormatError : public std::runtime_error {
public:
    LogFormatError(int record, const std::string& message)
        : std::runtime_error("record " + std::to_string(record) + ": " + message), record_(record) {}
    int record() const noexcept { return record_; }

private:
    int record_;
};

// One record per line, tab-separated:
//   at_ms  kind  node_id  option_id  color  detail
// Absent fields are "-"; detail is always a double-quoted string.
std::string format_event(const SessionEvent& event);
SessionEvent parse_event(std::string_view line, int record = 1);

std::string format_log(const EventLog& log);
EventLog parse_log(std::string_view text);

EventLog read_log_file(const std::filesystem::path& path);
void write_log_file(const std::filesystem::path& path, const EventLog& log);

}  // namespace quakedrill
