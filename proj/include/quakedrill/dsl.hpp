#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "quakedrill/scenario.hpp"

namespace quakedrill {

/// First syntax violation in a `.drill` source. Line and column are 1-based
/// and always point into the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, std::string expected, std::string found);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& expected() const noexcept { return expected_; }
    const std::string& found() const noexcept { return found_; }

private:
    int line_;
    int column_;
    std::string expected_;
    std::string found_;
};

/// Parses a scenario file. Ids are preserved verbatim; duplicate ids are
/// rejected at the second declaration.
Scenario parse_scenario(std::string_view source);

/// Canonical text form of a scenario. UTF-8 with LF line endings; reparses
/// to a structurally equal Scenario.
std::string render_scenario(const Scenario& scenario);

/// Reads and parses a file; throws std::runtime_error if it cannot be read.
Scenario load_scenario_file(const std::string& path);

}  // namespace quakedrill
