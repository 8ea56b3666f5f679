#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "quakedrill/dsl.hpp"

namespace quakedrill::testing {

inline std::filesystem::path source_dir() { return QUAKEDRILL_SOURCE_DIR; }

inline std::filesystem::path ach_path() { return source_dir() / "scenarios" / "ach.drill"; }

inline const Scenario& ach() {
    static const Scenario s = load_scenario_file(ach_path().string());
    return s;
}

/// Smallest valid scenario: one behavior, one waypoint, one terminal node.
inline const char* minimal_source() {
    return R"(scenario tiny "Tiny drill" {
  behavior dch indoor_earthquake "Drop, cover and hold"
  waypoint room at (0, 0, 0)
  start cover
  node cover at room {
    prompt "Shaking starts."
    option table "Get under the table" recommended behavior dch
      rationale "Tables protect you." end
  }
}
)";
}

/// Fresh empty directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("quakedrill-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace quakedrill::testing
