#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

namespace distplr::test {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(DISTPLR_FIXTURE_DIR) / name;
}

// Fresh scratch directory per test binary run.
inline std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("distplr_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

}  // namespace distplr::test
