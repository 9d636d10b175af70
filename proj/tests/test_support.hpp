#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "kimatch/config.hpp"
#include "kimatch/error.hpp"
#include "kimatch/pipeline.hpp"

namespace kimatch::testkit {

inline config::Json test_config() {
  auto cfg = config::defaults();
  cfg["data_dir"] = KIMATCH_TEST_DATA_DIR;
  return cfg;
}

// Shipped lexicons, dictionary, emotion scale and hashed embedder.
inline const pipeline::Resources& resources() {
  static const pipeline::Resources r = pipeline::Resources::load(test_config());
  return r;
}

inline std::string fixture_path(const std::string& name) {
  return std::string(KIMATCH_TEST_FIXTURES) + "/" + name;
}

template <class F>
void expect_error(F&& fn, ErrorCode code) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "kimatch") {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / (prefix + "-" + std::to_string(rd()) + std::to_string(rd()));
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

}  // namespace kimatch::testkit
