#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "crossfake/corpus.hpp"

namespace crossfake::testing {

inline const std::filesystem::path kFixtures = CROSSFAKE_FIXTURE_DIR;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("crossfake-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline NewsArticle make_article(std::string id, std::string body, std::optional<Label> label = {},
                                Language lang = Language::en) {
  NewsArticle a;
  a.id = std::move(id);
  a.language = lang;
  a.body = std::move(body);
  a.label = label;
  return a;
}

}  // namespace crossfake::testing
