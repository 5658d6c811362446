#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "factlink/embedding.hpp"
#include "factlink/records.hpp"

namespace factlink::testing {

inline std::filesystem::path fixture_dir() { return FACTLINK_FIXTURE_DIR; }

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    auto base = std::filesystem::temp_directory_path();
    do {
      path_ = base / ("factlink-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    } while (std::filesystem::exists(path_));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<Lexicon> make_lexicon(
    std::initializer_list<std::pair<std::string, std::vector<double>>> entries) {
  auto lex = std::make_shared<Lexicon>();
  for (const auto& [word, v] : entries) lex->add(word, v);
  return lex;
}

/// Copy of the fixture data directory that tests may mutate.
inline void copy_fixtures(const std::filesystem::path& to) {
  std::filesystem::copy(fixture_dir(), to, std::filesystem::copy_options::recursive);
}

inline Article article(std::string id, std::string title, std::string body, Split split = Split::Unsplit) {
  Article a;
  a.id = std::move(id);
  a.source_id = "src";
  a.url = "https://example.org/" + a.id;
  a.title = std::move(title);
  a.body = std::move(body);
  a.split = split;
  return a;
}

inline Claim claim(std::string id, std::string statement, VeracityRating rating = VeracityRating::False) {
  Claim c;
  c.id = std::move(id);
  c.statement = std::move(statement);
  c.rating = rating;
  c.fact_checker_id = "fc";
  return c;
}

}  // namespace factlink::testing
