#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "alpdc/corpus.hpp"
#include "alpdc/io.hpp"
#include "alpdc/langid.hpp"

namespace alpdc::testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(ALPDC_FIXTURE_DIR) / rel; }

inline const char* cli_path() { return ALPDC_CLI_PATH; }

/// Fresh, empty scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "alpdc") {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

  std::filesystem::path write(const std::string& rel, const std::string& content) const {
    auto p = path_ / rel;
    std::filesystem::create_directories(p.parent_path());
    detail::write_file(p, content);
    return p;
  }

 private:
  std::filesystem::path path_;
};

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

/// Runs the CLI with `args`, capturing stdout and stderr.
inline RunResult run_cli(const std::vector<std::string>& args, const std::string& env = "") {
  TempDir tmp("alpdc-run");
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += shell_quote(cli_path());
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " >" + shell_quote((tmp / "out").string()) + " 2>" + shell_quote((tmp / "err").string());
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = detail::read_file(tmp / "out");
  r.err = detail::read_file(tmp / "err");
  return r;
}

/// Sentences of a language fixture file, in file order.
inline std::vector<std::string> langid_sentences(const std::string& lang) {
  return read_lines(fixture("langid/" + lang + ".txt"));
}

inline const std::vector<std::string>& fixture_languages() {
  static const std::vector<std::string> langs{"deu_Latn", "eng_Latn", "fra_Latn", "ita_Latn", "rus_Cyrl", "spa_Latn"};
  return langs;
}

/// Trains a profile per fixture language on its first 50 sentences.
inline std::vector<LanguageProfile> train_fixture_profiles(const std::vector<std::string>& langs = fixture_languages(),
                                                           NgramOrders orders = {}) {
  std::vector<LanguageProfile> out;
  for (const auto& l : langs) {
    auto s = langid_sentences(l);
    s.resize(50);
    out.push_back(train_profile(s, l, orders));
  }
  return out;
}

inline void write_fixture_profiles(const std::filesystem::path& dir,
                                   const std::vector<std::string>& langs = fixture_languages()) {
  std::filesystem::create_directories(dir);
  for (const auto& p : train_fixture_profiles(langs)) save_profile(p, dir / (p.lang_code + ".profile"));
}

/// Copy-task corpus of `n` pairs over a small vocabulary.
inline ParallelCorpus copy_corpus(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> words{"red", "blue", "green", "cat", "dog", "sun", "moon", "tree"};
  std::mt19937_64 gen(seed);
  ParallelCorpus c;
  c.source_lang = "eng_Latn";
  while (c.pairs.size() < n) {
    const std::size_t len = 2 + gen() % 3;
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + words[gen() % words.size()];
    bool dup = false;
    for (const auto& p : c.pairs) dup = dup || p.source == s;
    if (!dup) c.pairs.push_back({s, s});
  }
  return c;
}

}  // namespace alpdc::testing
