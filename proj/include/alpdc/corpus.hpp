#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alpdc/error.hpp"
#include "alpdc/io.hpp"
#include "alpdc/random.hpp"
#include "alpdc/unicode.hpp"

namespace alpdc {

inline constexpr std::string_view kEnglish = "eng_Latn";

struct SentencePair {
  std::string source;
  std::string reference;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
  friend auto operator<=>(const SentencePair&, const SentencePair&) = default;
};

struct ParallelCorpus {
  std::string source_lang;
  std::string target_lang{kEnglish};
  std::vector<SentencePair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }

  friend bool operator==(const ParallelCorpus&, const ParallelCorpus&) = default;
};

struct CorpusSplits {
  ParallelCorpus train;
  ParallelCorpus dev;
  ParallelCorpus test;
};

enum class UnicodeForm { composed, none };

struct NormalizationPolicy {
  UnicodeForm unicode_form = UnicodeForm::composed;
  bool lowercase = false;
  bool collapse_whitespace = true;

  /// Case-sensitive form used before scoring.
  static constexpr NormalizationPolicy metrics() { return {UnicodeForm::composed, false, true}; }
  /// Case-folded form used by language identification and dictionary lookup.
  static constexpr NormalizationPolicy folded() { return {UnicodeForm::composed, true, true}; }
};

inline std::string normalize_text(std::string_view text, const NormalizationPolicy& policy) {
  std::u32string cps = unicode::decode(text);
  if (policy.lowercase) cps = unicode::lower(cps);
  if (policy.unicode_form == UnicodeForm::composed) cps = unicode::compose(cps);
  if (policy.collapse_whitespace) {
    std::u32string collapsed;
    collapsed.reserve(cps.size());
    bool pending_space = false;
    for (char32_t cp : cps) {
      if (unicode::is_space(cp)) {
        pending_space = !collapsed.empty();
        continue;
      }
      if (pending_space) collapsed.push_back(U' ');
      pending_space = false;
      collapsed.push_back(cp);
    }
    cps = std::move(collapsed);
  }
  return unicode::encode(cps);
}

/// Whitespace split with leading and trailing punctuation detached one
/// character per token. Word-internal punctuation ("don't", "e-mail") stays.
inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> tokens;
  const std::u32string cps = unicode::decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && unicode::is_space(cps[i])) ++i;
    std::size_t end = i;
    while (end < cps.size() && !unicode::is_space(cps[end])) ++end;
    if (i == end) break;
    std::size_t lo = i;
    std::size_t hi = end;
    while (lo < hi && unicode::is_punct(cps[lo])) {
      tokens.push_back(unicode::encode(cps.substr(lo, 1)));
      ++lo;
    }
    std::vector<std::string> trailing;
    while (hi > lo && unicode::is_punct(cps[hi - 1])) {
      trailing.push_back(unicode::encode(cps.substr(hi - 1, 1)));
      --hi;
    }
    if (lo < hi) tokens.push_back(unicode::encode(cps.substr(lo, hi - lo)));
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
    i = end;
  }
  return tokens;
}

inline bool is_punctuation_token(std::string_view token) {
  const auto cps = unicode::decode(token);
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), unicode::is_punct);
}

/// Joins tokens with single spaces; punctuation tokens attach to the preceding token.
inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && !is_punctuation_token(t)) out.push_back(' ');
    out += t;
  }
  return out;
}

inline std::string join_words(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

/// Splits UTF-8 text into lines. LF and CRLF endings are accepted and a
/// final newline does not start an extra line.
inline std::vector<std::string> split_lines(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    auto nl = content.find('\n', start);
    std::size_t end = nl == std::string_view::npos ? content.size() : nl;
    std::string_view line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const std::string content = detail::read_file(path);
  if (auto bad = unicode::find_invalid_utf8(content)) {
    throw Error(ErrorCode::EncodingError,
                path.string() + ": invalid UTF-8 at byte " + std::to_string(*bad));
  }
  return split_lines(content);
}

inline ParallelCorpus load_parallel_corpus(const std::filesystem::path& source_path,
                                           const std::filesystem::path& reference_path,
                                           std::string source_lang) {
  auto sources = read_lines(source_path);
  auto references = read_lines(reference_path);
  if (sources.size() != references.size()) {
    throw Error(ErrorCode::LineCountMismatch,
                "line count mismatch: " + source_path.string() + " has " +
                    std::to_string(sources.size()) + " lines, " + reference_path.string() +
                    " has " + std::to_string(references.size()));
  }
  if (sources.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no lines");

  ParallelCorpus corpus;
  corpus.source_lang = std::move(source_lang);
  corpus.pairs.reserve(sources.size());
  const auto policy = NormalizationPolicy::metrics();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (normalize_text(sources[i], policy).empty() || normalize_text(references[i], policy).empty()) {
      throw Error(ErrorCode::FormatError, "blank sentence at line " + std::to_string(i + 1));
    }
    corpus.pairs.push_back({std::move(sources[i]), std::move(references[i])});
  }
  return corpus;
}

inline ParallelCorpus normalize_corpus(const ParallelCorpus& corpus, const NormalizationPolicy& policy) {
  ParallelCorpus out{corpus.source_lang, corpus.target_lang, {}};
  out.pairs.reserve(corpus.size());
  for (const auto& p : corpus.pairs) {
    out.pairs.push_back({normalize_text(p.source, policy), normalize_text(p.reference, policy)});
  }
  return out;
}

/// Seeded Fisher-Yates shuffle, then partition. Test takes the remainder.
inline CorpusSplits split_corpus(const ParallelCorpus& corpus, double train_ratio, double dev_ratio,
                                 std::uint64_t seed) {
  if (!(train_ratio >= 0.0) || !(dev_ratio >= 0.0) || !(train_ratio + dev_ratio < 1.0)) {
    throw Error(ErrorCode::RatioOutOfRange, "split ratios must be non-negative and sum below 1");
  }
  const std::size_t n = corpus.size();
  if (n < 3) throw Error(ErrorCode::CorpusTooSmall, "splitting needs at least 3 pairs");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_ratio));
  auto n_dev = static_cast<std::size_t>(std::llround(static_cast<double>(n) * dev_ratio));
  n_train = std::min(n_train, n);
  n_dev = std::min(n_dev, n - n_train);

  CorpusSplits splits;
  for (auto* part : {&splits.train, &splits.dev, &splits.test}) {
    part->source_lang = corpus.source_lang;
    part->target_lang = corpus.target_lang;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& part = i < n_train ? splits.train : i < n_train + n_dev ? splits.dev : splits.test;
    part.pairs.push_back(corpus.pairs[order[i]]);
  }
  return splits;
}

}  // namespace alpdc
