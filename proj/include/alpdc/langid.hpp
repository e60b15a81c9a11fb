#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "alpdc/capsule.hpp"
#include "alpdc/corpus.hpp"
#include "alpdc/error.hpp"
#include "alpdc/unicode.hpp"

namespace alpdc {

struct NgramOrders {
  std::size_t min = 1;
  std::size_t max = 3;

  std::size_t count() const noexcept { return max - min + 1; }
  friend bool operator==(const NgramOrders&, const NgramOrders&) = default;
};

inline constexpr std::size_t kDefaultTopN = 5000;
inline constexpr std::size_t kMinTrainingChars = 100;

/// Character n-gram relative frequencies for one language. Each order's
/// weights are count / total count of that order, so truncation to top_n
/// leaves each order summing to at most 1.
struct LanguageProfile {
  std::string lang_code;
  NgramOrders orders;
  std::size_t top_n = kDefaultTopN;
  std::map<std::string, double, std::less<>> weights;

  double norm() const {
    double s = 0.0;
    for (const auto& [gram, w] : weights) s += w * w;
    return std::sqrt(s);
  }

  friend bool operator==(const LanguageProfile&, const LanguageProfile&) = default;
};

struct Prediction {
  std::string best;
  double score = 0.0;
  double margin = 0.0;
  std::vector<std::pair<std::string, double>> ranking;
};

namespace detail {

/// Folds case, composes, maps decimal digits to '0'. Returns the words:
/// maximal runs without whitespace or punctuation. N-grams never cross a
/// word boundary, so repeating a text scales every count by the same factor.
inline std::vector<std::u32string> langid_words(std::string_view text) {
  std::u32string cps = unicode::compose(unicode::lower(unicode::decode(text)));
  std::vector<std::u32string> words;
  std::u32string cur;
  for (char32_t cp : cps) {
    if (unicode::is_space(cp) || unicode::is_punct(cp)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    cur.push_back(unicode::is_digit(cp) ? U'0' : cp);
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

using GramCounts = std::unordered_map<std::string, std::size_t>;

/// counts[k] holds the n-grams of order orders.min + k.
inline std::vector<GramCounts> count_ngrams(const std::vector<std::u32string>& words, NgramOrders orders) {
  std::vector<GramCounts> counts(orders.count());
  for (const auto& w : words) {
    for (std::size_t n = orders.min; n <= orders.max; ++n) {
      if (w.size() < n) break;
      auto& bucket = counts[n - orders.min];
      for (std::size_t i = 0; i + n <= w.size(); ++i) ++bucket[unicode::encode(w.substr(i, n))];
    }
  }
  return counts;
}

inline std::unordered_map<std::string, double> relative_frequencies(const std::vector<GramCounts>& counts) {
  std::unordered_map<std::string, double> out;
  for (const auto& bucket : counts) {
    std::size_t total = 0;
    for (const auto& [g, c] : bucket) total += c;
    for (const auto& [g, c] : bucket) out[g] = static_cast<double>(c) / static_cast<double>(total);
  }
  return out;
}

inline void validate_orders(NgramOrders orders) {
  if (orders.min < 1 || orders.max < orders.min) {
    throw Error(ErrorCode::FormatError, "n-gram orders must satisfy 1 <= min <= max");
  }
}

}  // namespace detail

inline LanguageProfile train_profile(const std::vector<std::string>& texts, std::string lang,
                                     NgramOrders orders = {}, std::size_t top_n = kDefaultTopN) {
  detail::validate_orders(orders);
  std::vector<std::u32string> words;
  std::size_t chars = 0;
  for (const auto& t : texts) {
    chars += unicode::decode(normalize_text(t, NormalizationPolicy::folded())).size();
    auto w = detail::langid_words(t);
    words.insert(words.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  if (chars < kMinTrainingChars) {
    throw Error(ErrorCode::InsufficientText, "language profile for " + lang + " needs at least " +
                                                 std::to_string(kMinTrainingChars) + " characters, got " +
                                                 std::to_string(chars));
  }

  LanguageProfile profile{std::move(lang), orders, top_n, {}};
  for (const auto& bucket : detail::count_ngrams(words, orders)) {
    std::vector<std::pair<std::string, std::size_t>> ranked(bucket.begin(), bucket.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::size_t total = 0;
    for (const auto& r : ranked) total += r.second;
    if (ranked.size() > top_n) ranked.resize(top_n);
    for (const auto& [g, c] : ranked) {
      profile.weights.emplace(g, static_cast<double>(c) / static_cast<double>(total));
    }
  }
  return profile;
}

/// Cosine similarity of relative-frequency vectors over the union of keys.
/// Zero when either side has no n-grams.
inline double profile_similarity(const std::unordered_map<std::string, double>& input, double input_norm,
                                 const LanguageProfile& profile) {
  const double pn = profile.norm();
  if (input_norm == 0.0 || pn == 0.0) return 0.0;
  double dot = 0.0;
  // Sorted keys fix the summation order, keeping scores bit-reproducible.
  std::vector<std::pair<std::string_view, double>> keys(input.begin(), input.end());
  std::sort(keys.begin(), keys.end());
  for (const auto& [g, w] : keys) {
    if (auto it = profile.weights.find(g); it != profile.weights.end()) dot += w * it->second;
  }
  return std::clamp(dot / (input_norm * pn), 0.0, 1.0);
}

inline Prediction predict_language(std::string_view text, const std::vector<LanguageProfile>& profiles) {
  if (profiles.empty()) throw Error(ErrorCode::NoProfiles, "no language profiles loaded");
  if (normalize_text(text, NormalizationPolicy::folded()).empty()) {
    throw Error(ErrorCode::EmptyInput, "input text is empty");
  }
  const auto words = detail::langid_words(text);

  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::unordered_map<std::string, double>, double>> vectors;
  Prediction out;
  for (const auto& profile : profiles) {
    auto key = std::pair{profile.orders.min, profile.orders.max};
    auto it = vectors.find(key);
    if (it == vectors.end()) {
      auto freqs = detail::relative_frequencies(detail::count_ngrams(words, profile.orders));
      std::vector<double> ws;
      for (const auto& [g, w] : freqs) ws.push_back(w);
      std::sort(ws.begin(), ws.end());
      double s = 0.0;
      for (double w : ws) s += w * w;
      it = vectors.emplace(key, std::pair{std::move(freqs), std::sqrt(s)}).first;
    }
    out.ranking.emplace_back(profile.lang_code, profile_similarity(it->second.first, it->second.second, profile));
  }
  std::sort(out.ranking.begin(), out.ranking.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  out.best = out.ranking.front().first;
  out.score = out.ranking.front().second;
  out.margin = out.ranking.size() > 1 ? out.score - out.ranking[1].second : 0.0;
  return out;
}

inline std::string serialize_profile(const LanguageProfile& profile) {
  std::string out = "#lang: " + profile.lang_code + "\n#orders: " + std::to_string(profile.orders.min) +
                    ".." + std::to_string(profile.orders.max) + "\n#top_n: " + std::to_string(profile.top_n) +
                    "\n";
  for (const auto& [g, w] : profile.weights) out += g + "\t" + detail::format_double(w) + "\n";
  return out;
}

inline LanguageProfile parse_profile(std::string_view content, const std::string& origin = "<profile>") {
  if (auto bad = unicode::find_invalid_utf8(content)) {
    throw Error(ErrorCode::EncodingError, origin + ": invalid UTF-8 at byte " + std::to_string(*bad));
  }
  LanguageProfile p;
  bool have_lang = false;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto colon = line.find(':');
      if (colon == std::string_view::npos) continue;
      auto key = detail::trim(line.substr(1, colon - 1));
      auto value = detail::trim(line.substr(colon + 1));
      if (key == "lang") {
        p.lang_code = std::string(value);
        have_lang = !value.empty();
      } else if (key == "orders") {
        auto dots = value.find("..");
        auto lo = detail::parse_double(value.substr(0, dots));
        auto hi = dots == std::string_view::npos ? lo : detail::parse_double(value.substr(dots + 2));
        if (!lo || !hi) detail::format_error(origin, i + 1, "bad '#orders:' value");
        p.orders = {static_cast<std::size_t>(*lo), static_cast<std::size_t>(*hi)};
        detail::validate_orders(p.orders);
      } else if (key == "top_n") {
        auto v = detail::parse_double(value);
        if (!v || *v < 1) detail::format_error(origin, i + 1, "bad '#top_n:' value");
        p.top_n = static_cast<std::size_t>(*v);
      }
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) detail::format_error(origin, i + 1, "expected ngram<TAB>weight");
    auto w = detail::parse_double(line.substr(tab + 1));
    if (!w || !(*w > 0.0) || *w > 1.0) detail::format_error(origin, i + 1, "weight must be in (0, 1]");
    if (!p.weights.emplace(std::string(line.substr(0, tab)), *w).second) {
      detail::format_error(origin, i + 1, "duplicate n-gram");
    }
  }
  if (!have_lang) detail::format_error(origin, 1, "missing '#lang:' header");
  return p;
}

inline LanguageProfile load_profile(const std::filesystem::path& path) {
  return parse_profile(detail::read_file(path), path.string());
}

inline void save_profile(const LanguageProfile& profile, const std::filesystem::path& path) {
  detail::write_file(path, serialize_profile(profile));
}

/// Loads every `*.profile` file in `dir`, in filename order.
inline std::vector<LanguageProfile> load_profiles(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoError, "profile directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".profile") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LanguageProfile> out;
  for (const auto& f : files) out.push_back(load_profile(f));
  return out;
}

}  // namespace alpdc
