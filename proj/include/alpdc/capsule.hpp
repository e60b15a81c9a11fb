#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "alpdc/corpus.hpp"
#include "alpdc/error.hpp"
#include "alpdc/unicode.hpp"

namespace alpdc {

struct Gloss {
  std::string text;
  double weight = 1.0;

  friend bool operator==(const Gloss&, const Gloss&) = default;
};

/// Heavier glosses first, ties by text.
inline bool gloss_precedes(const Gloss& a, const Gloss& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.text < b.text;
}

/// Case-folded, composed, token-normalized form of a headword. Multiword
/// headwords keep single spaces between their tokens.
inline std::string normalize_headword(std::string_view raw) {
  return join_words(tokenize_words(unicode::fold(raw)));
}

using CapsuleEntries = std::map<std::string, std::vector<Gloss>, std::less<>>;

/// Per-language dictionary mapping normalized headwords to English glosses.
/// Entries are kept normalized and gloss lists sorted; mutators keep it that way.
class DictionaryCapsule {
 public:
  DictionaryCapsule() = default;
  DictionaryCapsule(std::string lang_code, std::string name, long version)
      : lang_code_(std::move(lang_code)), name_(std::move(name)), version_(version) {
    if (version_ < 1) throw Error(ErrorCode::FormatError, "capsule version must be >= 1");
  }

  const std::string& lang_code() const noexcept { return lang_code_; }
  const std::string& target_lang() const noexcept { return target_lang_; }
  const std::string& name() const noexcept { return name_; }
  long version() const noexcept { return version_; }
  const CapsuleEntries& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  void set_version(long v) {
    if (v < 1) throw Error(ErrorCode::FormatError, "capsule version must be >= 1");
    version_ = v;
  }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Adds or replaces an entry. Returns false if the normalized headword was
  /// already present (the entry is replaced either way).
  bool put(std::string_view headword, std::vector<Gloss> glosses) {
    std::string key = normalize_headword(headword);
    if (key.empty()) throw Error(ErrorCode::FormatError, "empty headword");
    if (glosses.empty()) throw Error(ErrorCode::FormatError, "headword '" + key + "' has no glosses");
    for (auto& g : glosses) {
      g.text = std::string(detail::trim(g.text));
      if (g.text.find_first_of("\t\n") != std::string::npos) {
        throw Error(ErrorCode::FormatError, "gloss for '" + key + "' contains a tab or newline");
      }
      if (g.text.empty()) throw Error(ErrorCode::FormatError, "empty gloss for '" + key + "'");
      if (!(g.weight >= 0.0) || !std::isfinite(g.weight)) {
        throw Error(ErrorCode::FormatError, "bad weight for '" + key + "'");
      }
    }
    std::sort(glosses.begin(), glosses.end(), gloss_precedes);
    auto [it, inserted] = entries_.insert_or_assign(std::move(key), std::move(glosses));
    return inserted;
  }

  const std::vector<Gloss>* find(std::string_view normalized_headword) const {
    auto it = entries_.find(normalized_headword);
    return it == entries_.end() ? nullptr : &it->second;
  }

  friend bool operator==(const DictionaryCapsule&, const DictionaryCapsule&) = default;

 private:
  std::string lang_code_;
  std::string target_lang_{kEnglish};
  std::string name_;
  long version_ = 1;
  CapsuleEntries entries_;
};

/// Parses the capsule text format:
///
///     #lang: spa_Latn
///     #name: Spanish core
///     #version: 3
///     gato<TAB>cat:1.0<TAB>feline:0.4
///
/// Weights default to 1.0. `#` lines after the header are comments.
inline DictionaryCapsule parse_capsule(std::string_view content, const std::string& origin = "<capsule>") {
  if (auto bad = unicode::find_invalid_utf8(content)) {
    throw Error(ErrorCode::EncodingError, origin + ": invalid UTF-8 at byte " + std::to_string(*bad));
  }
  std::string lang, name;
  long version = 1;
  bool in_header = true;
  std::vector<std::pair<std::size_t, std::string_view>> body;
  const auto lines = split_lines(content);

  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    const std::size_t lineno = i + 1;
    if (detail::trim(line).empty()) continue;
    if (line.front() == '#') {
      if (!in_header) continue;
      auto colon = line.find(':');
      if (colon == std::string_view::npos) continue;
      auto key = detail::trim(line.substr(1, colon - 1));
      auto value = detail::trim(line.substr(colon + 1));
      if (key == "lang") {
        lang = std::string(value);
      } else if (key == "name") {
        name = std::string(value);
      } else if (key == "version") {
        long v = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size() || v < 1) {
          detail::format_error(origin, lineno, "version must be an integer >= 1");
        }
        version = v;
      }
      continue;
    }
    in_header = false;
    body.emplace_back(lineno, line);
  }
  if (lang.empty()) detail::format_error(origin, 1, "missing '#lang:' header");

  DictionaryCapsule capsule(lang, name, version);
  for (auto [lineno, line] : body) {
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) detail::format_error(origin, lineno, "expected headword<TAB>gloss");
    std::string_view headword = detail::trim(line.substr(0, tab));
    if (normalize_headword(headword).empty()) detail::format_error(origin, lineno, "empty headword");

    std::vector<Gloss> glosses;
    std::string_view rest = line.substr(tab + 1);
    while (true) {
      auto next = rest.find('\t');
      std::string_view field = detail::trim(rest.substr(0, next));
      if (field.empty()) detail::format_error(origin, lineno, "empty gloss field");
      Gloss g{std::string(field), 1.0};
      if (auto colon = field.rfind(':'); colon != std::string_view::npos) {
        if (auto w = detail::parse_double(field.substr(colon + 1))) {
          if (!(*w >= 0.0) || !std::isfinite(*w)) detail::format_error(origin, lineno, "weight must be >= 0");
          g.text = std::string(detail::trim(field.substr(0, colon)));
          g.weight = *w;
        }
      }
      if (g.text.empty()) detail::format_error(origin, lineno, "empty gloss text");
      glosses.push_back(std::move(g));
      if (next == std::string_view::npos) break;
      rest = rest.substr(next + 1);
    }
    if (!capsule.put(headword, std::move(glosses))) {
      throw Error(ErrorCode::DuplicateHeadword, origin + ":" + std::to_string(lineno) +
                                                    ": duplicate headword '" +
                                                    normalize_headword(headword) + "'");
    }
  }
  return capsule;
}

inline DictionaryCapsule load_capsule(const std::filesystem::path& path) {
  return parse_capsule(detail::read_file(path), path.string());
}

inline std::string serialize_capsule(const DictionaryCapsule& capsule) {
  std::string out = "#lang: " + capsule.lang_code() + "\n#name: " + capsule.name() +
                    "\n#version: " + std::to_string(capsule.version()) + "\n";
  for (const auto& [headword, glosses] : capsule.entries()) {
    out += headword;
    for (const auto& g : glosses) out += "\t" + g.text + ":" + detail::format_double(g.weight);
    out += "\n";
  }
  return out;
}

inline void save_capsule(const DictionaryCapsule& capsule, const std::filesystem::path& path) {
  detail::write_file(path, serialize_capsule(capsule));
}

/// Overlay entries replace base entries wholesale; version becomes max + 1.
inline DictionaryCapsule merge_capsules(const DictionaryCapsule& base, const DictionaryCapsule& overlay) {
  if (base.lang_code() != overlay.lang_code()) {
    throw Error(ErrorCode::LanguageMismatch,
                "cannot merge " + overlay.lang_code() + " capsule into " + base.lang_code());
  }
  DictionaryCapsule merged = base;
  for (const auto& [headword, glosses] : overlay.entries()) merged.put(headword, glosses);
  merged.set_version(std::max(base.version(), overlay.version()) + 1);
  if (!overlay.name().empty()) merged.set_name(overlay.name());
  return merged;
}

/// Immutable-value registry keyed by exact language code.
class CapsuleRegistry {
 public:
  using Ptr = std::shared_ptr<const DictionaryCapsule>;

  void add(DictionaryCapsule capsule) {
    const std::string code = capsule.lang_code();
    if (capsules_.count(code)) {
      throw Error(ErrorCode::FormatError, "more than one capsule for " + code);
    }
    capsules_.emplace(code, std::make_shared<const DictionaryCapsule>(std::move(capsule)));
  }

  const DictionaryCapsule& select(std::string_view lang) const {
    auto it = capsules_.find(lang);
    if (it == capsules_.end()) {
      throw Error(ErrorCode::CapsuleNotFound, "no dictionary capsule for language " + std::string(lang));
    }
    return *it->second;
  }

  bool contains(std::string_view lang) const { return capsules_.find(lang) != capsules_.end(); }
  std::size_t size() const noexcept { return capsules_.size(); }
  const std::map<std::string, Ptr, std::less<>>& capsules() const noexcept { return capsules_; }

 private:
  std::map<std::string, Ptr, std::less<>> capsules_;
};

inline const DictionaryCapsule& select_capsule(const CapsuleRegistry& registry, std::string_view lang) {
  return registry.select(lang);
}

/// Loads every `*.capsule` file in `dir`, in filename order.
inline CapsuleRegistry load_registry(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoError, "capsule directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".capsule") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  CapsuleRegistry registry;
  for (const auto& f : files) registry.add(load_capsule(f));
  return registry;
}

struct TranslateOptions {
  std::size_t max_span = 3;
};

struct LiteralTranslation {
  struct Span {
    std::size_t begin;  // first source token
    std::size_t end;    // one past the last source token
  };

  std::vector<std::string> source_tokens;
  std::vector<std::string> output_tokens;
  std::vector<Span> spans;  // spans[k] produced output_tokens[k]
  std::set<std::size_t> oov_indices;
  std::string capsule_lang;
  long capsule_version = 0;

  std::string text() const { return join_tokens(output_tokens); }

  std::vector<std::string> oov_tokens() const {
    std::vector<std::string> out;
    for (auto i : oov_indices) out.push_back(source_tokens[i]);
    return out;
  }
};

/// Greedy longest-match glossing. Spans of up to `max_span` tokens are tried
/// longest first; matched spans emit the top-weight gloss, punctuation passes
/// through, anything else passes through verbatim and is recorded as OOV.
inline LiteralTranslation translate_literal(std::string_view text, const DictionaryCapsule& capsule,
                                            const TranslateOptions& options = {}) {
  LiteralTranslation result;
  result.capsule_lang = capsule.lang_code();
  result.capsule_version = capsule.version();
  result.source_tokens = tokenize_words(normalize_text(text, NormalizationPolicy::metrics()));

  const auto& src = result.source_tokens;
  std::vector<std::string> folded;
  folded.reserve(src.size());
  for (const auto& t : src) folded.push_back(unicode::fold(t));

  const std::size_t max_span = std::max<std::size_t>(options.max_span, 1);
  std::size_t i = 0;
  while (i < src.size()) {
    if (is_punctuation_token(src[i])) {
      result.output_tokens.push_back(src[i]);
      result.spans.push_back({i, i + 1});
      ++i;
      continue;
    }
    bool matched = false;
    for (std::size_t len = std::min(max_span, src.size() - i); len >= 1; --len) {
      std::string key = folded[i];
      for (std::size_t k = 1; k < len; ++k) key += " " + folded[i + k];
      if (const auto* glosses = capsule.find(key)) {
        result.output_tokens.push_back(glosses->front().text);
        result.spans.push_back({i, i + len});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      result.output_tokens.push_back(src[i]);
      result.spans.push_back({i, i + 1});
      result.oov_indices.insert(i);
      ++i;
    }
  }
  return result;
}

}  // namespace alpdc
