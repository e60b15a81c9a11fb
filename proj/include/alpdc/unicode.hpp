#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alpdc/unicode_tables.hpp"

namespace alpdc::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Validates UTF-8: rejects overlongs, surrogates and code points past U+10FFFF.
/// Returns the byte offset of the first invalid sequence, or nullopt.
inline std::optional<std::size_t> find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::nullopt;
}

/// Decodes UTF-8; invalid bytes decode to U+FFFD one byte at a time.
inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = b0 < 0x80 ? 1 : (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3
                                  : (b0 & 0xF8) == 0xF0 ? 4 : 0;
    if (len == 0 || find_invalid_utf8(s.substr(i, len)).has_value()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (auto cp : cps) append_utf8(out, cp);
  return out;
}

namespace detail {

template <typename Table>
bool in_ranges(const Table& table, char32_t cp) {
  auto it = std::upper_bound(table.begin(), table.end(), cp,
                             [](char32_t v, const tables::Range& r) { return v < r.lo; });
  return it != table.begin() && cp <= std::prev(it)->hi;
}

}  // namespace detail

/// Unicode White_Space property.
constexpr bool is_space(char32_t cp) noexcept {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

/// General category P* (connector, dash, open, close, initial, final, other).
inline bool is_punct(char32_t cp) { return detail::in_ranges(tables::kPunctuation, cp); }

/// General category Nd.
inline bool is_digit(char32_t cp) { return detail::in_ranges(tables::kDecimalDigits, cp); }

/// Simple (one-to-one) lowercase mapping.
inline char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  const auto& t = tables::kLowercase;
  auto it = std::lower_bound(t.begin(), t.end(), cp,
                             [](const tables::CaseMapping& m, char32_t v) { return m.from < v; });
  return (it != t.end() && it->from == cp) ? it->to : cp;
}

inline std::uint8_t combining_class(char32_t cp) {
  if (cp < 0x300) return 0;
  const auto& t = tables::kCombiningClass;
  auto it = std::lower_bound(t.begin(), t.end(), cp,
                             [](const tables::CombiningClass& m, char32_t v) { return m.cp < v; });
  return (it != t.end() && it->cp == cp) ? it->ccc : 0;
}

inline std::optional<char32_t> compose_pair(char32_t first, char32_t second) {
  const auto& t = tables::kCompositions;
  auto it = std::lower_bound(t.begin(), t.end(), std::pair{first, second},
                             [](const tables::Composition& c, const std::pair<char32_t, char32_t>& k) {
                               return c.first != k.first ? c.first < k.first : c.second < k.second;
                             });
  if (it != t.end() && it->first == first && it->second == second) return it->composed;
  return std::nullopt;
}

namespace detail {

inline std::u32string compose_pass(std::u32string_view in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t starter = std::u32string::npos;
  std::uint8_t last_ccc = 0;
  for (char32_t cp : in) {
    const auto ccc = combining_class(cp);
    if (starter != std::u32string::npos) {
      const bool blocked = out.size() - 1 != starter && (last_ccc == 0 || last_ccc >= ccc);
      if (!blocked) {
        if (auto c = compose_pair(out[starter], cp)) {
          out[starter] = *c;
          continue;
        }
      }
    }
    if (ccc == 0) {
      starter = out.size();
      last_ccc = 0;
    } else {
      last_ccc = ccc;
    }
    out.push_back(cp);
  }
  return out;
}

}  // namespace detail

/// Canonical composition: each starter absorbs the following unblocked
/// combining marks it has a primary composite with, repeated to a fixpoint.
/// Decomposed input in canonical order comes out in NFC.
inline std::u32string compose(std::u32string_view in) {
  std::u32string cur = detail::compose_pass(in);
  while (true) {
    auto next = detail::compose_pass(cur);
    if (next.size() == cur.size()) return cur;
    cur = std::move(next);
  }
}

inline std::u32string lower(std::u32string_view in) {
  std::u32string out(in);
  for (auto& cp : out) cp = to_lower(cp);
  return out;
}

/// Case-folded, composed form used for dictionary keys and language profiles.
inline std::string fold(std::string_view utf8) { return encode(compose(lower(decode(utf8)))); }

}  // namespace alpdc::unicode
