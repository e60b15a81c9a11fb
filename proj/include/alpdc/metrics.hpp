#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "alpdc/corpus.hpp"
#include "alpdc/error.hpp"
#include "alpdc/unicode.hpp"

namespace alpdc::metrics {

using Tokens = std::vector<std::string>;

struct BleuReport {
  double bleu = 0.0;
  std::vector<double> precisions;
  double brevity_penalty = 0.0;
  double length_ratio = 0.0;
  std::size_t translation_length = 0;
  std::size_t reference_length = 0;
  /// Set when the hypotheses contain no tokens; bleu and brevity_penalty are 0.
  bool zero_hypothesis = false;
};

struct ChrfReport {
  double score = 0.0;
  std::size_t char_order = 6;
  std::size_t word_order = 0;
  double beta = 2.0;
};

struct TerReport {
  double score = 0.0;
  std::size_t num_edits = 0;
  double ref_length = 0.0;
};

struct MeteorReport {
  double score = 0.0;
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_mean = 0.0;
  double penalty = 0.0;
};

struct EvaluationReport {
  BleuReport bleu;
  ChrfReport chrf;
  TerReport ter;
  MeteorReport meteor;
};

namespace detail {

template <typename H, typename R>
void check_pairs(const H& hyps, const R& refs) {
  if (hyps.size() != refs.size()) {
    throw Error(ErrorCode::LengthMismatch, "got " + std::to_string(hyps.size()) + " hypotheses and " +
                                               std::to_string(refs.size()) + " references");
  }
}

template <typename T>
std::map<std::vector<T>, std::size_t> ngram_counts(std::span<const T> seq, std::size_t n) {
  std::map<std::vector<T>, std::size_t> counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) ++counts[std::vector<T>(seq.begin() + i, seq.begin() + i + n)];
  return counts;
}

struct NgramStats {
  std::size_t matches = 0;
  std::size_t hyp_total = 0;
  std::size_t ref_total = 0;
};

template <typename T>
NgramStats clipped_stats(std::span<const T> hyp, std::span<const T> ref, std::size_t n) {
  NgramStats s;
  const auto hc = ngram_counts(hyp, n);
  const auto rc = ngram_counts(ref, n);
  for (const auto& [g, c] : hc) {
    s.hyp_total += c;
    if (auto it = rc.find(g); it != rc.end()) s.matches += std::min(c, it->second);
  }
  for (const auto& [g, c] : rc) s.ref_total += c;
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// BLEU

/// exp(1 - r/t) for short hypotheses, 1 otherwise. A hypothesis of length 0
/// scores 0 by convention.
inline double brevity_penalty(std::size_t translation_length, std::size_t reference_length) {
  if (translation_length == 0) return 0.0;
  if (translation_length >= reference_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_length) / static_cast<double>(translation_length));
}

struct BleuOptions {
  std::size_t max_order = 4;
  /// Add-one smoothing of the order >= 2 precisions.
  bool smooth = false;
};

/// Corpus-level BLEU with clipped counts. Orders with no hypothesis n-grams
/// report precision 0 and are left out of the geometric mean.
inline BleuReport bleu_corpus(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                              const BleuOptions& options = {}) {
  detail::check_pairs(hypotheses, references);
  if (hypotheses.empty()) throw Error(ErrorCode::EmptyInput, "BLEU needs at least one sentence pair");
  if (options.max_order == 0) throw Error(ErrorCode::EmptyInput, "BLEU max_order must be >= 1");

  BleuReport report;
  std::vector<detail::NgramStats> stats(options.max_order);
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    const std::span<const std::string> hyp(hypotheses[k]);
    const std::span<const std::string> ref(references[k]);
    report.translation_length += hyp.size();
    report.reference_length += ref.size();
    for (std::size_t n = 1; n <= options.max_order; ++n) {
      auto s = detail::clipped_stats(hyp, ref, n);
      stats[n - 1].matches += s.matches;
      stats[n - 1].hyp_total += s.hyp_total;
    }
  }
  if (report.reference_length == 0) throw Error(ErrorCode::EmptyInput, "references contain no tokens");

  report.length_ratio =
      static_cast<double>(report.translation_length) / static_cast<double>(report.reference_length);
  report.precisions.assign(options.max_order, 0.0);
  if (report.translation_length == 0) {
    report.zero_hypothesis = true;
    return report;
  }
  report.brevity_penalty = brevity_penalty(report.translation_length, report.reference_length);

  double log_sum = 0.0;
  std::size_t included = 0;
  bool any_zero = false;
  for (std::size_t n = 1; n <= options.max_order; ++n) {
    const auto& s = stats[n - 1];
    if (s.hyp_total == 0) continue;
    double p = static_cast<double>(s.matches) / static_cast<double>(s.hyp_total);
    if (options.smooth && n >= 2) {
      p = static_cast<double>(s.matches + 1) / static_cast<double>(s.hyp_total + 1);
    }
    report.precisions[n - 1] = p;
    ++included;
    if (p == 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  const double geo = (any_zero || included == 0) ? 0.0 : std::exp(log_sum / static_cast<double>(included));
  report.bleu = report.brevity_penalty * geo;
  return report;
}

// ---------------------------------------------------------------------------
// chrF

struct ChrfOptions {
  std::size_t char_order = 6;
  std::size_t word_order = 0;
  double beta = 2.0;
};

/// Character n-gram F-score on whitespace-stripped text, 0-100 scale.
/// Per-order F_beta over corpus-aggregated counts, averaged over the orders
/// that occur on at least one side.
inline ChrfReport chrf_corpus(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                              const ChrfOptions& options = {}) {
  detail::check_pairs(hypotheses, references);
  if (hypotheses.empty()) throw Error(ErrorCode::EmptyInput, "chrF needs at least one sentence pair");

  std::vector<detail::NgramStats> char_stats(options.char_order);
  std::vector<detail::NgramStats> word_stats(options.word_order);
  auto strip = [](const std::string& s) {
    std::u32string out;
    for (char32_t cp : unicode::decode(s)) {
      if (!unicode::is_space(cp)) out.push_back(cp);
    }
    return out;
  };
  auto accumulate = [](detail::NgramStats& into, const detail::NgramStats& s) {
    into.matches += s.matches;
    into.hyp_total += s.hyp_total;
    into.ref_total += s.ref_total;
  };
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    const auto hyp = strip(hypotheses[k]);
    const auto ref = strip(references[k]);
    for (std::size_t n = 1; n <= options.char_order; ++n) {
      accumulate(char_stats[n - 1], detail::clipped_stats(std::span<const char32_t>(hyp), std::span<const char32_t>(ref), n));
    }
    if (options.word_order > 0) {
      const auto hw = tokenize_words(hypotheses[k]);
      const auto rw = tokenize_words(references[k]);
      for (std::size_t n = 1; n <= options.word_order; ++n) {
        accumulate(word_stats[n - 1],
                   detail::clipped_stats(std::span<const std::string>(hw), std::span<const std::string>(rw), n));
      }
    }
  }

  const double b2 = options.beta * options.beta;
  double f_sum = 0.0;
  std::size_t effective = 0;
  for (const auto* group : {&char_stats, &word_stats}) {
    for (const auto& s : *group) {
      if (s.hyp_total == 0 && s.ref_total == 0) continue;
      ++effective;
      const double p = s.hyp_total ? static_cast<double>(s.matches) / static_cast<double>(s.hyp_total) : 0.0;
      const double r = s.ref_total ? static_cast<double>(s.matches) / static_cast<double>(s.ref_total) : 0.0;
      if (p + r > 0.0) f_sum += (1.0 + b2) * p * r / (b2 * p + r);
    }
  }
  ChrfReport report;
  report.char_order = options.char_order;
  report.word_order = options.word_order;
  report.beta = options.beta;
  report.score = effective ? 100.0 * f_sum / static_cast<double>(effective) : 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// TER

struct TerOptions {
  bool allow_shifts = true;
  std::size_t max_shift_size = 10;
  std::size_t max_shift_distance = 10;
  /// DP cells the exact refinement may spend; 0 keeps the greedy result.
  std::size_t exact_search_budget = 30'000'000;
};

struct TerPairResult {
  std::size_t edits = 0;
  std::size_t ref_len = 0;
};

namespace detail {

struct Alignment {
  std::size_t cost = 0;
  std::vector<bool> hyp_matched;  // hyp position aligned to an identical ref token
};

/// Unit-cost word edit distance with a backtrace marking exact matches.
inline Alignment word_alignment(std::span<const std::string> hyp, std::span<const std::string> ref) {
  const std::size_t n = hyp.size(), m = ref.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  Alignment a{at(n, m), std::vector<bool>(n, false)};
  std::size_t i = n, j = m;
  while (i > 0 && j > 0) {
    const bool same = hyp[i - 1] == ref[j - 1];
    if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
      a.hyp_matched[i - 1] = same;
      --i, --j;
    } else if (at(i, j) == at(i - 1, j) + 1) {
      --i;
    } else {
      --j;
    }
  }
  return a;
}

inline bool occurs_in(std::span<const std::string> block, std::span<const std::string> ref) {
  if (block.size() > ref.size()) return false;
  return std::search(ref.begin(), ref.end(), block.begin(), block.end()) != ref.end();
}

inline std::size_t id_edit_distance(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct IdsHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::size_t h = v.size();
    for (int x : v) h = h * 1315423911u + static_cast<std::size_t>(x) + 0x9e3779b9u;
    return h;
  }
};

/// Breadth-first search over shift sequences, layer s holding every order
/// reachable with s shifts. Stops once no deeper layer can beat `upper`
/// (a shift never changes the word multiset, so the bag difference bounds
/// the remaining edit distance from below). Returns the best total found, or
/// the best seen so far if the budget runs out first.
inline std::size_t exact_shift_search(const Tokens& hypothesis, const Tokens& reference, std::size_t upper,
                                      const TerOptions& options) {
  std::unordered_map<std::string_view, int> ids;
  auto id = [&](const std::string& t) { return ids.emplace(t, static_cast<int>(ids.size())).first->second; };
  std::vector<int> ref, hyp;
  for (const auto& t : reference) ref.push_back(id(t));
  for (const auto& t : hypothesis) hyp.push_back(id(t));

  std::vector<int> bag(ids.size(), 0);
  for (int x : ref) ++bag[x];
  std::size_t common = 0;
  for (int x : hyp) {
    if (bag[x] > 0) --bag[x], ++common;
  }
  const std::size_t lower = std::max(hyp.size(), ref.size()) - common;

  const std::size_t n = hyp.size();
  const std::size_t cells = (n + 1) * (ref.size() + 1);
  std::size_t spent = 0;
  std::size_t best = upper;
  std::vector<std::vector<int>> layer{hyp};
  std::unordered_set<std::vector<int>, IdsHash> seen{hyp};
  for (std::size_t shifts = 0; !layer.empty(); ++shifts) {
    for (const auto& v : layer) {
      spent += cells;
      best = std::min(best, shifts + id_edit_distance(v, ref));
      if (spent > options.exact_search_budget) return best;
    }
    if (shifts + 1 + lower >= best) break;
    std::vector<std::vector<int>> next;
    for (const auto& v : layer) {
      for (std::size_t start = 0; start < n; ++start) {
        for (std::size_t len = 1; len <= options.max_shift_size && start + len <= n; ++len) {
          if (std::search(ref.begin(), ref.end(), v.begin() + start, v.begin() + start + len) == ref.end()) break;
          std::vector<int> rest(v.begin(), v.begin() + start);
          rest.insert(rest.end(), v.begin() + start + len, v.end());
          const std::size_t lo = start > options.max_shift_distance ? start - options.max_shift_distance : 0;
          const std::size_t hi = std::min(rest.size(), start + options.max_shift_distance);
          for (std::size_t dest = lo; dest <= hi; ++dest) {
            if (dest == start) continue;
            std::vector<int> moved(rest.begin(), rest.begin() + dest);
            moved.insert(moved.end(), v.begin() + start, v.begin() + start + len);
            moved.insert(moved.end(), rest.begin() + dest, rest.end());
            if (seen.insert(moved).second) next.push_back(std::move(moved));
          }
        }
      }
      if (seen.size() * cells > options.exact_search_budget) return best;
    }
    layer = std::move(next);
  }
  return best;
}

}  // namespace detail

/// Classic word-level Levenshtein distance.
inline std::size_t word_edit_distance(std::span<const std::string> hyp, std::span<const std::string> ref) {
  return detail::word_alignment(hyp, ref).cost;
}

/// TER edit count. With shifts, the greedy loop repeatedly applies the block
/// shift (cost 1) giving the largest drop in edit distance, stopping when no
/// shift helps. Only blocks that occur in the reference and contain at least
/// one misaligned word are candidates. The greedy total is then used as the
/// upper bound of an exhaustive search over shift sequences, which yields the
/// true minimum whenever it fits in `exact_search_budget`.
inline TerPairResult ter_pair(const Tokens& hypothesis, const Tokens& reference, const TerOptions& options = {}) {
  TerPairResult out;
  out.ref_len = reference.size();
  const std::span<const std::string> ref(reference);
  Tokens cur = hypothesis;
  std::size_t shifts = 0;
  auto align = detail::word_alignment(cur, ref);

  while (options.allow_shifts && align.cost > 0) {
    const std::size_t n = cur.size();
    std::size_t best_gain = 0;  // edit-distance drop beyond the shift's own cost
    Tokens best;
    detail::Alignment best_align;
    for (std::size_t start = 0; start < n; ++start) {
      for (std::size_t len = 1; len <= options.max_shift_size && start + len <= n; ++len) {
        const std::span<const std::string> block(cur.data() + start, len);
        bool all_matched = true;
        for (std::size_t k = start; k < start + len; ++k) all_matched = all_matched && align.hyp_matched[k];
        if (all_matched || !detail::occurs_in(block, ref)) continue;

        Tokens rest;
        rest.reserve(n - len);
        rest.insert(rest.end(), cur.begin(), cur.begin() + start);
        rest.insert(rest.end(), cur.begin() + start + len, cur.end());
        const std::size_t lo = start > options.max_shift_distance ? start - options.max_shift_distance : 0;
        const std::size_t hi = std::min(rest.size(), start + options.max_shift_distance);
        for (std::size_t dest = lo; dest <= hi; ++dest) {
          if (dest == start) continue;
          Tokens moved;
          moved.reserve(n);
          moved.insert(moved.end(), rest.begin(), rest.begin() + dest);
          moved.insert(moved.end(), block.begin(), block.end());
          moved.insert(moved.end(), rest.begin() + dest, rest.end());
          auto a = detail::word_alignment(moved, ref);
          if (a.cost + 1 < align.cost && align.cost - a.cost - 1 > best_gain) {
            best_gain = align.cost - a.cost - 1;
            best = std::move(moved);
            best_align = std::move(a);
          }
        }
      }
    }
    if (best.empty()) break;
    cur = std::move(best);
    align = std::move(best_align);
    ++shifts;
  }
  out.edits = shifts + align.cost;
  if (options.allow_shifts && options.exact_search_budget > 0 && out.edits > 0) {
    out.edits = detail::exact_shift_search(hypothesis, reference, out.edits, options);
  }
  return out;
}

inline TerReport ter_corpus(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                            const TerOptions& options = {}) {
  detail::check_pairs(hypotheses, references);
  TerReport report;
  std::size_t ref_total = 0;
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    const auto r = ter_pair(hypotheses[k], references[k], options);
    report.num_edits += r.edits;
    ref_total += r.ref_len;
  }
  if (ref_total == 0) throw Error(ErrorCode::ZeroReference, "TER references contain no tokens");
  report.ref_length = static_cast<double>(ref_total);
  report.score = 100.0 * static_cast<double>(report.num_edits) / report.ref_length;
  return report;
}

// ---------------------------------------------------------------------------
// METEOR

struct MeteorParams {
  double alpha = 0.9;
  double gamma = 0.5;
  double theta = 3.0;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

namespace detail {

/// Branch-and-bound over exact-match alignments of maximum cardinality,
/// minimizing the number of chunks (runs adjacent in both sentences).
class ChunkSearch {
 public:
  ChunkSearch(std::span<const std::string> hyp, std::span<const std::string> ref, std::size_t node_budget)
      : hyp_(hyp), budget_(node_budget), used_(ref.size(), false) {
    std::map<std::string_view, std::size_t> hyp_count;
    for (const auto& w : hyp) ++hyp_count[w];
    for (std::size_t j = 0; j < ref.size(); ++j) ref_positions_[ref[j]].push_back(j);
    for (const auto& [w, positions] : ref_positions_) {
      auto it = hyp_count.find(w);
      if (it != hyp_count.end()) needed_[w] = std::min(it->second, positions.size());
    }
    for (const auto& [w, c] : needed_) total_matches_ += c;
    // occurrences of each hyp word at or after position i
    remaining_.resize(hyp.size() + 1);
    std::map<std::string_view, std::size_t> seen;
    for (std::size_t i = hyp.size(); i-- > 0;) remaining_[i] = ++seen[hyp[i]];
  }

  MeteorAlignment run() {
    if (total_matches_ == 0) return {};
    search(0, kNone, kNone, 0);
    return {total_matches_, best_chunks_};
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void search(std::size_t i, std::size_t prev_hyp, std::size_t prev_ref, std::size_t chunks) {
    if (chunks >= best_chunks_) return;
    if (nodes_ > budget_ && best_chunks_ != kNone) return;
    ++nodes_;
    if (i == hyp_.size()) {
      best_chunks_ = chunks;
      return;
    }
    const std::string_view w = hyp_[i];
    auto need_it = needed_.find(w);
    if (need_it == needed_.end() || need_it->second == 0) {
      search(i + 1, prev_hyp, prev_ref, chunks);
      return;
    }
    auto& positions = ref_positions_[w];
    const bool continues = prev_hyp != kNone && prev_hyp + 1 == i;
    // Try the position extending the current chunk first so the first leaf is the greedy alignment.
    auto try_match = [&](std::size_t j) {
      used_[j] = true;
      --need_it->second;
      const bool extends = continues && prev_ref + 1 == j;
      search(i + 1, i, j, chunks + (extends ? 0 : 1));
      ++need_it->second;
      used_[j] = false;
    };
    if (continues && prev_ref + 1 < used_.size() && !used_[prev_ref + 1] &&
        std::binary_search(positions.begin(), positions.end(), prev_ref + 1)) {
      try_match(prev_ref + 1);
    }
    for (std::size_t j : positions) {
      if (used_[j] || (continues && j == prev_ref + 1)) continue;
      try_match(j);
    }
    // Skip this occurrence only if later occurrences can still supply the quota.
    if (remaining_[i] > need_it->second) search(i + 1, prev_hyp, prev_ref, chunks);
  }

  std::span<const std::string> hyp_;
  std::size_t budget_;
  std::vector<bool> used_;
  std::map<std::string_view, std::vector<std::size_t>> ref_positions_;
  std::map<std::string_view, std::size_t> needed_;
  std::vector<std::size_t> remaining_;
  std::size_t total_matches_ = 0;
  std::size_t best_chunks_ = kNone;
  std::size_t nodes_ = 0;
};

}  // namespace detail

/// Maximum exact unigram matching with the fewest chunks. The search is exact
/// below `node_budget` visited nodes and returns the best alignment found
/// otherwise.
inline MeteorAlignment meteor_align(const Tokens& hypothesis, const Tokens& reference,
                                    std::size_t node_budget = 200000) {
  return detail::ChunkSearch(hypothesis, reference, node_budget).run();
}

inline MeteorReport meteor_from_totals(std::size_t matches, std::size_t chunks, std::size_t hyp_len,
                                       std::size_t ref_len, const MeteorParams& params = {}) {
  MeteorReport r;
  r.matches = matches;
  r.chunks = chunks;
  if (matches == 0) return r;
  r.precision = static_cast<double>(matches) / static_cast<double>(hyp_len);
  r.recall = static_cast<double>(matches) / static_cast<double>(ref_len);
  r.f_mean = r.precision * r.recall / (params.alpha * r.precision + (1.0 - params.alpha) * r.recall);
  r.penalty = params.gamma * std::pow(static_cast<double>(chunks) / static_cast<double>(matches), params.theta);
  r.score = r.f_mean * (1.0 - r.penalty);
  return r;
}

/// Exact-match METEOR; match, length and chunk totals are summed over the
/// corpus before the final formula.
inline MeteorReport meteor_corpus(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                                  const MeteorParams& params = {}) {
  detail::check_pairs(hypotheses, references);
  std::size_t matches = 0, chunks = 0, hyp_len = 0, ref_len = 0;
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    const auto a = meteor_align(hypotheses[k], references[k]);
    matches += a.matches;
    chunks += a.chunks;
    hyp_len += hypotheses[k].size();
    ref_len += references[k].size();
  }
  return meteor_from_totals(matches, chunks, hyp_len, ref_len, params);
}

// ---------------------------------------------------------------------------
// cosine

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "cosine of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cosine_dissimilarity(std::span<const double> a, std::span<const double> b) {
  return 1.0 - cosine_similarity(a, b);
}

// ---------------------------------------------------------------------------

struct EvaluateOptions {
  BleuOptions bleu;
  ChrfOptions chrf;
  TerOptions ter;
  MeteorParams meteor;
};

/// Normalizes (composed, case kept, whitespace collapsed), tokenizes and runs
/// all four metrics.
inline EvaluationReport evaluate_all(const std::vector<std::string>& hypotheses,
                                     const std::vector<std::string>& references,
                                     const EvaluateOptions& options = {}) {
  detail::check_pairs(hypotheses, references);
  if (hypotheses.empty()) throw Error(ErrorCode::EmptyInput, "evaluation needs at least one sentence pair");
  const auto policy = NormalizationPolicy::metrics();
  std::vector<std::string> hyp_text, ref_text;
  std::vector<Tokens> hyp_tok, ref_tok;
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    hyp_text.push_back(normalize_text(hypotheses[k], policy));
    ref_text.push_back(normalize_text(references[k], policy));
    hyp_tok.push_back(tokenize_words(hyp_text.back()));
    ref_tok.push_back(tokenize_words(ref_text.back()));
  }
  EvaluationReport report;
  report.bleu = bleu_corpus(hyp_tok, ref_tok, options.bleu);
  report.chrf = chrf_corpus(hyp_text, ref_text, options.chrf);
  report.ter = ter_corpus(hyp_tok, ref_tok, options.ter);
  report.meteor = meteor_corpus(hyp_tok, ref_tok, options.meteor);
  return report;
}

}  // namespace alpdc::metrics
