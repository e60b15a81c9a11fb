// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "alpdc/capsule.hpp"
#include "alpdc/langid.hpp"
#include "alpdc/metrics.hpp"
#include "alpdc/model.hpp"
#include "alpdc/neural.hpp"
#include "alpdc/report.hpp"
#include "alpdc/service.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace alpdc;
using Tokens = std::vector<std::string>;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    if (!cond && ok) detail << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

using Criterion = std::function<void(Outcome&)>;

Matrix random_matrix(std::mt19937_64& gen, std::size_t r, std::size_t c, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(r, c);
  for (auto& v : m.values()) v = u(gen);
  return m;
}

// Word-level Levenshtein, written independently of the library.
std::size_t oracle_edit_distance(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<Tokens> all_lists(std::size_t max_len, const Tokens& alphabet) {
  std::vector<Tokens> out{{}};
  std::vector<Tokens> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Tokens> next;
    for (const auto& l : frontier) {
      for (const auto& s : alphabet) {
        auto e = l;
        e.push_back(s);
        next.push_back(e);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

Tokens random_tokens(std::mt19937_64& gen, std::size_t min_len, std::size_t max_len, std::size_t alphabet) {
  static const Tokens words{"the", "cat", "sat", "on", "mat", "a", "dog", "ran", "to", "it"};
  Tokens out(min_len + gen() % (max_len - min_len + 1));
  for (auto& t : out) t = words[gen() % std::min(alphabet, words.size())];
  return out;
}

// ---------------------------------------------------------------------------

void brevity_penalty_identity(Outcome& o) {
  const double bp = metrics::brevity_penalty(469, 514);
  o.check(std::abs(bp - 0.90851) <= 1e-5, "BP(469, 514)");
  // A corpus with those totals, scored end to end.
  std::vector<Tokens> hyps, refs;
  for (int k = 0; k < 45; ++k) {
    hyps.push_back(Tokens(k < 19 ? 11 : 10, "w"));
    refs.push_back(Tokens(k < 19 ? 12 : 11, "w"));
  }
  const auto r = metrics::bleu_corpus(hyps, refs);
  o.check(r.translation_length == 469 && r.reference_length == 514, "corpus totals");
  o.check(std::abs(r.brevity_penalty - 0.90851) <= 1e-5, "report BP");
  o.check(std::abs(r.length_ratio - 0.91245) <= 1e-5, "length ratio");
  o.detail << "BP=" << r.brevity_penalty << " ratio=" << r.length_ratio;
}

void ter_aggregation(Outcome& o) {
  // Pairs whose hypothesis shares no word with the reference cost exactly one
  // substitution per reference token; identical pairs cost nothing.
  std::vector<Tokens> hyps, refs;
  auto add = [&](std::size_t len, bool wrong) {
    Tokens ref, hyp;
    for (std::size_t i = 0; i < len; ++i) {
      ref.push_back("r" + std::to_string((refs.size() * 7 + i) % 23));
      hyp.push_back(wrong ? "h" + std::to_string(i) : ref.back());
    }
    hyps.push_back(hyp);
    refs.push_back(ref);
  };
  std::size_t wrong_tokens = 0;
  for (std::size_t k = 0; wrong_tokens < 382; ++k) {
    const std::size_t len = std::min<std::size_t>(5 + k % 9, 382 - wrong_tokens);
    add(len, true);
    wrong_tokens += len;
  }
  for (std::size_t len : {13, 13, 13, 13, 13}) add(len, false);
  const auto r = metrics::ter_corpus(hyps, refs);
  o.check(r.num_edits == 382, "num_edits");
  o.check(r.ref_length == 447.0, "ref_length");
  o.check(std::abs(r.score - 85.4586129753915) <= 1e-3, "score");
  o.detail << "edits=" << r.num_edits << " ref_length=" << r.ref_length << " TER=" << r.score;
}

void chrf_defaults(Outcome& o) {
  const auto r = metrics::chrf_corpus({"a small test"}, {"a small test"});
  o.check(r.char_order == 6 && r.word_order == 0 && r.beta == 2.0, "defaults");
  const auto e = metrics::evaluate_all({"a small test"}, {"a small test"});
  o.check(e.chrf.char_order == 6 && e.chrf.word_order == 0 && e.chrf.beta == 2.0, "evaluate_all defaults");
  const auto j = to_json(e);
  o.check(j["char_order"] == 6 && j["word_order"] == 0 && j["beta"] == 2.0, "report fields");
  o.detail << "char_order=" << r.char_order << " word_order=" << r.word_order << " beta=" << r.beta;
}

void metric_properties(Outcome& o) {
  std::mt19937_64 gen(2024);
  // BLEU internal identities and TER aggregation on random corpora.
  for (int it = 0; it < 500; ++it) {
    std::vector<Tokens> h, r;
    const std::size_t n = 1 + gen() % 5;
    for (std::size_t k = 0; k < n; ++k) h.push_back(random_tokens(gen, 0, 12, 6)), r.push_back(random_tokens(gen, 1, 12, 6));
    const auto b = metrics::bleu_corpus(h, r);
    o.check(std::abs(b.length_ratio - double(b.translation_length) / b.reference_length) <= 1e-9, "length_ratio");
    if (b.translation_length > 0) {
      const double bp = b.translation_length >= b.reference_length
                            ? 1.0
                            : std::exp(1.0 - double(b.reference_length) / b.translation_length);
      o.check(std::abs(b.brevity_penalty - bp) <= 1e-9, "BP identity");
      double log_sum = 0;
      int included = 0;
      bool zero = false;
      for (std::size_t ord = 0; ord < 4; ++ord) {
        std::size_t hyp_ngrams = 0;
        for (const auto& t : h) hyp_ngrams += t.size() > ord ? t.size() - ord : 0;
        if (hyp_ngrams == 0) continue;
        ++included;
        if (b.precisions[ord] == 0) zero = true; else log_sum += std::log(b.precisions[ord]);
      }
      o.check(std::abs(b.bleu - (zero ? 0.0 : bp * std::exp(log_sum / included))) <= 1e-9, "geometric mean");
    }
    const auto t = metrics::ter_corpus(h, r);
    o.check(std::abs(t.score - 100.0 * t.num_edits / t.ref_length) <= 1e-4, "TER identity");
  }
  // Identity cases.
  const std::vector<std::string> same{"The quick brown fox jumps .", "It was a dark night"};
  const auto id = metrics::evaluate_all(same, same);
  o.check(id.bleu.bleu == 1.0 && id.chrf.score == 100.0 && id.ter.score == 0.0, "identity corpus");

  // Monotone degradation: a matched hypothesis token becomes an equally long
  // run of a character that never occurs.
  std::size_t trials = 0;
  for (int it = 0; it < 400; ++it) {
    auto h = random_tokens(gen, 2, 10, 8), r = random_tokens(gen, 2, 10, 8);
    std::vector<std::size_t> matched;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (std::find(r.begin(), r.end(), h[i]) != r.end()) matched.push_back(i);
    }
    if (matched.empty()) continue;
    ++trials;
    auto d = h;
    const auto pos = matched[gen() % matched.size()];
    d[pos] = std::string(d[pos].size(), '#');
    auto join = [](const Tokens& t) { return join_words(t); };
    const auto before = metrics::bleu_corpus({h}, {r}), after = metrics::bleu_corpus({d}, {r});
    o.check(after.precisions[0] <= before.precisions[0], "BLEU p1 monotone");
    o.check(metrics::chrf_corpus({join(d)}, {join(r)}).score <= metrics::chrf_corpus({join(h)}, {join(r)}).score + 1e-12,
            "chrF monotone");
    o.check(metrics::meteor_corpus({d}, {r}).score <= metrics::meteor_corpus({h}, {r}).score + 1e-12, "METEOR monotone");
    o.check(metrics::ter_pair(d, r).edits >= metrics::ter_pair(h, r).edits, "TER monotone");
  }
  // ter_pair without shifts against the DP oracle, exhaustively.
  const auto lists = all_lists(5, {"a", "b", "c"});
  metrics::TerOptions plain;
  plain.allow_shifts = false;
  std::size_t pairs = 0;
  for (const auto& a : lists) {
    for (const auto& b : lists) {
      ++pairs;
      const auto got = metrics::ter_pair(a, b, plain);
      if (got.edits != oracle_edit_distance(a, b) || got.ref_len != b.size()) {
        o.check(false, "DP oracle mismatch");
      }
    }
  }
  o.detail << "monotone trials=" << trials << " exhaustive pairs=" << pairs;
}

void attention_suite(Outcome& o) {
  std::mt19937_64 gen(1);
  double worst_sum = 0, worst_perm = 0;
  for (int it = 0; it < 1000; ++it) {
    const std::size_t n = 1 + gen() % 6, m = 1 + gen() % 8, d = 1 + gen() % 6, p = 1 + gen() % 5;
    const auto q = random_matrix(gen, n, d, 3), k = random_matrix(gen, m, d, 3), v = random_matrix(gen, m, p, 3);
    const auto w = nn::attention_weights(q, k);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (double x : w.row(i)) s += x;
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    Matrix kp(m, d), vp(m, p);
    for (std::size_t j = 0; j < m; ++j) {
      std::copy(k.row(perm[j]).begin(), k.row(perm[j]).end(), kp.row(j).begin());
      std::copy(v.row(perm[j]).begin(), v.row(perm[j]).end(), vp.row(j).begin());
    }
    const auto a = nn::attention(q, k, v), b = nn::attention(q, kp, vp);
    for (std::size_t i = 0; i < a.size(); ++i) worst_perm = std::max(worst_perm, std::abs(a.values()[i] - b.values()[i]));
  }
  o.check(worst_sum <= 1e-9, "row sums");
  o.check(worst_perm <= 1e-12, "permutation equivariance");
  const auto out = nn::attention(Matrix{{1, 0}}, Matrix{{1, 0}, {0, 1}}, Matrix{{1, 0}, {0, 1}});
  const double e = std::exp(1.0 / std::sqrt(2.0));
  o.check(std::abs(out(0, 0) - e / (e + 1)) <= 1e-9 && std::abs(out(0, 1) - 1 / (e + 1)) <= 1e-9, "2x2 example");
  o.detail << "max |row sum - 1|=" << worst_sum << " max permutation diff=" << worst_perm;
}

void gradient_check(Outcome& o) {
  nn::ModelConfig c;
  c.moe = {3, 2, 4, 6};
  c.encoder_layers = 2;
  c.decoder_layers = 2;
  auto m = nn::create_transformer_model(testing::toy_corpus(), c, 11);
  o.check(m.vocab().size() <= 8, "vocab <= 8");
  double worst = 0;
  std::string where;
  std::size_t entries = 0;
  for (const auto& pair : testing::toy_corpus().pairs) {
    const auto r = testing::gradient_check(m, m.encode_pair(pair));
    entries += r.entries;
    if (r.max_relative_error >= worst) worst = r.max_relative_error, where = r.worst_parameter;
  }
  o.check(worst < 1e-4, "relative error");
  o.detail << "entries=" << entries << " max relative error=" << worst << " at " << where;
}

void moe_contract(Outcome& o) {
  std::mt19937_64 gen(77);
  for (int it = 0; it < 2000; ++it) {
    const std::size_t e = 1 + gen() % 8, k = 1 + gen() % e, d = 1 + gen() % 6;
    const auto w = random_matrix(gen, d, e, 2);
    const auto x = random_matrix(gen, 1, d, 2);
    const auto g = nn::moe_gate(x.row(0), w, k);
    std::size_t nonzero = 0;
    double sum = 0;
    for (double v : g) nonzero += v != 0.0, sum += v;
    o.check(nonzero == k, "exactly k nonzeros");
    o.check(std::abs(sum - 1.0) <= 1e-9, "gate sums to 1");
  }
  for (int it = 0; it < 100; ++it) {
    const std::size_t d = 1 + gen() % 6, h = 1 + gen() % 8;
    const nn::FeedForward ex{random_matrix(gen, d, h), random_matrix(gen, 1, h), random_matrix(gen, h, d),
                             random_matrix(gen, 1, d)};
    const auto x = random_matrix(gen, 1 + gen() % 5, d);
    const std::vector<nn::FeedForward> one{ex};
    o.check(nn::moe_forward(x, one, random_matrix(gen, d, 1), 1) == ex(x), "E=1 equals expert");
  }
  o.detail << "2000 gates, 100 single-expert cases";
}

void dispatch(Outcome& o) {
  nn::TrainConfig t;
  t.epochs = 1;
  t.model.moe = {2, 1, 4, 4};
  o.check(nn::train_model(testing::toy_corpus(), "transformer", t).kind() == nn::ModelKind::transformer, "transformer");
  o.check(nn::train_model(testing::toy_corpus(), "lstm", t).kind() == nn::ModelKind::lstm, "lstm");
  std::string message;
  try {
    nn::train_model(testing::toy_corpus(), "rnn", t);
  } catch (const Error& e) {
    message = e.what();
  }
  o.check(message == "Unknown model type: rnn", "library message");
  testing::TempDir dir;
  dir.write("s.txt", "a b\nb a\nc a\n");
  const auto r = testing::run_cli({"pipeline", "--source", (dir / "s.txt").string(), "--reference",
                                   (dir / "s.txt").string(), "--lang", "eng_Latn", "--model-type", "rnn", "--out",
                                   (dir / "out").string()});
  o.check(r.exit_code == 2, "CLI exit code");
  o.check(r.err.find("Unknown model type: rnn") != std::string::npos, "CLI stderr");
  o.detail << "library: '" << message << "' CLI exit=" << r.exit_code;
}

void training_sanity(Outcome& o) {
  const auto data = testing::copy_corpus(20, 1);
  nn::TrainConfig t;
  t.epochs = 200;
  const auto m = nn::train_model(data, "transformer", t);
  const auto& log = m.training_log();
  o.check(log.size() == 200, "log length");
  o.check(log.back() < log.front(), "loss decreased");
  std::size_t exact = 0;
  for (const auto& p : data.pairs) exact += join_words(m.translate(tokenize_words(p.source))) == p.reference;
  o.check(exact * 10 >= data.size() * 8, ">= 80% exact");
  o.detail << "loss " << log.front() << " -> " << log.back() << ", exact " << exact << "/" << data.size();
}

void language_id(Outcome& o) {
  const auto& langs = testing::fixture_languages();
  const auto profiles = testing::train_fixture_profiles(langs, {2, 3});
  const auto default_profiles = testing::train_fixture_profiles(langs);
  std::size_t correct = 0, total = 0, default_correct = 0;
  std::vector<std::string> pool;
  for (const auto& l : langs) {
    const auto s = testing::langid_sentences(l);
    o.check(s.size() >= 60, "fixture size");
    for (std::size_t i = 50; i < s.size(); ++i) {
      o.check(unicode::decode(s[i]).size() >= 40, "held-out length");
      ++total;
      correct += predict_language(s[i], profiles).best == l;
      default_correct += predict_language(s[i], default_profiles).best == l;
    }
    pool.insert(pool.end(), s.begin(), s.end());
  }
  o.check(langs.size() >= 5, ">= 5 languages");
  o.check(correct * 100 >= total * 95, "accuracy");

  std::mt19937_64 gen(99);
  const std::string noise = "abcxyz ñéü.,!?0123456789 жзк";
  const auto noise_cps = unicode::decode(noise);
  for (int it = 0; it < 100; ++it) {
    std::string text;
    if (it % 2 == 0) {
      const auto words = tokenize_words(pool[gen() % pool.size()] + " " + pool[gen() % pool.size()]);
      for (std::size_t i = gen() % words.size(); i < words.size(); i += 1 + gen() % 2) text += words[i] + " ";
    } else {
      std::u32string s;
      for (std::size_t i = 0, n = 3 + gen() % 40; i < n; ++i) s.push_back(noise_cps[gen() % noise_cps.size()]);
      text = unicode::encode(s) + "q";
    }
    const auto a = predict_language(text, profiles), b = predict_language(text + " " + text, profiles);
    o.check(a.ranking == b.ranking, "duplication invariance");
    o.check(predict_language(text, default_profiles).ranking ==
                predict_language(text + " " + text, default_profiles).ranking,
            "duplication invariance, default orders");
  }
  o.detail << "orders 2..3 accuracy " << correct << "/" << total << " over " << langs.size()
           << " languages (orders 1..3: " << default_correct << "/" << total << ")";
}

void service_security(Outcome& o) {
  testing::TempDir dir;
  testing::write_fixture_profiles(dir / "profiles");
  service::ApiConfig cfg;
  cfg.api_token = "Fixture-Token-0123";
  cfg.capsule_dir = testing::fixture("capsules");
  cfg.profile_dir = dir / "profiles";
  service::Service svc(cfg);
  svc.reload();
  service::HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  std::thread thread([&] { server.listen(); });
  server.wait_until_ready();
  httplib::Client c("127.0.0.1", port);

  std::vector<std::optional<std::string>> bad{std::nullopt};
  for (std::size_t i = 0; i < cfg.api_token.size(); ++i) {
    auto t = cfg.api_token;
    t[i] = t[i] == 'x' ? 'y' : 'x';
    bad.push_back("Bearer " + t);
  }
  struct Route {
    std::string method, path;
  };
  const std::vector<Route> routes{{"POST", "/v1/detect"}, {"POST", "/v1/translate"}, {"POST", "/v1/evaluate"},
                                  {"GET", "/v1/capsules"}, {"POST", "/v1/reload"}};
  std::size_t rejected = 0, attempts = 0;
  for (const auto& route : routes) {
    for (const auto& auth : bad) {
      httplib::Headers h;
      if (auth) h.emplace("Authorization", *auth);
      auto res = route.method == "GET" ? c.Get(route.path, h) : c.Post(route.path, h, R"({"text":"hola"})", "application/json");
      ++attempts;
      if (res && res->status == 401 && nlohmann::json::parse(res->body)["error"] == "unauthorized") ++rejected;
    }
  }
  o.check(rejected == attempts, "401 for bad tokens");
  auto health = c.Get("/v1/health");
  o.check(health && health->status == 200, "health open");

  const httplib::Headers auth{{"Authorization", "Bearer " + cfg.api_token}};
  const std::string text = "El perro y el gato duermen en la casa grande.";
  auto res = c.Post("/v1/detect", auth, nlohmann::json{{"text", text}}.dump(), "application/json");
  const auto profiles = load_profiles(cfg.profile_dir);
  const auto prediction = predict_language(text, profiles);
  o.check(res && res->body == to_json(prediction).dump() + "\n", "detect equals library");

  res = c.Post("/v1/translate", auth, nlohmann::json{{"text", text}}.dump(), "application/json");
  const auto registry = load_registry(cfg.capsule_dir);
  const auto literal = translate_literal(text, registry.select(prediction.best));
  nlohmann::json tj;
  if (res) tj = nlohmann::json::parse(res->body);
  o.check(res && res->status == 200 && tj["translation"] == literal.text() && tj["detected_lang"] == prediction.best &&
              tj["detection_score"] == prediction.score && tj["oov_tokens"] == literal.oov_tokens(),
          "translate equals library");

  const std::vector<std::string> hyps{literal.text()}, refs{"The dog and the cat sleep in the big house."};
  res = c.Post("/v1/evaluate", auth, nlohmann::json{{"hypotheses", hyps}, {"references", refs}}.dump(), "application/json");
  o.check(res && res->body == to_json(metrics::evaluate_all(hyps, refs)).dump() + "\n", "evaluate equals library");
  server.stop();
  thread.join();
  o.detail << rejected << "/" << attempts << " unauthorized requests rejected; round trip '" << literal.text() << "'";
}

std::string random_word(std::mt19937_64& gen) {
  static const std::vector<std::string> syll{"ka", "lo", "mi", "ñu", "té", "ra", "zo", "bé", "qu", "s"};
  std::string w;
  for (std::size_t i = 0, n = 1 + gen() % 3; i < n; ++i) w += syll[gen() % syll.size()];
  return w;
}

DictionaryCapsule random_capsule(std::mt19937_64& gen, const std::vector<std::string>& vocab, std::size_t entries) {
  DictionaryCapsule c("xxx_Latn", "random", 1 + static_cast<long>(gen() % 5));
  for (std::size_t i = 0; i < entries; ++i) {
    std::string head = vocab[gen() % vocab.size()];
    if (gen() % 4 == 0) head += " " + vocab[gen() % vocab.size()];
    std::vector<Gloss> glosses;
    for (std::size_t g = 0, n = 1 + gen() % 3; g < n; ++g) {
      glosses.push_back({"g" + std::to_string(gen() % 50), static_cast<double>(gen() % 5) / 4.0});
    }
    c.put(head, glosses);
  }
  return c;
}

void capsule_semantics(Outcome& o) {
  std::mt19937_64 gen(5);
  testing::TempDir dir;
  std::size_t cases = 0;
  for (int it = 0; it < 1200; ++it, ++cases) {
    std::vector<std::string> vocab;
    for (int i = 0; i < 8; ++i) vocab.push_back(random_word(gen));
    std::string text;
    for (std::size_t i = 0, n = gen() % 8; i < n; ++i) {
      text += (gen() % 3 == 0 ? "," : "") + vocab[gen() % vocab.size()] + (gen() % 5 == 0 ? "." : "") + " ";
    }
    // OOV passthrough with the empty capsule.
    const DictionaryCapsule empty("xxx_Latn", "", 1);
    const auto t = translate_literal(text, empty);
    o.check(t.output_tokens == t.source_tokens, "empty capsule passthrough");
    for (std::size_t i = 0; i < t.source_tokens.size(); ++i) {
      o.check(t.oov_indices.count(i) == !is_punctuation_token(t.source_tokens[i]), "oov covers non-punctuation");
    }
    // Greedy longest match on a constructed two-word entry.
    const auto a = vocab[0], b = vocab[1];
    if (normalize_headword(a) != normalize_headword(b)) {
      DictionaryCapsule pair("xxx_Latn", "", 1);
      pair.put(a, {{"ONE", 1}});
      pair.put(a + " " + b, {{"BOTH", 1}});
      const auto lm = translate_literal(a + " " + b, pair);
      o.check(lm.output_tokens == Tokens{"BOTH"}, "longest match");
    }
    // Merge precedence and idempotence.
    const auto base = random_capsule(gen, vocab, 1 + gen() % 6);
    const auto overlay = random_capsule(gen, vocab, 1 + gen() % 6);
    const auto merged = merge_capsules(base, overlay);
    for (const auto& [head, glosses] : overlay.entries()) {
      o.check(merged.find(head) && *merged.find(head) == glosses, "overlay entry wins");
      o.check(translate_literal(head, merged).output_tokens.front() == glosses.front().text, "merged gloss used");
    }
    auto again = merge_capsules(base, merged);
    again.set_version(merged.version());
    o.check(again == merged, "merge idempotence");
    // File round trip.
    const auto path = dir / "c.capsule";
    save_capsule(merged, path);
    o.check(load_capsule(path) == merged, "round trip");
  }
  o.detail << cases << " randomized cases";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion>> criteria{
      {"Brevity penalty and length ratio identity", brevity_penalty_identity},
      {"TER aggregation identity", ter_aggregation},
      {"chrF defaults", chrf_defaults},
      {"Metric property suite", metric_properties},
      {"Attention numeric suite", attention_suite},
      {"Gradient check on toy transformer", gradient_check},
      {"MoE gating contract", moe_contract},
      {"Model type dispatch", dispatch},
      {"Training sanity on copy task", training_sanity},
      {"Language identification", language_id},
      {"Service security and round trip", service_security},
      {"Capsule semantics", capsule_semantics},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.ok;
    std::printf("%s  %-42s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed;
}
