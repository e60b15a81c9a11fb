#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "alpdc/autodiff.hpp"
#include "alpdc/corpus.hpp"
#include "alpdc/error.hpp"
#include "alpdc/io.hpp"
#include "alpdc/matrix.hpp"
#include "alpdc/metrics.hpp"
#include "alpdc/random.hpp"

namespace alpdc::nn {

using Tokens = std::vector<std::string>;

enum class ModelKind { transformer, lstm };

constexpr std::string_view to_string(ModelKind k) noexcept {
  return k == ModelKind::transformer ? "transformer" : "lstm";
}

struct MoEConfig {
  std::size_t num_experts = 4;
  std::size_t top_k = 2;
  std::size_t model_dim = 32;
  std::size_t hidden_dim = 64;

  void validate() const {
    if (num_experts < 1) throw Error(ErrorCode::BadK, "need at least one expert");
    if (top_k < 1 || top_k > num_experts) {
      throw Error(ErrorCode::BadK, "top_k must satisfy 1 <= k <= " + std::to_string(num_experts));
    }
    if (model_dim < 1 || hidden_dim < 1) throw Error(ErrorCode::DimensionMismatch, "dimensions must be positive");
  }

  friend bool operator==(const MoEConfig&, const MoEConfig&) = default;
};

struct ModelConfig {
  MoEConfig moe;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class Optimizer { sgd, adam };

struct TrainConfig {
  std::string model_type = "transformer";
  double learning_rate = 0.1;
  std::size_t epochs = 50;
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::sgd;
  ModelConfig model;

  void validate() const {
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::FormatError, "learning_rate must be > 0");
    if (epochs < 1) throw Error(ErrorCode::FormatError, "epochs must be >= 1");
    if (batch_size < 1) throw Error(ErrorCode::FormatError, "batch_size must be >= 1");
  }
};

/// Token <-> id map. Ids 0..3 are PAD, BOS, EOS, UNK.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0, kBos = 1, kEos = 2, kUnk = 3;

  Vocabulary() : tokens_{"<pad>", "<s>", "</s>", "<unk>"} { reindex(); }

  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 4 || tokens_[0] != "<pad>" || tokens_[1] != "<s>" || tokens_[2] != "</s>" ||
        tokens_[3] != "<unk>") {
      throw Error(ErrorCode::FormatError, "vocabulary must start with the reserved symbols");
    }
    reindex();
  }

  /// Reserved symbols followed by every corpus token, sorted.
  static Vocabulary from_corpus(const ParallelCorpus& data) {
    std::vector<std::string> words;
    for (const auto& p : data.pairs) {
      for (const auto* side : {&p.source, &p.reference}) {
        auto t = tokenize_words(*side);
        words.insert(words.end(), t.begin(), t.end());
      }
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    Vocabulary v;
    for (auto& w : words) {
      if (!v.index_.count(w)) v.tokens_.push_back(std::move(w));
    }
    v.reindex();
    return v;
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }

  std::size_t id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
  }

  std::vector<std::size_t> encode(const Tokens& tokens) const {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id(t));
    return ids;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Example {
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
};

/// Encoder-decoder over a shared vocabulary. The transformer kind runs
/// embedding -> encoder layers -> sparse MoE block -> decoder layers attending
/// to the fused representation -> output projection. The LSTM kind runs a
/// single-layer encoder cell whose final state seeds a single-layer decoder cell.
///
/// Parameters live in graph leaf nodes. Copies are deep.
class Seq2SeqModel {
 public:
  Seq2SeqModel(ModelKind kind, Vocabulary vocab, ModelConfig config, std::uint64_t seed)
      : kind_(kind), vocab_(std::move(vocab)), config_(config), seed_(seed) {}

  Seq2SeqModel(const Seq2SeqModel& o)
      : kind_(o.kind_), vocab_(o.vocab_), config_(o.config_), seed_(o.seed_), training_log_(o.training_log_) {
    for (const auto& [name, v] : o.params_) add_param(name, v.value());
  }
  Seq2SeqModel& operator=(const Seq2SeqModel& o) {
    if (this != &o) *this = Seq2SeqModel(o);
    return *this;
  }
  Seq2SeqModel(Seq2SeqModel&&) noexcept = default;
  Seq2SeqModel& operator=(Seq2SeqModel&&) noexcept = default;

  ModelKind kind() const noexcept { return kind_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const ModelConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<std::pair<std::string, ad::Var>>& parameters() const noexcept { return params_; }
  std::vector<std::pair<std::string, ad::Var>>& parameters() noexcept { return params_; }

  bool has_param(std::string_view name) const { return index_.count(std::string(name)) > 0; }

  const ad::Var& param(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw Error(ErrorCode::DimensionMismatch, "no parameter named " + std::string(name));
    return params_[it->second].second;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, v] : params_) n += v.value().size();
    return n;
  }

  /// Mean training loss per epoch, in order.
  const std::vector<double>& training_log() const noexcept { return training_log_; }
  std::vector<double>& training_log() noexcept { return training_log_; }

  ad::Var& add_param(std::string name, Matrix value) {
    index_.emplace(name, params_.size());
    params_.emplace_back(std::move(name), ad::parameter(std::move(value)));
    return params_.back().second;
  }

  Example encode_pair(const SentencePair& pair) const {
    return {vocab_.encode(tokenize_words(pair.source)), vocab_.encode(tokenize_words(pair.reference))};
  }

  /// Teacher-forced logits: one row per decoder input position (BOS + target).
  ad::Var logits(const std::vector<std::size_t>& source, const std::vector<std::size_t>& decoder_input) const {
    if (source.empty()) throw Error(ErrorCode::EmptyInput, "empty source sequence");
    return kind_ == ModelKind::transformer ? transformer_logits(transformer_encode(source), decoder_input)
                                           : lstm_logits(lstm_encode(source), decoder_input);
  }

  /// Token cross-entropy with teacher forcing; targets are target + EOS.
  ad::Var loss(const Example& ex) const {
    std::vector<std::size_t> input{Vocabulary::kBos};
    input.insert(input.end(), ex.target.begin(), ex.target.end());
    std::vector<std::size_t> expected = ex.target;
    expected.push_back(Vocabulary::kEos);
    return ad::cross_entropy(logits(ex.source, input), std::move(expected));
  }

  /// Greedy decoding from BOS, stopping at EOS or 2x the source length.
  std::vector<std::size_t> greedy_decode(const std::vector<std::size_t>& source) const {
    std::vector<std::size_t> out;
    if (source.empty()) return out;
    const std::size_t cap = 2 * source.size();
    std::vector<std::size_t> input{Vocabulary::kBos};
    if (kind_ == ModelKind::transformer) {
      const ad::Var memory = transformer_encode(source);
      while (out.size() < cap) {
        const auto next = argmax_last(transformer_logits(memory, input).value());
        if (next == Vocabulary::kEos) break;
        out.push_back(next);
        input.push_back(next);
      }
    } else {
      auto state = lstm_encode(source);
      const auto& emb = param("embedding");
      while (out.size() < cap) {
        state = lstm_cell("decoder", ad::gather_rows(emb, {input.back()}), state);
        auto logits = ad::add_bias(ad::matmul(state.h, param("output.weight")), param("output.bias"));
        const auto next = argmax_last(logits.value());
        if (next == Vocabulary::kEos) break;
        out.push_back(next);
        input.push_back(next);
      }
    }
    return out;
  }

  Tokens translate(const Tokens& source) const {
    Tokens out;
    for (auto id : greedy_decode(vocab_.encode(source))) out.push_back(vocab_.token(id));
    return out;
  }

 private:
  struct RecurrentState {
    ad::Var h;
    ad::Var c;
  };

  static std::size_t argmax_last(const Matrix& logits) {
    auto row = logits.row(logits.rows() - 1);
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }

  static Matrix positional_encoding(std::size_t length, std::size_t dim) {
    Matrix pe(length, dim);
    for (std::size_t pos = 0; pos < length; ++pos) {
      for (std::size_t i = 0; i < dim; ++i) {
        const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
        pe(pos, i) = (i % 2 == 0) ? std::sin(static_cast<double>(pos) * rate) : std::cos(static_cast<double>(pos) * rate);
      }
    }
    return pe;
  }

  ad::Var embed(const std::vector<std::size_t>& ids) const {
    const double scale = std::sqrt(static_cast<double>(config_.moe.model_dim));
    auto x = ad::scale(ad::gather_rows(param("embedding"), ids), scale);
    return ad::add(x, ad::constant(positional_encoding(ids.size(), config_.moe.model_dim)));
  }

  ad::Var attention_block(const std::string& prefix, const ad::Var& queries, const ad::Var& context,
                          bool causal) const {
    auto q = ad::matmul(queries, param(prefix + ".q"));
    auto k = ad::matmul(context, param(prefix + ".k"));
    auto v = ad::matmul(context, param(prefix + ".v"));
    auto scores = ad::scale(ad::matmul_bt(q, k), 1.0 / std::sqrt(static_cast<double>(k.cols())));
    auto mixed = ad::matmul(ad::softmax_rows(scores, causal), v);
    return ad::matmul(mixed, param(prefix + ".o"));
  }

  ad::Var feed_forward(const std::string& prefix, const ad::Var& x) const {
    auto h = ad::relu(ad::add_bias(ad::matmul(x, param(prefix + ".w1")), param(prefix + ".b1")));
    return ad::add_bias(ad::matmul(h, param(prefix + ".w2")), param(prefix + ".b2"));
  }

  ad::Var norm(const std::string& prefix, const ad::Var& x) const {
    return ad::layer_norm(x, param(prefix + ".gain"), param(prefix + ".bias"));
  }

  ad::Var transformer_encode(const std::vector<std::size_t>& source) const {
    ad::Var x = embed(source);
    for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
      const std::string p = "enc" + std::to_string(l);
      x = norm(p + ".ln1", ad::add(x, attention_block(p + ".attn", x, x, false)));
      x = norm(p + ".ln2", ad::add(x, feed_forward(p + ".ffn", x)));
    }
    // Per-token sparse gating; experts no row selected are not evaluated.
    auto gates = ad::top_k_gate(ad::matmul(x, param("moe.gate")), config_.moe.top_k);
    std::optional<ad::Var> fused;
    for (std::size_t e = 0; e < config_.moe.num_experts; ++e) {
      bool active = false;
      for (std::size_t i = 0; i < gates.rows(); ++i) active = active || gates.value()(i, e) != 0.0;
      if (!active) continue;
      auto contribution = ad::scale_rows_by_column(feed_forward("moe.expert" + std::to_string(e), x), gates, e);
      fused = fused ? ad::add(*fused, contribution) : contribution;
    }
    return norm("moe.ln", ad::add(x, *fused));
  }

  ad::Var transformer_logits(const ad::Var& memory, const std::vector<std::size_t>& decoder_input) const {
    ad::Var y = embed(decoder_input);
    for (std::size_t l = 0; l < config_.decoder_layers; ++l) {
      const std::string p = "dec" + std::to_string(l);
      y = norm(p + ".ln1", ad::add(y, attention_block(p + ".self", y, y, true)));
      y = norm(p + ".ln2", ad::add(y, attention_block(p + ".cross", y, memory, false)));
      y = norm(p + ".ln3", ad::add(y, feed_forward(p + ".ffn", y)));
    }
    return ad::add_bias(ad::matmul(y, param("output.weight")), param("output.bias"));
  }

  RecurrentState lstm_cell(const std::string& prefix, const ad::Var& x, const RecurrentState& s) const {
    const std::size_t hd = config_.moe.hidden_dim;
    auto z = ad::add_bias(ad::add(ad::matmul(x, param(prefix + ".wx")), ad::matmul(s.h, param(prefix + ".wh"))),
                          param(prefix + ".b"));
    auto i = ad::sigmoid(ad::slice_cols(z, 0, hd));
    auto f = ad::sigmoid(ad::slice_cols(z, hd, hd));
    auto o = ad::sigmoid(ad::slice_cols(z, 2 * hd, hd));
    auto g = ad::tanh(ad::slice_cols(z, 3 * hd, hd));
    auto c = ad::add(ad::hadamard(f, s.c), ad::hadamard(i, g));
    return {ad::hadamard(o, ad::tanh(c)), c};
  }

  RecurrentState lstm_encode(const std::vector<std::size_t>& source) const {
    const std::size_t hd = config_.moe.hidden_dim;
    RecurrentState s{ad::constant(Matrix(1, hd)), ad::constant(Matrix(1, hd))};
    const auto& emb = param("embedding");
    for (auto id : source) s = lstm_cell("encoder", ad::gather_rows(emb, {id}), s);
    return s;
  }

  ad::Var lstm_logits(RecurrentState s, const std::vector<std::size_t>& decoder_input) const {
    const auto& emb = param("embedding");
    std::vector<ad::Var> hs;
    for (auto id : decoder_input) {
      s = lstm_cell("decoder", ad::gather_rows(emb, {id}), s);
      hs.push_back(s.h);
    }
    return ad::add_bias(ad::matmul(ad::concat_rows(hs), param("output.weight")), param("output.bias"));
  }

  ModelKind kind_;
  Vocabulary vocab_;
  ModelConfig config_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, ad::Var>> params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> training_log_;
};

namespace detail {

/// Uniform(-1, 1) / sqrt(fan_in) with fan_in = rows.
inline Matrix init_weight(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (auto& v : m.values()) v = rng.symmetric() * scale;
  return m;
}

inline void add_norm(Seq2SeqModel& m, const std::string& prefix, std::size_t dim) {
  m.add_param(prefix + ".gain", Matrix(1, dim, 1.0));
  m.add_param(prefix + ".bias", Matrix(1, dim, 0.0));
}

inline void add_attention(Seq2SeqModel& m, Rng& rng, const std::string& prefix, std::size_t dim) {
  for (const char* w : {".q", ".k", ".v", ".o"}) m.add_param(prefix + w, init_weight(rng, dim, dim));
}

inline void add_feed_forward(Seq2SeqModel& m, Rng& rng, const std::string& prefix, std::size_t dim,
                             std::size_t hidden) {
  m.add_param(prefix + ".w1", init_weight(rng, dim, hidden));
  m.add_param(prefix + ".b1", Matrix(1, hidden));
  m.add_param(prefix + ".w2", init_weight(rng, hidden, dim));
  m.add_param(prefix + ".b2", Matrix(1, dim));
}

inline void add_lstm(Seq2SeqModel& m, Rng& rng, const std::string& prefix, std::size_t in, std::size_t hidden) {
  m.add_param(prefix + ".wx", init_weight(rng, in, 4 * hidden));
  m.add_param(prefix + ".wh", init_weight(rng, hidden, 4 * hidden));
  m.add_param(prefix + ".b", Matrix(1, 4 * hidden));
}

}  // namespace detail

inline Seq2SeqModel create_transformer_model(const ParallelCorpus& data, const ModelConfig& config,
                                             std::uint64_t seed) {
  if (data.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build a model from an empty corpus");
  config.moe.validate();
  Seq2SeqModel m(ModelKind::transformer, Vocabulary::from_corpus(data), config, seed);
  Rng rng(seed);
  const auto d = config.moe.model_dim;
  const auto h = config.moe.hidden_dim;
  const auto v = m.vocab().size();
  m.add_param("embedding", detail::init_weight(rng, v, d));
  for (std::size_t l = 0; l < config.encoder_layers; ++l) {
    const std::string p = "enc" + std::to_string(l);
    detail::add_attention(m, rng, p + ".attn", d);
    detail::add_norm(m, p + ".ln1", d);
    detail::add_feed_forward(m, rng, p + ".ffn", d, h);
    detail::add_norm(m, p + ".ln2", d);
  }
  m.add_param("moe.gate", detail::init_weight(rng, d, config.moe.num_experts));
  for (std::size_t e = 0; e < config.moe.num_experts; ++e) {
    detail::add_feed_forward(m, rng, "moe.expert" + std::to_string(e), d, h);
  }
  detail::add_norm(m, "moe.ln", d);
  for (std::size_t l = 0; l < config.decoder_layers; ++l) {
    const std::string p = "dec" + std::to_string(l);
    detail::add_attention(m, rng, p + ".self", d);
    detail::add_norm(m, p + ".ln1", d);
    detail::add_attention(m, rng, p + ".cross", d);
    detail::add_norm(m, p + ".ln2", d);
    detail::add_feed_forward(m, rng, p + ".ffn", d, h);
    detail::add_norm(m, p + ".ln3", d);
  }
  m.add_param("output.weight", detail::init_weight(rng, d, v));
  m.add_param("output.bias", Matrix(1, v));
  return m;
}

inline Seq2SeqModel create_lstm_model(const ParallelCorpus& data, const ModelConfig& config, std::uint64_t seed) {
  if (data.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build a model from an empty corpus");
  if (config.moe.model_dim < 1 || config.moe.hidden_dim < 1) {
    throw Error(ErrorCode::DimensionMismatch, "dimensions must be positive");
  }
  Seq2SeqModel m(ModelKind::lstm, Vocabulary::from_corpus(data), config, seed);
  Rng rng(seed);
  const auto d = config.moe.model_dim;
  const auto h = config.moe.hidden_dim;
  const auto v = m.vocab().size();
  m.add_param("embedding", detail::init_weight(rng, v, d));
  detail::add_lstm(m, rng, "encoder", d, h);
  detail::add_lstm(m, rng, "decoder", d, h);
  m.add_param("output.weight", detail::init_weight(rng, h, v));
  m.add_param("output.bias", Matrix(1, v));
  return m;
}

/// Mini-batch training on token cross-entropy. Example order is reshuffled
/// every epoch from `config.seed`; the mean loss of each epoch is appended to
/// the model's training log.
inline void fit(Seq2SeqModel& model, const ParallelCorpus& data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot train on an empty corpus");
  std::vector<Example> examples;
  for (const auto& p : data.pairs) examples.push_back(model.encode_pair(p));

  auto& params = model.parameters();
  std::vector<Matrix> m1, m2;
  if (config.optimizer == Optimizer::adam) {
    for (auto& [name, v] : params) {
      m1.emplace_back(v.rows(), v.cols());
      m2.emplace_back(v.rows(), v.cols());
    }
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::size_t step = 0;

  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (auto& [name, v] : params) v.zero_grad();
      for (std::size_t b = start; b < end; ++b) {
        auto loss = model.loss(examples[order[b]]);
        epoch_loss += loss.value()(0, 0);
        ad::backward(loss);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      ++step;
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto& value = params[p].second.mutable_value().values();
        const auto& grad = params[p].second.grad().values();
        if (config.optimizer == Optimizer::sgd) {
          for (std::size_t k = 0; k < value.size(); ++k) value[k] -= config.learning_rate * grad[k] * inv;
        } else {
          auto& a = m1[p].values();
          auto& s = m2[p].values();
          const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
          const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
          for (std::size_t k = 0; k < value.size(); ++k) {
            const double g = grad[k] * inv;
            a[k] = kBeta1 * a[k] + (1.0 - kBeta1) * g;
            s[k] = kBeta2 * s[k] + (1.0 - kBeta2) * g * g;
            value[k] -= config.learning_rate * (a[k] / c1) / (std::sqrt(s[k] / c2) + kEps);
          }
        }
      }
    }
    model.training_log().push_back(epoch_loss / static_cast<double>(examples.size()));
  }
}

/// Builds the model named by `model_type` and trains it.
inline Seq2SeqModel train_model(const ParallelCorpus& data, const std::string& model_type, const TrainConfig& config) {
  ModelKind kind;
  if (model_type == "transformer") {
    kind = ModelKind::transformer;
  } else if (model_type == "lstm") {
    kind = ModelKind::lstm;
  } else {
    throw Error(ErrorCode::UnknownModelType, "Unknown model type: " + model_type);
  }
  config.validate();
  Seq2SeqModel model = kind == ModelKind::transformer ? create_transformer_model(data, config.model, config.seed)
                                                      : create_lstm_model(data, config.model, config.seed);
  fit(model, data, config);
  return model;
}

/// Anything that maps a source token list to an output token list.
template <typename T>
concept SequenceTranslator = requires(const T& t, const Tokens& source) {
  { t.translate(source) } -> std::convertible_to<Tokens>;
};

/// Decodes every source sentence and scores the outputs against the references.
template <SequenceTranslator T>
metrics::EvaluationReport evaluate_model(const T& model, const ParallelCorpus& data,
                                         const metrics::EvaluateOptions& options = {}) {
  std::vector<std::string> hyps, refs;
  for (const auto& p : data.pairs) {
    hyps.push_back(join_words(model.translate(tokenize_words(p.source))));
    refs.push_back(p.reference);
  }
  return metrics::evaluate_all(hyps, refs, options);
}

// ---------------------------------------------------------------------------
// checkpoints

inline constexpr std::string_view kCheckpointMagic = "alpdc-checkpoint 1";

/// Text checkpoint: kind, config, seed, vocabulary, training log, then
/// every parameter as a `param <name> <rows> <cols>` header followed by its
/// values in shortest round-trip form.
inline std::string serialize_model(const Seq2SeqModel& m) {
  std::ostringstream out;
  const auto& c = m.config();
  out << kCheckpointMagic << "\n";
  out << "kind " << to_string(m.kind()) << "\n";
  out << "config model_dim " << c.moe.model_dim << " hidden_dim " << c.moe.hidden_dim << " num_experts "
      << c.moe.num_experts << " top_k " << c.moe.top_k << " encoder_layers " << c.encoder_layers
      << " decoder_layers " << c.decoder_layers << "\n";
  out << "seed " << m.seed() << "\n";
  out << "vocab " << m.vocab().size() << "\n";
  for (const auto& t : m.vocab().tokens()) out << t << "\n";
  out << "log " << m.training_log().size() << "\n";
  for (double v : m.training_log()) out << alpdc::detail::format_double(v) << "\n";
  for (const auto& [name, v] : m.parameters()) {
    out << "param " << name << " " << v.rows() << " " << v.cols() << "\n";
    const auto& vals = v.value().values();
    for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? " " : "") << alpdc::detail::format_double(vals[i]);
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

inline Seq2SeqModel parse_model(std::string_view content) {
  std::istringstream in{std::string(content)};
  auto fail = [](const std::string& what) -> void { throw Error(ErrorCode::FormatError, "checkpoint: " + what); };
  std::string line, word;
  if (!std::getline(in, line) || line != kCheckpointMagic) fail("bad magic line");

  std::string kind_name;
  in >> word >> kind_name;
  if (word != "kind" || (kind_name != "transformer" && kind_name != "lstm")) fail("bad kind");
  ModelConfig c;
  in >> word;
  if (word != "config") fail("missing config");
  for (int i = 0; i < 6; ++i) {
    std::string key;
    std::size_t value = 0;
    in >> key >> value;
    if (key == "model_dim") c.moe.model_dim = value;
    else if (key == "hidden_dim") c.moe.hidden_dim = value;
    else if (key == "num_experts") c.moe.num_experts = value;
    else if (key == "top_k") c.moe.top_k = value;
    else if (key == "encoder_layers") c.encoder_layers = value;
    else if (key == "decoder_layers") c.decoder_layers = value;
    else fail("unknown config key " + key);
  }
  std::uint64_t seed = 0;
  std::size_t count = 0;
  in >> word >> seed;
  if (word != "seed") fail("missing seed");
  in >> word >> count;
  if (word != "vocab") fail("missing vocab");
  std::getline(in, line);
  std::vector<std::string> tokens(count);
  for (auto& t : tokens) {
    if (!std::getline(in, t)) fail("truncated vocabulary");
  }
  Seq2SeqModel m(kind_name == "transformer" ? ModelKind::transformer : ModelKind::lstm, Vocabulary(std::move(tokens)),
                 c, seed);
  in >> word >> count;
  if (word != "log") fail("missing log");
  for (std::size_t i = 0; i < count; ++i) {
    in >> word;
    auto v = alpdc::detail::parse_double(word);
    if (!v) fail("bad log value");
    m.training_log().push_back(*v);
  }
  while (in >> word && word == "param") {
    std::string name;
    std::size_t rows = 0, cols = 0;
    in >> name >> rows >> cols;
    Matrix value(rows, cols);
    for (auto& x : value.values()) {
      in >> word;
      auto v = alpdc::detail::parse_double(word);
      if (!v) fail("bad value in " + name);
      x = *v;
    }
    m.add_param(name, std::move(value));
  }
  if (word != "end") fail("missing end marker");
  return m;
}

inline void save_model(const Seq2SeqModel& m, const std::filesystem::path& path) {
  alpdc::detail::write_file(path, serialize_model(m));
}

inline Seq2SeqModel load_model(const std::filesystem::path& path) {
  return parse_model(alpdc::detail::read_file(path));
}

}  // namespace alpdc::nn
