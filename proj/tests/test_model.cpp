#include <gtest/gtest.h>

#include "alpdc/model.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace alpdc;
using namespace alpdc::nn;
using alpdc::testing::TempDir;
using alpdc::testing::toy_corpus;

namespace {

ModelConfig tiny(std::size_t d = 4, std::size_t h = 6) {
  ModelConfig c;
  c.moe = {3, 2, d, h};
  c.encoder_layers = 2;
  c.decoder_layers = 2;
  return c;
}

struct Identity {
  Tokens translate(const Tokens& t) const { return t; }
};
struct Silent {
  Tokens translate(const Tokens&) const { return {}; }
};

}  // namespace

TEST(Vocabulary, ReservedSymbolsAndSharedTokens) {
  const auto v = Vocabulary::from_corpus(toy_corpus());
  EXPECT_EQ(v.size(), 8u);
  EXPECT_EQ(v.token(Vocabulary::kPad), "<pad>");
  EXPECT_EQ(v.id("a"), v.id("a"));
  EXPECT_EQ(v.id("zebra"), Vocabulary::kUnk);
  EXPECT_EQ(v.encode({"d", "x"}), (std::vector<std::size_t>{v.id("d"), Vocabulary::kUnk}));
}

TEST(Model, TransformerShapes) {
  ParallelCorpus c;
  c.pairs = {{"uno dos", "one two"}, {"tres", "three"}};
  const auto m = create_transformer_model(c, tiny(8, 16), 1);
  EXPECT_EQ(m.kind(), ModelKind::transformer);
  EXPECT_EQ(m.param("embedding").rows(), m.vocab().size());
  EXPECT_EQ(m.param("embedding").cols(), 8u);
  EXPECT_EQ(m.param("output.weight").cols(), m.vocab().size());
  EXPECT_TRUE(m.has_param("moe.gate"));
  EXPECT_TRUE(m.has_param("moe.expert2.w1"));
  EXPECT_FALSE(m.has_param("moe.expert3.w1"));
  EXPECT_TRUE(m.has_param("dec1.cross.q"));

  const std::vector<std::size_t> src{4, 5, 6}, dec{Vocabulary::kBos, 4, 5, 6};
  const auto logits = m.logits(src, dec).value();
  EXPECT_EQ(logits.rows(), dec.size());
  EXPECT_EQ(logits.cols(), m.vocab().size());
  EXPECT_TRUE(all_finite(logits));
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    double s = 0;
    for (double p : softmax(logits.row(i))) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Model, LstmShapes) {
  const auto m = create_lstm_model(toy_corpus(), tiny(4, 5), 1);
  EXPECT_EQ(m.kind(), ModelKind::lstm);
  EXPECT_FALSE(m.has_param("moe.gate"));
  EXPECT_EQ(m.param("encoder.wx").cols(), 20u);
  EXPECT_EQ(m.param("output.weight").rows(), 5u);
  const auto logits = m.logits({4, 5}, {Vocabulary::kBos, 6}).value();
  EXPECT_EQ(logits.rows(), 2u);
  EXPECT_EQ(logits.cols(), m.vocab().size());
}

TEST(Model, InitializationIsSeeded) {
  const auto a = create_transformer_model(toy_corpus(), tiny(), 42);
  const auto b = create_transformer_model(toy_corpus(), tiny(), 42);
  const auto c = create_transformer_model(toy_corpus(), tiny(), 43);
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  EXPECT_NE(serialize_model(a), serialize_model(c));
  const double bound = 1.0 / std::sqrt(4.0);
  for (double v : a.param("enc0.attn.q").value().values()) EXPECT_LE(std::abs(v), bound);
}

TEST(Model, ConfigValidation) {
  ModelConfig bad = tiny();
  bad.moe.top_k = 4;
  EXPECT_THROW(create_transformer_model(toy_corpus(), bad, 0), Error);
  EXPECT_THROW(create_transformer_model(ParallelCorpus{}, tiny(), 0), Error);
  TrainConfig t;
  t.learning_rate = 0;
  EXPECT_THROW(train_model(toy_corpus(), "transformer", t), Error);
  t.learning_rate = 0.1;
  t.epochs = 0;
  EXPECT_THROW(train_model(toy_corpus(), "lstm", t), Error);
}

TEST(Model, DispatchByModelType) {
  TrainConfig t;
  t.epochs = 1;
  t.model = tiny();
  EXPECT_EQ(train_model(toy_corpus(), "transformer", t).kind(), ModelKind::transformer);
  EXPECT_EQ(train_model(toy_corpus(), "lstm", t).kind(), ModelKind::lstm);
  try {
    train_model(toy_corpus(), "rnn", t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownModelType);
    EXPECT_STREQ(e.what(), "Unknown model type: rnn");
  }
}

TEST(Model, TransformerGradientsMatchFiniteDifferences) {
  auto m = create_transformer_model(toy_corpus(), tiny(), 3);
  const auto r = alpdc::testing::gradient_check(m, m.encode_pair(toy_corpus().pairs[0]));
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter;
  EXPECT_EQ(r.entries, m.parameter_count());
}

TEST(Model, LstmGradientsMatchFiniteDifferences) {
  auto m = create_lstm_model(toy_corpus(), tiny(3, 4), 5);
  const auto r = alpdc::testing::gradient_check(m, m.encode_pair(toy_corpus().pairs[1]), 1e-4);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter;
}

TEST(Model, TrainingIsDeterministicAndLogsLoss) {
  TrainConfig t;
  t.epochs = 5;
  t.model = tiny(8, 8);
  const auto a = train_model(toy_corpus(), "transformer", t);
  const auto b = train_model(toy_corpus(), "transformer", t);
  EXPECT_EQ(a.training_log().size(), 5u);
  EXPECT_EQ(a.training_log(), b.training_log());
  EXPECT_EQ(serialize_model(a), serialize_model(b));
}

TEST(Model, LearnsSmallCopyTask) {
  const auto data = alpdc::testing::copy_corpus(8, 1);
  TrainConfig t;
  t.epochs = 120;
  t.model = tiny(16, 32);
  const auto m = train_model(data, "transformer", t);
  EXPECT_LT(m.training_log().back(), m.training_log().front());
  std::size_t exact = 0;
  for (const auto& p : data.pairs) exact += join_words(m.translate(tokenize_words(p.source))) == p.reference;
  EXPECT_GE(exact, 6u);
}

TEST(Model, GreedyDecodeIsCapped) {
  const auto m = create_transformer_model(toy_corpus(), tiny(), 9);
  EXPECT_LE(m.greedy_decode({4, 5}).size(), 4u);
  EXPECT_TRUE(m.greedy_decode({}).empty());
}

TEST(Model, CheckpointRoundTripIsExact) {
  TempDir dir;
  TrainConfig t;
  t.epochs = 2;
  t.model = tiny();
  for (const char* kind : {"transformer", "lstm"}) {
    const auto m = train_model(toy_corpus(), kind, t);
    save_model(m, dir / "m.ckpt");
    const auto back = load_model(dir / "m.ckpt");
    EXPECT_EQ(back.kind(), m.kind());
    EXPECT_EQ(back.seed(), m.seed());
    EXPECT_EQ(back.training_log(), m.training_log());
    ASSERT_EQ(back.parameters().size(), m.parameters().size());
    for (std::size_t i = 0; i < m.parameters().size(); ++i) {
      EXPECT_EQ(back.parameters()[i].first, m.parameters()[i].first);
      EXPECT_EQ(back.parameters()[i].second.value(), m.parameters()[i].second.value());
    }
    EXPECT_EQ(serialize_model(back), serialize_model(m));
    EXPECT_EQ(back.translate({"a", "b"}), m.translate({"a", "b"}));
  }
  EXPECT_THROW(parse_model("not a checkpoint"), Error);
}

TEST(Model, EvaluateModelWithFixtures) {
  ParallelCorpus same;
  same.pairs = {{"the cat sat", "the cat sat"}, {"a dog ran home", "a dog ran home"}};
  EXPECT_DOUBLE_EQ(evaluate_model(Identity{}, same).bleu.bleu, 1.0);
  const auto silent = evaluate_model(Silent{}, same);
  EXPECT_EQ(silent.bleu.translation_length, 0u);
  EXPECT_EQ(silent.bleu.bleu, 0.0);
}

TEST(Model, CopiesAreDeep) {
  auto a = create_lstm_model(toy_corpus(), tiny(), 1);
  auto b = a;
  b.parameters()[0].second.mutable_value()(0, 0) += 1.0;
  EXPECT_NE(a.parameters()[0].second.value(), b.parameters()[0].second.value());
}
