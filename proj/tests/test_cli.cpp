#include <gtest/gtest.h>

#include <chrono>
#include <csignal>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "alpdc/model.hpp"
#include "support.hpp"

using alpdc::testing::fixture;
using alpdc::testing::run_cli;
using alpdc::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string profiles_dir(const TempDir& dir) {
  alpdc::testing::write_fixture_profiles(dir / "profiles");
  return (dir / "profiles").string();
}

void write_copy_corpus(const TempDir& dir, std::size_t n) {
  std::string text;
  for (const auto& p : alpdc::testing::copy_corpus(n, 3).pairs) text += p.source + "\n";
  dir.write("train.eng_Latn", text);
  dir.write("train.ref", text);
}

}  // namespace

TEST(Cli, HelpOnEveryCommand) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"pipeline", {"--config", "--source", "--reference", "--lang", "--model-type", "--seed", "--out", "--json"}},
      {"detect", {"--text", "--profiles"}},
      {"translate", {"--text", "--lang", "--capsules", "--profiles"}},
      {"evaluate", {"--hyp", "--ref", "--out"}},
      {"build-capsule", {"--input", "--out"}},
      {"train-langid", {"--corpus", "--lang", "--out"}},
      {"serve", {"--config", "--capsules", "--profiles", "--bind", "--token-env"}}};
  const auto top = run_cli({"--help"});
  EXPECT_EQ(top.exit_code, 0);
  for (const auto& [cmd, flags] : commands) {
    EXPECT_NE(top.out.find(cmd), std::string::npos) << cmd;
    const auto r = run_cli({cmd, "--help"});
    EXPECT_EQ(r.exit_code, 0) << cmd;
    for (const auto& f : flags) EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
  }
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).exit_code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(run_cli({"detect"}).exit_code, 2);
  EXPECT_EQ(run_cli({"evaluate", "--hyp", "a"}).exit_code, 2);
  EXPECT_EQ(run_cli({"pipeline", "--out", "/tmp/x"}).exit_code, 2);
  EXPECT_EQ(run_cli({"translate", "--text", "hola", "--capsules", fixture("capsules").string()}).exit_code, 2);
}

TEST(Cli, OperationalErrorsExitOne) {
  TempDir dir;
  EXPECT_EQ(run_cli({"detect", "--text", "hola", "--profiles", (dir / "nope").string()}).exit_code, 1);
  EXPECT_EQ(run_cli({"evaluate", "--hyp", (dir / "h").string(), "--ref", (dir / "r").string()}).exit_code, 1);
  dir.write("h", "a\nb\n");
  dir.write("r", "a\n");
  const auto r = run_cli({"evaluate", "--hyp", (dir / "h").string(), "--ref", (dir / "r").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(run_cli({"translate", "--text", "hola", "--lang", "xxx_Latn", "--capsules", fixture("capsules").string()})
                .exit_code,
            1);
}

TEST(Cli, Detect) {
  TempDir dir;
  const auto r = run_cli({"detect", "--text", "el gato está en la casa", "--profiles", profiles_dir(dir)});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("spa_Latn", 0), 0u) << r.out;
  const auto j = run_cli({"detect", "--json", "--text", "el gato está en la casa", "--profiles", profiles_dir(dir)});
  EXPECT_EQ(nlohmann::json::parse(j.out)["language"], "spa_Latn");
}

TEST(Cli, Translate) {
  const auto r = run_cli({"translate", "--text", "el gato", "--lang", "spa_Latn", "--capsules", fixture("capsules").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "the cat\n");
  TempDir dir;
  const auto auto_detect =
      run_cli({"translate", "--json", "--text", "el perro y el gato están en la casa grande", "--capsules",
               fixture("capsules").string(), "--profiles", profiles_dir(dir)});
  ASSERT_EQ(auto_detect.exit_code, 0) << auto_detect.err;
  const auto j = nlohmann::json::parse(auto_detect.out);
  EXPECT_EQ(j["detected_lang"], "spa_Latn");
  EXPECT_EQ(j["translation"], "the dog and the cat están en the house big");
}

TEST(Cli, EvaluateIdentity) {
  TempDir dir;
  dir.write("h.txt", "the cat sat on the mat\na dog barked\n");
  const auto h = (dir / "h.txt").string();
  auto r = run_cli({"evaluate", "--hyp", h, "--ref", h});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("BLEU"), std::string::npos);
  r = run_cli({"evaluate", "--json", "--hyp", h, "--ref", h, "--out", (dir / "rep.json").string()});
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["BLEU"], 1.0);
  EXPECT_EQ(j["TER_score"], 0.0);
  EXPECT_EQ(alpdc::detail::read_file(dir / "rep.json"), r.out);
}

TEST(Cli, BuildCapsuleMergesInputs) {
  TempDir dir;
  const auto base = dir.write("base.capsule", "#lang: spa_Latn\n#version: 2\ngato\tcat\nperro\tdog\n");
  const auto over = dir.write("over.capsule", "#lang: spa_Latn\n#version: 1\ngato\tfeline\n");
  const auto out = dir / "out.capsule";
  const auto r = run_cli({"build-capsule", "--input", base.string(), "--input", over.string(), "--out", out.string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto text = alpdc::detail::read_file(out);
  EXPECT_NE(text.find("#version: 3"), std::string::npos);
  EXPECT_NE(text.find("gato\tfeline"), std::string::npos);
  EXPECT_NE(text.find("perro\tdog"), std::string::npos);
  const auto bad = dir.write("bad.capsule", "#lang: spa_Latn\ngato\tcat\ngato\tcat\n");
  EXPECT_EQ(run_cli({"build-capsule", "--input", bad.string(), "--out", (dir / "x").string()}).exit_code, 1);
  EXPECT_FALSE(fs::exists(dir / "x"));
}

TEST(Cli, TrainLangid) {
  TempDir dir;
  const auto out = dir / "ita_Latn.profile";
  const auto r = run_cli({"train-langid", "--corpus", fixture("langid/ita_Latn.txt").string(), "--lang", "ita_Latn",
                          "--out", out.string(), "--orders", "1..2", "--top-n", "50"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto p = alpdc::load_profile(out);
  EXPECT_EQ(p.lang_code, "ita_Latn");
  EXPECT_EQ(p.orders.max, 2u);
  EXPECT_LE(p.weights.size(), 100u);
  EXPECT_EQ(run_cli({"train-langid", "--corpus", fixture("langid/ita_Latn.txt").string(), "--lang", "x", "--out",
                     out.string(), "--orders", "z"})
                .exit_code,
            2);
}

TEST(Cli, PipelineUnknownModelType) {
  TempDir dir;
  write_copy_corpus(dir, 6);
  const auto r = run_cli({"pipeline", "--source", (dir / "train.eng_Latn").string(), "--reference",
                          (dir / "train.ref").string(), "--lang", "eng_Latn", "--model-type", "rnn", "--out",
                          (dir / "out").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("Unknown model type: rnn"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "out" / "model.ckpt"));
}

TEST(Cli, PipelineWritesArtifactsDeterministically) {
  TempDir dir;
  write_copy_corpus(dir, 20);
  dir.write("config.json", R"({
    "data_sources": [{"source_path": "train.eng_Latn", "reference_path": "train.ref", "lang": "eng_Latn"}],
    "model_type": "transformer",
    "train_config": {"learning_rate": 0.1, "epochs": 3, "batch_size": 4, "seed": 5, "model_dim": 8, "hidden_dim": 8},
    "output_dir": "run1"
  })");
  const auto cfg = (dir / "config.json").string();
  const auto a = run_cli({"pipeline", "--config", cfg});
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_NE(a.out.find("BLEU"), std::string::npos);
  const auto b = run_cli({"pipeline", "--config", cfg, "--out", (dir / "run2").string()});
  ASSERT_EQ(b.exit_code, 0) << b.err;
  for (const char* f : {"model.ckpt", "report.json"}) {
    ASSERT_TRUE(fs::exists(dir / "run1" / f));
    EXPECT_EQ(alpdc::detail::read_file(dir / "run1" / f), alpdc::detail::read_file(dir / "run2" / f)) << f;
  }
  EXPECT_NO_THROW(alpdc::nn::load_model(dir / "run1" / "model.ckpt"));
  const auto c = run_cli({"pipeline", "--config", cfg, "--seed", "6", "--out", (dir / "run3").string()});
  ASSERT_EQ(c.exit_code, 0);
  EXPECT_NE(alpdc::detail::read_file(dir / "run1" / "model.ckpt"), alpdc::detail::read_file(dir / "run3" / "model.ckpt"));
}

TEST(Cli, PipelineMissingInputExitsOne) {
  TempDir dir;
  const auto r = run_cli({"pipeline", "--source", (dir / "a").string(), "--reference", (dir / "b").string(), "--lang",
                          "eng_Latn", "--out", (dir / "out").string()});
  EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, ServeRequiresToken) {
  const auto r = run_cli({"serve", "--bind", "127.0.0.1:0", "--token-env", "ALPDC_TEST_NO_SUCH_VAR"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("token"), std::string::npos);
}

TEST(Cli, ServeAnswersHealthAndEnforcesAuth) {
  TempDir dir;
  const auto profiles = profiles_dir(dir);
  const auto log = dir / "serve.log";
  const std::string cmd = "ALPDC_TEST_TOKEN=tok123 " + alpdc::testing::shell_quote(alpdc::testing::cli_path()) +
                          " serve --token-env ALPDC_TEST_TOKEN --bind 127.0.0.1:0 --capsules " +
                          alpdc::testing::shell_quote(fixture("capsules").string()) + " --profiles " +
                          alpdc::testing::shell_quote(profiles) + " >/dev/null 2>" +
                          alpdc::testing::shell_quote(log.string()) + " & echo $! > " +
                          alpdc::testing::shell_quote((dir / "pid").string());
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  struct Reaper {
    pid_t pid;
    ~Reaper() { ::kill(pid, SIGTERM); }
  } reaper{std::stoi(alpdc::detail::read_file(dir / "pid"))};

  int port = 0;
  const std::string marker = "listening on 127.0.0.1:";
  for (int i = 0; i < 200 && port == 0; ++i) {
    const auto text = std::filesystem::exists(log) ? alpdc::detail::read_file(log) : std::string();
    if (auto at = text.find(marker); at != std::string::npos && text.find('\n', at) != std::string::npos) {
      port = std::stoi(text.substr(at + marker.size()));
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }
  ASSERT_GT(port, 0);

  httplib::Client c("127.0.0.1", port);
  httplib::Result res;
  res = c.Get("/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body)["capsules"], 2);
  res = c.Post("/v1/detect", R"({"text":"el gato"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);
  res = c.Post("/v1/translate", {{"Authorization", "Bearer tok123"}},
               R"({"text":"el perro y el gato están en la casa grande"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body)["translation"], "the dog and the cat están en the house big");
}
