#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "alpdc/report.hpp"
#include "alpdc/service.hpp"
#include "support.hpp"

using namespace alpdc;
using namespace alpdc::service;
using alpdc::testing::fixture;
using alpdc::testing::TempDir;

namespace {

constexpr const char* kToken = "s3cret-Token_value";

std::string bearer(const std::string& t = kToken) { return "Bearer " + t; }

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    alpdc::testing::write_fixture_profiles(dir_ / "profiles");
    std::filesystem::create_directories(dir_ / "capsules");
    for (const auto& e : std::filesystem::directory_iterator(fixture("capsules"))) {
      std::filesystem::copy_file(e.path(), dir_ / "capsules" / e.path().filename());
    }
    config_.api_token = kToken;
    config_.capsule_dir = dir_ / "capsules";
    config_.profile_dir = dir_ / "profiles";
  }

  Response call(Service& s, const std::string& method, const std::string& path, const nlohmann::json& body,
                std::optional<std::string> auth = bearer()) {
    return s.handle({method, path, std::move(auth), body.is_null() ? "" : body.dump()});
  }

  static nlohmann::json parse(const Response& r) { return nlohmann::json::parse(r.body); }

  TempDir dir_;
  ApiConfig config_;
};

}  // namespace

TEST(ServiceAuth, ConstantTimeEquals) {
  EXPECT_TRUE(constant_time_equals("abc", "abc"));
  EXPECT_FALSE(constant_time_equals("abc", "abd"));
  EXPECT_FALSE(constant_time_equals("abc", "abcd"));
  EXPECT_FALSE(constant_time_equals("", "a"));
  EXPECT_TRUE(authenticate(bearer(), kToken));
  EXPECT_FALSE(authenticate(kToken, kToken));
  EXPECT_FALSE(authenticate("Basic " + std::string(kToken), kToken));
  EXPECT_FALSE(authenticate("", kToken));
}

TEST(ServiceConfig, Validation) {
  ApiConfig c;
  EXPECT_THROW(c.validate(), Error);
  c.api_token = "x";
  EXPECT_NO_THROW(c.validate());
  c.max_body_bytes = 100;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_bind("0.0.0.0:9000"), (std::pair<std::string, int>{"0.0.0.0", 9000}));
  EXPECT_EQ(parse_bind("localhost").second, 8080);
  EXPECT_THROW(parse_bind("h:99999"), Error);
}

TEST(ServiceConfig, EnvironmentOverridesFile) {
  ApiConfig c;
  c.api_token = "from-file";
  ::setenv("ALPDC_TEST_TOKEN_VAR", "from-env", 1);
  ::setenv("ALPDC_BIND", "127.0.0.1:7777", 1);
  c.apply_environment("ALPDC_TEST_TOKEN_VAR");
  EXPECT_EQ(c.api_token, "from-env");
  EXPECT_EQ(c.bind_address, "127.0.0.1:7777");
  ::unsetenv("ALPDC_TEST_TOKEN_VAR");
  ::unsetenv("ALPDC_BIND");
}

TEST_F(ServiceTest, HealthIsOpenAndCountsResources) {
  Service s(config_);
  auto h = parse(call(s, "GET", "/v1/health", nullptr, std::nullopt));
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["capsules"], 0);
  EXPECT_EQ(h["profiles"], 0);
  s.reload();
  h = parse(call(s, "GET", "/v1/health", nullptr, std::nullopt));
  EXPECT_EQ(h["capsules"], 2);
  EXPECT_EQ(h["profiles"], alpdc::testing::fixture_languages().size());
}

TEST_F(ServiceTest, EveryOtherEndpointNeedsTheToken) {
  Service s(config_);
  s.reload();
  const std::vector<std::pair<std::string, std::string>> routes{
      {"POST", "/v1/detect"}, {"POST", "/v1/translate"}, {"POST", "/v1/evaluate"}, {"GET", "/v1/capsules"},
      {"POST", "/v1/reload"}, {"DELETE", "/v1/detect"}, {"GET", "/v1/unknown"},   {"POST", "/v1/health"}};
  const nlohmann::json body{{"text", "hola"}};
  std::vector<std::optional<std::string>> bad{std::nullopt, "", "Bearer", "Bearer ", kToken, bearer("wrong")};
  const std::string tok = kToken;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    std::string m = tok;
    m[i] = static_cast<char>(m[i] ^ 1);
    bad.push_back(bearer(m));
  }
  bad.push_back(bearer(tok + "x"));
  bad.push_back(bearer(tok.substr(0, tok.size() - 1)));
  for (const auto& [method, path] : routes) {
    for (const auto& auth : bad) {
      const auto r = call(s, method, path, body, auth);
      EXPECT_EQ(r.status, 401) << method << " " << path;
      EXPECT_EQ(parse(r), (nlohmann::json{{"error", "unauthorized"}}));
    }
  }
}

TEST_F(ServiceTest, Detect) {
  Service s(config_);
  s.reload();
  const std::string text = "El gato duerme en la casa de mi abuela todos los días.";
  const auto r = call(s, "POST", "/v1/detect", {{"text", text}});
  ASSERT_EQ(r.status, 200) << r.body;
  const auto j = parse(r);
  EXPECT_EQ(j["language"], "spa_Latn");
  const auto direct = predict_language(text, load_profiles(config_.profile_dir));
  EXPECT_EQ(r.body, to_json(direct).dump() + "\n");
  EXPECT_EQ(call(s, "POST", "/v1/detect", {{"text", ""}}).status, 400);
  EXPECT_EQ(call(s, "POST", "/v1/detect", {{"text", "   "}}).status, 400);
  EXPECT_EQ(call(s, "POST", "/v1/detect", {{"txt", "hola"}}).status, 400);
  EXPECT_EQ(s.handle({"POST", "/v1/detect", bearer(), "{not json"}).status, 400);
}

TEST_F(ServiceTest, DetectBeforeProfilesLoadIs503) {
  Service s(config_);
  EXPECT_EQ(call(s, "POST", "/v1/detect", {{"text", "hola amigo"}}).status, 503);
}

TEST_F(ServiceTest, Translate) {
  Service s(config_);
  s.reload();
  auto r = call(s, "POST", "/v1/translate", {{"text", "el gato"}, {"source_lang", "spa_Latn"}});
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = parse(r);
  EXPECT_EQ(j["translation"], "the cat");
  EXPECT_EQ(j["detected_lang"], "spa_Latn");
  EXPECT_TRUE(j["detection_score"].is_null());
  EXPECT_EQ(j["oov_tokens"], nlohmann::json::array());
  EXPECT_EQ(j["capsule"], (nlohmann::json{{"lang", "spa_Latn"}, {"version", 1}}));

  r = call(s, "POST", "/v1/translate", {{"text", "el perro y el gato están en la casa grande"}});
  ASSERT_EQ(r.status, 200) << r.body;
  j = parse(r);
  EXPECT_EQ(j["detected_lang"], "spa_Latn");
  EXPECT_EQ(j["translation"], "the dog and the cat están en the house big");
  EXPECT_GT(j["detection_score"].get<double>(), 0.0);

  r = call(s, "POST", "/v1/translate", {{"text", "Der Hund schläft im Garten"}});
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(parse(r)["language"], "deu_Latn");
  r = call(s, "POST", "/v1/translate", {{"text", "hola"}, {"source_lang", "xxx_Latn"}});
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(parse(r)["language"], "xxx_Latn");
  EXPECT_EQ(call(s, "POST", "/v1/translate", {{"text", ""}}).status, 400);
}

TEST_F(ServiceTest, Evaluate) {
  Service s(config_);
  const std::vector<std::string> h{"the cat is on the mat", "he reads a book ."};
  const std::vector<std::string> r{"the cat sat on the mat", "he is reading a book ."};
  auto resp = call(s, "POST", "/v1/evaluate", {{"hypotheses", h}, {"references", r}});
  ASSERT_EQ(resp.status, 200);
  EXPECT_EQ(resp.body, to_json(metrics::evaluate_all(h, r)).dump() + "\n");
  resp = call(s, "POST", "/v1/evaluate", {{"hypotheses", h}, {"references", h}});
  EXPECT_EQ(parse(resp)["BLEU"], 1.0);
  resp = call(s, "POST", "/v1/evaluate", {{"hypotheses", h}, {"references", {"one"}}});
  EXPECT_EQ(resp.status, 400);
  EXPECT_TRUE(parse(resp).contains("error"));
  EXPECT_EQ(call(s, "POST", "/v1/evaluate", {{"hypotheses", {1, 2}}, {"references", {"a", "b"}}}).status, 400);
}

TEST_F(ServiceTest, CapsuleListingAndHotReload) {
  Service s(config_);
  s.reload();
  auto j = parse(call(s, "GET", "/v1/capsules", nullptr));
  ASSERT_EQ(j["capsules"].size(), 2u);
  EXPECT_EQ(j["capsules"][0]["lang"], "fra_Latn");

  detail::write_file(dir_ / "capsules" / "deu_Latn.capsule", "#lang: deu_Latn\n#version: 1\nhund\tdog\n");
  const auto r = call(s, "POST", "/v1/reload", nullptr);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(parse(r)["capsules"], 3);
  EXPECT_EQ(parse(call(s, "POST", "/v1/translate", {{"text", "Hund"}, {"source_lang", "deu_Latn"}}))["translation"],
            "dog");

  // A broken file leaves the previous state in place.
  detail::write_file(dir_ / "capsules" / "bad.capsule", "no header\n");
  EXPECT_EQ(call(s, "POST", "/v1/reload", nullptr).status, 500);
  EXPECT_EQ(parse(s.health())["capsules"], 3);
}

TEST_F(ServiceTest, OversizedBody) {
  config_.max_body_bytes = 2048;
  Service s(config_);
  s.reload();
  const auto r = call(s, "POST", "/v1/detect", {{"text", std::string(4096, 'a')}});
  EXPECT_EQ(r.status, 413);
}

TEST_F(ServiceTest, ResponsesAreDeterministic) {
  Service s(config_);
  s.reload();
  const nlohmann::json body{{"text", "Il pleut beaucoup ce soir"}};
  EXPECT_EQ(call(s, "POST", "/v1/detect", body).body, call(s, "POST", "/v1/detect", body).body);
}

TEST_F(ServiceTest, ReloadIsAtomicForReaders) {
  Service s(config_);
  s.reload();
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    while (!done) {
      const auto r = call(s, "POST", "/v1/translate", {{"text", "el gato"}, {"source_lang", "spa_Latn"}});
      const auto j = parse(r);
      if (r.status != 200) {
        ++bad;
        continue;
      }
      const auto v = j["capsule"]["version"].get<int>();
      const auto t = j["translation"].get<std::string>();
      // version 1 glosses gato as cat, version 2 as feline; never a mix
      if (!((v == 1 && t == "the cat") || (v == 2 && t == "the feline"))) ++bad;
    }
  });
  const auto path = dir_ / "capsules" / "spa_Latn.capsule";
  const std::string v1 = detail::read_file(path);
  const std::string v2 = "#lang: spa_Latn\n#version: 2\nel\tthe\ngato\tfeline\n";
  for (int i = 0; i < 40; ++i) {
    detail::write_file(path, i % 2 ? v1 : v2);
    s.reload();
  }
  done = true;
  reader.join();
  EXPECT_EQ(bad.load(), 0);
}

TEST_F(ServiceTest, OverHttp) {
  config_.max_body_bytes = 4096;
  Service s(config_);
  s.reload();
  HttpServer server(s);
  const int port = server.bind("127.0.0.1", 0);
  std::thread t([&] { server.listen(); });
  server.wait_until_ready();

  httplib::Client c("127.0.0.1", port);
  auto res = c.Get("/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["capsules"], 2);

  res = c.Post("/v1/detect", R"({"text":"hola"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);
  EXPECT_EQ(nlohmann::json::parse(res->body)["error"], "unauthorized");
  res = c.Delete("/v1/capsules");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);

  const httplib::Headers auth{{"Authorization", bearer()}};
  res = c.Post("/v1/translate", auth, R"({"text":"el gato","source_lang":"spa_Latn"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["translation"], "the cat");

  res = c.Post("/v1/detect", auth, nlohmann::json{{"text", std::string(8000, 'a')}}.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 413);
  EXPECT_TRUE(nlohmann::json::parse(res->body).contains("error"));

  res = c.Get("/v1/nowhere", auth);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_TRUE(nlohmann::json::parse(res->body).contains("error"));

  server.stop();
  t.join();
}
