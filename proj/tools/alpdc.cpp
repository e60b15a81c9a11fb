// alpdc: language detection, dictionary-capsule glossing, MT evaluation and
// toy seq2seq training from the command line.
//
// Exit codes: 0 success, 1 operational failure, 2 usage or validation failure.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "alpdc/capsule.hpp"
#include "alpdc/corpus.hpp"
#include "alpdc/langid.hpp"
#include "alpdc/metrics.hpp"
#include "alpdc/model.hpp"
#include "alpdc/report.hpp"
#include "alpdc/service.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataSource {
  fs::path source_path;
  fs::path reference_path;
  std::string lang;
};

struct PipelineConfig {
  std::vector<DataSource> data_sources;
  std::string model_type = "transformer";
  alpdc::nn::TrainConfig train_config;
  fs::path output_dir;
  double train_ratio = 0.8;
  double dev_ratio = 0.1;
};

PipelineConfig read_pipeline_config(const fs::path& path) {
  Json j = Json::parse(alpdc::detail::read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw UsageError(path.string() + ": not a JSON object");
  PipelineConfig c;
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  for (const auto& s : j.value("data_sources", Json::array())) {
    c.data_sources.push_back({resolve(s.at("source_path").get<std::string>()),
                              resolve(s.at("reference_path").get<std::string>()), s.at("lang").get<std::string>()});
  }
  c.model_type = j.value("model_type", c.model_type);
  if (j.contains("output_dir")) c.output_dir = resolve(j["output_dir"].get<std::string>());
  if (auto t = j.find("train_config"); t != j.end()) {
    auto& tc = c.train_config;
    tc.learning_rate = t->value("learning_rate", tc.learning_rate);
    tc.epochs = t->value("epochs", tc.epochs);
    tc.batch_size = t->value("batch_size", tc.batch_size);
    tc.seed = t->value("seed", tc.seed);
    tc.model.moe.model_dim = t->value("model_dim", tc.model.moe.model_dim);
    tc.model.moe.hidden_dim = t->value("hidden_dim", tc.model.moe.hidden_dim);
    tc.model.moe.num_experts = t->value("num_experts", tc.model.moe.num_experts);
    tc.model.moe.top_k = t->value("top_k", tc.model.moe.top_k);
  }
  c.train_ratio = j.value("train_ratio", c.train_ratio);
  c.dev_ratio = j.value("dev_ratio", c.dev_ratio);
  return c;
}

alpdc::NgramOrders parse_orders(const std::string& s) {
  auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      auto n = std::stoul(s);
      return {n, n};
    }
    return {std::stoul(s.substr(0, dots)), std::stoul(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw UsageError("--orders expects N or MIN..MAX, got '" + s + "'");
  }
}

// Algorithm: collect -> pre-process -> train -> evaluate -> deploy.
int run_pipeline(PipelineConfig cfg, bool json_out) {
  if (cfg.data_sources.empty()) throw UsageError("pipeline needs at least one data source");
  if (cfg.output_dir.empty()) throw UsageError("pipeline needs --out");

  // collect
  alpdc::ParallelCorpus data;
  data.source_lang = cfg.data_sources.front().lang;
  for (const auto& s : cfg.data_sources) {
    auto part = alpdc::load_parallel_corpus(s.source_path, s.reference_path, s.lang);
    data.pairs.insert(data.pairs.end(), part.pairs.begin(), part.pairs.end());
  }
  // pre-process
  const auto processed = alpdc::normalize_corpus(data, alpdc::NormalizationPolicy::metrics());
  const auto splits = alpdc::split_corpus(processed, cfg.train_ratio, cfg.dev_ratio, cfg.train_config.seed);
  // train
  cfg.train_config.model_type = cfg.model_type;
  const auto model = alpdc::nn::train_model(splits.train, cfg.model_type, cfg.train_config);
  // evaluate
  const auto report = alpdc::nn::evaluate_model(model, splits.test.empty() ? splits.train : splits.test);
  // deploy
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw alpdc::Error(alpdc::ErrorCode::IoError, "cannot create " + cfg.output_dir.string());
  alpdc::nn::save_model(model, cfg.output_dir / "model.ckpt");
  alpdc::detail::write_file(cfg.output_dir / "report.json", alpdc::report_json(report));

  std::cout << (json_out ? alpdc::report_json(report) : alpdc::report_table(report));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alpdc - language detection, dictionary capsules and MT evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  bool json_out = false;
  std::string text, lang, model_type = "transformer", token_env{alpdc::service::kTokenEnv}, bind, orders = "1..3";
  fs::path capsules, profiles, hyp, ref, out, config;
  std::vector<fs::path> inputs, corpus_files;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size;
  std::optional<double> learning_rate;
  std::size_t top_n = alpdc::kDefaultTopN;
  std::size_t max_body = 1u << 20;
  bool bleu_percent = false;
  fs::path source_file, reference_file;

  auto* pipeline = app.add_subcommand("pipeline", "Collect, pre-process, train, evaluate and write a model");
  pipeline->add_option("--config", config, "JSON file with data_sources, model_type, train_config, output_dir");
  pipeline->add_option("--source", source_file, "Source-language corpus file (one sentence per line)");
  pipeline->add_option("--reference", reference_file, "English reference file aligned with --source");
  pipeline->add_option("--lang", lang, "Source language code, e.g. spa_Latn");
  pipeline->add_option("--model-type", model_type, "transformer or lstm");
  pipeline->add_option("--seed", seed, "Seed for splitting, initialization and shuffling");
  pipeline->add_option("--epochs", epochs, "Training epochs");
  pipeline->add_option("--learning-rate", learning_rate, "Gradient descent step size");
  pipeline->add_option("--batch-size", batch_size, "Mini-batch size");
  pipeline->add_option("--out", out, "Output directory for model.ckpt and report.json");
  pipeline->add_flag("--json", json_out, "Print the report as JSON");

  auto* detect = app.add_subcommand("detect", "Predict the language of a text");
  detect->add_option("--text", text, "Input text")->required();
  detect->add_option("--profiles", profiles, "Directory of *.profile files")->required();
  detect->add_flag("--json", json_out, "Print JSON");

  auto* translate = app.add_subcommand("translate", "Gloss a text word by word into English");
  translate->add_option("--text", text, "Input text")->required();
  translate->add_option("--lang", lang, "Source language; detected from --profiles when omitted");
  translate->add_option("--capsules", capsules, "Directory of *.capsule files")->required();
  translate->add_option("--profiles", profiles, "Directory of *.profile files, for detection");
  translate->add_flag("--json", json_out, "Print JSON");

  auto* evaluate = app.add_subcommand("evaluate", "Score hypotheses against references");
  evaluate->add_option("--hyp", hyp, "Hypothesis file, one sentence per line")->required();
  evaluate->add_option("--ref", ref, "Reference file, one sentence per line")->required();
  evaluate->add_option("--out", out, "Also write the JSON report here");
  evaluate->add_flag("--bleu-percent", bleu_percent, "Show BLEU on a 0-100 scale");
  evaluate->add_flag("--json", json_out, "Print JSON");

  auto* build = app.add_subcommand("build-capsule", "Validate capsule files, merge them left to right, write one");
  build->add_option("--input", inputs, "Capsule files; later files override earlier ones")->required();
  build->add_option("--out", out, "Output capsule file")->required();

  auto* train_langid = app.add_subcommand("train-langid", "Train a character n-gram language profile");
  train_langid->add_option("--corpus", corpus_files, "Training text files, one sentence per line")->required();
  train_langid->add_option("--lang", lang, "Language code of the corpus")->required();
  train_langid->add_option("--orders", orders, "N-gram orders, N or MIN..MAX");
  train_langid->add_option("--top-n", top_n, "N-grams kept per order");
  train_langid->add_option("--out", out, "Output profile file")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", config, "JSON file with bind_address, api_token, capsule_dir, profile_dir, max_body_bytes");
  serve->add_option("--capsules", capsules, "Directory of *.capsule files");
  serve->add_option("--profiles", profiles, "Directory of *.profile files");
  serve->add_option("--bind", bind, "host:port (env ALPDC_BIND overrides the config file)");
  serve->add_option("--token-env", token_env, "Environment variable holding the bearer token");
  serve->add_option("--max-body", max_body, "Maximum request body in bytes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*pipeline) {
      PipelineConfig cfg = config.empty() ? PipelineConfig{} : read_pipeline_config(config);
      if (!source_file.empty() || !reference_file.empty()) {
        if (source_file.empty() || reference_file.empty() || lang.empty()) {
          throw UsageError("--source, --reference and --lang go together");
        }
        cfg.data_sources.push_back({source_file, reference_file, lang});
      }
      if (pipeline->count("--model-type")) cfg.model_type = model_type;
      if (seed) cfg.train_config.seed = *seed;
      if (epochs) cfg.train_config.epochs = *epochs;
      if (learning_rate) cfg.train_config.learning_rate = *learning_rate;
      if (batch_size) cfg.train_config.batch_size = *batch_size;
      if (!out.empty()) cfg.output_dir = out;
      return run_pipeline(std::move(cfg), json_out);
    }

    if (*detect) {
      const auto p = alpdc::predict_language(text, alpdc::load_profiles(profiles));
      if (json_out) {
        std::cout << alpdc::to_json(p).dump(2) << "\n";
      } else {
        std::cout << p.best << "\tscore " << p.score << "\tmargin " << p.margin << "\n";
        for (const auto& [code, score] : p.ranking) std::cout << "  " << code << "\t" << score << "\n";
      }
      return kOk;
    }

    if (*translate) {
      const auto registry = alpdc::load_registry(capsules);
      std::string source_lang = lang;
      std::optional<double> detection;
      if (source_lang.empty()) {
        if (profiles.empty()) throw UsageError("translate needs --lang or --profiles");
        const auto p = alpdc::predict_language(text, alpdc::load_profiles(profiles));
        source_lang = p.best;
        detection = p.score;
      }
      const auto result = alpdc::translate_literal(text, alpdc::select_capsule(registry, source_lang));
      if (json_out) {
        Json j{{"detected_lang", source_lang},
               {"detection_score", detection ? Json(*detection) : Json(nullptr)},
               {"translation", result.text()},
               {"oov_tokens", result.oov_tokens()},
               {"capsule", {{"lang", result.capsule_lang}, {"version", result.capsule_version}}}};
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << result.text() << "\n";
      }
      return kOk;
    }

    if (*evaluate) {
      const auto report = alpdc::metrics::evaluate_all(alpdc::read_lines(hyp), alpdc::read_lines(ref));
      if (!out.empty()) alpdc::detail::write_file(out, alpdc::report_json(report, bleu_percent));
      std::cout << (json_out ? alpdc::report_json(report, bleu_percent) : alpdc::report_table(report, bleu_percent));
      return kOk;
    }

    if (*build) {
      auto merged = alpdc::load_capsule(inputs.front());
      for (std::size_t i = 1; i < inputs.size(); ++i) merged = alpdc::merge_capsules(merged, alpdc::load_capsule(inputs[i]));
      alpdc::save_capsule(merged, out);
      std::cout << merged.lang_code() << "\tversion " << merged.version() << "\t" << merged.size() << " entries\n";
      return kOk;
    }

    if (*train_langid) {
      std::vector<std::string> texts;
      for (const auto& f : corpus_files) {
        auto lines = alpdc::read_lines(f);
        texts.insert(texts.end(), lines.begin(), lines.end());
      }
      const auto profile = alpdc::train_profile(texts, lang, parse_orders(orders), top_n);
      alpdc::save_profile(profile, out);
      std::cout << profile.lang_code << "\t" << profile.weights.size() << " n-grams\n";
      return kOk;
    }

    if (*serve) {
      alpdc::service::ApiConfig api;
      if (!config.empty()) {
        Json j = Json::parse(alpdc::detail::read_file(config), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw UsageError(config.string() + ": not a JSON object");
        api.bind_address = j.value("bind_address", api.bind_address);
        api.api_token = j.value("api_token", api.api_token);
        api.capsule_dir = j.value("capsule_dir", std::string{});
        api.profile_dir = j.value("profile_dir", std::string{});
        api.max_body_bytes = j.value("max_body_bytes", api.max_body_bytes);
      }
      api.apply_environment(token_env);
      if (!bind.empty()) api.bind_address = bind;
      if (!capsules.empty()) api.capsule_dir = capsules;
      if (!profiles.empty()) api.profile_dir = profiles;
      if (serve->count("--max-body")) api.max_body_bytes = max_body;
      if (api.api_token.empty()) throw UsageError("no API token: set " + token_env);
      try {
        api.validate();
      } catch (const alpdc::Error& e) {
        throw UsageError(e.what());
      }

      alpdc::service::Service service(api);
      service.reload();
      alpdc::service::HttpServer server(service);
      const auto [host, port] = alpdc::service::parse_bind(api.bind_address);
      const int bound = server.bind(host, port);
      std::cerr << "listening on " << host << ":" << bound << "\n";
      return server.listen() ? kOk : kFailure;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const alpdc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == alpdc::ErrorCode::UnknownModelType || e.code() == alpdc::ErrorCode::RatioOutOfRange ? kUsage
                                                                                                           : kFailure;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad config: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
