#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "alpdc/capsule.hpp"
#include "alpdc/error.hpp"
#include "alpdc/langid.hpp"
#include "alpdc/metrics.hpp"
#include "alpdc/report.hpp"

namespace alpdc::service {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kTokenEnv = "ALPDC_API_TOKEN";
inline constexpr std::string_view kBindEnv = "ALPDC_BIND";
inline constexpr std::size_t kMinBodyLimit = 1024;

struct ApiConfig {
  std::string bind_address = "127.0.0.1:8080";
  std::string api_token;
  std::filesystem::path capsule_dir;
  std::filesystem::path profile_dir;
  std::size_t max_body_bytes = 1u << 20;

  void validate() const {
    if (api_token.empty()) throw Error(ErrorCode::FormatError, "api_token must not be empty");
    if (max_body_bytes < kMinBodyLimit) throw Error(ErrorCode::FormatError, "max_body_bytes must be >= 1024");
  }

  /// Environment overrides: the token from `token_env` (default ALPDC_API_TOKEN), the bind address from ALPDC_BIND.
  void apply_environment(std::string_view token_env = kTokenEnv) {
    if (const char* t = std::getenv(std::string(token_env).c_str()); t && *t) api_token = t;
    if (const char* b = std::getenv(std::string(kBindEnv).c_str()); b && *b) bind_address = b;
  }
};

/// Splits "host:port"; the port defaults to 8080.
inline std::pair<std::string, int> parse_bind(std::string_view bind) {
  auto colon = bind.rfind(':');
  if (colon == std::string_view::npos) return {std::string(bind), 8080};
  int port = 0;
  auto digits = bind.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::FormatError, "bad bind address: " + std::string(bind));
  }
  return {std::string(bind.substr(0, colon)), port};
}

/// Compares in time that depends only on the longer length: both sides are
/// walked as zero-padded buffers of equal size and the length difference is
/// folded into the result.
inline bool constant_time_equals(std::string_view a, std::string_view b) {
  const std::size_t n = std::max(a.size(), b.size());
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ca = static_cast<unsigned char>(i < a.size() ? a[i] : 0);
    const auto cb = static_cast<unsigned char>(i < b.size() ? b[i] : 0);
    diff |= static_cast<unsigned char>(ca ^ cb);
  }
  return diff == 0;
}

/// Accepts exactly `Bearer <token>`.
inline bool authenticate(std::string_view authorization_header, std::string_view api_token) {
  constexpr std::string_view kScheme = "Bearer ";
  if (api_token.empty()) return false;
  std::string_view presented;
  if (authorization_header.substr(0, kScheme.size()) == kScheme) presented = authorization_header.substr(kScheme.size());
  return constant_time_equals(presented, api_token);
}

struct Request {
  std::string method;
  std::string path;
  std::optional<std::string> authorization;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;

  friend bool operator==(const Response&, const Response&) = default;
};

/// Loaded read-only resources. Replaced as a whole on reload.
struct State {
  CapsuleRegistry capsules;
  std::vector<LanguageProfile> profiles;
};

inline Response json_response(int status, const Json& body) { return {status, body.dump() + "\n"}; }

inline Response error_response(int status, std::string message, Json extra = Json::object()) {
  Json body{{"error", std::move(message)}};
  body.update(extra);
  return json_response(status, body);
}

/// Transport-independent request handling. Every endpoint except
/// `GET /v1/health` requires the bearer token.
class Service {
 public:
  explicit Service(ApiConfig config) : config_(std::move(config)), state_(std::make_shared<const State>()) {
    config_.validate();
  }

  const ApiConfig& config() const noexcept { return config_; }

  std::shared_ptr<const State> snapshot() const {
    std::shared_lock lock(mutex_);
    return state_;
  }

  void set_state(State state) {
    auto next = std::make_shared<const State>(std::move(state));
    std::unique_lock lock(mutex_);
    state_ = std::move(next);
  }

  /// Re-reads the capsule and profile directories and swaps them in together.
  /// On failure the previous state stays in place and the error propagates.
  void reload() {
    State next;
    if (!config_.capsule_dir.empty()) next.capsules = load_registry(config_.capsule_dir);
    if (!config_.profile_dir.empty()) next.profiles = load_profiles(config_.profile_dir);
    set_state(std::move(next));
  }

  Response handle(const Request& req) {
    if (req.path == "/v1/health" && (req.method == "GET" || req.method == "HEAD")) return health();
    if (!authenticate(req.authorization.value_or(""), config_.api_token)) return unauthorized();
    if (req.body.size() > config_.max_body_bytes) return error_response(413, "payload too large");
    try {
      if (req.method == "POST" && req.path == "/v1/detect") return detect(parse_body(req.body));
      if (req.method == "POST" && req.path == "/v1/translate") return translate(parse_body(req.body));
      if (req.method == "POST" && req.path == "/v1/evaluate") return evaluate(parse_body(req.body));
      if (req.method == "GET" && req.path == "/v1/capsules") return list_capsules();
      if (req.method == "POST" && req.path == "/v1/reload") return reload_endpoint();
      return error_response(404, "not found");
    } catch (const BadRequest& e) {
      return error_response(400, e.what());
    } catch (const Error& e) {
      return from_error(e);
    } catch (const std::exception&) {
      return error_response(500, "internal error");
    }
  }

  static Response unauthorized() { return error_response(401, "unauthorized"); }

  Response health() const {
    auto s = snapshot();
    return json_response(200, Json{{"status", "ok"}, {"capsules", s->capsules.size()}, {"profiles", s->profiles.size()}});
  }

 private:
  struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  static Json parse_body(const std::string& body) {
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
  }

  static std::string required_string(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw BadRequest(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  }

  static std::vector<std::string> required_strings(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) throw BadRequest(std::string("field '") + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& v : *it) {
      if (!v.is_string()) throw BadRequest(std::string("field '") + key + "' must be a list of strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  static Response from_error(const Error& e) {
    switch (e.code()) {
      case ErrorCode::EmptyInput:
      case ErrorCode::LengthMismatch:
      case ErrorCode::ZeroReference:
      case ErrorCode::EncodingError:
        return error_response(400, e.what());
      case ErrorCode::NoProfiles:
        return error_response(503, "no language profiles loaded");
      case ErrorCode::CapsuleNotFound:
        return error_response(404, e.what());
      default:
        return error_response(500, "internal error");
    }
  }

  static void require_text(const std::string& text) {
    if (unicode::find_invalid_utf8(text)) throw BadRequest("text is not valid UTF-8");
    if (normalize_text(text, NormalizationPolicy::folded()).empty()) throw BadRequest("text is empty");
  }

  Response detect(const Json& body) const {
    const std::string text = required_string(body, "text");
    require_text(text);
    auto s = snapshot();
    return json_response(200, to_json(predict_language(text, s->profiles)));
  }

  Response translate(const Json& body) const {
    const std::string text = required_string(body, "text");
    require_text(text);
    std::optional<std::string> source_lang;
    if (auto it = body.find("source_lang"); it != body.end() && !it->is_null()) {
      if (!it->is_string() || it->get<std::string>().empty()) throw BadRequest("field 'source_lang' must be a string");
      source_lang = it->get<std::string>();
    }
    auto s = snapshot();
    Json detection_score = nullptr;
    std::string lang;
    if (source_lang) {
      lang = *source_lang;
    } else {
      const auto p = predict_language(text, s->profiles);
      lang = p.best;
      detection_score = p.score;
    }
    if (!s->capsules.contains(lang)) {
      return error_response(404, "unsupported language", Json{{"language", lang}});
    }
    const auto result = translate_literal(text, s->capsules.select(lang));
    Json out;
    out["detected_lang"] = lang;
    out["detection_score"] = detection_score;
    out["translation"] = result.text();
    out["oov_tokens"] = result.oov_tokens();
    out["capsule"] = Json{{"lang", result.capsule_lang}, {"version", result.capsule_version}};
    return json_response(200, out);
  }

  Response evaluate(const Json& body) const {
    const auto hyps = required_strings(body, "hypotheses");
    const auto refs = required_strings(body, "references");
    if (hyps.size() != refs.size()) {
      return error_response(400, "hypotheses and references differ in length",
                            Json{{"hypotheses", hyps.size()}, {"references", refs.size()}});
    }
    return json_response(200, to_json(metrics::evaluate_all(hyps, refs)));
  }

  Response list_capsules() const {
    auto s = snapshot();
    Json list = Json::array();
    for (const auto& [lang, c] : s->capsules.capsules()) {
      list.push_back({{"lang", lang}, {"name", c->name()}, {"version", c->version()}, {"entries", c->size()}});
    }
    return json_response(200, Json{{"capsules", list}});
  }

  Response reload_endpoint() {
    try {
      reload();
    } catch (const Error& e) {
      return error_response(500, std::string("reload failed: ") + e.what());
    }
    return health();
  }

  ApiConfig config_;
  mutable std::shared_mutex mutex_;
  std::shared_ptr<const State> state_;
};

/// cpp-httplib front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service) : service_(service) {
    server_.set_payload_max_length(service_.config().max_body_bytes);
    server_.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (req.path == "/v1/health" && (req.method == "GET" || req.method == "HEAD")) {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      if (!authenticate(req.get_header_value("Authorization"), service_.config().api_token)) {
        write(res, Service::unauthorized());
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      Request r{req.method, req.path, std::nullopt, req.body};
      if (req.has_header("Authorization")) r.authorization = req.get_header_value("Authorization");
      write(res, service_.handle(r));
    };
    server_.Get("/v1/health", forward);
    server_.Get("/v1/capsules", forward);
    for (const char* path : {"/v1/detect", "/v1/translate", "/v1/evaluate", "/v1/reload"}) server_.Post(path, forward);
    server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      const char* message = res.status == 413 ? "payload too large" : res.status == 404 ? "not found" : "request failed";
      res.set_content(Json{{"error", message}}.dump() + "\n", "application/json");
      return httplib::Server::HandlerResponse::Handled;
    });
    server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      res.status = 500;
      res.set_content(Json{{"error", "internal error"}}.dump() + "\n", "application/json");
    });
  }

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }

  /// Blocks until stop().
  bool listen() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  static void write(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  }

  Service& service_;
  httplib::Server server_;
};

}  // namespace alpdc::service
