#pragma once

// HTTP-backed providers.
//
// Chat:      POST <endpoint> {"model", "messages": [{"role": "user", "content"}],
//            "temperature"}; the reply text is choices[0].message.content.
// Embedding: POST <endpoint> {"texts": [...]} -> {"vectors": [[...], ...]}.
//
// Define CPPHTTPLIB_OPENSSL_SUPPORT (and link OpenSSL::SSL) for https endpoints.

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <mutex>
#include <optional>
#include <string>

#include "fcbias/embedding.hpp"
#include "fcbias/provider.hpp"

namespace fcbias {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

inline Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || scheme_end == 0)
    throw std::invalid_argument("endpoint '" + url + "' must look like http(s)://host[:port]/path");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

namespace detail {

inline httplib::Client make_client(const Url& url, int timeout_seconds) {
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  return client;
}

inline httplib::Headers auth_headers(const std::string& api_key) {
  httplib::Headers h;
  if (!api_key.empty()) h.emplace("Authorization", "Bearer " + api_key);
  return h;
}

}  // namespace detail

class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig cfg)
      : cfg_(std::move(cfg)), url_(split_url(cfg_.endpoint)), limiter_(cfg_.rate_limit) {}

  static std::string request_body(const ChatRequest& r, double temperature) {
    nlohmann::ordered_json body;
    body["model"] = r.model;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", r.prompt_text}}});
    body["temperature"] = temperature;
    return body.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
  }

  /// Extracts choices[0].message.content; nullopt if the body does not have it.
  static std::optional<std::string> response_content(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    try {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) return std::nullopt;
      return content.get<std::string>();
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }

  std::string complete(const ChatRequest& request) override {
    limiter_.acquire();
    auto client = detail::make_client(url_, cfg_.timeout_seconds);
    auto res = client.Post(url_.path, detail::auth_headers(cfg_.api_key), request_body(request, cfg_.temperature),
                           "application/json");
    if (!res) throw ProviderError(ProviderError::Kind::unreachable, "transport error: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
      throw ProviderError(ProviderError::Kind::transient, "HTTP " + std::to_string(res->status));
    if (res->status < 200 || res->status >= 300)
      throw ProviderError(ProviderError::Kind::permanent, "HTTP " + std::to_string(res->status) + ": " + res->body);
    auto content = response_content(res->body);
    if (!content) throw ProviderError(ProviderError::Kind::transient, "response lacks choices[0].message.content");
    return *content;
  }

 private:
  ProviderConfig cfg_;
  Url url_;
  RateLimiter limiter_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint, std::string api_key = {}, int timeout_seconds = 60, int batch_size = 64)
      : endpoint_(std::move(endpoint)),
        url_(split_url(endpoint_)),
        api_key_(std::move(api_key)),
        timeout_seconds_(timeout_seconds),
        batch_size_(std::max(1, batch_size)) {}

  /// Declared by the service; probed once with a single text, then fixed.
  std::size_t dimension() const override {
    std::lock_guard lock(mutex_);
    if (!dimension_) {
      auto v = post({"dimension probe"});
      if (v.size() != 1 || v[0].empty()) throw EmbeddingError("embedding service returned no probe vector");
      dimension_ = v[0].size();
    }
    return *dimension_;
  }

  std::string name() const override { return endpoint_; }

  std::vector<Vector> embed(const std::vector<std::string>& texts) override {
    const std::size_t dim = dimension();
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); i += static_cast<std::size_t>(batch_size_)) {
      const auto end = std::min(texts.size(), i + static_cast<std::size_t>(batch_size_));
      auto batch = post({texts.begin() + static_cast<std::ptrdiff_t>(i), texts.begin() + static_cast<std::ptrdiff_t>(end)});
      if (batch.size() != end - i) throw EmbeddingError("embedding service returned a short batch");
      for (auto& v : batch) {
        if (v.size() != dim) throw EmbeddingError("embedding service changed dimension mid-run");
        out.push_back(std::move(v));
      }
    }
    return out;
  }

 private:
  std::vector<Vector> post(const std::vector<std::string>& texts) const {
    nlohmann::json body;
    body["texts"] = texts;
    auto client = detail::make_client(url_, timeout_seconds_);
    auto res = client.Post(url_.path, detail::auth_headers(api_key_),
                           body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), "application/json");
    if (!res) throw EmbeddingError("embedding transport error: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) throw EmbeddingError("embedding HTTP " + std::to_string(res->status));
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("vectors")) throw EmbeddingError("embedding response lacks 'vectors'");
    try {
      return j.at("vectors").get<std::vector<Vector>>();
    } catch (const nlohmann::json::exception& e) {
      throw EmbeddingError(std::string("embedding response malformed: ") + e.what());
    }
  }

  std::string endpoint_;
  Url url_;
  std::string api_key_;
  int timeout_seconds_;
  int batch_size_;
  mutable std::mutex mutex_;
  mutable std::optional<std::size_t> dimension_;
};

}  // namespace fcbias
