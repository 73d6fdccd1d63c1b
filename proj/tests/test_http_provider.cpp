#include <gtest/gtest.h>

#include <thread>

#include "fcbias/http_provider.hpp"

using namespace fcbias;

namespace {

/// httplib server on an ephemeral localhost port, stopped on destruction.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ProviderConfig chat_config(const std::string& endpoint) {
  ProviderConfig cfg;
  cfg.endpoint = endpoint;
  cfg.rate_limit = 1000;
  cfg.timeout_seconds = 5;
  cfg.api_key = "test-key";
  return cfg;
}

}  // namespace

TEST(SplitUrl, OriginAndPath) {
  const auto u = split_url("https://api.example.com:8443/v1/chat/completions");
  EXPECT_EQ(u.origin, "https://api.example.com:8443");
  EXPECT_EQ(u.path, "/v1/chat/completions");
  EXPECT_EQ(split_url("http://h").path, "/");
  EXPECT_THROW(split_url("not a url"), std::invalid_argument);
}

TEST(HttpChat, RequestBodyFollowsWireContract) {
  const auto body = nlohmann::json::parse(HttpChatProvider::request_body({PromptId::claim, "hello", "m1"}, 0.0));
  EXPECT_EQ(body.at("model"), "m1");
  ASSERT_EQ(body.at("messages").size(), 1u);
  EXPECT_EQ(body.at("messages")[0].at("role"), "user");
  EXPECT_EQ(body.at("messages")[0].at("content"), "hello");
  EXPECT_EQ(body.at("temperature"), 0.0);
}

TEST(HttpChat, ResponseContentExtraction) {
  EXPECT_EQ(HttpChatProvider::response_content(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
  EXPECT_FALSE(HttpChatProvider::response_content(R"({"choices":[]})"));
  EXPECT_FALSE(HttpChatProvider::response_content("nope"));
  EXPECT_FALSE(HttpChatProvider::response_content(R"({"choices":[{"message":{"content":5}}]})"));
}

TEST(HttpChat, RoundTripAgainstLocalServer) {
  LocalServer srv;
  std::string seen_auth, seen_body;
  srv.server().Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    const auto prompt = nlohmann::json::parse(req.body).at("messages")[0].at("content").get<std::string>();
    nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + prompt}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  HttpChatProvider p(chat_config(srv.url("/v1/chat")));
  EXPECT_EQ(p.complete({PromptId::claim, "ping", "m"}), "echo: ping");
  EXPECT_EQ(seen_auth, "Bearer test-key");
  EXPECT_EQ(nlohmann::json::parse(seen_body).at("model"), "m");
}

TEST(HttpChat, StatusCodesMapToErrorKinds) {
  LocalServer srv;
  srv.server().Post("/429", [](const httplib::Request&, httplib::Response& res) { res.status = 429; });
  srv.server().Post("/503", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  srv.server().Post("/400", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  auto kind_of = [&](const std::string& path) {
    HttpChatProvider p(chat_config(srv.url(path)));
    try {
      p.complete({PromptId::claim, "x", "m"});
    } catch (const ProviderError& e) {
      return e.kind();
    }
    ADD_FAILURE() << path << " did not throw";
    return ProviderError::Kind::permanent;
  };
  EXPECT_EQ(kind_of("/429"), ProviderError::Kind::transient);
  EXPECT_EQ(kind_of("/503"), ProviderError::Kind::transient);
  EXPECT_EQ(kind_of("/400"), ProviderError::Kind::permanent);
}

TEST(HttpChat, ConnectionRefusedIsUnreachable) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto cfg = chat_config("http://127.0.0.1:" + std::to_string(port) + "/x");
  cfg.timeout_seconds = 2;
  HttpChatProvider p(cfg);
  try {
    p.complete({PromptId::claim, "x", "m"});
    FAIL() << "expected an unreachable error";
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderError::Kind::unreachable);
  }
}

TEST(HttpEmbedding, BatchesAndValidatesDimension) {
  LocalServer srv;
  std::vector<std::size_t> batch_sizes;
  srv.server().Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    const auto texts = nlohmann::json::parse(req.body).at("texts").get<std::vector<std::string>>();
    batch_sizes.push_back(texts.size());
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& t : texts) vectors.push_back({static_cast<double>(t.size()), 1.0, 0.0});
    res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
  });
  HttpEmbeddingProvider p(srv.url("/embed"), "", 5, 2);
  EXPECT_EQ(p.dimension(), 3u);
  const auto v = p.embed({"a", "bb", "ccc", "dddd", "eeeee"});
  ASSERT_EQ(v.size(), 5u);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i][0], static_cast<double>(i + 1));
  EXPECT_EQ(batch_sizes, (std::vector<std::size_t>{1, 2, 2, 1}));
}

TEST(HttpEmbedding, MalformedResponsesThrow) {
  LocalServer srv;
  srv.server().Post("/bad", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"nope": []})", "application/json");
  });
  srv.server().Post("/short", [](const httplib::Request& req, httplib::Response& res) {
    const auto n = nlohmann::json::parse(req.body).at("texts").size();
    res.set_content(n == 1 ? R"({"vectors": [[1, 0]]})" : R"({"vectors": [[1, 0]]})", "application/json");
  });
  HttpEmbeddingProvider bad(srv.url("/bad"), "", 5, 8);
  EXPECT_THROW(bad.dimension(), EmbeddingError);
  HttpEmbeddingProvider shorty(srv.url("/short"), "", 5, 8);
  EXPECT_EQ(shorty.dimension(), 2u);
  EXPECT_THROW(shorty.embed({"a", "b"}), EmbeddingError);
}
