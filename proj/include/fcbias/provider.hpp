#pragma once

// Chat-completion provider abstraction, response cache, fixture-backed mock,
// retry with seeded exponential backoff, and a request rate limiter.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "fcbias/annotation.hpp"
#include "fcbias/hash.hpp"
#include "fcbias/rng.hpp"

namespace fcbias {

struct ChatRequest {
  PromptId prompt = PromptId::claim;
  std::string prompt_text;
  std::string model;
};

class ProviderError : public std::runtime_error {
 public:
  enum class Kind {
    transient,    // worth retrying (HTTP 429/5xx, timeouts)
    permanent,    // retrying will not help (4xx, missing fixture)
    unreachable,  // transport failure; retried, then aborts the whole run
  };

  ProviderError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Returns the first choice's message content. Throws ProviderError.
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-3.5-turbo";
  int max_retries = 3;
  double rate_limit = 3.0;  // requests per second
  std::string cache_dir = "cache";
  int max_in_flight = 4;
  double temperature = 0.0;
  int timeout_seconds = 60;
  int backoff_base_ms = 500;
  int backoff_max_ms = 30000;
  std::string api_key;  // environment only; never serialized

  void validate() const {
    if (max_retries < 0) throw std::invalid_argument("provider.max_retries must be >= 0");
    if (!(rate_limit > 0)) throw std::invalid_argument("provider.rate_limit must be > 0");
    if (max_in_flight < 1) throw std::invalid_argument("provider.max_in_flight must be >= 1");
    if (timeout_seconds < 1) throw std::invalid_argument("provider.timeout_seconds must be >= 1");
    if (backoff_base_ms < 0 || backoff_max_ms < backoff_base_ms)
      throw std::invalid_argument("provider.backoff_base_ms/backoff_max_ms out of order");
    if (!(temperature >= 0 && temperature <= 2)) throw std::invalid_argument("provider.temperature must be in [0,2]");
  }
};

/// Cache key: SHA-256 over (prompt template id, rendered prompt, model name),
/// fields separated by 0x1F.
inline std::string cache_key(const ChatRequest& r) {
  std::string material;
  material.reserve(r.prompt_text.size() + r.model.size() + 16);
  material += to_string(r.prompt);
  material += '\x1f';
  material += r.prompt_text;
  material += '\x1f';
  material += r.model;
  return sha256_hex(material);
}

/// On-disk response cache, one file per key:
///   "fcbias-cache-v1 <sha256 of body>\n" followed by the raw response bytes.
/// Entries whose checksum does not match are treated as misses.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".resp"); }

  std::optional<std::string> get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::string header;
    if (!std::getline(in, header)) return corrupt();
    std::ostringstream body;
    body << in.rdbuf();
    const std::string prefix = std::string(kMagic) + " ";
    if (header.rfind(prefix, 0) != 0) return corrupt();
    std::string b = body.str();
    if (header.substr(prefix.size()) != sha256_hex(b)) return corrupt();
    return b;
  }

  void put(const std::string& key, const std::string& response) {
    std::unique_lock lock(mutex_);
    const auto final_path = path_for(key);
    auto tmp = final_path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write cache entry '" + tmp.string() + "'");
      out << kMagic << ' ' << sha256_hex(response) << '\n' << response;
    }
    std::filesystem::rename(tmp, final_path);
  }

  std::size_t corrupt_reads() const { return corrupt_reads_.load(); }

 private:
  static constexpr std::string_view kMagic = "fcbias-cache-v1";

  std::optional<std::string> corrupt() const {
    ++corrupt_reads_;
    return std::nullopt;
  }

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  mutable std::atomic<std::size_t> corrupt_reads_{0};
};

/// Mock provider serving `<dir>/<cache key>.txt` verbatim.
class FixtureChatProvider : public ChatProvider {
 public:
  explicit FixtureChatProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_))
      throw std::runtime_error("mock fixture directory '" + dir_.string() + "' does not exist");
  }

  static std::filesystem::path fixture_path(const std::filesystem::path& dir, const ChatRequest& r) {
    return dir / (cache_key(r) + ".txt");
  }

  static void write_fixture(const std::filesystem::path& dir, const ChatRequest& r, std::string_view response) {
    std::filesystem::create_directories(dir);
    std::ofstream out(fixture_path(dir, r), std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write fixture in '" + dir.string() + "'");
    out << response;
  }

  std::string complete(const ChatRequest& request) override {
    const auto path = fixture_path(dir_, request);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProviderError(ProviderError::Kind::permanent, "no fixture " + path.filename().string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  std::filesystem::path dir_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Backoff before retry `attempt` (0-based): min(max, base * 2^attempt) scaled
/// by a jitter factor in [0.5, 1.5) drawn from `rng`.
inline std::chrono::milliseconds backoff_delay(int attempt, int base_ms, int max_ms, Rng& rng) {
  const double raw = std::min<double>(max_ms, base_ms * std::ldexp(1.0, std::min(attempt, 30)));
  return std::chrono::milliseconds(static_cast<long long>(raw * (0.5 + uniform_unit(rng))));
}

/// Calls `provider` up to 1 + max_retries times. Permanent errors are not
/// retried. The jitter stream is seeded from (seed, request key) so schedules
/// reproduce regardless of scheduling order.
inline std::string call_with_retry(ChatProvider& provider, const ChatRequest& request, const ProviderConfig& cfg,
                                   std::uint64_t seed, const Sleeper& sleep, std::atomic<std::size_t>* calls = nullptr) {
  Rng rng(derive_seed(derive_seed(seed, "retry"), cache_key(request)));
  for (int attempt = 0;; ++attempt) {
    try {
      if (calls) ++*calls;
      return provider.complete(request);
    } catch (const ProviderError& e) {
      if (e.kind() == ProviderError::Kind::permanent || attempt >= cfg.max_retries) throw;
      sleep(backoff_delay(attempt, cfg.backoff_base_ms, cfg.backoff_max_ms, rng));
    }
  }
}

/// Spaces request starts at least 1/rate seconds apart across threads.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second)
      : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / per_second))) {
    if (!(per_second > 0)) throw std::invalid_argument("rate limit must be > 0");
  }

  void acquire() {
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard lock(mutex_);
      const auto now = std::chrono::steady_clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_{};
  std::mutex mutex_;
};

}  // namespace fcbias
