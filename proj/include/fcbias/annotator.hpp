#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "fcbias/annotation.hpp"
#include "fcbias/corpus.hpp"
#include "fcbias/provider.hpp"

namespace fcbias {

/// Raised when the provider stays unreachable after retries. Cache entries
/// written before the abort are kept.
class AnnotationAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnnotateStats {
  std::size_t provider_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t failed_tags = 0;
};

/// Issues the three prompts for an article through a provider, with optional
/// caching, and parses the responses.
class Annotator {
 public:
  Annotator(ChatProvider& provider, ProviderConfig cfg, std::uint64_t seed, ResponseCache* cache = nullptr,
            Sleeper sleep = real_sleep)
      : provider_(provider), cfg_(std::move(cfg)), seed_(seed), cache_(cache), sleep_(std::move(sleep)) {
    cfg_.validate();
  }

  TagOutcome<std::vector<std::string>> extract_claim(const Article& a) {
    TagOutcome<std::vector<std::string>> out;
    auto raw = fetch(PromptId::claim, a, out.error);
    if (!raw) return out;
    out = parse_claim_response(*raw, prompts::post_text(a));
    if (!out.ok) out.raw = *raw;
    return out;
  }

  TagOutcome<WhatWhy> extract_what_why(const Article& a) {
    TagOutcome<WhatWhy> out;
    auto raw = fetch(PromptId::what_why, a, out.error);
    if (!raw) return out;
    out = parse_what_why_response(*raw, prompts::post_text(a));
    if (!out.ok) out.raw = *raw;
    return out;
  }

  TagOutcome<EntityMap> tag_entities(const Article& a) {
    TagOutcome<EntityMap> out;
    auto raw = fetch(PromptId::entities, a, out.error);
    if (!raw) return out;
    out = parse_entities_response(*raw);
    if (!out.ok) out.raw = *raw;
    return out;
  }

  Annotation annotate(const Article& a) {
    Annotation ann;
    ann.article_id = a.id;
    auto record = [&](PromptId p, auto& outcome) {
      ann.quality_flags.insert(ann.quality_flags.end(), outcome.flags.begin(), outcome.flags.end());
      if (!outcome.ok) {
        ann.failures.push_back({p, outcome.error, outcome.raw});
        ++failed_tags_;
      }
    };
    auto claim = extract_claim(a);
    record(PromptId::claim, claim);
    ann.claim = std::move(claim.value);
    auto ww = extract_what_why(a);
    record(PromptId::what_why, ww);
    ann.what = std::move(ww.value.what);
    ann.why = std::move(ww.value.why);
    auto ents = tag_entities(a);
    record(PromptId::entities, ents);
    ann.entities = std::move(ents.value);
    return ann;
  }

  AnnotateStats stats() const { return {calls_.load(), cache_hits_.load(), failed_tags_.load()}; }

  const ProviderConfig& config() const { return cfg_; }

 private:
  std::optional<std::string> fetch(PromptId p, const Article& a, std::string& error) {
    ChatRequest req{p, prompts::render(p, a), cfg_.model_name};
    std::string key;
    if (cache_) {
      key = cache_key(req);
      if (auto hit = cache_->get(key)) {
        ++cache_hits_;
        return hit;
      }
    }
    try {
      std::string raw = call_with_retry(provider_, req, cfg_, seed_, sleep_, &calls_);
      if (cache_) cache_->put(key, raw);
      return raw;
    } catch (const ProviderError& e) {
      if (e.kind() == ProviderError::Kind::unreachable)
        throw AnnotationAborted(std::string("provider unreachable: ") + e.what());
      error = std::string("provider failure: ") + e.what();
      return std::nullopt;
    }
  }

  ChatProvider& provider_;
  ProviderConfig cfg_;
  std::uint64_t seed_;
  ResponseCache* cache_;
  Sleeper sleep_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> failed_tags_{0};
};

/// Annotates every article, up to cfg.max_in_flight articles concurrently.
/// The returned map is keyed (and therefore ordered) by article id.
inline AnnotationMap annotate_corpus(const Corpus& corpus, Annotator& annotator) {
  const auto& articles = corpus.articles();
  std::vector<std::optional<Annotation>> slots(articles.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= articles.size()) return;
      try {
        slots[i] = annotator.annotate(articles[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        abort = true;
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(annotator.config().max_in_flight), articles.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  AnnotationMap out;
  for (auto& slot : slots) out.emplace(slot->article_id, std::move(*slot));
  return out;
}

}  // namespace fcbias
