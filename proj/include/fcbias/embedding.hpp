#pragma once

// Tag embeddings: one unit vector per (article, tag), built by mean-pooling
// sentence vectors from an embedding provider and L2-normalizing the mean.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcbias/annotation.hpp"
#include "fcbias/rng.hpp"

namespace fcbias {

using Vector = std::vector<double>;

enum class Tag { claim, what, why };

inline constexpr Tag kAllTags[] = {Tag::claim, Tag::what, Tag::why};

inline const char* to_string(Tag t) {
  switch (t) {
    case Tag::claim: return "claim";
    case Tag::what: return "what";
    case Tag::why: return "why";
  }
  return "?";
}

inline std::optional<Tag> parse_tag(std::string_view s) {
  if (s == "claim") return Tag::claim;
  if (s == "what") return Tag::what;
  if (s == "why") return Tag::why;
  return std::nullopt;
}

inline const std::vector<std::string>& sentences_for(const Annotation& a, Tag t) {
  switch (t) {
    case Tag::claim: return a.claim;
    case Tag::what: return a.what;
    case Tag::why: return a.why;
  }
  return a.claim;
}

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;
  /// One vector per input text. Throws EmbeddingError on failure.
  virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
};

/// Deterministic offline embedder.
///
/// Tokens are maximal runs of ASCII letters/digits, lowercased. For each
/// token t with h = FNV-1a-64(t): coordinate (h mod 64) receives +1 if bit 32
/// of h is 0, otherwise -1. The summed vector is L2-normalized; a text with no
/// tokens maps to the zero vector.
class HashingEmbedder : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDimension = 64;

  std::size_t dimension() const override { return kDimension; }
  std::string name() const override { return "mock-hashing-bow-64"; }

  static Vector embed_one(std::string_view text) {
    Vector v(kDimension, 0.0);
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      const std::uint64_t h = fnv1a64(token);
      v[h % kDimension] += ((h >> 32) & 1U) ? -1.0 : 1.0;
      token.clear();
    };
    for (unsigned char c : text) {
      if (c < 0x80 && std::isalnum(c)) {
        token.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
    }
    flush();
    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm > 0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    return v;
  }

  std::vector<Vector> embed(const std::vector<std::string>& texts) override {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
  }
};

/// Embeds a batch, retrying the whole batch up to `max_retries` times.
/// On final failure nothing is returned (partials are discarded).
inline std::vector<Vector> embed_sentences(const std::vector<std::string>& sentences, EmbeddingProvider& provider,
                                           int max_retries = 2) {
  if (sentences.empty()) return {};
  for (const auto& s : sentences)
    if (s.empty()) throw std::invalid_argument("embed_sentences: empty sentence");
  for (int attempt = 0;; ++attempt) {
    try {
      auto vectors = provider.embed(sentences);
      if (vectors.size() != sentences.size())
        throw EmbeddingError("provider returned " + std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(sentences.size()) + " texts");
      for (const auto& v : vectors)
        if (v.size() != provider.dimension())
          throw EmbeddingError("provider returned a vector of dimension " + std::to_string(v.size()) +
                               ", declared " + std::to_string(provider.dimension()));
      return vectors;
    } catch (const EmbeddingError&) {
      if (attempt >= max_retries) throw;
    }
  }
}

/// Mean of the vectors, L2-normalized. nullopt for an empty list or a zero mean.
inline std::optional<Vector> aggregate_tag(const std::vector<Vector>& vectors) {
  if (vectors.empty()) return std::nullopt;
  const std::size_t dim = vectors.front().size();
  Vector mean(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != dim) throw std::invalid_argument("aggregate_tag: dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) mean[i] += v[i];
  }
  double norm = 0;
  for (double x : mean) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0) || !std::isfinite(norm)) return std::nullopt;
  for (double& x : mean) x /= norm;
  return mean;
}

/// Dot product of two unit vectors clamped to [-1, 1].
inline double cosine(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()) + ")");
  double dot = 0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return std::clamp(dot, -1.0, 1.0);
}

struct TagEmbedding {
  std::string article_id;
  Tag tag = Tag::claim;
  std::optional<Vector> vector;  // absent when there were no sentences or the mean was zero
  std::size_t n_sentences = 0;

  bool present() const { return vector.has_value(); }
  friend bool operator==(const TagEmbedding&, const TagEmbedding&) = default;
};

/// All tag embeddings of a run, keyed by (article_id, tag).
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::size_t dimension, std::string model) : dimension_(dimension), model_(std::move(model)) {}

  void add(TagEmbedding e) {
    if (e.vector && e.vector->size() != dimension_)
      throw std::invalid_argument("embedding for '" + e.article_id + "' has wrong dimension");
    items_[{e.article_id, e.tag}] = std::move(e);
  }

  const TagEmbedding* find(const std::string& article_id, Tag tag) const {
    auto it = items_.find({article_id, tag});
    return it == items_.end() ? nullptr : &it->second;
  }

  std::size_t dimension() const { return dimension_; }
  const std::string& model() const { return model_; }
  std::size_t size() const { return items_.size(); }
  const auto& items() const { return items_; }

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  std::size_t dimension_ = 0;
  std::string model_;
  std::map<std::pair<std::string, Tag>, TagEmbedding> items_;
};

/// Embeds every (annotation, tag). Failed tags and empty sentence lists yield
/// absent embeddings.
inline EmbeddingStore embed_annotations(const AnnotationMap& annotations, EmbeddingProvider& provider) {
  EmbeddingStore store(provider.dimension(), provider.name());
  for (const auto& [id, ann] : annotations) {
    for (Tag tag : kAllTags) {
      const PromptId prompt = tag == Tag::claim ? PromptId::claim : PromptId::what_why;
      TagEmbedding e{id, tag, std::nullopt, 0};
      if (!ann.failed(prompt)) {
        const auto& sentences = sentences_for(ann, tag);
        std::vector<std::string> nonempty;
        for (const auto& s : sentences)
          if (!s.empty()) nonempty.push_back(s);
        e.n_sentences = nonempty.size();
        if (!nonempty.empty()) e.vector = aggregate_tag(embed_sentences(nonempty, provider));
      }
      store.add(std::move(e));
    }
  }
  return store;
}

// Sidecar: {"dimension": d, "model": "...", "items": [{"article_id", "tag",
// "n_sentences", "vector": [..] | null}, ...]}
inline void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store) {
  nlohmann::ordered_json j;
  j["dimension"] = store.dimension();
  j["model"] = store.model();
  auto items = nlohmann::ordered_json::array();
  for (const auto& [key, e] : store.items()) {
    nlohmann::ordered_json item;
    item["article_id"] = e.article_id;
    item["tag"] = to_string(e.tag);
    item["n_sentences"] = e.n_sentences;
    item["vector"] = e.vector ? nlohmann::ordered_json(*e.vector) : nlohmann::ordered_json(nullptr);
    items.push_back(std::move(item));
  }
  j["items"] = std::move(items);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embeddings to '" + path.string() + "'");
  out << j.dump() << '\n';
}

inline EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read embeddings '" + path.string() + "'; run embed first");
  const auto j = nlohmann::json::parse(in);
  EmbeddingStore store(j.at("dimension").get<std::size_t>(), j.at("model").get<std::string>());
  for (const auto& item : j.at("items")) {
    auto tag = parse_tag(item.at("tag").get<std::string>());
    if (!tag) throw std::runtime_error("embeddings: bad tag in '" + path.string() + "'");
    TagEmbedding e{item.at("article_id").get<std::string>(), *tag, std::nullopt,
                   item.at("n_sentences").get<std::size_t>()};
    if (!item.at("vector").is_null()) e.vector = item.at("vector").get<Vector>();
    store.add(std::move(e));
  }
  return store;
}

}  // namespace fcbias
