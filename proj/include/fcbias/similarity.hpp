#pragma once

// Windowed maximum topical similarity between two organizations.
//
// For each article x of organization X (with an embedding for the tag), the
// candidates are the articles y of Y with |date(x) - date(y)| <= window_days.
// x's score is the maximum cosine over its candidates; ties go to the
// smallest article id. Scores strictly above tau form the matched
// distribution whose median (and bootstrap CI) is reported. The direction is
// X -> Y; the result is not symmetric.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcbias/bootstrap.hpp"
#include "fcbias/corpus.hpp"
#include "fcbias/embedding.hpp"

namespace fcbias {

struct AnalysisConfig {
  int window_days = 15;
  double tau = 0.75;
  int bootstrap_resamples = 10000;
  double bootstrap_fraction = 0.2;
  double confidence_level = 0.95;
  std::uint64_t seed = 20240101;

  void validate() const {
    if (window_days < 0) throw std::invalid_argument("window_days must be >= 0");
    if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("tau must be in [0, 1]");
    if (bootstrap_resamples < 1) throw std::invalid_argument("bootstrap_resamples must be >= 1");
    if (!(bootstrap_fraction > 0 && bootstrap_fraction <= 1))
      throw std::invalid_argument("bootstrap_fraction must be in (0, 1]");
    if (!(confidence_level > 0 && confidence_level < 1))
      throw std::invalid_argument("confidence_level must be in (0, 1)");
  }

  BootstrapParams bootstrap() const {
    return {bootstrap_resamples, bootstrap_fraction, confidence_level, seed};
  }

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

/// One article's tag embedding with its publication date.
struct DatedVector {
  std::string article_id;
  Date date;
  std::optional<Vector> vector;
};

struct ArticleMatch {
  std::string article_id;
  std::optional<std::string> best_match_id;  // absent when no Y article is inside the window
  std::optional<double> max_sim;
  bool matched = false;  // max_sim > tau
  friend bool operator==(const ArticleMatch&, const ArticleMatch&) = default;
};

struct SimilarityResult {
  std::string x_org;
  std::string y_org;
  Tag tag = Tag::claim;
  std::vector<ArticleMatch> per_article;  // X articles with a present embedding, in (date, id) order
  std::vector<double> matched_values;     // max_sim > tau, same order as per_article
  std::vector<double> unfiltered_values;  // every present max_sim
  std::optional<double> median;           // of matched_values
  std::optional<double> unfiltered_median;
  std::optional<Interval> ci;  // bootstrap CI of the matched median
  std::optional<Interval> unfiltered_ci;
  double match_rate = 0;  // |matched| / |X articles with embedding|
  std::vector<std::string> flags;

  std::string direction() const { return x_org + "->" + y_org; }
};

/// Dated tag vectors of one organization, in corpus order. Articles without an
/// embedding record are included with an absent vector.
inline std::vector<DatedVector> org_tag_vectors(const Corpus& corpus, const EmbeddingStore& store,
                                                std::string_view org, Tag tag) {
  std::vector<DatedVector> out;
  for (const auto* a : corpus.by_org(org)) {
    const TagEmbedding* e = store.find(a->id, tag);
    out.push_back({a->id, a->published_at, e ? e->vector : std::nullopt});
  }
  return out;
}

inline SimilarityResult windowed_max_similarity(const std::string& x_org, const std::vector<DatedVector>& X,
                                                const std::string& y_org, const std::vector<DatedVector>& Y, Tag tag,
                                                const AnalysisConfig& cfg, bool allow_same_org = false) {
  cfg.validate();
  if (x_org == y_org && !allow_same_org)
    throw std::invalid_argument("similarity: X and Y must be different organizations (got '" + x_org + "')");

  SimilarityResult r;
  r.x_org = x_org;
  r.y_org = y_org;
  r.tag = tag;

  std::vector<const DatedVector*> xs, ys;
  for (const auto& x : X)
    if (x.vector) xs.push_back(&x);
  for (const auto& y : Y)
    if (y.vector) ys.push_back(&y);
  auto by_date_id = [](const DatedVector* a, const DatedVector* b) {
    return a->date != b->date ? a->date < b->date : a->article_id < b->article_id;
  };
  std::sort(xs.begin(), xs.end(), by_date_id);
  std::sort(ys.begin(), ys.end(), by_date_id);

  if (xs.empty()) {
    r.flags.push_back("no " + x_org + " articles with a '" + to_string(tag) + "' embedding");
    return r;
  }
  if (ys.empty()) r.flags.push_back("no " + y_org + " articles with a '" + to_string(tag) + "' embedding");

  for (const DatedVector* x : xs) {
    ArticleMatch m{x->article_id, std::nullopt, std::nullopt, false};
    const Date lo = x->date - cfg.window_days;
    const Date hi = x->date + cfg.window_days;
    auto it = std::lower_bound(ys.begin(), ys.end(), lo, [](const DatedVector* y, Date d) { return y->date < d; });
    for (; it != ys.end() && (*it)->date <= hi; ++it) {
      const DatedVector* y = *it;
      const double s = cosine(*x->vector, *y->vector);
      if (!m.max_sim || s > *m.max_sim || (s == *m.max_sim && y->article_id < *m.best_match_id)) {
        m.max_sim = s;
        m.best_match_id = y->article_id;
      }
    }
    if (m.max_sim) {
      r.unfiltered_values.push_back(*m.max_sim);
      if (*m.max_sim > cfg.tau) {
        m.matched = true;
        r.matched_values.push_back(*m.max_sim);
      }
    }
    r.per_article.push_back(std::move(m));
  }

  r.match_rate = static_cast<double>(r.matched_values.size()) / static_cast<double>(xs.size());
  if (!r.matched_values.empty()) r.median = median(r.matched_values);
  if (!r.unfiltered_values.empty()) r.unfiltered_median = median(r.unfiltered_values);
  if (r.unfiltered_values.empty()) r.flags.push_back("no candidates inside the window for any article; median undefined");
  return r;
}

/// Fills ci / unfiltered_ci from the result's value lists.
inline void attach_bootstrap(SimilarityResult& r, const AnalysisConfig& cfg) {
  if (!r.matched_values.empty()) r.ci = bootstrap_median_ci(r.matched_values, cfg.bootstrap());
  if (!r.unfiltered_values.empty()) r.unfiltered_ci = bootstrap_median_ci(r.unfiltered_values, cfg.bootstrap());
}

inline Interval bootstrap_median_ci(std::span<const double> values, const AnalysisConfig& cfg) {
  return bootstrap_median_ci(values, cfg.bootstrap());
}

}  // namespace fcbias
