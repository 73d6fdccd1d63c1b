#pragma once

// Polarity scores per (organization, entity, period):
//
//   PS  = (N_p - N_n) / N_t
//   ΔPS = (N_p * (1 - precision_p) + N_n * (1 - precision_n)) / N_t
//
// where N_p / N_n count positive / negative tags and N_t counts all tags
// (positive + negative + neutral) of the entity. ΔPS is the maximum log error
// propagated from imperfect label precision (N_t itself carries no error).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcbias/annotation.hpp"
#include "fcbias/corpus.hpp"
#include "fcbias/csv.hpp"
#include "fcbias/entities.hpp"

namespace fcbias {

inline constexpr const char* kOverallPeriod = "overall";

struct PolarityCounts {
  std::string org;
  std::string entity;
  std::string period = kOverallPeriod;  // a year like "2019", or "overall"
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_total = 0;

  void validate() const {
    if (n_total == 0) throw std::domain_error("polarity undefined for '" + entity + "': N_t = 0");
    if (n_pos + n_neg > n_total)
      throw std::invalid_argument("polarity counts for '" + entity + "': N_p + N_n exceeds N_t");
  }

  friend bool operator==(const PolarityCounts&, const PolarityCounts&) = default;
};

struct PrecisionConfig {
  double precision_p = 1.0;
  double precision_n = 0.706;
  double precision_neutral = 1.0;

  void validate() const {
    for (double p : {precision_p, precision_n, precision_neutral})
      if (!(p >= 0 && p <= 1)) throw std::invalid_argument("precision values must be in [0, 1]");
  }

  /// 3-column CSV: header `precision_p,precision_n,precision_neutral` and one row.
  static PrecisionConfig from_csv(std::istream& in) {
    const auto rows = csv::read_all(in);
    if (rows.size() < 2) throw std::invalid_argument("precision csv: expected a header and one data row");
    PrecisionConfig cfg;
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
      const std::string name = text::ascii_lower(text::trim(rows[0][c]));
      if (c >= rows[1].size()) throw std::invalid_argument("precision csv: missing value for '" + name + "'");
      double v = 0;
      try {
        std::size_t used = 0;
        v = std::stod(rows[1][c], &used);
        if (text::trim(rows[1][c].substr(used)).size() != 0) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::invalid_argument("precision csv: bad number for '" + name + "'");
      }
      if (name == "precision_p") {
        cfg.precision_p = v;
      } else if (name == "precision_n") {
        cfg.precision_n = v;
      } else if (name == "precision_neutral") {
        cfg.precision_neutral = v;
      } else {
        throw std::invalid_argument("precision csv: unknown column '" + name + "'");
      }
    }
    cfg.validate();
    return cfg;
  }

  static PrecisionConfig from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read precision file '" + path.string() + "'");
    return from_csv(in);
  }

  friend bool operator==(const PrecisionConfig&, const PrecisionConfig&) = default;
};

inline double polarity_score(const PolarityCounts& c) {
  c.validate();
  return (static_cast<double>(c.n_pos) - static_cast<double>(c.n_neg)) / static_cast<double>(c.n_total);
}

inline double max_log_error(const PolarityCounts& c, const PrecisionConfig& prec) {
  c.validate();
  prec.validate();
  return (static_cast<double>(c.n_pos) * (1 - prec.precision_p) +
          static_cast<double>(c.n_neg) * (1 - prec.precision_n)) /
         static_cast<double>(c.n_total);
}

struct PolarityResult {
  PolarityCounts counts;
  double ps = 0;
  double delta_ps = 0;
};

inline PolarityResult evaluate_polarity(PolarityCounts counts, const PrecisionConfig& prec) {
  const double ps = polarity_score(counts);
  const double delta = max_log_error(counts, prec);
  return {std::move(counts), ps, delta};
}

/// One (article, canonical entity) sentiment tag.
struct Mention {
  std::string article_id;
  int year = 0;
  std::string entity;
  Sentiment sentiment = Sentiment::neutral;
};

/// Article-level mentions of an organization after canonicalization. Surface
/// forms of one article that collapse to the same entity with different labels
/// are merged as neutral. Articles whose entity prompt failed contribute nothing.
inline std::vector<Mention> collect_mentions(const Corpus& corpus, const AnnotationMap& annotations,
                                             const AliasMap& aliases, std::string_view org,
                                             bool political_only = true) {
  std::vector<Mention> out;
  for (const Article* a : corpus.by_org(org)) {
    auto it = annotations.find(a->id);
    if (it == annotations.end() || it->second.failed(PromptId::entities)) continue;
    std::map<std::string, Sentiment> merged;
    for (const auto& [surface, s] : it->second.entities) {
      std::string canon = aliases.canonicalize(surface);
      if (canon.empty() || (political_only && !aliases.is_political(canon))) continue;
      auto [slot, inserted] = merged.emplace(std::move(canon), s);
      if (!inserted && slot->second != s) slot->second = Sentiment::neutral;
    }
    for (auto& [entity, s] : merged) out.push_back({a->id, a->published_at.year(), entity, s});
  }
  return out;
}

inline PolarityCounts count_mentions(const std::vector<Mention>& mentions, std::string org, const std::string& entity,
                                     std::optional<int> year) {
  PolarityCounts c{std::move(org), entity, year ? std::to_string(*year) : kOverallPeriod, 0, 0, 0};
  for (const auto& m : mentions) {
    if (m.entity != entity || (year && m.year != *year)) continue;
    ++c.n_total;
    if (m.sentiment == Sentiment::positive) ++c.n_pos;
    if (m.sentiment == Sentiment::negative) ++c.n_neg;
  }
  return c;
}

/// Per-year results (ascending) when `by_year`, then the overall result.
/// Empty when the entity never occurs.
inline std::vector<PolarityResult> entity_series(const std::vector<Mention>& mentions, const std::string& org,
                                                 const std::string& entity, bool by_year, const PrecisionConfig& prec) {
  std::vector<PolarityResult> out;
  const PolarityCounts overall = count_mentions(mentions, org, entity, std::nullopt);
  if (overall.n_total == 0) return out;
  if (by_year) {
    std::set<int> years;
    for (const auto& m : mentions)
      if (m.entity == entity) years.insert(m.year);
    for (int y : years) out.push_back(evaluate_polarity(count_mentions(mentions, org, entity, y), prec));
  }
  out.push_back(evaluate_polarity(overall, prec));
  return out;
}

struct OrgPolarity {
  std::string org;
  double micro_ps = 0;  // pooled over every entity in the mention list
  double macro_ps = 0;  // unweighted mean over the ranked top-k
  std::vector<PolarityResult> top_entities;
  std::size_t n_entities = 0;
};

/// Overall counts for every entity of the mention list, most frequent first
/// (N_t desc, then name asc).
inline std::vector<PolarityCounts> ranked_entity_counts(const std::vector<Mention>& mentions, const std::string& org) {
  std::map<std::string, PolarityCounts> by_entity;
  for (const auto& m : mentions) {
    auto& c = by_entity.try_emplace(m.entity, PolarityCounts{org, m.entity, kOverallPeriod, 0, 0, 0}).first->second;
    ++c.n_total;
    if (m.sentiment == Sentiment::positive) ++c.n_pos;
    if (m.sentiment == Sentiment::negative) ++c.n_neg;
  }
  std::vector<PolarityCounts> out;
  for (auto& [name, c] : by_entity) out.push_back(std::move(c));
  std::stable_sort(out.begin(), out.end(), [](const PolarityCounts& a, const PolarityCounts& b) {
    return a.n_total != b.n_total ? a.n_total > b.n_total : a.entity < b.entity;
  });
  return out;
}

/// micro = (ΣN_p - ΣN_n) / ΣN_t over all entities; macro = mean PS of the
/// top_k most frequent entities having N_t >= min_support.
inline OrgPolarity org_polarity(const std::vector<Mention>& mentions, const std::string& org, std::size_t top_k,
                                const PrecisionConfig& prec, std::size_t min_support = 10) {
  if (top_k < 1) throw std::invalid_argument("org_polarity: top_k must be >= 1");
  const auto ranked = ranked_entity_counts(mentions, org);
  if (ranked.empty()) throw std::domain_error("org_polarity: no political entities for '" + org + "'");
  OrgPolarity out;
  out.org = org;
  out.n_entities = ranked.size();
  std::size_t p = 0, n = 0, t = 0;
  for (const auto& c : ranked) {
    p += c.n_pos;
    n += c.n_neg;
    t += c.n_total;
  }
  out.micro_ps = polarity_score(PolarityCounts{org, "*", kOverallPeriod, p, n, t});
  for (const auto& c : ranked) {
    if (out.top_entities.size() >= top_k) break;
    if (c.n_total < min_support) continue;
    out.top_entities.push_back(evaluate_polarity(c, prec));
  }
  if (out.top_entities.empty())
    throw std::domain_error("org_polarity: no entity of '" + org + "' reaches the minimum support of " +
                            std::to_string(min_support));
  double sum = 0;
  for (const auto& r : out.top_entities) sum += r.ps;
  out.macro_ps = sum / static_cast<double>(out.top_entities.size());
  return out;
}

/// (N_n / N_t of entity_a) / (N_n / N_t of entity_b).
inline double negativity_ratio(const std::vector<Mention>& mentions, const std::string& org,
                               const std::string& entity_a, const std::string& entity_b) {
  const auto a = count_mentions(mentions, org, entity_a, std::nullopt);
  const auto b = count_mentions(mentions, org, entity_b, std::nullopt);
  if (a.n_total == 0) throw std::domain_error("negativity_ratio: '" + entity_a + "' never occurs");
  if (b.n_total == 0) throw std::domain_error("negativity_ratio: '" + entity_b + "' never occurs");
  if (b.n_neg == 0) throw std::domain_error("negativity_ratio: '" + entity_b + "' has no negative tags");
  const double rate_a = static_cast<double>(a.n_neg) / static_cast<double>(a.n_total);
  const double rate_b = static_cast<double>(b.n_neg) / static_cast<double>(b.n_total);
  return rate_a / rate_b;
}

/// Mean of organization-level scores, e.g. macro PS of the orgs of one country.
inline double mean_score(const std::vector<double>& scores) {
  if (scores.empty()) throw std::domain_error("mean_score: no scores");
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

}  // namespace fcbias
