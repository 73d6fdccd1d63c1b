#pragma once

// Entity canonicalization, political filtering, per-organization top-k entity
// sets and Jaccard overlap (global and per-day windowed).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fcbias/annotation.hpp"
#include "fcbias/bootstrap.hpp"
#include "fcbias/corpus.hpp"
#include "fcbias/csv.hpp"
#include "fcbias/text.hpp"

namespace fcbias {

/// Surface form -> canonical name table plus the set of political canonicals.
/// Lookups are case-insensitive (ASCII) and whitespace-normalized. Every
/// canonical name maps to itself; alias chains are rejected.
class AliasMap {
 public:
  static std::string lookup_key(std::string_view s) { return text::ascii_lower(text::squash_whitespace(s)); }

  void add_alias(std::string_view surface, std::string_view canonical) {
    const std::string canon = text::squash_whitespace(canonical);
    if (canon.empty()) throw std::invalid_argument("alias map: empty canonical name");
    const std::string ck = lookup_key(canon);
    const std::string sk = lookup_key(surface);
    if (sk.empty()) throw std::invalid_argument("alias map: empty surface form for '" + canon + "'");
    if (auto it = map_.find(ck); it != map_.end() && it->second != canon)
      throw std::invalid_argument("alias map: '" + canon + "' is already mapped to '" + it->second + "'");
    map_[ck] = canon;
    canonical_keys_.insert(ck);
    if (sk == ck) return;
    if (canonical_keys_.contains(sk))
      throw std::invalid_argument("alias map: canonical name '" + map_[sk] + "' cannot be an alias of '" + canon + "'");
    if (auto it = map_.find(sk); it != map_.end() && it->second != canon)
      throw std::invalid_argument("alias map: '" + std::string(surface) + "' maps to both '" + it->second +
                                  "' and '" + canon + "'");
    map_[sk] = canon;
  }

  void set_political(std::string_view canonical, bool political) {
    const std::string canon = canonicalize(canonical);
    add_alias(canon, canon);
    const std::string ck = lookup_key(canon);
    if (auto it = political_flag_.find(ck); it != political_flag_.end() && it->second != political)
      throw std::invalid_argument("alias map: conflicting political flag for '" + canon + "'");
    political_flag_[ck] = political;
    if (political) {
      political_.insert(canon);
    } else {
      political_.erase(canon);
    }
  }

  /// Mapped canonical name, or the whitespace-normalized surface itself.
  std::string canonicalize(std::string_view surface) const {
    auto it = map_.find(lookup_key(surface));
    if (it != map_.end()) return it->second;
    return text::squash_whitespace(surface);
  }

  bool is_political(std::string_view canonical) const { return political_.contains(canonicalize(canonical)); }

  const std::set<std::string>& political() const { return political_; }
  std::size_t size() const { return map_.size(); }

  /// CSV with header `surface,canonical,political`; `political` is yes/no
  /// (normally on canonical rows) or empty.
  static AliasMap from_csv(std::istream& in) {
    AliasMap m;
    const auto rows = csv::read_all(in);
    if (rows.empty()) return m;
    std::vector<std::string> header;
    for (const auto& h : rows.front()) header.push_back(text::ascii_lower(text::trim(h)));
    auto col = [&](const char* name) -> std::size_t {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw std::invalid_argument(std::string("alias csv: missing column '") + name + "'");
      return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t s_col = col("surface"), c_col = col("canonical");
    const auto p_it = std::find(header.begin(), header.end(), "political");
    const std::optional<std::size_t> p_col =
        p_it == header.end() ? std::nullopt : std::optional<std::size_t>(p_it - header.begin());
    std::vector<std::pair<std::string, bool>> flags;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() == 1 && text::trim(row[0]).empty()) continue;
      auto field = [&](std::size_t c) { return c < row.size() ? std::string(text::trim(row[c])) : std::string(); };
      const std::string surface = field(s_col);
      std::string canonical = field(c_col);
      if (canonical.empty()) canonical = surface;
      try {
        m.add_alias(surface, canonical);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("alias csv row " + std::to_string(r + 1) + ": " + e.what());
      }
      if (p_col) {
        const std::string p = text::ascii_lower(field(*p_col));
        if (p == "yes" || p == "y" || p == "true" || p == "1") {
          flags.emplace_back(canonical, true);
        } else if (p == "no" || p == "n" || p == "false" || p == "0") {
          flags.emplace_back(canonical, false);
        } else if (!p.empty()) {
          throw std::invalid_argument("alias csv row " + std::to_string(r + 1) + ": bad political value '" + p + "'");
        }
      }
    }
    for (const auto& [name, political] : flags) m.set_political(name, political);
    return m;
  }

  static AliasMap from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read alias map '" + path.string() + "'");
    return from_csv(in);
  }

 private:
  std::unordered_map<std::string, std::string> map_;  // lookup key -> canonical display name
  std::unordered_set<std::string> canonical_keys_;
  std::unordered_map<std::string, bool> political_flag_;
  std::set<std::string> political_;
};

inline std::string canonicalize(std::string_view surface, const AliasMap& aliases) {
  return aliases.canonicalize(surface);
}

/// Ranked (canonical name, article frequency) list, frequency desc then name asc.
struct EntitySet {
  std::string org;
  std::size_t k = 0;
  std::vector<std::pair<std::string, std::size_t>> entities;

  std::set<std::string> names() const {
    std::set<std::string> s;
    for (const auto& [name, freq] : entities) s.insert(name);
    return s;
  }
};

/// Canonical entity names of one annotation (each counted once). Empty when
/// the entity prompt failed.
inline std::set<std::string> article_entities(const Annotation& a, const AliasMap& aliases, bool political_only) {
  std::set<std::string> out;
  if (a.failed(PromptId::entities)) return out;
  for (const auto& [surface, sentiment] : a.entities) {
    std::string canon = aliases.canonicalize(surface);
    if (canon.empty()) continue;
    if (political_only && !aliases.is_political(canon)) continue;
    out.insert(std::move(canon));
  }
  return out;
}

inline EntitySet rank_top_k(std::string org, const std::map<std::string, std::size_t>& counts, std::size_t k) {
  EntitySet set{std::move(org), k, {counts.begin(), counts.end()}};
  std::stable_sort(set.entities.begin(), set.entities.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (set.entities.size() > k) set.entities.resize(k);
  return set;
}

inline EntitySet top_k_entities(std::string org, const std::vector<const Annotation*>& annotations,
                                const AliasMap& aliases, std::size_t k, bool political_only) {
  if (k < 1) throw std::invalid_argument("top_k_entities: k must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const Annotation* a : annotations)
    for (const auto& name : article_entities(*a, aliases, political_only)) ++counts[name];
  return rank_top_k(std::move(org), counts, k);
}

/// |A ∩ B| / |A ∪ B|; nullopt when both sets are empty.
inline std::optional<double> jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return std::nullopt;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.contains(x) ? 1 : 0;
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Political canonical entities of one article, with its date.
struct DatedEntities {
  std::string article_id;
  Date date;
  std::set<std::string> entities;
};

inline std::vector<DatedEntities> org_dated_entities(const Corpus& corpus, const AnnotationMap& annotations,
                                                     const AliasMap& aliases, std::string_view org,
                                                     bool political_only = true) {
  std::vector<DatedEntities> out;
  for (const Article* a : corpus.by_org(org)) {
    auto it = annotations.find(a->id);
    if (it == annotations.end()) continue;
    out.push_back({a->id, a->published_at, article_entities(it->second, aliases, political_only)});
  }
  return out;
}

inline std::vector<const Annotation*> org_annotations(const Corpus& corpus, const AnnotationMap& annotations,
                                                      std::string_view org) {
  std::vector<const Annotation*> out;
  for (const Article* a : corpus.by_org(org))
    if (auto it = annotations.find(a->id); it != annotations.end()) out.push_back(&it->second);
  return out;
}

struct DayJaccard {
  Date day;
  double js = 0;
  friend bool operator==(const DayJaccard&, const DayJaccard&) = default;
};

struct WindowedJaccard {
  std::vector<DayJaccard> days;
  std::optional<double> median;
  std::vector<std::string> flags;
};

/// For each distinct day d with an X article: each organization's top-k set
/// over articles dated in [d - w, d + w]; emits JS for days where both sets
/// are non-empty.
inline WindowedJaccard windowed_jaccard(std::vector<DatedEntities> X, std::vector<DatedEntities> Y, std::size_t k,
                                        int window_days) {
  if (k < 1) throw std::invalid_argument("windowed_jaccard: k must be >= 1");
  if (window_days < 0) throw std::invalid_argument("windowed_jaccard: window must be >= 0");
  auto by_date = [](const DatedEntities& a, const DatedEntities& b) { return a.date < b.date; };
  std::stable_sort(X.begin(), X.end(), by_date);
  std::stable_sort(Y.begin(), Y.end(), by_date);

  auto window_top_k = [&](const std::vector<DatedEntities>& v, Date lo, Date hi) {
    auto first = std::lower_bound(v.begin(), v.end(), lo, [](const DatedEntities& e, Date d) { return e.date < d; });
    std::map<std::string, std::size_t> counts;
    for (auto it = first; it != v.end() && it->date <= hi; ++it)
      for (const auto& name : it->entities) ++counts[name];
    return rank_top_k({}, counts, k).names();
  };

  WindowedJaccard out;
  std::optional<Date> previous;
  for (const auto& x : X) {
    if (previous && *previous == x.date) continue;
    previous = x.date;
    const Date lo = x.date - window_days, hi = x.date + window_days;
    const auto ex = window_top_k(X, lo, hi);
    const auto ey = window_top_k(Y, lo, hi);
    if (ex.empty() || ey.empty()) continue;
    out.days.push_back({x.date, *jaccard(ex, ey)});
  }
  if (out.days.empty()) {
    out.flags.push_back("no day with non-empty entity sets for both organizations");
  } else {
    std::vector<double> values;
    for (const auto& d : out.days) values.push_back(d.js);
    out.median = median(values);
  }
  return out;
}

}  // namespace fcbias
