#pragma once

// Output schemas of the analysis stages and converters from result types.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcbias/corpus.hpp"
#include "fcbias/entities.hpp"
#include "fcbias/polarity.hpp"
#include "fcbias/similarity.hpp"
#include "fcbias/table.hpp"

namespace fcbias::schema {

inline Column str(std::string n, bool nullable = false) { return {std::move(n), ColumnType::string, nullable}; }
inline Column integer(std::string n, bool nullable = false) { return {std::move(n), ColumnType::integer, nullable}; }
inline Column real(std::string n, bool nullable = false) { return {std::move(n), ColumnType::real, nullable}; }

inline const std::map<std::string, std::vector<Column>>& registry() {
  static const std::map<std::string, std::vector<Column>> r = {
      {"org_counts", {str("org"), integer("year", true), integer("count")}},
      {"similarity_per_article",
       {str("x_org"), str("y_org"), str("tag"), str("article_id"), str("best_match_id", true), real("max_sim", true),
        integer("matched")}},
      {"similarity_summary",
       {str("x_org"), str("y_org"), str("tag"), str("direction"), integer("n_articles"), integer("n_matched"),
        real("match_rate"), real("median", true), real("ci_lo", true), real("ci_hi", true),
        real("unfiltered_median", true), real("unfiltered_ci_lo", true), real("unfiltered_ci_hi", true)}},
      {"entity_sets", {str("org"), integer("rank"), str("entity"), integer("frequency")}},
      {"jaccard_windowed", {str("x_org"), str("y_org"), str("day"), real("js")}},
      {"jaccard_summary",
       {str("x_org"), str("y_org"), integer("k"), integer("window_days"), real("global_js", true),
        real("windowed_median", true), integer("n_days")}},
      {"polarity",
       {str("org"), str("entity"), str("period"), integer("n_pos"), integer("n_neg"), integer("n_total"), real("ps"),
        real("delta_ps")}},
      {"org_polarity",
       {str("org"), str("country"), real("micro_ps"), real("macro_ps"), integer("top_k"), integer("n_entities")}},
      {"country_polarity", {str("country"), real("mean_macro_ps"), real("mean_micro_ps"), integer("n_orgs")}},
      {"negativity_ratio", {str("org"), str("entity_a"), str("entity_b"), real("ratio", true), str("note", true)}},
  };
  return r;
}

inline const std::vector<Column>& columns(const std::string& kind) {
  auto it = registry().find(kind);
  if (it == registry().end()) throw std::invalid_argument("unknown table kind '" + kind + "'");
  return it->second;
}

inline Table make(const std::string& kind) { return Table(kind, columns(kind)); }

/// Throws unless the table's kind is registered and its columns match.
inline void validate(const Table& t) {
  if (t.columns() != columns(t.kind()))
    throw std::invalid_argument("table '" + t.kind() + "' does not match its registered schema");
}

}  // namespace fcbias::schema

namespace fcbias {

namespace detail {
inline Cell opt(const std::optional<double>& v) { return v ? Cell(*v) : Cell(std::monostate{}); }
inline Cell opt(const std::optional<std::string>& v) { return v ? Cell(*v) : Cell(std::monostate{}); }
inline Cell i64(std::size_t v) { return static_cast<std::int64_t>(v); }
}  // namespace detail

inline Table counts_table(const std::vector<CountCell>& cells) {
  auto t = schema::make("org_counts");
  for (const auto& c : cells)
    t.add_row({c.org, c.year ? Cell(std::int64_t{*c.year}) : Cell(std::monostate{}), detail::i64(c.count)});
  return t;
}

inline void append_similarity(Table& per_article, Table& summary, const SimilarityResult& r) {
  const std::string tag = to_string(r.tag);
  for (const auto& m : r.per_article)
    per_article.add_row({r.x_org, r.y_org, tag, m.article_id, detail::opt(m.best_match_id), detail::opt(m.max_sim),
                         std::int64_t{m.matched ? 1 : 0}});
  auto lo = [](const std::optional<Interval>& i) { return i ? Cell(i->lo) : Cell(std::monostate{}); };
  auto hi = [](const std::optional<Interval>& i) { return i ? Cell(i->hi) : Cell(std::monostate{}); };
  summary.add_row({r.x_org, r.y_org, tag, r.direction(), detail::i64(r.per_article.size()),
                   detail::i64(r.matched_values.size()), r.match_rate, detail::opt(r.median), lo(r.ci), hi(r.ci),
                   detail::opt(r.unfiltered_median), lo(r.unfiltered_ci), hi(r.unfiltered_ci)});
}

inline void append_entity_set(Table& t, const EntitySet& s) {
  std::int64_t rank = 0;
  for (const auto& [name, freq] : s.entities) t.add_row({s.org, ++rank, name, detail::i64(freq)});
}

inline void append_polarity(Table& t, const PolarityResult& r) {
  const auto& c = r.counts;
  t.add_row({c.org, c.entity, c.period, detail::i64(c.n_pos), detail::i64(c.n_neg), detail::i64(c.n_total), r.ps,
             r.delta_ps});
}

/// Rebuilds PolarityResult rows from a "polarity" table.
inline std::vector<PolarityResult> polarity_rows(const Table& t) {
  if (t.kind() != "polarity") throw std::invalid_argument("expected a 'polarity' table, got '" + t.kind() + "'");
  schema::validate(t);
  std::vector<PolarityResult> out;
  for (const auto& row : t.rows()) {
    PolarityCounts c{std::get<std::string>(row[0]), std::get<std::string>(row[1]), std::get<std::string>(row[2]),
                     static_cast<std::size_t>(std::get<std::int64_t>(row[3])),
                     static_cast<std::size_t>(std::get<std::int64_t>(row[4])),
                     static_cast<std::size_t>(std::get<std::int64_t>(row[5]))};
    out.push_back({std::move(c), std::get<double>(row[6]), std::get<double>(row[7])});
  }
  return out;
}

}  // namespace fcbias
