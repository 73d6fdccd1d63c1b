#pragma once

// Analysis stages shared by the CLI subcommands and the run-all pipeline.

#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fcbias/annotator.hpp"
#include "fcbias/config.hpp"
#include "fcbias/corpus.hpp"
#include "fcbias/embedding.hpp"
#include "fcbias/entities.hpp"
#include "fcbias/polarity.hpp"
#include "fcbias/report.hpp"
#include "fcbias/similarity.hpp"
#include "fcbias/tables.hpp"

namespace fcbias {

using OrgPair = std::pair<std::string, std::string>;

/// Ordered pairs (X, Y), X != Y, of organizations sharing a country.
inline std::vector<OrgPair> within_country_pairs(const Corpus& corpus) {
  std::vector<OrgPair> out;
  const auto orgs = corpus.orgs();
  for (const auto& x : orgs)
    for (const auto& y : orgs)
      if (x != y && corpus.country_of(x) == corpus.country_of(y)) out.emplace_back(x, y);
  return out;
}

struct SimilarityOutput {
  std::vector<SimilarityResult> results;
  Table per_article = schema::make("similarity_per_article");
  Table summary = schema::make("similarity_summary");
};

inline SimilarityOutput similarity_stage(const Corpus& corpus, const EmbeddingStore& store,
                                         const std::vector<OrgPair>& pairs, const std::vector<Tag>& tags,
                                         const AnalysisConfig& cfg, bool allow_same_org = false) {
  SimilarityOutput out;
  for (const auto& [x, y] : pairs) {
    for (Tag tag : tags) {
      auto r = windowed_max_similarity(x, org_tag_vectors(corpus, store, x, tag), y,
                                       org_tag_vectors(corpus, store, y, tag), tag, cfg, allow_same_org);
      attach_bootstrap(r, cfg);
      append_similarity(out.per_article, out.summary, r);
      out.results.push_back(std::move(r));
    }
  }
  return out;
}

struct EntityOutput {
  Table sets = schema::make("entity_sets");
  Table windowed = schema::make("jaccard_windowed");
  Table summary = schema::make("jaccard_summary");
  std::map<OrgPair, WindowedJaccard> distributions;
};

/// Global top-k political entity sets per organization, plus global and
/// windowed Jaccard overlap for each pair.
inline EntityOutput entities_stage(const Corpus& corpus, const AnnotationMap& annotations, const AliasMap& aliases,
                                   const std::vector<OrgPair>& pairs, std::size_t k, int window_days) {
  EntityOutput out;
  std::set<std::string> orgs;
  for (const auto& [x, y] : pairs) {
    orgs.insert(x);
    orgs.insert(y);
  }
  std::map<std::string, EntitySet> sets;
  for (const auto& org : orgs) {
    sets[org] = top_k_entities(org, org_annotations(corpus, annotations, org), aliases, k, /*political_only=*/true);
    append_entity_set(out.sets, sets[org]);
  }
  for (const auto& [x, y] : pairs) {
    const auto global = jaccard(sets[x].names(), sets[y].names());
    auto w = windowed_jaccard(org_dated_entities(corpus, annotations, aliases, x),
                              org_dated_entities(corpus, annotations, aliases, y), k, window_days);
    for (const auto& d : w.days) out.windowed.add_row({x, y, d.day.to_string(), d.js});
    out.summary.add_row({x, y, static_cast<std::int64_t>(k), std::int64_t{window_days},
                         global ? Cell(*global) : Cell(std::monostate{}),
                         w.median ? Cell(*w.median) : Cell(std::monostate{}),
                         static_cast<std::int64_t>(w.days.size())});
    out.distributions[{x, y}] = std::move(w);
  }
  return out;
}

struct PolarityOutput {
  Table rows = schema::make("polarity");
  Table orgs = schema::make("org_polarity");
  Table countries = schema::make("country_polarity");
  Table ratios = schema::make("negativity_ratio");
  std::vector<PolarityResult> chart_rows;  // overall rows of each org's top-k entities
  std::vector<std::string> notes;
};

inline PolarityOutput polarity_stage(const Corpus& corpus, const AnnotationMap& annotations, const AliasMap& aliases,
                                     std::size_t top_k, const PrecisionConfig& prec, std::size_t min_support,
                                     bool by_year, const std::vector<OrgPair>& ratio_pairs) {
  PolarityOutput out;
  std::map<std::string, std::vector<std::pair<double, double>>> by_country;
  for (const auto& org : corpus.orgs()) {
    const auto mentions = collect_mentions(corpus, annotations, aliases, org);
    for (const auto& [a, b] : ratio_pairs) {
      try {
        out.ratios.add_row({org, a, b, negativity_ratio(mentions, org, a, b), std::monostate{}});
      } catch (const std::domain_error& e) {
        out.ratios.add_row({org, a, b, std::monostate{}, std::string(e.what())});
      }
    }
    OrgPolarity op;
    try {
      op = org_polarity(mentions, org, top_k, prec, min_support);
    } catch (const std::domain_error& e) {
      out.notes.push_back(e.what());
      continue;
    }
    for (const auto& r : op.top_entities) {
      for (const auto& s : entity_series(mentions, org, r.counts.entity, by_year, prec)) append_polarity(out.rows, s);
      out.chart_rows.push_back(r);
    }
    const std::string country = corpus.country_of(org);
    out.orgs.add_row({org, country, op.micro_ps, op.macro_ps, static_cast<std::int64_t>(top_k),
                      static_cast<std::int64_t>(op.n_entities)});
    by_country[country].emplace_back(op.macro_ps, op.micro_ps);
  }
  for (const auto& [country, scores] : by_country) {
    std::vector<double> macro, micro;
    for (const auto& [ma, mi] : scores) {
      macro.push_back(ma);
      micro.push_back(mi);
    }
    out.countries.add_row({country, mean_score(macro), mean_score(micro), static_cast<std::int64_t>(scores.size())});
  }
  return out;
}

inline std::vector<Distribution> similarity_distributions(const std::vector<SimilarityResult>& results) {
  std::vector<Distribution> out;
  for (const auto& r : results) out.push_back({r.direction() + " " + to_string(r.tag), r.matched_values});
  return out;
}

inline std::vector<Distribution> jaccard_distributions(const std::map<OrgPair, WindowedJaccard>& d) {
  std::vector<Distribution> out;
  for (const auto& [pair, w] : d) {
    Distribution dist{pair.first + "->" + pair.second, {}};
    for (const auto& day : w.days) dist.values.push_back(day.js);
    out.push_back(std::move(dist));
  }
  return out;
}

struct PipelinePaths {
  std::optional<std::filesystem::path> input;  // raw corpus to ingest; otherwise the store must exist
  std::filesystem::path store;
  std::filesystem::path out;
  std::filesystem::path aliases;
};

struct RunSummary {
  std::size_t articles = 0;
  std::size_t rejections = 0;
  std::size_t annotations = 0;
  std::size_t failed_tags = 0;
  std::size_t provider_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t similarity_results = 0;
  std::size_t polarity_rows = 0;
  std::vector<std::filesystem::path> files;
};

/// ingest -> annotate -> embed -> similarity -> entities -> polarity -> report.
inline RunSummary run_all(const RunConfig& cfg, const PipelinePaths& paths, ChatProvider& chat,
                          EmbeddingProvider& embedder, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  RunSummary summary;
  auto note = [&](const std::string& msg) {
    if (log) *log << msg << '\n';
  };

  Corpus corpus;
  if (paths.input) {
    auto ingested = ingest(*paths.input, cfg.date_range());
    summary.rejections = ingested.rejections.size();
    store::save(paths.store, ingested);
    corpus = std::move(ingested.corpus);
  } else {
    corpus = store::load(paths.store);
  }
  summary.articles = corpus.size();
  note("ingest: " + std::to_string(corpus.size()) + " articles, " + std::to_string(summary.rejections) + " rejected");

  ResponseCache cache(cfg.provider.cache_dir);
  Annotator annotator(chat, cfg.provider, cfg.seed, &cache);
  const auto annotations = annotate_corpus(corpus, annotator);
  save_annotations(store::annotations_file(paths.store), annotations);
  const auto st = annotator.stats();
  summary.annotations = annotations.size();
  summary.failed_tags = st.failed_tags;
  summary.provider_calls = st.provider_calls;
  summary.cache_hits = st.cache_hits;
  note("annotate: " + std::to_string(annotations.size()) + " annotations, " + std::to_string(st.provider_calls) +
       " provider calls, " + std::to_string(st.cache_hits) + " cache hits, " + std::to_string(st.failed_tags) +
       " failed tags");

  const auto embeddings = embed_annotations(annotations, embedder);
  save_embeddings(store::embeddings_file(paths.store), embeddings);
  note("embed: " + std::to_string(embeddings.size()) + " tag embeddings (dimension " +
       std::to_string(embeddings.dimension()) + ")");

  fs::create_directories(paths.out);
  auto emit = [&](const Table& t, const std::string& stem) {
    for (auto [fmt, ext] : {std::pair{TableFormat::csv, ".csv"}, std::pair{TableFormat::json, ".json"}}) {
      const auto p = paths.out / (stem + ext);
      export_table(t, fmt, p);
      summary.files.push_back(p);
    }
  };
  auto emit_svg = [&](const std::string& svg, const std::string& name) {
    const auto p = paths.out / name;
    write_text_file(p, svg);
    summary.files.push_back(p);
  };

  emit(counts_table(org_counts(corpus, /*by_year=*/true)), "org_counts");

  const auto pairs = within_country_pairs(corpus);
  const std::vector<Tag> tags(std::begin(kAllTags), std::end(kAllTags));
  const auto sim = similarity_stage(corpus, embeddings, pairs, tags, cfg.analysis);
  summary.similarity_results = sim.results.size();
  emit(sim.per_article, "similarity_per_article");
  emit(sim.summary, "similarity_summary");
  emit_svg(render_distribution_chart(similarity_distributions(sim.results),
                                     {"Windowed maximum topical similarity (above threshold)", "pair and tag",
                                      "max cosine similarity", 0, 1}),
           "similarity.svg");
  note("similarity: " + std::to_string(sim.results.size()) + " pair/tag results");

  const AliasMap aliases = paths.aliases.empty() ? AliasMap{} : AliasMap::from_csv(paths.aliases);
  const auto ents = entities_stage(corpus, annotations, aliases, pairs, static_cast<std::size_t>(cfg.entity_top_k),
                                   cfg.analysis.window_days);
  emit(ents.sets, "entity_sets");
  emit(ents.windowed, "jaccard_windowed");
  emit(ents.summary, "jaccard_summary");
  emit_svg(render_distribution_chart(jaccard_distributions(ents.distributions),
                                     {"Windowed top-k entity Jaccard similarity", "pair", "Jaccard similarity", 0, 1}),
           "jaccard.svg");

  const auto pol = polarity_stage(corpus, annotations, aliases, static_cast<std::size_t>(cfg.polarity_top_k),
                                  cfg.precision, static_cast<std::size_t>(cfg.min_support), cfg.polarity_by_year,
                                  cfg.ratio_pairs());
  summary.polarity_rows = pol.rows.size();
  for (const auto& n : pol.notes) note("polarity: " + n);
  emit(pol.rows, "polarity");
  emit(pol.orgs, "org_polarity");
  emit(pol.countries, "country_polarity");
  emit(pol.ratios, "negativity_ratio");
  emit_svg(render_polarity_chart(pol.chart_rows, {"Polarity score of top entities per organization", "entity",
                                                  "polarity score (PS)", -1, 1}),
           "polarity.svg");
  note("polarity: " + std::to_string(pol.rows.size()) + " rows");
  return summary;
}

}  // namespace fcbias
