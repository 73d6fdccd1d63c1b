// fcbias: command-line front end for the fact-check neutrality pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "fcbias/http_provider.hpp"
#include "fcbias/pipeline.hpp"
#include "fcbias/synth.hpp"

namespace fs = std::filesystem;
using namespace fcbias;

namespace {

RunConfig config_or_defaults(const std::string& path) {
  if (!path.empty()) return load_config(path);
  std::istringstream empty;
  return parse_config(empty);
}

std::unique_ptr<ChatProvider> make_chat_provider(const RunConfig& cfg, const std::string& mock_dir) {
  if (!mock_dir.empty()) return std::make_unique<FixtureChatProvider>(mock_dir);
  if (cfg.provider.api_key.empty())
    std::cerr << "warning: FCBIAS_API_KEY is not set; requests go out unauthenticated\n";
  return std::make_unique<HttpChatProvider>(cfg.provider);
}

std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& cfg) {
  if (cfg.embedding.endpoint.empty()) return std::make_unique<HashingEmbedder>();
  return std::make_unique<HttpEmbeddingProvider>(cfg.embedding.endpoint, cfg.embedding.api_key,
                                                 cfg.provider.timeout_seconds, cfg.embedding.batch_size);
}

/// A `.csv` path receives the first table; anything else a JSON document.
void write_tables(const fs::path& out, const std::vector<Table>& tables) {
  if (out.extension() == ".csv") {
    export_table(tables.front(), TableFormat::csv, out);
  } else if (tables.size() == 1) {
    export_table(tables.front(), TableFormat::json, out);
  } else {
    write_text_file(out, tables_json_text(tables));
  }
  std::cerr << "wrote " << out.string() << '\n';
}

OrgPair parse_orgs(const std::string& s) {
  const auto parts = text::split(s, ',');
  if (parts.size() != 2 || text::trim(parts[0]).empty() || text::trim(parts[1]).empty())
    throw std::invalid_argument("--orgs expects X,Y");
  return {std::string(text::trim(parts[0])), std::string(text::trim(parts[1]))};
}

void warn_cross_geography(const Corpus& corpus, const OrgPair& p) {
  for (const auto& org : {p.first, p.second})
    if (corpus.by_org(org).empty()) throw std::invalid_argument("organization '" + org + "' has no articles in the store");
  const auto cx = corpus.country_of(p.first), cy = corpus.country_of(p.second);
  if (cx != cy)
    std::cerr << "warning: comparing organizations from different geographies (" << p.first << ": " << cx << ", "
              << p.second << ": " << cy << ")\n";
}

AliasMap load_aliases(const std::string& path) { return path.empty() ? AliasMap{} : AliasMap::from_csv(path); }

struct IngestArgs {
  std::string input, from = "2018-01-01", to = "2023-12-31", out;
};

int run_ingest(const IngestArgs& a) {
  const auto result = ingest(a.input, DateRange{Date::from_string(a.from), Date::from_string(a.to)});
  store::save(a.out, result);
  std::cerr << "ingested " << result.corpus.size() << " articles, rejected " << result.rejections.size() << '\n';
  return 0;
}

struct AnnotateArgs {
  std::string store, provider_config, cache, mock;
};

int run_annotate(const AnnotateArgs& a) {
  RunConfig cfg = config_or_defaults(a.provider_config);
  if (!a.cache.empty()) cfg.provider.cache_dir = a.cache;
  const Corpus corpus = store::load(a.store);
  auto chat = make_chat_provider(cfg, a.mock);
  ResponseCache cache(cfg.provider.cache_dir);
  Annotator annotator(*chat, cfg.provider, cfg.seed, &cache);
  const auto annotations = annotate_corpus(corpus, annotator);
  save_annotations(store::annotations_file(a.store), annotations);
  const auto st = annotator.stats();
  std::cerr << "annotated " << annotations.size() << " articles: " << st.provider_calls << " provider calls, "
            << st.cache_hits << " cache hits, " << st.failed_tags << " failed tags\n";
  return 0;
}

struct EmbedArgs {
  std::string store, config;
};

int run_embed(const EmbedArgs& a) {
  const RunConfig cfg = config_or_defaults(a.config);
  auto embedder = make_embedder(cfg);
  const auto store = embed_annotations(load_annotations(store::annotations_file(a.store)), *embedder);
  save_embeddings(store::embeddings_file(a.store), store);
  std::cerr << "embedded " << store.size() << " (article, tag) entries with " << store.model() << '\n';
  return 0;
}

struct SimilarityArgs {
  std::string store, tag = "claim", orgs, out, csv;
  AnalysisConfig analysis;
  bool allow_same_org = false;
};

int run_similarity(SimilarityArgs a) {
  a.analysis.validate();
  const auto tag = parse_tag(a.tag);
  if (!tag) throw std::invalid_argument("--tag must be claim, what or why");
  const auto pair = parse_orgs(a.orgs);
  if (pair.first == pair.second && !a.allow_same_org)
    throw std::invalid_argument("--orgs names the same organization twice (use --allow-same-org for testing)");
  const Corpus corpus = store::load(a.store);
  warn_cross_geography(corpus, pair);
  const auto embeddings = load_embeddings(store::embeddings_file(a.store));
  const auto sim = similarity_stage(corpus, embeddings, {pair}, {*tag}, a.analysis, a.allow_same_org);
  write_tables(a.out, {sim.summary, sim.per_article});
  if (!a.csv.empty()) write_tables(a.csv, {sim.per_article});
  return 0;
}

struct EntitiesArgs {
  std::string store, aliases, orgs, out;
  int top_k = 100;
  int window = 15;
};

int run_entities(const EntitiesArgs& a) {
  const auto pair = parse_orgs(a.orgs);
  const Corpus corpus = store::load(a.store);
  warn_cross_geography(corpus, pair);
  const auto annotations = load_annotations(store::annotations_file(a.store));
  const auto ents = entities_stage(corpus, annotations, load_aliases(a.aliases), {pair},
                                   static_cast<std::size_t>(a.top_k), a.window);
  write_tables(a.out, {ents.summary, ents.sets, ents.windowed});
  return 0;
}

struct PolarityArgs {
  std::string store, aliases, precisions, out;
  std::vector<std::string> ratios;
  int top_k = 5;
  int min_support = 10;
  bool by_year = false;
};

int run_polarity(const PolarityArgs& a) {
  const PrecisionConfig prec = a.precisions.empty() ? PrecisionConfig{} : PrecisionConfig::from_csv(a.precisions);
  RunConfig pairs_cfg;
  for (const auto& r : a.ratios) pairs_cfg.negativity_pairs += r + ";";
  const Corpus corpus = store::load(a.store);
  const auto annotations = load_annotations(store::annotations_file(a.store));
  const auto pol = polarity_stage(corpus, annotations, load_aliases(a.aliases), static_cast<std::size_t>(a.top_k), prec,
                                  static_cast<std::size_t>(a.min_support), a.by_year, pairs_cfg.ratio_pairs());
  for (const auto& n : pol.notes) std::cerr << "note: " << n << '\n';
  write_tables(a.out, {pol.rows, pol.orgs, pol.countries, pol.ratios});
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string format = "svg", out, title, table;
};

/// Concatenates same-kind tables; the report then works on one table per kind.
std::map<std::string, Table> merge_inputs(const std::vector<std::string>& inputs) {
  std::map<std::string, Table> by_kind;
  for (const auto& path : inputs) {
    for (auto& t : read_table_documents(path)) {
      schema::validate(t);
      auto [it, inserted] = by_kind.try_emplace(t.kind(), t);
      if (!inserted) it->second.append(t);
    }
  }
  return by_kind;
}

int run_report(const ReportArgs& a) {
  const auto tables = merge_inputs(a.inputs);
  if (a.format == "csv" || a.format == "json") {
    std::vector<Table> list;
    for (const auto& [kind, t] : tables)
      if (a.table.empty() || kind == a.table) list.push_back(t);
    if (list.empty()) throw std::invalid_argument("no table of kind '" + a.table + "' in inputs");
    if (a.format == "csv" && list.size() != 1)
      throw std::invalid_argument("csv reports hold one table kind; inputs contain " + std::to_string(list.size()) +
                                  ", choose one with --table");
    if (a.format == "csv") {
      export_table(list.front(), TableFormat::csv, a.out);
    } else if (list.size() == 1) {
      export_table(list.front(), TableFormat::json, a.out);
    } else {
      write_text_file(a.out, tables_json_text(list));
    }
    return 0;
  }
  if (a.format != "svg") throw std::invalid_argument("--format must be svg, csv or json");

  std::string svg;
  if (auto it = tables.find("polarity"); it != tables.end()) {
    std::vector<PolarityResult> rows;
    for (auto& r : polarity_rows(it->second))
      if (r.counts.period == kOverallPeriod) rows.push_back(std::move(r));
    svg = render_polarity_chart(rows, {a.title.empty() ? "Entity polarity score" : a.title, "entity",
                                       "polarity score (PS)", -1, 1});
  } else if (auto it = tables.find("similarity_per_article"); it != tables.end()) {
    const Table& t = it->second;
    std::map<std::string, Distribution> groups;
    const auto x = t.column_index("x_org"), y = t.column_index("y_org"), tag = t.column_index("tag");
    const auto sim = t.column_index("max_sim"), matched = t.column_index("matched");
    for (const auto& row : t.rows()) {
      if (std::get<std::int64_t>(row[matched]) == 0) continue;
      const auto label = std::get<std::string>(row[x]) + "->" + std::get<std::string>(row[y]) + " " +
                         std::get<std::string>(row[tag]);
      auto& g = groups[label];
      g.label = label;
      g.values.push_back(std::get<double>(row[sim]));
    }
    std::vector<Distribution> list;
    for (auto& [label, g] : groups) list.push_back(std::move(g));
    svg = render_distribution_chart(list, {a.title.empty() ? "Windowed maximum topical similarity" : a.title,
                                           "pair and tag", "max cosine similarity", 0, 1});
  } else if (auto it = tables.find("jaccard_windowed"); it != tables.end()) {
    const Table& t = it->second;
    std::map<std::string, Distribution> groups;
    const auto x = t.column_index("x_org"), y = t.column_index("y_org"), js = t.column_index("js");
    for (const auto& row : t.rows()) {
      const auto label = std::get<std::string>(row[x]) + "->" + std::get<std::string>(row[y]);
      auto& g = groups[label];
      g.label = label;
      g.values.push_back(std::get<double>(row[js]));
    }
    std::vector<Distribution> list;
    for (auto& [label, g] : groups) list.push_back(std::move(g));
    svg = render_distribution_chart(list, {a.title.empty() ? "Windowed entity Jaccard similarity" : a.title, "pair",
                                           "Jaccard similarity", 0, 1});
  } else {
    throw std::invalid_argument("svg reports need a polarity, similarity_per_article or jaccard_windowed table");
  }
  write_text_file(a.out, svg);
  return 0;
}

struct RunAllArgs {
  std::string store, config, out, input, mock, aliases, cache;
};

int run_run_all(const RunAllArgs& a) {
  RunConfig cfg = config_or_defaults(a.config);
  if (!a.cache.empty()) cfg.provider.cache_dir = a.cache;
  PipelinePaths paths;
  if (!a.input.empty()) paths.input = a.input;
  paths.store = a.store.empty() ? fs::path(cfg.store_dir) : fs::path(a.store);
  paths.out = a.out.empty() ? fs::path(cfg.output_dir) : fs::path(a.out);
  paths.aliases = a.aliases.empty() ? fs::path(cfg.aliases_file) : fs::path(a.aliases);
  auto chat = make_chat_provider(cfg, a.mock);
  auto embedder = make_embedder(cfg);
  const auto summary = run_all(cfg, paths, *chat, *embedder, &std::cerr);
  std::cerr << "wrote " << summary.files.size() << " files to " << paths.out.string() << '\n';
  return 0;
}

struct SynthArgs {
  std::string out;
  std::size_t articles = 1000;
  std::uint64_t seed = 7;
};

int run_synth(const SynthArgs& a) {
  synth::Options opt;
  opt.articles = a.articles;
  opt.seed = a.seed;
  const auto out = synth::generate(a.out, opt);
  std::cerr << "generated " << out.articles.size() << " articles and " << out.fixtures << " fixtures in " << a.out
            << '\n';
  return 0;
}

void add_analysis_options(CLI::App* cmd, AnalysisConfig& c) {
  cmd->add_option("--window", c.window_days, "Window half-width in days")->capture_default_str();
  cmd->add_option("--tau", c.tau, "Similarity threshold (strict)")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Bootstrap seed")->capture_default_str();
  cmd->add_option("--resamples", c.bootstrap_resamples, "Bootstrap resamples")->capture_default_str();
  cmd->add_option("--fraction", c.bootstrap_fraction, "Bootstrap sample fraction")->capture_default_str();
  cmd->add_option("--level", c.confidence_level, "Confidence level")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Political-neutrality analysis of fact-checking corpora"};
  app.require_subcommand(0, 1);
  std::string print_config_file;
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
  app.add_option("--config", print_config_file, "Config file for --print-config");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate and store a JSON-lines corpus");
  ingest_cmd->add_option("--input", ingest_args.input, "Raw JSON-lines corpus")->required();
  ingest_cmd->add_option("--from", ingest_args.from, "First date kept (YYYY-MM-DD)")->capture_default_str();
  ingest_cmd->add_option("--to", ingest_args.to, "Last date kept (YYYY-MM-DD)")->capture_default_str();
  ingest_cmd->add_option("--out", ingest_args.out, "Store directory")->required();

  AnnotateArgs annotate_args;
  auto* annotate_cmd = app.add_subcommand("annotate", "Extract claim/what/why and entity tags via the chat provider");
  annotate_cmd->add_option("--store", annotate_args.store, "Store directory")->required();
  annotate_cmd->add_option("--provider-config", annotate_args.provider_config, "Config file");
  annotate_cmd->add_option("--cache", annotate_args.cache, "Response cache directory");
  annotate_cmd->add_option("--mock", annotate_args.mock, "Serve responses from this fixture directory");

  EmbedArgs embed_args;
  auto* embed_cmd = app.add_subcommand("embed", "Embed annotated tag sentences");
  embed_cmd->add_option("--store", embed_args.store, "Store directory")->required();
  embed_cmd->add_option("--config", embed_args.config, "Config file (embedding.endpoint; empty uses the mock)");

  SimilarityArgs sim_args;
  auto* sim_cmd = app.add_subcommand("similarity", "Windowed maximum topical similarity between two organizations");
  sim_cmd->add_option("--store", sim_args.store, "Store directory")->required();
  sim_cmd->add_option("--tag", sim_args.tag, "claim, what or why")->capture_default_str();
  sim_cmd->add_option("--orgs", sim_args.orgs, "X,Y")->required();
  sim_cmd->add_option("--out", sim_args.out, "Output file (.json or .csv)")->required();
  sim_cmd->add_option("--csv", sim_args.csv, "Also write per-article maxima as CSV");
  sim_cmd->add_flag("--allow-same-org", sim_args.allow_same_org, "Permit X == Y (testing)");
  add_analysis_options(sim_cmd, sim_args.analysis);

  EntitiesArgs ent_args;
  auto* ent_cmd = app.add_subcommand("entities", "Top-k entity sets and Jaccard overlap");
  ent_cmd->add_option("--store", ent_args.store, "Store directory")->required();
  ent_cmd->add_option("--aliases", ent_args.aliases, "Alias CSV (surface,canonical,political)");
  ent_cmd->add_option("--top-k", ent_args.top_k, "Entities per set")->capture_default_str();
  ent_cmd->add_option("--window", ent_args.window, "Window half-width in days")->capture_default_str();
  ent_cmd->add_option("--orgs", ent_args.orgs, "X,Y")->required();
  ent_cmd->add_option("--out", ent_args.out, "Output file (.json or .csv)")->required();

  PolarityArgs pol_args;
  auto* pol_cmd = app.add_subcommand("polarity", "Entity polarity scores with maximum log error");
  pol_cmd->add_option("--store", pol_args.store, "Store directory")->required();
  pol_cmd->add_option("--aliases", pol_args.aliases, "Alias CSV (surface,canonical,political)");
  pol_cmd->add_option("--top-k", pol_args.top_k, "Entities per organization")->capture_default_str();
  pol_cmd->add_option("--min-support", pol_args.min_support, "Minimum mentions per entity")->capture_default_str();
  pol_cmd->add_option("--precisions", pol_args.precisions, "Precision CSV (precision_p,precision_n,precision_neutral)");
  pol_cmd->add_flag("--by-year", pol_args.by_year, "Emit per-year rows");
  pol_cmd->add_option("--ratio", pol_args.ratios, "Negativity ratio entity pair A|B (repeatable)");
  pol_cmd->add_option("--out", pol_args.out, "Output file (.json or .csv)")->required();

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Render or re-export analysis tables");
  report_cmd->add_option("--inputs", report_args.inputs, "Table files (JSON)")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", report_args.format, "svg, csv or json")
      ->check(CLI::IsMember({"svg", "csv", "json"}))
      ->capture_default_str();
  report_cmd->add_option("--title", report_args.title, "Chart title");
  report_cmd->add_option("--table", report_args.table, "Table kind for csv or json output");
  report_cmd->add_option("--out", report_args.out, "Output path")->required();

  RunAllArgs run_args;
  auto* run_cmd = app.add_subcommand("run-all", "ingest, annotate, embed, analyze and report");
  run_cmd->add_option("--store", run_args.store, "Store directory (default: store_dir)");
  run_cmd->add_option("--config", run_args.config, "Config file");
  run_cmd->add_option("--out", run_args.out, "Output directory (default: output_dir)");
  run_cmd->add_option("--input", run_args.input, "Raw corpus to ingest first");
  run_cmd->add_option("--mock", run_args.mock, "Serve chat responses from this fixture directory");
  run_cmd->add_option("--aliases", run_args.aliases, "Alias CSV (default: aliases_file)");
  run_cmd->add_option("--cache", run_args.cache, "Response cache directory (default: provider.cache_dir)");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with mock fixtures");
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
  synth_cmd->add_option("--articles", synth_args.articles, "Number of articles")->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "Generator seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_config) {
      std::cout << serialize_config(config_or_defaults(print_config_file));
      return 0;
    }
    if (*ingest_cmd) return run_ingest(ingest_args);
    if (*annotate_cmd) return run_annotate(annotate_args);
    if (*embed_cmd) return run_embed(embed_args);
    if (*sim_cmd) return run_similarity(sim_args);
    if (*ent_cmd) return run_entities(ent_args);
    if (*pol_cmd) return run_polarity(pol_args);
    if (*report_cmd) return run_report(report_args);
    if (*run_cmd) return run_run_all(run_args);
    if (*synth_cmd) return run_synth(synth_args);
    std::cout << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
