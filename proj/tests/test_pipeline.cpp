#include <gtest/gtest.h>

#include <cstdlib>

#include "fcbias/config.hpp"
#include "fcbias/pipeline.hpp"
#include "fcbias/synth.hpp"
#include "test_support.hpp"

using namespace fcbias;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const fs::path& cache) {
  RunConfig cfg;
  cfg.analysis.bootstrap_resamples = 300;
  cfg.provider.cache_dir = cache.string();
  cfg.min_support = 3;
  cfg.negativity_pairs = "Donald Trump|Joe Biden";
  return cfg;
}

RunSummary run(const fs::path& synth_dir, const fs::path& root, const RunConfig& cfg) {
  FixtureChatProvider chat(synth_dir / "fixtures");
  HashingEmbedder embedder;
  return run_all(cfg, {synth_dir / "corpus.jsonl", root / "store", root / "out", synth_dir / "aliases.csv"}, chat,
                 embedder);
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + FCBIAS_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, WithinCountryPairsAreOrderedAndDistinct) {
  const DateRange range{Date::from_string("2018-01-01"), Date::from_string("2023-12-31")};
  const Date d = Date::from_string("2020-01-01");
  const Corpus corpus({{"1", "Snopes", "USA", d, "", "b", std::nullopt},
                       {"2", "PolitiFact", "USA", d, "", "b", std::nullopt},
                       {"3", "Boom", "India", d, "", "b", std::nullopt}},
                      range);
  const auto pairs = within_country_pairs(corpus);
  ASSERT_EQ(pairs.size(), 2u);
  for (const auto& [x, y] : pairs) {
    EXPECT_NE(x, y);
    EXPECT_EQ(corpus.country_of(x), corpus.country_of(y));
  }
}

TEST(Pipeline, RunAllEmitsValidTablesDeterministically) {
  testutil::TempDir dir;
  synth::Options opt;
  opt.articles = 150;
  const auto gen = synth::generate(dir / "synth", opt);
  EXPECT_EQ(gen.articles.size(), 150u);
  EXPECT_EQ(gen.fixtures, 450u);

  const auto a = run(dir / "synth", dir / "a", small_config(dir / "cache_a"));
  const auto b = run(dir / "synth", dir / "b", small_config(dir / "cache_b"));
  EXPECT_EQ(a.articles, 150u);
  EXPECT_EQ(a.annotations, 150u);
  EXPECT_GT(a.similarity_results, 0u);
  EXPECT_GT(a.polarity_rows, 0u);
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    SCOPED_TRACE(a.files[i].filename().string());
    EXPECT_EQ(testutil::read_file(a.files[i]), testutil::read_file(b.files[i]));
    if (a.files[i].extension() == ".json") {
      for (const auto& t : read_table_documents(a.files[i])) EXPECT_NO_THROW(schema::validate(t));
    }
  }
  for (const char* svg : {"similarity.svg", "jaccard.svg", "polarity.svg"})
    EXPECT_TRUE(fs::exists(dir / "a" / "out" / svg)) << svg;

  // A rerun against the warm cache makes no provider calls.
  const auto warm = run(dir / "synth", dir / "a", small_config(dir / "cache_a"));
  EXPECT_EQ(warm.provider_calls, 0u);
  EXPECT_EQ(warm.cache_hits, 450u);
}

TEST(Cli, StagesChainThroughTheStore) {
  testutil::TempDir dir;
  const auto log = dir / "log.txt";
  const auto s = dir / "s";
  const auto st = dir / "store";
  ASSERT_EQ(cli("synth --out " + s.string() + " --articles 80 --seed 3", log), 0) << testutil::read_file(log);
  ASSERT_EQ(cli("ingest --input " + (s / "corpus.jsonl").string() + " --out " + st.string(), log), 0)
      << testutil::read_file(log);
  ASSERT_EQ(cli("annotate --store " + st.string() + " --mock " + (s / "fixtures").string() + " --cache " +
                    (dir / "cache").string(),
                log),
            0)
      << testutil::read_file(log);
  ASSERT_EQ(cli("embed --store " + st.string(), log), 0) << testutil::read_file(log);

  ASSERT_EQ(cli("similarity --store " + st.string() + " --orgs Snopes,PolitiFact --tag what --resamples 200 --out " +
                    (dir / "sim.json").string() + " --csv " + (dir / "sim.csv").string(),
                log),
            0)
      << testutil::read_file(log);
  const auto sim = read_table_documents(dir / "sim.json");
  ASSERT_EQ(sim.size(), 2u);
  EXPECT_EQ(sim[0].kind(), "similarity_summary");
  EXPECT_TRUE(fs::exists(dir / "sim.csv"));

  ASSERT_EQ(cli("entities --store " + st.string() + " --aliases " + (s / "aliases.csv").string() +
                    " --orgs Snopes,PolitiFact --out " + (dir / "ent.json").string(),
                log),
            0)
      << testutil::read_file(log);
  EXPECT_FALSE(read_table_documents(dir / "ent.json").empty());

  ASSERT_EQ(cli("polarity --store " + st.string() + " --aliases " + (s / "aliases.csv").string() +
                    " --min-support 2 --precisions " + (s / "precisions.csv").string() + " --out " +
                    (dir / "pol.json").string(),
                log),
            0)
      << testutil::read_file(log);
  ASSERT_EQ(cli("report --inputs " + (dir / "pol.json").string() + " --format svg --out " + (dir / "pol.svg").string(),
                log),
            0)
      << testutil::read_file(log);
  EXPECT_NE(testutil::read_file(dir / "pol.svg").find("<svg"), std::string::npos);
  ASSERT_EQ(cli("report --inputs " + (dir / "pol.json").string() + " --format csv --table polarity --out " +
                    (dir / "pol.csv").string(),
                log),
            0)
      << testutil::read_file(log);
  EXPECT_NE(cli("report --inputs " + (dir / "pol.json").string() + " --format csv --out " + (dir / "x.csv").string(),
                log),
            0);
  EXPECT_EQ(testutil::read_file(dir / "pol.csv").rfind("org,entity,period", 0), 0u);
}

TEST(Cli, ConfigHandlingAndErrors) {
  testutil::TempDir dir;
  const auto log = dir / "log.txt";
  ASSERT_EQ(cli("--print-config", log), 0);
  EXPECT_NE(testutil::read_file(log).find("analysis.tau = 0.75"), std::string::npos);

  testutil::write_file(dir / "bad.conf", "analysis.tau = 1.5\n");
  EXPECT_EQ(cli("--print-config --config " + (dir / "bad.conf").string(), log), 1);
  EXPECT_NE(testutil::read_file(log).find("analysis.tau"), std::string::npos);

  testutil::write_file(dir / "key.conf", "provider.api_key = sk-1\n");
  EXPECT_EQ(cli("--print-config --config " + (dir / "key.conf").string(), log), 1);

  EXPECT_EQ(cli("", log), 2);
  EXPECT_NE(cli("similarity --store " + (dir / "missing").string() + " --orgs A,B --out x.json", log), 0);
}
