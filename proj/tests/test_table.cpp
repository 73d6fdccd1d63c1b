#include <gtest/gtest.h>

#include <sstream>

#include "fcbias/tables.hpp"
#include "test_support.hpp"

using namespace fcbias;

namespace {

Table polarity_table(int n) {
  auto t = schema::make("polarity");
  for (int i = 0; i < n; ++i)
    append_polarity(t, evaluate_polarity({"Org, Inc.", "Entity \"" + std::to_string(i) + "\"", kOverallPeriod,
                                          static_cast<std::size_t>(i), 1, static_cast<std::size_t>(7 + i)},
                                         PrecisionConfig{}));
  return t;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

Table reparse_csv(const Table& t) {
  std::istringstream in(to_csv(t));
  return table_from_csv(in, t.kind(), t.columns());
}

/// One row per registered schema with nulls wherever allowed.
Table sample(const std::string& kind, Rng& rng) {
  auto t = schema::make(kind);
  for (int r = 0; r < 3; ++r) {
    std::vector<Cell> row;
    for (const auto& c : t.columns()) {
      if (c.nullable && uniform_index(rng, 3) == 0) {
        row.emplace_back(std::monostate{});
        continue;
      }
      switch (c.type) {
        case ColumnType::string: row.emplace_back("v,\"" + std::to_string(uniform_index(rng, 1000)) + "\"\n"); break;
        case ColumnType::integer: row.emplace_back(static_cast<std::int64_t>(uniform_index(rng, 5000)) - 100); break;
        case ColumnType::real: row.emplace_back(uniform_unit(rng) * 2 - 1); break;
      }
    }
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace

TEST(TableCsv, ZeroRowsIsHeaderOnly) {
  const auto csv = to_csv(schema::make("polarity"));
  EXPECT_EQ(csv, "org,entity,period,n_pos,n_neg,n_total,ps,delta_ps\n");
  EXPECT_EQ(reparse_csv(schema::make("polarity")).size(), 0u);
}

TEST(TableCsv, ThreeRowsIsFourLines) {
  const auto t = polarity_table(3);
  EXPECT_EQ(line_count(to_csv(t)), 4u);
}

TEST(TableCsv, FixedFourDecimals) {
  auto t = schema::make("polarity");
  append_polarity(t, evaluate_polarity({"O", "E", kOverallPeriod, 3, 1, 10}, PrecisionConfig{}));
  EXPECT_EQ(to_csv(t), "org,entity,period,n_pos,n_neg,n_total,ps,delta_ps\nO,E,overall,3,1,10,0.2000,0.0294\n");
  EXPECT_EQ(format4(-0.00001), "0.0000");
  EXPECT_EQ(format4(-0.61), "-0.6100");
}

TEST(TableRoundTrip, EverySchemaThroughCsvAndJson) {
  Rng rng(51);
  for (const auto& [kind, cols] : schema::registry()) {
    SCOPED_TRACE(kind);
    const auto t = sample(kind, rng);
    const auto from_csv = reparse_csv(t);
    EXPECT_EQ(from_csv, t);
    EXPECT_EQ(to_csv(from_csv), to_csv(t));
    const auto from_json = table_from_json(nlohmann::json::parse(to_json_text(t)));
    EXPECT_EQ(from_json, t);
    EXPECT_EQ(to_json_text(from_json), to_json_text(t));
  }
}

TEST(TableRoundTrip, FilesExportParseExport) {
  testutil::TempDir dir;
  const auto t = polarity_table(5);
  export_table(t, TableFormat::csv, dir / "a.csv");
  std::ifstream in(dir / "a.csv");
  const auto back = table_from_csv(in, "polarity", schema::columns("polarity"));
  export_table(back, TableFormat::csv, dir / "b.csv");
  EXPECT_EQ(testutil::read_file(dir / "a.csv"), testutil::read_file(dir / "b.csv"));

  export_table(t, TableFormat::json, dir / "a.json");
  const auto docs = read_table_documents(dir / "a.json");
  ASSERT_EQ(docs.size(), 1u);
  export_table(docs[0], TableFormat::json, dir / "b.json");
  EXPECT_EQ(testutil::read_file(dir / "a.json"), testutil::read_file(dir / "b.json"));

  testutil::write_file(dir / "multi.json", tables_json_text({t, schema::make("org_counts")}));
  const auto multi = read_table_documents(dir / "multi.json");
  ASSERT_EQ(multi.size(), 2u);
  EXPECT_EQ(multi[0], t);
  EXPECT_EQ(multi[1].kind(), "org_counts");
}

TEST(Table, RejectsBadRows) {
  auto t = schema::make("polarity");
  EXPECT_THROW(t.add_row({"only one"}), std::invalid_argument);
  EXPECT_THROW(t.add_row({"o", "e", "p", std::int64_t{1}, std::int64_t{1}, std::int64_t{1}, "x", 0.0}),
               std::invalid_argument);
  EXPECT_THROW(t.add_row({"o", "e", "p", std::monostate{}, std::int64_t{1}, std::int64_t{1}, 0.0, 0.0}),
               std::invalid_argument);
  EXPECT_THROW(t.add_row({"o", "e", "p", std::int64_t{1}, std::int64_t{1}, std::int64_t{1}, std::nan(""), 0.0}),
               std::invalid_argument);
  std::istringstream wrong_header("a,b\n1,2\n");
  EXPECT_THROW(table_from_csv(wrong_header, "polarity", schema::columns("polarity")), std::invalid_argument);
  EXPECT_THROW(schema::make("nope"), std::invalid_argument);
  EXPECT_THROW(t.append(schema::make("org_counts")), std::invalid_argument);
}

TEST(Table, UnwritablePathIsFatal) {
  testutil::TempDir dir;
  testutil::write_file(dir / "file", "x");
  EXPECT_THROW(export_table(polarity_table(1), TableFormat::csv, dir / "file" / "sub.csv"), std::exception);
}

TEST(Table, PolarityRowsRoundTrip) {
  const auto t = polarity_table(4);
  const auto rows = polarity_rows(t);
  ASSERT_EQ(rows.size(), 4u);
  auto again = schema::make("polarity");
  for (const auto& r : rows) append_polarity(again, r);
  EXPECT_EQ(again, t);
  EXPECT_THROW(polarity_rows(schema::make("org_counts")), std::invalid_argument);
}
