#include <gtest/gtest.h>

#include "fcbias/json_extract.hpp"
#include "parser_fixtures.hpp"

using namespace fcbias;
using parse::RepairStep;
using parse::Shape;

TEST(ExtractJson, DirectParse) {
  const auto e = parse::extract_json("  [1, 2]  ", Shape::array);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->step, RepairStep::direct);
  EXPECT_EQ(e->value, nlohmann::json::array({1, 2}));
}

TEST(ExtractJson, ShapeIsEnforced) {
  EXPECT_FALSE(parse::extract_json("{\"a\": 1}", Shape::array));
  EXPECT_FALSE(parse::extract_json("[1]", Shape::object));
  EXPECT_TRUE(parse::extract_json("[1]", Shape::any));
  EXPECT_FALSE(parse::extract_json("42", Shape::any));
  EXPECT_FALSE(parse::extract_json("\"[1]\"", Shape::array)) << "a JSON string is not a list";
}

TEST(ExtractJson, SpanAfterProseAndFences) {
  const auto e = parse::extract_json("Here you go:\n```json\n{\"a\": [1]}\n```", Shape::object);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->step, RepairStep::extracted_span);
  EXPECT_EQ(e->value, nlohmann::json({{"a", {1}}}));
}

TEST(ExtractJson, FirstDecodableSpanWins) {
  const auto e = parse::extract_json("[not json] then [\"ok\"] and [\"later\"]", Shape::array);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->value, nlohmann::json::array({"ok"}));
}

TEST(ExtractJson, BracketsInsideStringsDoNotCloseSpans) {
  const auto e = parse::extract_json("x [\"a ] b\", \"c\"] y", Shape::array);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->value, nlohmann::json::array({"a ] b", "c"}));
}

TEST(ExtractJson, ApostropheInProseDoesNotOpenString) {
  const auto e = parse::extract_json("Biden's list: ['It's here']", Shape::array);
  // The python literal 'It' + s here' is malformed; nothing else is a list.
  EXPECT_FALSE(e);
  const auto ok = parse::extract_json("Biden's list: [\"It's here\"]", Shape::array);
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->value, nlohmann::json::array({"It's here"}));
}

TEST(ExtractJson, PythonLiteralFallback) {
  const auto e = parse::extract_json("{'a': True, 'b': None, 'c': [False, 'x\\'y',],}", Shape::object);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->step, RepairStep::python_literal);
  EXPECT_EQ(e->value, nlohmann::json({{"a", true}, {"b", nullptr}, {"c", {false, "x'y"}}}));
}

TEST(ExtractJson, PythonStringsWithDoubleQuotesAndNewlines) {
  const auto e = parse::extract_json("['say \"hi\"\nnow']", Shape::array);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->value, nlohmann::json::array({"say \"hi\"\nnow"}));
}

TEST(ExtractJson, GivesUpOnGarbage) {
  for (const char* s : {"", "   ", "not json", "[", "{{{{", "]]]", "[1, 2", "{'a': }"})
    EXPECT_FALSE(parse::extract_json(s, Shape::any)) << s;
}

TEST(ExtractJson, TotalOnFuzzedInput) {
  for (const auto& s : fixtures::fuzz_responses(500, 1)) {
    EXPECT_NO_THROW({
      const auto e = parse::extract_json(s, Shape::any);
      if (e) {
        EXPECT_TRUE(e->value.is_array() || e->value.is_object());
      }
    });
  }
}

TEST(ExtractJson, CandidateSpansAreCapped) {
  std::string s;
  for (int i = 0; i < 1000; ++i) s += "[x ";
  s += "[\"late\"]";
  // Too many failing openers before the real list: bounded work, no result.
  EXPECT_FALSE(parse::extract_json(s, Shape::array));
  EXPECT_TRUE(parse::extract_json("[x [\"early\"]", Shape::array));
}
