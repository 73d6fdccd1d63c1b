#pragma once

// Fact-check article corpora: JSON-lines ingestion, validation and slicing.
//
// Record format (one JSON object per line):
//   {"id": "...", "org": "...", "country": "...", "published_at": "YYYY-MM-DD",
//    "title": "...", "body": "...", "url": "..."}
// `url` is optional; unknown fields are ignored.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fcbias/date.hpp"
#include "fcbias/text.hpp"

namespace fcbias {

struct Article {
  std::string id;
  std::string org;
  std::string country;
  Date published_at;
  std::string title;
  std::string body;
  std::optional<std::string> url;

  friend bool operator==(const Article&, const Article&) = default;
};

/// A skipped input line and why it was skipped. `line` is 1-based.
struct Rejection {
  std::size_t line = 0;
  std::string id;
  std::string reason;
};

/// Immutable, deterministically ordered (published_at, then id) article store.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Article> articles, DateRange range) : articles_(std::move(articles)), range_(range) {
    for (const auto& a : articles_) {
      if (!range_.contains(a.published_at))
        throw std::invalid_argument("article '" + a.id + "' outside corpus date range");
    }
    std::sort(articles_.begin(), articles_.end(), [](const Article& a, const Article& b) {
      if (a.published_at != b.published_at) return a.published_at < b.published_at;
      return a.id < b.id;
    });
    for (std::size_t i = 0; i < articles_.size(); ++i) {
      if (!index_.emplace(articles_[i].id, i).second)
        throw std::invalid_argument("duplicate article id '" + articles_[i].id + "'");
    }
  }

  const std::vector<Article>& articles() const { return articles_; }
  const DateRange& date_range() const { return range_; }
  std::size_t size() const { return articles_.size(); }
  bool empty() const { return articles_.empty(); }

  const Article* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &articles_[it->second];
  }

  std::vector<const Article*> by_org(std::string_view org) const {
    std::vector<const Article*> out;
    for (const auto& a : articles_)
      if (a.org == org) out.push_back(&a);
    return out;
  }

  /// Sorted distinct organization names.
  std::vector<std::string> orgs() const {
    std::set<std::string> s;
    for (const auto& a : articles_) s.insert(a.org);
    return {s.begin(), s.end()};
  }

  /// Country of an organization (from its first article), empty if unknown.
  std::string country_of(std::string_view org) const {
    for (const auto& a : articles_)
      if (a.org == org) return a.country;
    return {};
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.range_ == b.range_ && a.articles_ == b.articles_;
  }

 private:
  std::vector<Article> articles_;
  DateRange range_{};
  std::unordered_map<std::string, std::size_t> index_;
};

struct IngestResult {
  Corpus corpus;
  std::vector<Rejection> rejections;
};

inline nlohmann::ordered_json to_json(const Article& a) {
  nlohmann::ordered_json j;
  j["id"] = a.id;
  j["org"] = a.org;
  j["country"] = a.country;
  j["published_at"] = a.published_at.to_string();
  j["title"] = a.title;
  j["body"] = a.body;
  if (a.url) j["url"] = *a.url;
  return j;
}

namespace detail {

inline std::optional<std::string> string_field(const nlohmann::json& j, const char* key, std::string& error,
                                                bool required = true) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) error = std::string("missing field '") + key + "'";
    return std::nullopt;
  }
  if (!it->is_string()) {
    error = std::string("field '") + key + "' is not a string";
    return std::nullopt;
  }
  return it->get<std::string>();
}

/// Validates one record; on failure returns nullopt and sets `error`.
inline std::optional<Article> parse_article(const nlohmann::json& j, std::string& error) {
  if (!j.is_object()) {
    error = "record is not a JSON object";
    return std::nullopt;
  }
  Article a;
  auto id = string_field(j, "id", error);
  if (!id) return std::nullopt;
  a.id = *id;
  if (text::trim(a.id).empty()) {
    error = "empty id";
    return std::nullopt;
  }
  auto org = string_field(j, "org", error);
  if (!org) return std::nullopt;
  if (text::trim(*org).empty()) {
    error = "empty org";
    return std::nullopt;
  }
  a.org = *org;
  auto country = string_field(j, "country", error);
  if (!country) return std::nullopt;
  a.country = *country;
  auto date = string_field(j, "published_at", error);
  if (!date) return std::nullopt;
  auto parsed = Date::parse(*date);
  if (!parsed) {
    error = "unparseable published_at '" + *date + "'";
    return std::nullopt;
  }
  a.published_at = *parsed;
  auto title = string_field(j, "title", error);
  if (!title) return std::nullopt;
  a.title = *title;
  auto body = string_field(j, "body", error);
  if (!body) return std::nullopt;
  if (text::trim(*body).empty()) {
    error = "body is empty after trimming";
    return std::nullopt;
  }
  a.body = *body;
  a.url = string_field(j, "url", error, /*required=*/false);
  if (!error.empty()) return std::nullopt;
  return a;
}

}  // namespace detail

/// Reads JSON-lines records from `in`. Each input line yields either an article
/// or a rejection: malformed, out-of-range, and duplicate-id (first occurrence
/// wins) lines are skipped and logged.
inline IngestResult ingest(std::istream& in, DateRange range) {
  std::vector<Article> kept;
  std::vector<Rejection> rejections;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      rejections.push_back({lineno, "", "empty line"});
      continue;
    }
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      rejections.push_back({lineno, "", "malformed JSON"});
      continue;
    }
    std::string error;
    auto article = detail::parse_article(j, error);
    if (!article) {
      std::string id;
      if (j.is_object() && j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
      rejections.push_back({lineno, id, error});
      continue;
    }
    if (!range.contains(article->published_at)) {
      rejections.push_back({lineno, article->id,
                            "published_at " + article->published_at.to_string() + " outside range " +
                                range.start.to_string() + ".." + range.end.to_string()});
      continue;
    }
    if (!seen.insert(article->id).second) {
      rejections.push_back({lineno, article->id, "duplicate id"});
      continue;
    }
    kept.push_back(std::move(*article));
  }
  return {Corpus(std::move(kept), range), std::move(rejections)};
}

inline IngestResult ingest(const std::filesystem::path& path, DateRange range) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read corpus file '" + path.string() + "'");
  return ingest(in, range);
}

/// Canonical JSON-lines serialization (sorted order, fixed key order).
inline void write_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& a : corpus.articles()) out << to_json(a).dump() << '\n';
}

inline void write_rejections(std::ostream& out, const std::vector<Rejection>& rejections) {
  for (const auto& r : rejections) {
    nlohmann::ordered_json j;
    j["line"] = r.line;
    j["id"] = r.id;
    j["reason"] = r.reason;
    out << j.dump() << '\n';
  }
}

/// Per-(org[, year]) article counts. Dense over the orgs and years present:
/// cells without articles are 0.
struct CountCell {
  std::string org;
  std::optional<int> year;
  std::size_t count = 0;
  friend bool operator==(const CountCell&, const CountCell&) = default;
};

inline std::vector<CountCell> org_counts(const Corpus& corpus, bool by_year) {
  std::map<std::pair<std::string, int>, std::size_t> cells;
  std::set<std::string> orgs;
  std::set<int> years;
  for (const auto& a : corpus.articles()) {
    const int y = by_year ? a.published_at.year() : 0;
    ++cells[{a.org, y}];
    orgs.insert(a.org);
    years.insert(y);
  }
  std::vector<CountCell> out;
  for (const auto& org : orgs) {
    for (int y : years) {
      auto it = cells.find({org, y});
      out.push_back({org, by_year ? std::optional<int>(y) : std::nullopt, it == cells.end() ? 0 : it->second});
    }
  }
  return out;
}

// On-disk store layout shared by the CLI stages.
namespace store {
inline std::filesystem::path corpus_file(const std::filesystem::path& dir) { return dir / "corpus.jsonl"; }
inline std::filesystem::path rejections_file(const std::filesystem::path& dir) { return dir / "rejections.jsonl"; }
inline std::filesystem::path meta_file(const std::filesystem::path& dir) { return dir / "meta.json"; }
inline std::filesystem::path annotations_file(const std::filesystem::path& dir) { return dir / "annotations.jsonl"; }
inline std::filesystem::path embeddings_file(const std::filesystem::path& dir) { return dir / "embeddings.json"; }

inline void save(const std::filesystem::path& dir, const IngestResult& result) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(corpus_file(dir), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write store in '" + dir.string() + "'");
    write_jsonl(out, result.corpus);
  }
  {
    std::ofstream out(rejections_file(dir), std::ios::binary);
    write_rejections(out, result.rejections);
  }
  nlohmann::ordered_json meta;
  meta["from"] = result.corpus.date_range().start.to_string();
  meta["to"] = result.corpus.date_range().end.to_string();
  meta["articles"] = result.corpus.size();
  meta["rejections"] = result.rejections.size();
  std::ofstream(meta_file(dir), std::ios::binary) << meta.dump(2) << '\n';
}

inline Corpus load(const std::filesystem::path& dir) {
  std::ifstream meta_in(meta_file(dir));
  if (!meta_in) throw std::runtime_error("'" + dir.string() + "' is not a store (missing meta.json); run ingest first");
  auto meta = nlohmann::json::parse(meta_in);
  const DateRange range{Date::from_string(meta.at("from").get<std::string>()),
                        Date::from_string(meta.at("to").get<std::string>())};
  auto result = ingest(corpus_file(dir), range);
  if (!result.rejections.empty())
    throw std::runtime_error("store corpus '" + corpus_file(dir).string() + "' has invalid records");
  return std::move(result.corpus);
}
}  // namespace store

}  // namespace fcbias
