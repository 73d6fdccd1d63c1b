#pragma once

// Per-article annotation records, the three extraction prompts, and the
// parsers that turn raw provider responses into typed tag values.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fcbias/corpus.hpp"
#include "fcbias/json_extract.hpp"
#include "fcbias/text.hpp"

namespace fcbias {

enum class Sentiment { positive, negative, neutral };

inline const char* to_string(Sentiment s) {
  switch (s) {
    case Sentiment::positive: return "positive";
    case Sentiment::negative: return "negative";
    case Sentiment::neutral: return "neutral";
  }
  return "?";
}

/// Case- and whitespace-insensitive label lookup; nullopt for anything else.
inline std::optional<Sentiment> parse_sentiment(std::string_view label) {
  const std::string l = text::ascii_lower(text::trim(label));
  if (l == "positive") return Sentiment::positive;
  if (l == "negative") return Sentiment::negative;
  if (l == "neutral") return Sentiment::neutral;
  return std::nullopt;
}

/// The three prompts issued per article.
enum class PromptId { claim, what_why, entities };

inline const char* to_string(PromptId p) {
  switch (p) {
    case PromptId::claim: return "claim";
    case PromptId::what_why: return "what_why";
    case PromptId::entities: return "entities";
  }
  return "?";
}

inline std::optional<PromptId> parse_prompt_id(std::string_view s) {
  if (s == "claim") return PromptId::claim;
  if (s == "what_why") return PromptId::what_why;
  if (s == "entities") return PromptId::entities;
  return std::nullopt;
}

namespace prompts {

inline constexpr std::string_view kPostMarker = "<POST>";

inline constexpr std::string_view kClaimTemplate =
    "For the given news item, strictly return a list with the most important sentences highlighting the "
    "motivation behind spreading the fake news covered in the article. The selected sentences should be the "
    "ones that capture the central claim in the fake news. Quote verbatim: do not add any new sentences on "
    "your own. Strictly return a JSON decodable Python list format. NEWS ARTICLE: <POST>.";

inline constexpr std::string_view kWhatWhyTemplate =
    "From the following fact-checking news article, quote full and complete sentences from within the post "
    "answering the what and why of the 5W based only on the misinformed part and related to the fake news. "
    "It is possible that each W can have multiple sentences. Return the result in the format "
    "{\"what\":[], \"why\":[]}. Quote verbatim: do not add any new sentences on your own; do not paraphrase. "
    "Do not focus on how the fact-checking is done. Strictly return a JSON decodable Python list format. "
    "NEWS ARTICLE: <POST>.";

inline constexpr std::string_view kEntitiesTemplate =
    "List (in python dictionary type eg. {a: tag_a, b: tag_b}) the names of political figures and parties, "
    "categorizing each entity as positive if it helps improve their image, negative if it has the opposite "
    "effect, and neutral if it presents balanced views: <POST>.";

inline std::string_view template_for(PromptId id) {
  switch (id) {
    case PromptId::claim: return kClaimTemplate;
    case PromptId::what_why: return kWhatWhyTemplate;
    case PromptId::entities: return kEntitiesTemplate;
  }
  return {};
}

/// The text substituted for <POST>: title and body separated by a blank line.
inline std::string post_text(const Article& a) {
  if (text::trim(a.title).empty()) return a.body;
  return a.title + "\n\n" + a.body;
}

inline std::string render(PromptId id, const Article& a) {
  std::string out(template_for(id));
  const auto pos = out.find(kPostMarker);
  out.replace(pos, kPostMarker.size(), post_text(a));
  return out;
}

}  // namespace prompts

/// Result of parsing one tag's response: either ok with a value, or failed.
/// Quality flags are advisory and may be present either way.
template <typename T>
struct TagOutcome {
  bool ok = false;
  T value{};
  std::vector<std::string> flags;
  std::string error;
  std::string raw;  // provider response, kept when parsing failed
};

struct WhatWhy {
  std::vector<std::string> what;
  std::vector<std::string> why;
  friend bool operator==(const WhatWhy&, const WhatWhy&) = default;
};

using EntityMap = std::map<std::string, Sentiment>;

/// A tag whose provider call or parse failed, with the raw response if any.
struct TagFailure {
  PromptId prompt = PromptId::claim;
  std::string reason;
  std::string raw;
  friend bool operator==(const TagFailure&, const TagFailure&) = default;
};

struct Annotation {
  std::string article_id;
  std::vector<std::string> claim;
  std::vector<std::string> what;
  std::vector<std::string> why;
  EntityMap entities;
  std::vector<TagFailure> failures;
  std::vector<std::string> quality_flags;

  bool failed(PromptId p) const {
    return std::any_of(failures.begin(), failures.end(), [p](const TagFailure& f) { return f.prompt == p; });
  }

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

using AnnotationMap = std::map<std::string, Annotation>;

namespace detail {

inline bool found_verbatim(std::string_view sentence, std::string_view normalized_article) {
  return normalized_article.find(text::squash_whitespace(sentence)) != std::string_view::npos;
}

/// Collects non-empty strings from a JSON array; flags anything dropped.
inline std::vector<std::string> sentence_list(const nlohmann::json& arr, std::string_view label,
                                              std::string_view normalized_article,
                                              std::vector<std::string>& flags) {
  std::vector<std::string> out;
  std::size_t index = 0;
  for (const auto& item : arr) {
    ++index;
    if (!item.is_string()) {
      flags.push_back(std::string(label) + ": dropped non-string item " + std::to_string(index));
      continue;
    }
    auto s = item.get<std::string>();
    if (text::trim(s).empty()) {
      flags.push_back(std::string(label) + ": dropped empty sentence " + std::to_string(index));
      continue;
    }
    if (!found_verbatim(s, normalized_article))
      flags.push_back(std::string(label) + ": sentence " + std::to_string(index) + " not found verbatim");
    out.push_back(std::move(s));
  }
  return out;
}

inline void note_repair(const parse::Extracted& e, std::string_view label, std::vector<std::string>& flags) {
  if (e.step != parse::RepairStep::direct)
    flags.push_back(std::string(label) + ": response repaired (" + parse::to_string(e.step) + ")");
}

}  // namespace detail

inline TagOutcome<std::vector<std::string>> parse_claim_response(std::string_view raw, std::string_view article_text) {
  TagOutcome<std::vector<std::string>> out;
  auto extracted = parse::extract_json(raw, parse::Shape::array);
  if (!extracted) {
    // Some responses wrap the list in a one-key object; accept that form too.
    extracted = parse::extract_json(raw, parse::Shape::object);
    if (extracted && extracted->value.size() == 1 && extracted->value.begin()->is_array()) {
      out.flags.push_back("claim: list unwrapped from object");
      extracted->value = nlohmann::json(*extracted->value.begin());
    } else {
      out.error = "no JSON list found in response";
      return out;
    }
  }
  detail::note_repair(*extracted, "claim", out.flags);
  const std::string normalized = text::squash_whitespace(article_text);
  out.value = detail::sentence_list(extracted->value, "claim", normalized, out.flags);
  out.ok = true;
  return out;
}

inline TagOutcome<WhatWhy> parse_what_why_response(std::string_view raw, std::string_view article_text) {
  TagOutcome<WhatWhy> out;
  auto extracted = parse::extract_json(raw, parse::Shape::object);
  if (!extracted) {
    out.error = "no JSON object found in response";
    return out;
  }
  detail::note_repair(*extracted, "what_why", out.flags);
  const std::string normalized = text::squash_whitespace(article_text);
  const auto& obj = extracted->value;
  for (const char* key : {"what", "why"}) {
    auto& dest = std::string_view(key) == "what" ? out.value.what : out.value.why;
    auto it = obj.find(key);
    if (it == obj.end()) {
      out.flags.push_back(std::string(key) + ": missing key, defaulted to []");
      continue;
    }
    if (it->is_string()) {
      out.flags.push_back(std::string(key) + ": string promoted to one-item list");
      dest = detail::sentence_list(nlohmann::json::array({*it}), key, normalized, out.flags);
    } else if (it->is_array()) {
      dest = detail::sentence_list(*it, key, normalized, out.flags);
    } else {
      out.flags.push_back(std::string(key) + ": value is not a list, defaulted to []");
    }
  }
  out.ok = true;
  return out;
}

inline TagOutcome<EntityMap> parse_entities_response(std::string_view raw) {
  TagOutcome<EntityMap> out;
  auto extracted = parse::extract_json(raw, parse::Shape::object);
  if (!extracted) {
    out.error = "no JSON object found in response";
    return out;
  }
  detail::note_repair(*extracted, "entities", out.flags);
  for (const auto& [key, value] : extracted->value.items()) {
    const std::string name = text::squash_whitespace(key);
    if (name.empty()) {
      out.flags.push_back("entities: dropped empty entity name");
      continue;
    }
    std::optional<Sentiment> label;
    if (value.is_string()) label = parse_sentiment(value.get_ref<const std::string&>());
    if (!label) {
      out.flags.push_back("entities: dropped '" + name + "' with unknown label " + value.dump());
      continue;
    }
    out.value[name] = *label;
  }
  out.ok = true;
  return out;
}

// ---- serialization --------------------------------------------------------

inline nlohmann::ordered_json to_json(const Annotation& a) {
  nlohmann::ordered_json j;
  j["article_id"] = a.article_id;
  j["claim"] = a.claim;
  j["what"] = a.what;
  j["why"] = a.why;
  nlohmann::ordered_json ents = nlohmann::ordered_json::object();
  for (const auto& [name, s] : a.entities) ents[name] = to_string(s);
  j["entities"] = std::move(ents);
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const auto& f : a.failures) {
    failures.push_back({{"prompt", to_string(f.prompt)}, {"reason", f.reason}, {"raw", f.raw}});
  }
  j["failures"] = std::move(failures);
  j["quality_flags"] = a.quality_flags;
  return j;
}

inline Annotation annotation_from_json(const nlohmann::json& j) {
  Annotation a;
  a.article_id = j.at("article_id").get<std::string>();
  a.claim = j.at("claim").get<std::vector<std::string>>();
  a.what = j.at("what").get<std::vector<std::string>>();
  a.why = j.at("why").get<std::vector<std::string>>();
  for (const auto& [name, label] : j.at("entities").items()) {
    auto s = parse_sentiment(label.get<std::string>());
    if (!s) throw std::invalid_argument("annotation '" + a.article_id + "': bad sentiment for '" + name + "'");
    a.entities[name] = *s;
  }
  if (auto it = j.find("failures"); it != j.end()) {
    for (const auto& f : *it) {
      auto p = parse_prompt_id(f.at("prompt").get<std::string>());
      if (!p) throw std::invalid_argument("annotation '" + a.article_id + "': bad prompt id");
      a.failures.push_back({*p, f.value("reason", ""), f.value("raw", "")});
    }
  }
  if (auto it = j.find("quality_flags"); it != j.end()) a.quality_flags = it->get<std::vector<std::string>>();
  return a;
}

inline std::string dump_line(const nlohmann::ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

inline void save_annotations(const std::filesystem::path& path, const AnnotationMap& annotations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write annotations to '" + path.string() + "'");
  for (const auto& [id, a] : annotations) out << dump_line(to_json(a)) << '\n';
}

inline AnnotationMap load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read annotations '" + path.string() + "'; run annotate first");
  AnnotationMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto a = annotation_from_json(nlohmann::json::parse(line));
      out.emplace(a.article_id, std::move(a));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace fcbias
