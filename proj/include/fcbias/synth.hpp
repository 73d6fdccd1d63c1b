#pragma once

// Synthetic fact-check corpora with matching mock-provider fixtures, for
// offline end-to-end runs. Articles are drawn around shared "events" so that
// organizations of the same country cover overlapping stories in overlapping
// windows; entity sentiments follow per-organization biases.

#include <algorithm>
#include <array>
#include <span>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fcbias/annotation.hpp"
#include "fcbias/corpus.hpp"
#include "fcbias/csv.hpp"
#include "fcbias/provider.hpp"
#include "fcbias/rng.hpp"

namespace fcbias::synth {

struct EntitySpec {
  const char* canonical;
  std::array<const char*, 2> aliases;  // nullptr-terminated
  bool political;
};

struct OrgSpec {
  const char* name;
  const char* country;
  double weight;
  double p_negative;  // per-mention sentiment mix
  double p_positive;
};

inline constexpr OrgSpec kOrgs[] = {
    {"PolitiFact", "USA", 9829, 0.40, 0.20},  {"Snopes", "USA", 9636, 0.50, 0.15},
    {"CheckYourFact", "USA", 6401, 0.35, 0.20}, {"AltNews", "India", 4234, 0.45, 0.15},
    {"Boom", "India", 3993, 0.35, 0.15},      {"OpIndia", "India", 1520, 0.50, 0.20},
};

inline constexpr EntitySpec kUsaEntities[] = {
    {"Joe Biden", {"President Biden", "Biden"}, true},
    {"Donald Trump", {"Trump", "President Trump"}, true},
    {"Barack Obama", {"Obama", nullptr}, true},
    {"Kamala Harris", {"Harris", nullptr}, true},
    {"Republican Party", {"GOP", "Republicans"}, true},
    {"Democratic Party", {"Democrats", nullptr}, true},
    {"NASA", {nullptr, nullptr}, false},
};

inline constexpr EntitySpec kIndiaEntities[] = {
    {"Narendra Modi", {"Modi", "PM Modi"}, true},
    {"Rahul Gandhi", {"Gandhi", nullptr}, true},
    {"Arvind Kejriwal", {"Kejriwal", nullptr}, true},
    {"Yogi Adityanath", {"Adityanath", nullptr}, true},
    {"BJP", {"Bharatiya Janata Party", nullptr}, true},
    {"Congress", {"Indian National Congress", nullptr}, true},
    {"WHO", {"World Health Organization", nullptr}, false},
};

inline constexpr const char* kSubjects[] = {
    "vaccine",  "election ballots", "flood relief", "border wall", "fuel prices", "farm law",
    "pension",  "rally crowd",      "bank notes",   "school fees", "oxygen supply", "temple donation",
    "airport",  "stock market",     "rail fare",    "tax refund",  "army parade",   "water supply",
    "hospital", "curfew order",     "power cuts",   "exam paper",  "metro line",    "tree planting",
};

inline constexpr const char* kMedia[] = {"video", "photo", "screenshot", "audio clip", "tweet", "news clipping"};
inline constexpr const char* kMotives[] = {"discredit", "praise", "mock", "blame", "glorify", "attack"};
inline constexpr const char* kPlaces[] = {"rally", "press conference", "interview", "parliament", "debate", "speech"};

struct Options {
  std::size_t articles = 1000;
  std::uint64_t seed = 7;
  std::string model_name = "gpt-3.5-turbo";
  DateRange range{Date::from_string("2018-01-01"), Date::from_string("2023-12-31")};
};

struct Output {
  std::vector<Article> articles;
  std::size_t fixtures = 0;
};

namespace detail {

template <typename T, std::size_t N>
const T& pick(Rng& rng, const T (&arr)[N]) {
  return arr[uniform_index(rng, N)];
}

inline std::string surface_form(Rng& rng, const EntitySpec& e) {
  std::vector<const char*> forms{e.canonical};
  for (const char* a : e.aliases)
    if (a) forms.push_back(a);
  return forms[uniform_index(rng, forms.size())];
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace detail

/// Writes corpus.jsonl, fixtures/, aliases.csv and precisions.csv under `dir`.
inline Output generate(const std::filesystem::path& dir, const Options& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "fixtures");
  Rng rng(derive_seed(opt.seed, "synth"));

  struct Event {
    const char* country;
    std::string subject;
    std::string media;
    std::string place;
    Date date;
  };
  std::vector<Event> events;
  const std::size_t n_events = std::max<std::size_t>(8, opt.articles / 4);
  const auto span = static_cast<std::uint64_t>(opt.range.end - opt.range.start + 1);
  for (std::size_t i = 0; i < n_events; ++i) {
    events.push_back({i % 2 == 0 ? "USA" : "India", detail::pick(rng, kSubjects), detail::pick(rng, kMedia),
                      detail::pick(rng, kPlaces),
                      opt.range.start + static_cast<std::int32_t>(uniform_index(rng, span))});
  }

  double total_weight = 0;
  for (const auto& o : kOrgs) total_weight += o.weight;

  Output out;
  std::ofstream corpus(dir / "corpus.jsonl", std::ios::binary);
  for (std::size_t i = 0; i < opt.articles; ++i) {
    double u = uniform_unit(rng) * total_weight;
    const OrgSpec* org = &kOrgs[0];
    for (const auto& o : kOrgs) {
      org = &o;
      if ((u -= o.weight) < 0) break;
    }
    const bool usa = std::string_view(org->country) == "USA";
    std::vector<const Event*> local;
    for (const auto& e : events)
      if (std::string_view(e.country) == org->country) local.push_back(&e);
    const Event& ev = *local[uniform_index(rng, local.size())];
    Date date = ev.date + static_cast<std::int32_t>(uniform_index(rng, 11)) - 5;
    date = std::clamp(date, opt.range.start, opt.range.end);

    const auto& pool = usa ? std::span<const EntitySpec>(kUsaEntities) : std::span<const EntitySpec>(kIndiaEntities);
    const std::size_t n_ents = 1 + uniform_index(rng, 3);
    std::vector<const EntitySpec*> ents;
    while (ents.size() < n_ents) {
      const EntitySpec* e = &pool[uniform_index(rng, pool.size())];
      if (std::find(ents.begin(), ents.end(), e) == ents.end()) ents.push_back(e);
    }
    std::vector<std::string> surfaces;
    for (const auto* e : ents) surfaces.push_back(detail::surface_form(rng, *e));

    const std::string motive = detail::pick(rng, kMotives);
    const std::string claim = "A viral " + ev.media + " claims that " + surfaces[0] + " announced a new " +
                              ev.subject + " plan at a " + ev.place + ".";
    const std::string what = "The " + ev.media + " about the " + ev.subject + " plan was shared widely with a false caption.";
    const std::string why = "The post was spread to " + motive + " " + surfaces[0] + " ahead of the " + ev.place + ".";
    std::string verdict = "Our check found the " + ev.media + " is unrelated to the " + ev.subject + ".";
    for (std::size_t k = 1; k < surfaces.size(); ++k)
      verdict += " A statement from " + surfaces[k] + " was also quoted out of context.";

    Article a;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%05zu", i);
    a.id = id;
    a.org = org->name;
    a.country = org->country;
    a.published_at = date;
    a.title = "Fact check: " + ev.media + " about " + ev.subject;
    a.body = claim + " " + what + " " + why + " " + verdict;
    a.url = "https://example.org/" + a.org + "/" + a.id;
    corpus << to_json(a).dump() << '\n';

    // Provider fixtures, with an occasional wrapper the parser must repair.
    const double style = uniform_unit(rng);
    std::string claim_resp = "[" + detail::json_string(claim) + "]";
    std::string ww_resp = "{\"what\": [" + detail::json_string(what) + "], \"why\": [" + detail::json_string(why) + "]}";
    std::string ent_resp = "{";
    for (std::size_t k = 0; k < surfaces.size(); ++k) {
      const double s = uniform_unit(rng);
      const char* label = s < org->p_negative ? "negative" : s < org->p_negative + org->p_positive ? "positive" : "neutral";
      if (k) ent_resp += ", ";
      ent_resp += detail::json_string(surfaces[k]) + ": \"" + label + "\"";
    }
    ent_resp += "}";
    if (style < 0.10) {
      claim_resp = "```json\n" + claim_resp + "\n```";
    } else if (style < 0.15) {
      ww_resp = "Here is the result:\n" + ww_resp;
    } else if (style < 0.20) {
      // Python-literal dict; surface forms carry no quote characters.
      std::replace(ent_resp.begin(), ent_resp.end(), '"', '\'');
    } else if (style < 0.21) {
      ent_resp = "I am unable to categorize these entities.";
    }
    const std::pair<PromptId, std::string> responses[] = {
        {PromptId::claim, claim_resp}, {PromptId::what_why, ww_resp}, {PromptId::entities, ent_resp}};
    for (const auto& [pid, resp] : responses) {
      FixtureChatProvider::write_fixture(dir / "fixtures", ChatRequest{pid, prompts::render(pid, a), opt.model_name},
                                         resp);
      ++out.fixtures;
    }
    out.articles.push_back(std::move(a));
  }

  std::ofstream aliases(dir / "aliases.csv", std::ios::binary);
  aliases << "surface,canonical,political\n";
  for (const auto pool : {std::span<const EntitySpec>(kUsaEntities), std::span<const EntitySpec>(kIndiaEntities)}) {
    for (const auto& e : pool) {
      aliases << csv::escape(e.canonical) << ',' << csv::escape(e.canonical) << ',' << (e.political ? "yes" : "no") << '\n';
      for (const char* al : e.aliases)
        if (al) aliases << csv::escape(al) << ',' << csv::escape(e.canonical) << ",\n";
    }
  }
  std::ofstream(dir / "precisions.csv", std::ios::binary) << "precision_p,precision_n,precision_neutral\n1.0,0.706,1.0\n";
  return out;
}

}  // namespace fcbias::synth
