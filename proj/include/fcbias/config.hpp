#pragma once

// Run configuration: a key-value file (`key = value`, `#` comment lines) plus
// environment overrides. Credentials come only from the environment:
//
//   FCBIAS_API_KEY              chat provider bearer token
//   FCBIAS_PROVIDER_ENDPOINT    overrides provider.endpoint
//   FCBIAS_EMBEDDING_ENDPOINT   overrides embedding.endpoint
//   FCBIAS_EMBEDDING_API_KEY    embedding provider bearer token

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcbias/date.hpp"
#include "fcbias/polarity.hpp"
#include "fcbias/provider.hpp"
#include "fcbias/similarity.hpp"
#include "fcbias/text.hpp"

namespace fcbias {

struct EmbeddingConfig {
  std::string endpoint;  // empty: built-in hashing embedder
  int max_retries = 2;
  int batch_size = 64;
  std::string api_key;  // environment only
};

struct RunConfig {
  std::uint64_t seed = 20240101;
  Date date_from = Date::from_string("2018-01-01");
  Date date_to = Date::from_string("2023-12-31");
  std::string store_dir = "store";
  std::string output_dir = "out";
  AnalysisConfig analysis;
  ProviderConfig provider;
  EmbeddingConfig embedding;
  PrecisionConfig precision;
  int entity_top_k = 100;
  int polarity_top_k = 5;
  int min_support = 10;
  bool polarity_by_year = false;
  std::string negativity_pairs;  // "A|B;C|D": entity pairs for negativity ratios
  std::string aliases_file;

  DateRange date_range() const { return {date_from, date_to}; }

  /// Parsed negativity_pairs.
  std::vector<std::pair<std::string, std::string>> ratio_pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& item : text::split(negativity_pairs, ';')) {
      if (text::trim(item).empty()) continue;
      const auto parts = text::split(item, '|');
      if (parts.size() != 2) throw std::invalid_argument("negativity_pairs: expected 'A|B' items, got '" + item + "'");
      out.emplace_back(std::string(text::trim(parts[0])), std::string(text::trim(parts[1])));
    }
    return out;
  }
};

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

namespace detail {

// Shortest representation that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& field, const std::string& value) {
  try {
    std::size_t used = 0;
    T out{};
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(value, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
      out = std::stoull(value, &used);
    } else {
      out = std::stoi(value, &used);
    }
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError(field, "invalid number '" + value + "'");
  }
}

inline bool parse_bool(const std::string& field, const std::string& value) {
  const std::string v = text::ascii_lower(value);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(field, "invalid boolean '" + value + "'");
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field number(const char* key, T RunConfig::*member) {
  return {key, [key, member](RunConfig& c, const std::string& v) { c.*member = parse_number<T>(key, v); },
          [member](const RunConfig& c) {
            if constexpr (std::is_same_v<T, double>) return fmt_double(c.*member);
            else return std::to_string(c.*member);
          }};
}

template <typename S, typename T>
Field nested_number(const char* key, S RunConfig::*outer, T S::*member) {
  return {key, [key, outer, member](RunConfig& c, const std::string& v) { c.*outer.*member = parse_number<T>(key, v); },
          [outer, member](const RunConfig& c) {
            if constexpr (std::is_same_v<T, double>) return fmt_double(c.*outer.*member);
            else return std::to_string(c.*outer.*member);
          }};
}

template <typename S>
Field nested_string(const char* key, S RunConfig::*outer, std::string S::*member) {
  return {key, [outer, member](RunConfig& c, const std::string& v) { c.*outer.*member = v; },
          [outer, member](const RunConfig& c) { return c.*outer.*member; }};
}

inline Field string_field(const char* key, std::string RunConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

inline Field date_field(const char* key, Date RunConfig::*member) {
  return {key,
          [key, member](RunConfig& c, const std::string& v) {
            auto d = Date::parse(v);
            if (!d) throw ConfigError(key, "invalid date '" + v + "' (expected YYYY-MM-DD)");
            c.*member = *d;
          },
          [member](const RunConfig& c) { return (c.*member).to_string(); }};
}

inline const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      number("seed", &RunConfig::seed),
      date_field("date_from", &RunConfig::date_from),
      date_field("date_to", &RunConfig::date_to),
      string_field("store_dir", &RunConfig::store_dir),
      string_field("output_dir", &RunConfig::output_dir),
      string_field("aliases_file", &RunConfig::aliases_file),
      nested_number("analysis.window_days", &RunConfig::analysis, &AnalysisConfig::window_days),
      nested_number("analysis.tau", &RunConfig::analysis, &AnalysisConfig::tau),
      nested_number("analysis.bootstrap_resamples", &RunConfig::analysis, &AnalysisConfig::bootstrap_resamples),
      nested_number("analysis.bootstrap_fraction", &RunConfig::analysis, &AnalysisConfig::bootstrap_fraction),
      nested_number("analysis.confidence_level", &RunConfig::analysis, &AnalysisConfig::confidence_level),
      nested_string("provider.endpoint", &RunConfig::provider, &ProviderConfig::endpoint),
      nested_string("provider.model_name", &RunConfig::provider, &ProviderConfig::model_name),
      nested_number("provider.max_retries", &RunConfig::provider, &ProviderConfig::max_retries),
      nested_number("provider.rate_limit", &RunConfig::provider, &ProviderConfig::rate_limit),
      nested_string("provider.cache_dir", &RunConfig::provider, &ProviderConfig::cache_dir),
      nested_number("provider.max_in_flight", &RunConfig::provider, &ProviderConfig::max_in_flight),
      nested_number("provider.temperature", &RunConfig::provider, &ProviderConfig::temperature),
      nested_number("provider.timeout_seconds", &RunConfig::provider, &ProviderConfig::timeout_seconds),
      nested_number("provider.backoff_base_ms", &RunConfig::provider, &ProviderConfig::backoff_base_ms),
      nested_number("provider.backoff_max_ms", &RunConfig::provider, &ProviderConfig::backoff_max_ms),
      nested_string("embedding.endpoint", &RunConfig::embedding, &EmbeddingConfig::endpoint),
      nested_number("embedding.max_retries", &RunConfig::embedding, &EmbeddingConfig::max_retries),
      nested_number("embedding.batch_size", &RunConfig::embedding, &EmbeddingConfig::batch_size),
      nested_number("precision.positive", &RunConfig::precision, &PrecisionConfig::precision_p),
      nested_number("precision.negative", &RunConfig::precision, &PrecisionConfig::precision_n),
      nested_number("precision.neutral", &RunConfig::precision, &PrecisionConfig::precision_neutral),
      number("entities.top_k", &RunConfig::entity_top_k),
      number("polarity.top_k", &RunConfig::polarity_top_k),
      number("polarity.min_support", &RunConfig::min_support),
      {"polarity.by_year",
       [](RunConfig& c, const std::string& v) { c.polarity_by_year = parse_bool("polarity.by_year", v); },
       [](const RunConfig& c) { return std::string(c.polarity_by_year ? "true" : "false"); }},
      string_field("polarity.negativity_pairs", &RunConfig::negativity_pairs),
  };
  return f;
}

template <typename F>
void check(const char* field, F&& validate) {
  try {
    validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace detail

/// Throws ConfigError naming the offending field.
inline void validate(const RunConfig& c) {
  const auto& a = c.analysis;
  if (a.window_days < 0) throw ConfigError("analysis.window_days", "must be >= 0");
  if (!(a.tau >= 0 && a.tau <= 1)) throw ConfigError("analysis.tau", "must be in [0, 1]");
  if (a.bootstrap_resamples < 1) throw ConfigError("analysis.bootstrap_resamples", "must be >= 1");
  if (!(a.bootstrap_fraction > 0 && a.bootstrap_fraction <= 1))
    throw ConfigError("analysis.bootstrap_fraction", "must be in (0, 1]");
  if (!(a.confidence_level > 0 && a.confidence_level < 1))
    throw ConfigError("analysis.confidence_level", "must be in (0, 1)");
  if (c.date_to < c.date_from) throw ConfigError("date_to", "must not precede date_from");
  if (c.provider.max_retries < 0) throw ConfigError("provider.max_retries", "must be >= 0");
  if (!(c.provider.rate_limit > 0)) throw ConfigError("provider.rate_limit", "must be > 0");
  detail::check("provider", [&] { c.provider.validate(); });
  if (c.embedding.max_retries < 0) throw ConfigError("embedding.max_retries", "must be >= 0");
  if (c.embedding.batch_size < 1) throw ConfigError("embedding.batch_size", "must be >= 1");
  const std::pair<const char*, double> precisions[] = {{"precision.positive", c.precision.precision_p},
                                                       {"precision.negative", c.precision.precision_n},
                                                       {"precision.neutral", c.precision.precision_neutral}};
  for (const auto& [name, p] : precisions)
    if (!(p >= 0 && p <= 1)) throw ConfigError(name, "must be in [0, 1]");
  if (c.entity_top_k < 1) throw ConfigError("entities.top_k", "must be >= 1");
  if (c.polarity_top_k < 1) throw ConfigError("polarity.top_k", "must be >= 1");
  if (c.min_support < 1) throw ConfigError("polarity.min_support", "must be >= 1");
  detail::check("polarity.negativity_pairs", [&] { (void)c.ratio_pairs(); });
}

inline RunConfig parse_config(std::istream& in, const EnvLookup& env = process_env) {
  RunConfig cfg;
  std::map<std::string, const detail::Field*> by_key;
  for (const auto& f : detail::fields()) by_key[f.key] = &f;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key(text::trim(t.substr(0, eq)));
    std::string value(text::trim(t.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key == "provider.api_key" || key == "embedding.api_key" || key == "api_key")
      throw ConfigError(key, "credentials are read from the environment only (FCBIAS_API_KEY)");
    auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError(key, "unknown configuration key");
    if (auto [pos, inserted] = seen.emplace(key, lineno); !inserted)
      throw ConfigError(key, "set twice (lines " + std::to_string(pos->second) + " and " + std::to_string(lineno) + ")");
    it->second->set(cfg, value);
  }
  if (auto v = env("FCBIAS_PROVIDER_ENDPOINT")) cfg.provider.endpoint = *v;
  if (auto v = env("FCBIAS_EMBEDDING_ENDPOINT")) cfg.embedding.endpoint = *v;
  if (auto v = env("FCBIAS_API_KEY")) cfg.provider.api_key = *v;
  if (auto v = env("FCBIAS_EMBEDDING_API_KEY")) cfg.embedding.api_key = *v;
  cfg.analysis.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  return parse_config(in, env);
}

/// Effective configuration as a config file. Credentials are never written.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : detail::fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

}  // namespace fcbias
