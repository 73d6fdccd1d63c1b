#pragma once

// Recovery of a JSON value from free-form model output.
//
// Repair ladder:
//   1. parse the whole (trimmed) response as JSON; a well-formed value of the
//      wrong shape is rejected without further repair;
//   2. scan for bracket-balanced spans ('[' / '{' ... matching close, quote
//      aware), in order of their opening position, and parse the first one that
//      decodes to the wanted shape. A span that is not JSON is retried as a
//      Python literal (single-quoted strings, True/False/None, trailing commas);
//   3. give up.
// Never throws; every input either yields a value or nullopt.

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "fcbias/text.hpp"

namespace fcbias::parse {

enum class Shape { array, object, any };

enum class RepairStep { direct, extracted_span, python_literal };

struct Extracted {
  nlohmann::json value;
  RepairStep step = RepairStep::direct;
};

inline const char* to_string(RepairStep s) {
  switch (s) {
    case RepairStep::direct: return "direct";
    case RepairStep::extracted_span: return "extracted_span";
    case RepairStep::python_literal: return "python_literal";
  }
  return "?";
}

namespace detail {

inline bool shape_ok(const nlohmann::json& j, Shape want) {
  switch (want) {
    case Shape::array: return j.is_array();
    case Shape::object: return j.is_object();
    case Shape::any: return j.is_array() || j.is_object();
  }
  return false;
}

inline std::optional<nlohmann::json> try_parse(std::string_view s) {
  try {
    auto j = nlohmann::json::parse(s.begin(), s.end(), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  } catch (...) {
    return std::nullopt;
  }
}

/// End (exclusive) of the bracket-balanced span opening at `open`, or npos.
inline std::size_t balanced_end(std::string_view s, std::size_t open) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    switch (c) {
      case '"':
        quote = c;
        break;
      case '\'':
        // An apostrophe only opens a string right after a delimiter; this keeps
        // prose like "Biden's" inside unquoted context from swallowing the span.
        if (i > open) {
          std::size_t k = i;
          while (k > open && text::is_space(static_cast<unsigned char>(s[k - 1]))) --k;
          const char prev = s[k - 1];
          if (prev == '[' || prev == '{' || prev == ',' || prev == ':') quote = c;
        }
        break;
      case '[':
      case '{':
        ++depth;
        break;
      case ']':
      case '}':
        if (--depth == 0) return i + 1;
        break;
      default:
        break;
    }
  }
  return std::string_view::npos;
}

inline void append_utf8_escaped(std::string& out, char c) {
  switch (c) {
    case '"': out += "\\\""; break;
    case '\n': out += "\\n"; break;
    case '\t': out += "\\t"; break;
    case '\r': out += "\\r"; break;
    default: out.push_back(c);
  }
}

/// Rewrites a Python literal (dict/list of str/bool/None) into JSON text.
inline std::string python_to_json(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') {
      const std::size_t start = i++;
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\') ++i;
        ++i;
      }
      out.append(s.substr(start, i - start + 1));
    } else if (c == '\'') {
      out.push_back('"');
      for (++i; i < s.size() && s[i] != '\''; ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          ++i;
          if (s[i] == '\'') {
            out.push_back('\'');
          } else {
            out.push_back('\\');
            out.push_back(s[i]);
          }
        } else {
          append_utf8_escaped(out, s[i]);
        }
      }
      out.push_back('"');
    } else if (s.substr(i, 4) == "True") {
      out += "true";
      i += 3;
    } else if (s.substr(i, 5) == "False") {
      out += "false";
      i += 4;
    } else if (s.substr(i, 4) == "None") {
      out += "null";
      i += 3;
    } else if (c == ',') {
      std::size_t k = i + 1;
      while (k < s.size() && text::is_space(static_cast<unsigned char>(s[k]))) ++k;
      if (k < s.size() && (s[k] == ']' || s[k] == '}')) continue;  // trailing comma
      out.push_back(c);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

/// Upper bound on candidate spans tried in step 2; keeps adversarial input linear-ish.
inline constexpr std::size_t kMaxCandidateSpans = 64;

inline std::optional<Extracted> extract_json(std::string_view raw, Shape want) noexcept {
  try {
    const std::string_view trimmed = text::trim(raw);
    // A response that is already well-formed JSON is taken as is.
    if (auto j = detail::try_parse(trimmed)) {
      if (!detail::shape_ok(*j, want)) return std::nullopt;
      return Extracted{std::move(*j), RepairStep::direct};
    }
    std::size_t tried = 0;
    for (std::size_t i = 0; i < trimmed.size() && tried < kMaxCandidateSpans; ++i) {
      const char c = trimmed[i];
      const bool opener = (c == '[' && want != Shape::object) || (c == '{' && want != Shape::array);
      if (!opener) continue;
      ++tried;
      const std::size_t end = detail::balanced_end(trimmed, i);
      if (end == std::string_view::npos) continue;
      const std::string_view span = trimmed.substr(i, end - i);
      if (auto j = detail::try_parse(span); j && detail::shape_ok(*j, want)) {
        return Extracted{std::move(*j), RepairStep::extracted_span};
      }
      if (auto j = detail::try_parse(detail::python_to_json(span)); j && detail::shape_ok(*j, want)) {
        return Extracted{std::move(*j), RepairStep::python_literal};
      }
    }
  } catch (...) {
  }
  return std::nullopt;
}

}  // namespace fcbias::parse
