#ifndef HCTONE_SRC_JSON_FIELDS_H_
#define HCTONE_SRC_JSON_FIELDS_H_

// Internal helpers for reading schema fields with path-aware diagnostics.

#include <string>

#include "hctone/control_json.h"
#include "hctone/error.h"
#include "hctone/presets.h"
#include "json.hpp"

namespace hctone::detail {

using nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline const json& require(const json& obj, const std::string& key,
                           const std::string& path) {
  if (!obj.is_object())
    throw Error(ErrorCode::kInvalidInput, "expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end())
    throw Error(ErrorCode::kInvalidInput, "missing required field",
                join_path(path, key));
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number())
    throw Error(ErrorCode::kInvalidInput, "expected a number", path);
  return v.get<double>();
}

inline long long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer())
    throw Error(ErrorCode::kInvalidInput, "expected an integer", path);
  return v.get<long long>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string())
    throw Error(ErrorCode::kInvalidInput, "expected a string", path);
  return v.get<std::string>();
}

inline bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean())
    throw Error(ErrorCode::kInvalidInput, "expected a boolean", path);
  return v.get<bool>();
}

inline json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::kInvalidInput, std::string("malformed JSON: ") + e.what(),
                "line " + std::to_string(line) + ", column " + std::to_string(column));
  }
}

inline void check_schema_version(const json& doc, const std::string& path) {
  auto it = doc.find("schema_version");
  if (it == doc.end()) return;
  if (as_integer(*it, join_path(path, "schema_version")) != 1)
    throw Error(ErrorCode::kInvalidInput, "unsupported schema_version",
                join_path(path, "schema_version"));
}

// Control data as a json object (shared by scenes, presets and the service).
json controls_json(const Controls& controls);
Controls controls_from(const json& doc, const std::string& path);

// Synthesis parameters. apply_params overrides only the keys present; range
// violations throw kInvalidParameter, malformed entries kInvalidInput.
json params_json(const SynthParams& params);
void apply_params(const json& obj, const std::string& path, SynthParams& params);

json f0_program_json(const F0Program& program);
F0Program f0_program_from(const json& obj, const std::string& path);

json preset_spec_json(const PresetSpec& spec);
// Fields absent from `obj` keep their value from `base`.
PresetSpec preset_spec_from(const json& obj, const std::string& path, PresetSpec base);

}  // namespace hctone::detail

#endif  // HCTONE_SRC_JSON_FIELDS_H_
