#include "hctone/control_json.h"

#include <cmath>
#include <string>

#include "hctone/error.h"
#include "json_fields.h"

namespace hctone {

void Controls::validate() const {
  f0.validate();
  frames.validate();
  if (f0.rate != frames.rate)
    throw Error(ErrorCode::kInvalidInput, "f0 and frames must share one rate",
                "rate");
  if (f0.size() != frames.size())
    throw Error(ErrorCode::kInvalidInput,
                "f0 has " + std::to_string(f0.size()) + " frames but frames has " +
                    std::to_string(frames.size()),
                "frames");
}

namespace detail {

json controls_json(const Controls& controls) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["rate"] = controls.f0.rate;
  doc["K"] = controls.frames.harmonics;
  json f0 = json::array();
  for (const auto& v : controls.f0.values) f0.push_back(v ? json(*v) : json(nullptr));
  doc["f0"] = std::move(f0);
  doc["frames"] = controls.frames.frames;
  return doc;
}

Controls controls_from(const json& doc, const std::string& path) {
  check_schema_version(doc, path);
  Controls c;
  const double rate = as_number(require(doc, "rate", path), join_path(path, "rate"));
  const long long k = as_integer(require(doc, "K", path), join_path(path, "K"));
  if (k < 1) throw Error(ErrorCode::kInvalidInput, "K must be >= 1", join_path(path, "K"));
  c.f0.rate = rate;
  c.frames.rate = rate;
  c.frames.harmonics = static_cast<std::size_t>(k);

  const json& f0 = require(doc, "f0", path);
  const std::string f0_path = join_path(path, "f0");
  if (!f0.is_array()) throw Error(ErrorCode::kInvalidInput, "expected an array", f0_path);
  c.f0.values.reserve(f0.size());
  for (std::size_t i = 0; i < f0.size(); ++i) {
    if (f0[i].is_null()) {
      c.f0.values.emplace_back();
    } else {
      c.f0.values.emplace_back(as_number(f0[i], f0_path + "/" + std::to_string(i)));
    }
  }

  const json& frames = require(doc, "frames", path);
  const std::string frames_path = join_path(path, "frames");
  if (!frames.is_array())
    throw Error(ErrorCode::kInvalidInput, "expected an array", frames_path);
  c.frames.frames.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string fp = frames_path + "/" + std::to_string(t);
    if (!frames[t].is_array())
      throw Error(ErrorCode::kInvalidInput, "expected an array", fp);
    std::vector<double> row;
    row.reserve(frames[t].size());
    for (std::size_t j = 0; j < frames[t].size(); ++j)
      row.push_back(as_number(frames[t][j], fp + "/" + std::to_string(j)));
    c.frames.frames.push_back(std::move(row));
  }
  c.validate();
  return c;
}

}  // namespace detail

std::string controls_to_json(const Controls& controls, int indent) {
  return detail::controls_json(controls).dump(indent);
}

Controls controls_from_json(std::string_view text) {
  return detail::controls_from(detail::parse_document(text), "");
}

}  // namespace hctone
