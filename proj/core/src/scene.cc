#include "hctone/scene.h"

#include "hctone/hash.h"
#include "hctone/io.h"
#include "json_fields.h"

namespace hctone {

using detail::json;

namespace {

Scene scene_from(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidInput, "scene must be an object", "");
  check_schema_version(doc, "");
  for (const auto& [key, value] : doc.items()) {
    if (key != "schema_version" && key != "preset" && key != "controls" && key != "params" &&
        key != "output")
      throw Error(ErrorCode::kInvalidInput, "unknown field", key);
  }
  const bool has_preset = doc.contains("preset");
  const bool has_controls = doc.contains("controls");
  if (has_preset == has_controls)
    throw Error(ErrorCode::kInvalidInput, "scene needs exactly one of preset or controls",
                has_preset ? "controls" : "preset");

  Scene scene;
  if (has_preset) {
    const json& p = doc.at("preset");
    std::string name;
    if (p.is_string()) {
      name = p.get<std::string>();
    } else {
      name = as_string(require(p, "name", "preset"), "preset.name");
    }
    const PresetInfo* info = find_preset(name);
    if (!info)
      throw Error(ErrorCode::kInvalidInput, "unknown preset '" + name + "'",
                  p.is_string() ? "preset" : "preset.name");
    PresetSpec spec = info->defaults;
    if (p.is_object()) spec = preset_spec_from(p, "preset", spec);
    scene.preset = std::move(spec);
    scene.params = info->params;
  } else {
    scene.controls = controls_from(doc.at("controls"), "controls");
  }
  if (auto it = doc.find("params"); it != doc.end()) apply_params(*it, "params", scene.params);
  if (auto it = doc.find("output"); it != doc.end()) {
    if (!it->is_object()) throw Error(ErrorCode::kInvalidInput, "expected an object", "output");
    for (const auto& [key, value] : it->items()) {
      const std::string fp = "output." + key;
      if (key == "wav") {
        scene.wav_path = as_string(value, fp);
      } else if (key == "manifest") {
        scene.manifest_path = as_string(value, fp);
      } else if (key == "format") {
        try {
          scene.format = parse_wav_format(as_string(value, fp));
        } catch (const Error& e) {
          throw Error(ErrorCode::kInvalidInput, e.what(), fp);
        }
      } else {
        throw Error(ErrorCode::kInvalidInput, "unknown field", fp);
      }
    }
  }
  return scene;
}

}  // namespace

Scene parse_scene(std::string_view text) { return scene_from(detail::parse_document(text)); }

Scene load_scene(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_scene(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.field());
  }
}

Scene preset_scene(const std::string& name) {
  return parse_scene(json{{"preset", name}}.dump());
}

std::string scene_json(const Scene& scene, int indent) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  if (scene.preset) doc["preset"] = detail::preset_spec_json(*scene.preset);
  if (scene.controls) doc["controls"] = detail::controls_json(*scene.controls);
  doc["params"] = detail::params_json(scene.params);
  // Output paths are left out so the manifest does not depend on where files go.
  doc["output"] = {{"format", wav_format_name(scene.format)}};
  return doc.dump(indent);
}

SceneRender render_scene(const Scene& scene) {
  SceneRender out;
  if (scene.preset) {
    PresetRender pr = build_preset(*scene.preset);
    out.controls = std::move(pr.controls);
    out.directives = std::move(pr.directives);
  } else if (scene.controls) {
    out.controls = *scene.controls;
  } else {
    throw Error(ErrorCode::kInvalidInput, "scene has neither preset nor controls", "preset");
  }
  out.result = sonify(out.controls, scene.params, out.directives);
  out.wav = encode_wav(out.result.audio, scene.format, scene.params.seed);
  out.wav_sha256 = sha256_hex(std::span<const std::uint8_t>(out.wav));

  const std::string controls_text = detail::controls_json(out.controls).dump();
  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["generator"] = {{"name", "hctone"}, {"version", HCTONE_VERSION}};
  manifest["scene"] = json::parse(scene_json(scene));
  manifest["render"] = {
      {"sample_rate", out.result.audio.sample_rate},
      {"samples", out.result.audio.samples.size()},
      {"duration_s", out.result.audio.duration()},
      {"notes", out.result.notes.size()},
      {"f0_ref_hz", out.result.f0_ref_hz},
      {"effective_cutoff_hz", out.result.effective_cutoff_hz},
      {"output_gain", out.result.output_gain},
  };
  if (!out.directives.empty()) manifest["render"]["detune_cents"] = out.directives.detune_cents;
  manifest["controls_sha256"] = sha256_hex(controls_text);
  manifest["wav_sha256"] = out.wav_sha256;
  out.manifest = manifest.dump(2);
  return out;
}

}  // namespace hctone
