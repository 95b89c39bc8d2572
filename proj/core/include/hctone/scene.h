#ifndef HCTONE_SCENE_H_
#define HCTONE_SCENE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hctone/control_json.h"
#include "hctone/presets.h"
#include "hctone/synth.h"
#include "hctone/wav.h"

namespace hctone {

// Scene document:
//
//   {"schema_version": 1,
//    "preset": "odd-weak-fundamental" | {"name": ..., "duration_s": ..., "seed": ...,
//                                         "f0": {...}, "args": {...}, "favored": [...]},
//    "controls": {control data, instead of a preset},
//    "params": {synthesis parameter overrides},
//    "output": {"wav": "out.wav", "manifest": "out.json", "format": "float32"}}
struct Scene {
  std::optional<PresetSpec> preset;
  std::optional<Controls> controls;
  SynthParams params;  // preset recommendations with the scene's overrides applied
  WavFormat format = WavFormat::kFloat32;
  std::optional<std::filesystem::path> wav_path;
  std::optional<std::filesystem::path> manifest_path;
};

// Throws Error with a "line L, column C" location for malformed JSON and a
// field path for schema or range violations.
Scene parse_scene(std::string_view text);
Scene load_scene(const std::filesystem::path& path);
// Scene for a registered preset with its defaults.
Scene preset_scene(const std::string& name);

struct SceneRender {
  Controls controls;
  RenderDirectives directives;
  RenderResult result;
  std::vector<std::uint8_t> wav;
  std::string wav_sha256;
  std::string manifest;  // JSON; deterministic for identical scenes
};

SceneRender render_scene(const Scene& scene);

// Resolved scene as a JSON document (the manifest's "scene" member).
std::string scene_json(const Scene& scene, int indent = -1);

}  // namespace hctone

#endif  // HCTONE_SCENE_H_
