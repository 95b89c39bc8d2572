#include <algorithm>
#include <cmath>

#include "json_fields.h"

namespace hctone::detail {

json params_json(const SynthParams& p) {
  return {{"onset_threshold", p.onset_threshold_db},
          {"onset_hysteresis", p.onset_hysteresis_db},
          {"harmonics", p.harmonics},
          {"harmonic_variation", p.harmonic_variation},
          {"odd_even_balance", p.odd_even_balance},
          {"filter_cutoff", p.filter_cutoff_hz},
          {"filter_resonance", p.filter_resonance},
          {"filter_keytrack", p.filter_keytrack},
          {"sample_rate", p.sample_rate},
          {"attack", p.attack_s},
          {"release", p.release_s},
          {"normalize_dbfs", p.normalize_dbfs},
          {"hold_pitch", p.hold_pitch},
          {"seed", p.seed}};
}

namespace {

double* dial_target(SynthParams& p, const std::string& key) {
  if (key == "onset_threshold") return &p.onset_threshold_db;
  if (key == "onset_hysteresis") return &p.onset_hysteresis_db;
  if (key == "harmonic_variation") return &p.harmonic_variation;
  if (key == "odd_even_balance") return &p.odd_even_balance;
  if (key == "filter_cutoff") return &p.filter_cutoff_hz;
  if (key == "filter_resonance") return &p.filter_resonance;
  if (key == "filter_keytrack") return &p.filter_keytrack;
  if (key == "attack") return &p.attack_s;
  if (key == "release") return &p.release_s;
  if (key == "normalize_dbfs") return &p.normalize_dbfs;
  return nullptr;
}

void check_dial(const std::string& key, double v, const std::string& path) {
  const auto& dials = synth_dials();
  const auto it = std::find_if(dials.begin(), dials.end(),
                               [&](const Dial& d) { return d.name == key; });
  if (it == dials.end()) return;
  const bool low_ok = it->min_exclusive ? v > it->min : v >= it->min;
  if (!low_ok || !(v <= it->max))
    throw Error(ErrorCode::kInvalidParameter,
                std::string("must be in ") + (it->min_exclusive ? "(" : "[") +
                    json(it->min).dump() + ", " + json(it->max).dump() + "]",
                path);
}

}  // namespace

void apply_params(const json& obj, const std::string& path, SynthParams& p) {
  if (!obj.is_object()) throw Error(ErrorCode::kInvalidInput, "expected an object", path);
  for (const auto& [key, value] : obj.items()) {
    const std::string fp = join_path(path, key);
    if (double* target = dial_target(p, key)) {
      const double v = as_number(value, fp);
      check_dial(key, v, fp);
      *target = v;
    } else if (key == "harmonics") {
      const long long v = as_integer(value, fp);
      check_dial(key, static_cast<double>(v), fp);
      p.harmonics = static_cast<int>(v);
    } else if (key == "sample_rate") {
      const long long v = as_integer(value, fp);
      if (v != 44100 && v != 48000 && v != 96000)
        throw Error(ErrorCode::kInvalidParameter, "must be one of 44100, 48000, 96000", fp);
      p.sample_rate = static_cast<int>(v);
    } else if (key == "hold_pitch") {
      p.hold_pitch = as_bool(value, fp);
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0))
        throw Error(ErrorCode::kInvalidInput, "expected a non-negative integer", fp);
      p.seed = value.get<std::uint64_t>();
    } else {
      throw Error(ErrorCode::kInvalidInput, "unknown parameter", fp);
    }
  }
  try {
    p.validate();
  } catch (const Error& e) {
    // validate() names fields under "params."; re-root them under `path`.
    std::string field = e.field();
    if (field.rfind("params.", 0) == 0) field = join_path(path, field.substr(7));
    throw Error(e.code(), e.what(), field);
  }
}

json f0_program_json(const F0Program& f) {
  json j{{"kind", f0_program_kind_name(f.kind)}, {"start_hz", f.start_hz}};
  if (f.kind == F0ProgramKind::kGlissando) j["end_hz"] = f.end_hz;
  if (f.kind == F0ProgramKind::kStepMelody) {
    j["steps_hz"] = f.steps_hz;
    j["step_s"] = f.step_s;
  }
  return j;
}

F0Program f0_program_from(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw Error(ErrorCode::kInvalidInput, "expected an object", path);
  F0Program f;
  if (auto it = obj.find("kind"); it != obj.end()) {
    try {
      f.kind = parse_f0_program_kind(as_string(*it, join_path(path, "kind")));
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidInput, e.what(), join_path(path, "kind"));
    }
  }
  auto hz = [&](const char* key, double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    const std::string fp = join_path(path, key);
    const double v = as_number(*it, fp);
    if (!(v > 10.0 && v < 4000.0))
      throw Error(ErrorCode::kInvalidParameter, "must be in (10, 4000) Hz", fp);
    return v;
  };
  f.start_hz = hz("start_hz", f.start_hz);
  f.end_hz = hz("end_hz", f.start_hz);
  if (auto it = obj.find("steps_hz"); it != obj.end()) {
    const std::string fp = join_path(path, "steps_hz");
    if (!it->is_array()) throw Error(ErrorCode::kInvalidInput, "expected an array", fp);
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string ep = fp + "/" + std::to_string(i);
      const double v = as_number((*it)[i], ep);
      if (!(v > 10.0 && v < 4000.0))
        throw Error(ErrorCode::kInvalidParameter, "must be in (10, 4000) Hz", ep);
      f.steps_hz.push_back(v);
    }
  }
  if (auto it = obj.find("step_s"); it != obj.end()) {
    const std::string fp = join_path(path, "step_s");
    f.step_s = as_number(*it, fp);
    if (!(f.step_s > 0.0)) throw Error(ErrorCode::kInvalidParameter, "must be > 0", fp);
  }
  if (f.kind == F0ProgramKind::kStepMelody && f.steps_hz.empty())
    throw Error(ErrorCode::kInvalidInput, "step melody needs steps_hz", join_path(path, "steps_hz"));
  return f;
}

json preset_spec_json(const PresetSpec& s) {
  json j{{"name", s.name},
         {"duration_s", s.duration_s},
         {"seed", s.seed},
         {"f0", f0_program_json(s.f0)},
         {"args", s.args}};
  if (!s.favored.empty()) j["favored"] = s.favored;
  return j;
}

PresetSpec preset_spec_from(const json& obj, const std::string& path, PresetSpec base) {
  if (!obj.is_object()) throw Error(ErrorCode::kInvalidInput, "expected an object", path);
  for (const auto& [key, value] : obj.items()) {
    const std::string fp = join_path(path, key);
    if (key == "name") {
      base.name = as_string(value, fp);
    } else if (key == "duration_s") {
      base.duration_s = as_number(value, fp);
      if (!(base.duration_s > 0.0))
        throw Error(ErrorCode::kInvalidParameter, "must be > 0", fp);
    } else if (key == "seed") {
      if (!value.is_number_integer() || value.get<long long>() < 0)
        throw Error(ErrorCode::kInvalidInput, "expected a non-negative integer", fp);
      base.seed = value.get<std::uint64_t>();
    } else if (key == "f0") {
      base.f0 = f0_program_from(value, fp);
    } else if (key == "args") {
      if (!value.is_object()) throw Error(ErrorCode::kInvalidInput, "expected an object", fp);
      for (const auto& [k, v] : value.items()) base.args[k] = as_number(v, join_path(fp, k));
    } else if (key == "favored") {
      if (!value.is_array()) throw Error(ErrorCode::kInvalidInput, "expected an array", fp);
      base.favored.clear();
      for (std::size_t i = 0; i < value.size(); ++i)
        base.favored.push_back(static_cast<int>(as_integer(value[i], fp + "/" + std::to_string(i))));
    } else {
      throw Error(ErrorCode::kInvalidInput, "unknown field", fp);
    }
  }
  return base;
}

}  // namespace hctone::detail
