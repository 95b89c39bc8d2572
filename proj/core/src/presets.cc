#include "hctone/presets.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "hctone/error.h"
#include "json_fields.h"

namespace hctone {
namespace {

constexpr double kFavoriteBoostDb = 18.0;
constexpr double kCrossfadeS = 0.050;

std::size_t frame_count(double duration_s, double rate) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    throw Error(ErrorCode::kInvalidParameter, "duration must be > 0", "duration_s");
  if (!(rate > 0.0)) throw Error(ErrorCode::kInvalidParameter, "rate must be > 0", "rate");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration_s * rate)));
}

double sawtooth_db(std::size_t k) { return -20.0 * std::log10(static_cast<double>(k)); }

HarmonicFrameSequence constant_frames(std::vector<double> frame, double duration_s,
                                      double rate) {
  HarmonicFrameSequence seq;
  seq.rate = rate;
  seq.harmonics = frame.size();
  seq.frames.assign(frame_count(duration_s, rate), frame);
  return seq;
}

// Uniform [0, 1) from the top 53 bits, identical on every platform.
double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

F0ProgramKind parse_f0_program_kind(const std::string& name) {
  if (name == "constant") return F0ProgramKind::kConstant;
  if (name == "glissando") return F0ProgramKind::kGlissando;
  if (name == "step-melody") return F0ProgramKind::kStepMelody;
  throw Error(ErrorCode::kInvalidInput, "unknown f0 program '" + name + "'");
}

const char* f0_program_kind_name(F0ProgramKind kind) {
  switch (kind) {
    case F0ProgramKind::kConstant: return "constant";
    case F0ProgramKind::kGlissando: return "glissando";
    case F0ProgramKind::kStepMelody: return "step-melody";
  }
  return "constant";
}

F0Trajectory make_f0(const F0Program& program, double duration_s, double rate) {
  const std::size_t n = frame_count(duration_s, rate);
  F0Trajectory f0;
  f0.rate = rate;
  f0.values.resize(n);
  switch (program.kind) {
    case F0ProgramKind::kConstant:
      for (auto& v : f0.values) v = program.start_hz;
      break;
    case F0ProgramKind::kGlissando: {
      const double span = std::log(program.end_hz / program.start_hz);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        f0.values[i] = program.start_hz * std::exp(span * x);
      }
      break;
    }
    case F0ProgramKind::kStepMelody: {
      if (program.steps_hz.empty())
        throw Error(ErrorCode::kInvalidParameter, "step melody needs at least one step",
                    "f0.steps_hz");
      if (!(program.step_s > 0.0))
        throw Error(ErrorCode::kInvalidParameter, "step length must be > 0", "f0.step_s");
      for (std::size_t i = 0; i < n; ++i) {
        const auto step = static_cast<std::size_t>(static_cast<double>(i) / rate / program.step_s);
        f0.values[i] = program.steps_hz[step % program.steps_hz.size()];
      }
      break;
    }
  }
  f0.validate();
  return f0;
}

HarmonicFrameSequence generate_wandering_favorite(std::size_t harmonics, double period_s,
                                                  const std::vector<int>& favored,
                                                  std::uint64_t seed, double duration_s,
                                                  double rate) {
  if (favored.empty())
    throw Error(ErrorCode::kInvalidParameter, "favored set must not be empty", "favored");
  for (int h : favored)
    if (h < 1 || static_cast<std::size_t>(h) > harmonics)
      throw Error(ErrorCode::kInvalidParameter, "favored harmonic outside 1..K", "favored");
  if (!(period_s > 0.0))
    throw Error(ErrorCode::kInvalidParameter, "period must be > 0", "period_s");
  const std::size_t n = frame_count(duration_s, rate);

  // Favourite schedule: (change time, harmonic).
  std::mt19937_64 rng(seed);
  std::vector<std::pair<double, int>> schedule;
  std::size_t current = static_cast<std::size_t>(uniform(rng) * favored.size());
  schedule.emplace_back(0.0, favored[current]);
  double t = 0.0;
  while (true) {
    t += period_s * (0.75 + 0.5 * uniform(rng));
    if (t >= duration_s) break;
    if (favored.size() > 1) {
      const auto skip = 1 + static_cast<std::size_t>(uniform(rng) * (favored.size() - 1));
      current = (current + skip) % favored.size();
    }
    schedule.emplace_back(t, favored[current]);
  }

  HarmonicFrameSequence seq;
  seq.rate = rate;
  seq.harmonics = harmonics;
  seq.frames.resize(n);
  std::size_t s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double time = static_cast<double>(i) / rate;
    while (s + 1 < schedule.size() && time >= schedule[s + 1].first + 0.5 * kCrossfadeS) ++s;
    std::vector<double> frame(harmonics);
    for (std::size_t k = 1; k <= harmonics; ++k) frame[k - 1] = sawtooth_db(k);
    const int now = schedule[s].second;
    double fade = 1.0;  // weight of `now`
    int next = now;
    if (s + 1 < schedule.size()) {
      const double change = schedule[s + 1].first;
      if (time >= change - 0.5 * kCrossfadeS) {
        next = schedule[s + 1].second;
        fade = 1.0 - (time - (change - 0.5 * kCrossfadeS)) / kCrossfadeS;
      }
    }
    if (next == now) fade = 1.0;
    frame[now - 1] += kFavoriteBoostDb * fade;
    if (next != now) frame[next - 1] += kFavoriteBoostDb * (1.0 - fade);
    seq.frames[i] = std::move(frame);
  }
  return seq;
}

HarmonicFrameSequence generate_odd_weak_fundamental(std::size_t harmonics,
                                                    double fundamental_attenuation_db,
                                                    double duration_s, double rate) {
  if (harmonics < 1)
    throw Error(ErrorCode::kInvalidParameter, "harmonics must be >= 1", "harmonics");
  if (!(fundamental_attenuation_db >= 0.0))
    throw Error(ErrorCode::kInvalidParameter, "attenuation must be >= 0", "attenuation_db");
  std::vector<double> frame(harmonics, kFloorDb);
  frame[0] = std::max(kFloorDb, -fundamental_attenuation_db);
  for (std::size_t k = 3; k <= harmonics; k += 2) frame[k - 1] = sawtooth_db(k);
  return constant_frames(std::move(frame), duration_s, rate);
}

const std::vector<int>& woofer_mode_harmonics(int mode) {
  static const std::vector<std::vector<int>> kModes = {
      {}, {2}, {3}, {4}, {5}, {2, 4}, {3, 5}};
  if (mode < 1 || mode > 7)
    throw Error(ErrorCode::kInvalidParameter, "mode must be in 1..7", "mode");
  return kModes[static_cast<std::size_t>(mode - 1)];
}

HarmonicFrameSequence generate_woofer_modes(int mode, double duration_s, double rate) {
  const auto& boosted = woofer_mode_harmonics(mode);
  std::vector<double> frame(kWooferHarmonics);
  for (std::size_t k = 1; k <= kWooferHarmonics; ++k) frame[k - 1] = sawtooth_db(k);
  for (int h : boosted) frame[static_cast<std::size_t>(h - 1)] += kWooferBoostDb;
  return constant_frames(std::move(frame), duration_s, rate);
}

HarmonicFrameSequence generate_power_chord(double f0_hz, double duration_s, double rate) {
  if (!(f0_hz >= 60.0 && f0_hz <= 250.0))
    throw Error(ErrorCode::kInvalidParameter, "power chord f0 must be in [60, 250] Hz", "f0");
  constexpr std::size_t kHarmonics = 12;
  std::vector<double> frame(kHarmonics);
  for (std::size_t k = 1; k <= kHarmonics; ++k) {
    const bool strong = k <= 4 || k == 6;
    frame[k - 1] = -3.0 * std::log2(static_cast<double>(k)) - (strong ? 0.0 : 25.0);
  }
  return constant_frames(std::move(frame), duration_s, rate);
}

HarmonicFrameSequence generate_strong_fundamental(std::size_t harmonics, double duration_s,
                                                  double rate) {
  if (harmonics < 1)
    throw Error(ErrorCode::kInvalidParameter, "harmonics must be >= 1", "harmonics");
  std::vector<double> frame(harmonics);
  for (std::size_t k = 1; k <= harmonics; ++k)
    frame[k - 1] = std::max(kFloorDb, -36.0 * std::log2(static_cast<double>(k)));
  return constant_frames(std::move(frame), duration_s, rate);
}

HarmonicFrameSequence generate_sawtooth_series(std::size_t harmonics, double duration_s,
                                               double rate) {
  if (harmonics < 1)
    throw Error(ErrorCode::kInvalidParameter, "harmonics must be >= 1", "harmonics");
  std::vector<double> frame(harmonics);
  for (std::size_t k = 1; k <= harmonics; ++k) frame[k - 1] = sawtooth_db(k);
  return constant_frames(std::move(frame), duration_s, rate);
}

RenderDirectives generate_inharmonic_variant(const HarmonicFrameSequence& base,
                                             std::size_t index, double cents) {
  if (index < 2 || index > base.harmonics)
    throw Error(ErrorCode::kInvalidParameter, "detune index must be in 2..K", "detune_index");
  if (!std::isfinite(cents))
    throw Error(ErrorCode::kInvalidParameter, "detune must be finite", "detune_cents");
  RenderDirectives d;
  d.detune_cents.assign(base.harmonics, 0.0);
  d.detune_cents[index - 1] = cents;
  return d;
}

const std::vector<Dial>& synth_dials() {
  static const std::vector<Dial> kDials = {
      {"onset_threshold", "dB", -120.0, 0.0, -40.0, false, false},
      {"onset_hysteresis", "dB", 0.0, 24.0, 3.0, false, false},
      {"harmonics", "count", 1.0, 64.0, 16.0, true, false},
      {"harmonic_variation", "T", 0.0, 8.0, 1.0, false, true},
      {"odd_even_balance", "rho", -1.0, 1.0, 0.0, false, false},
      {"filter_cutoff", "Hz", 20.0, 22000.0, 8000.0, false, true},
      {"filter_resonance", "Q", 0.5, 20.0, 0.707, false, false},
      {"filter_keytrack", "ratio", 0.0, 1.0, 0.0, false, false},
      {"attack", "s", 0.0, 1.0, 0.005, false, false},
      {"release", "s", 0.0, 2.0, 0.080, false, false},
  };
  return kDials;
}

namespace {

Dial arg(std::string name, std::string unit, double lo, double hi, double def,
         bool integer = false) {
  return {std::move(name), std::move(unit), lo, hi, def, integer, false};
}

std::vector<PresetInfo> build_registry() {
  std::vector<PresetInfo> reg;
  auto add = [&](std::string name, std::string family, std::string description,
                 double f0_hz, double duration_s, std::vector<Dial> dials) -> PresetInfo& {
    PresetInfo info;
    info.name = std::move(name);
    info.family = std::move(family);
    info.description = std::move(description);
    info.defaults.name = info.name;
    info.defaults.duration_s = duration_s;
    info.defaults.f0.start_hz = info.defaults.f0.end_hz = f0_hz;
    for (const auto& d : dials) info.defaults.args[d.name] = d.default_value;
    info.arg_dials = std::move(dials);
    reg.push_back(std::move(info));
    return reg.back();
  };

  auto& wander = add("wandering-favorite", "wandering-favorite",
                     "1/k series whose boosted harmonic wanders over the favored set",
                     110.0, 8.0,
                     {arg("harmonics", "count", 2, 64, 16, true),
                      arg("period_s", "s", 0.1, 10.0, 1.0)});
  wander.defaults.favored = {3, 5};
  wander.params.harmonic_variation = 0.5;

  add("odd-weak-fundamental", "odd-weak-fundamental",
      "odd harmonics only with an attenuated fundamental", 100.0, 4.0,
      {arg("harmonics", "count", 1, 64, 9, true), arg("attenuation_db", "dB", 0, 120, 40)});

  for (int mode = 1; mode <= 7; ++mode) {
    auto& w = add("woofer-mode-" + std::to_string(mode), "woofer-modes",
                  mode == 1 ? std::string("sub-bass baseline, no boost")
                            : "sub-bass with selected upper harmonics boosted by 15 dB",
                  98.0, 4.0, {});
    w.params.filter_cutoff_hz = 1500.0;
  }

  add("power-chord", "power-chord",
      "single harmonic complex tone with a distorted power-chord spectrum", 110.0, 4.0, {});

  add("inharmonic-variant", "inharmonic",
      "1/k series with one partial detuned at render time", 100.0, 4.0,
      {arg("harmonics", "count", 2, 64, 9, true), arg("detune_index", "index", 2, 64, 4, true),
       arg("detune_cents", "cents", -1200, 1200, 80)});

  add("strong-fundamental", "control", "full series with a steep rolloff", 100.0, 4.0,
      {arg("harmonics", "count", 1, 64, 9, true)});

  add("sawtooth", "control", "plain 1/k harmonic series", 110.0, 4.0,
      {arg("harmonics", "count", 1, 64, 16, true)});

  add("pure-sine", "control", "single sinusoid", 220.0, 2.0, {});
  return reg;
}

void check_arg(const PresetInfo& info, const std::string& key, double value) {
  const std::string path = "preset.args." + key;
  const auto it = std::find_if(info.arg_dials.begin(), info.arg_dials.end(),
                               [&](const Dial& d) { return d.name == key; });
  if (it == info.arg_dials.end())
    throw Error(ErrorCode::kInvalidInput, "unknown argument for preset " + info.name, path);
  if (!(value >= it->min && value <= it->max))
    throw Error(ErrorCode::kInvalidParameter,
                "must be in [" + detail::json(it->min).dump() + ", " +
                    detail::json(it->max).dump() + "]",
                path);
  if (it->integer && value != std::floor(value))
    throw Error(ErrorCode::kInvalidParameter, "must be an integer", path);
}

// Re-roots generator errors under the preset argument namespace.
template <typename F>
auto with_preset_path(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidParameter || e.field().empty()) throw;
    const std::string& f = e.field();
    const bool top = f.rfind("f0", 0) == 0 || f == "favored" || f == "duration_s";
    const std::string field = top ? f : "args." + f;
    throw Error(e.code(), e.what(), "preset." + field);
  }
}

}  // namespace

const std::vector<PresetInfo>& preset_registry() {
  static const std::vector<PresetInfo> kRegistry = build_registry();
  return kRegistry;
}

const PresetInfo* find_preset(const std::string& name) {
  for (const auto& p : preset_registry())
    if (p.name == name) return &p;
  return nullptr;
}

PresetRender build_preset(const PresetSpec& spec) {
  const PresetInfo* info = find_preset(spec.name);
  if (!info) throw Error(ErrorCode::kInvalidInput, "unknown preset '" + spec.name + "'", "preset.name");
  std::map<std::string, double> args = info->defaults.args;
  for (const auto& [k, v] : spec.args) {
    check_arg(*info, k, v);
    args[k] = v;
  }
  const double d = spec.duration_s;
  auto harmonics = [&] { return static_cast<std::size_t>(args.at("harmonics")); };

  return with_preset_path([&] {
    PresetRender out;
    out.controls.f0 = make_f0(spec.f0, d);
    const std::string& n = spec.name;
    auto& frames = out.controls.frames;
    if (n == "wandering-favorite") {
      frames = generate_wandering_favorite(harmonics(), args.at("period_s"),
                                           spec.favored.empty() ? info->defaults.favored
                                                                : spec.favored,
                                           spec.seed, d);
    } else if (n == "odd-weak-fundamental") {
      frames = generate_odd_weak_fundamental(harmonics(), args.at("attenuation_db"), d);
    } else if (n.rfind("woofer-mode-", 0) == 0) {
      frames = generate_woofer_modes(std::stoi(n.substr(12)), d);
    } else if (n == "power-chord") {
      for (const auto& v : out.controls.f0.values)
        if (v && (*v < 60.0 || *v > 250.0))
          throw Error(ErrorCode::kInvalidParameter, "power chord f0 must be in [60, 250] Hz",
                      "f0");
      frames = generate_power_chord(spec.f0.start_hz, d);
    } else if (n == "inharmonic-variant") {
      frames = generate_sawtooth_series(harmonics(), d);
      out.directives = generate_inharmonic_variant(
          frames, static_cast<std::size_t>(args.at("detune_index")), args.at("detune_cents"));
    } else if (n == "strong-fundamental") {
      frames = generate_strong_fundamental(harmonics(), d);
    } else if (n == "sawtooth") {
      frames = generate_sawtooth_series(harmonics(), d);
    } else {
      frames = generate_sawtooth_series(1, d);
    }
    out.controls.validate();
    return out;
  });
}

namespace {

detail::json dial_json(const Dial& d) {
  return {{"name", d.name},       {"unit", d.unit},         {"min", d.min},
          {"max", d.max},         {"default", d.default_value},
          {"integer", d.integer}, {"min_exclusive", d.min_exclusive}};
}

void validate_dial(const detail::json& j, const std::string& path) {
  using namespace detail;
  as_string(require(j, "name", path), join_path(path, "name"));
  as_string(require(j, "unit", path), join_path(path, "unit"));
  const double lo = as_number(require(j, "min", path), join_path(path, "min"));
  const double hi = as_number(require(j, "max", path), join_path(path, "max"));
  const double def = as_number(require(j, "default", path), join_path(path, "default"));
  as_bool(require(j, "integer", path), join_path(path, "integer"));
  as_bool(require(j, "min_exclusive", path), join_path(path, "min_exclusive"));
  if (!(lo <= def && def <= hi))
    throw Error(ErrorCode::kInvalidInput, "default outside [min, max]", join_path(path, "default"));
}

}  // namespace

std::string preset_catalog_json(int indent) {
  using detail::json;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["dials"] = json::array();
  for (const auto& d : synth_dials()) doc["dials"].push_back(dial_json(d));
  doc["presets"] = json::array();
  for (const auto& p : preset_registry()) {
    json jp;
    jp["name"] = p.name;
    jp["family"] = p.family;
    jp["description"] = p.description;
    jp["spec"] = detail::preset_spec_json(p.defaults);
    jp["params"] = detail::params_json(p.params);
    jp["args"] = json::array();
    for (const auto& d : p.arg_dials) jp["args"].push_back(dial_json(d));
    doc["presets"].push_back(std::move(jp));
  }
  return doc.dump(indent);
}

void validate_preset_catalog(std::string_view text) {
  using namespace detail;
  const json doc = parse_document(text);
  if (as_integer(require(doc, "schema_version", ""), "schema_version") != kSchemaVersion)
    throw Error(ErrorCode::kInvalidInput, "unsupported schema_version", "schema_version");
  const json& dials = require(doc, "dials", "");
  if (!dials.is_array()) throw Error(ErrorCode::kInvalidInput, "expected an array", "dials");
  for (std::size_t i = 0; i < dials.size(); ++i) validate_dial(dials[i], "dials/" + std::to_string(i));
  const json& presets = require(doc, "presets", "");
  if (!presets.is_array()) throw Error(ErrorCode::kInvalidInput, "expected an array", "presets");
  for (std::size_t i = 0; i < presets.size(); ++i) {
    const std::string path = "presets/" + std::to_string(i);
    const json& p = presets[i];
    const std::string name = as_string(require(p, "name", path), join_path(path, "name"));
    if (!find_preset(name))
      throw Error(ErrorCode::kInvalidInput, "unknown preset '" + name + "'", join_path(path, "name"));
    as_string(require(p, "family", path), join_path(path, "family"));
    as_string(require(p, "description", path), join_path(path, "description"));
    preset_spec_from(require(p, "spec", path), join_path(path, "spec"), PresetSpec{});
    SynthParams params;
    apply_params(require(p, "params", path), join_path(path, "params"), params);
    const json& args = require(p, "args", path);
    if (!args.is_array())
      throw Error(ErrorCode::kInvalidInput, "expected an array", join_path(path, "args"));
    for (std::size_t k = 0; k < args.size(); ++k)
      validate_dial(args[k], join_path(path, "args/" + std::to_string(k)));
  }
}

}  // namespace hctone
