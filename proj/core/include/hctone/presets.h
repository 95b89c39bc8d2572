#ifndef HCTONE_PRESETS_H_
#define HCTONE_PRESETS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hctone/control_json.h"
#include "hctone/harmonic_model.h"
#include "hctone/synth.h"

namespace hctone {

enum class F0ProgramKind { kConstant, kGlissando, kStepMelody };

struct F0Program {
  F0ProgramKind kind = F0ProgramKind::kConstant;
  double start_hz = 110.0;         // constant pitch or glissando start
  double end_hz = 110.0;           // glissando end
  std::vector<double> steps_hz;    // step melody, cycled
  double step_s = 0.5;             // step melody note length
};

F0ProgramKind parse_f0_program_kind(const std::string& name);
const char* f0_program_kind_name(F0ProgramKind kind);

// Glissandi are exponential (linear in log-frequency).
F0Trajectory make_f0(const F0Program& program, double duration_s, double rate = 100.0);

// Random walk over `favored` harmonics on a 1/k baseline: each favourite is
// boosted by 18 dB and held for a seeded duration around `period_s`;
// changes crossfade the boost over 50 ms.
HarmonicFrameSequence generate_wandering_favorite(std::size_t harmonics, double period_s,
                                                  const std::vector<int>& favored,
                                                  std::uint64_t seed, double duration_s,
                                                  double rate = 100.0);

// Odd harmonics >= 3 on a 1/k baseline, evens silent, harmonic 1 attenuated.
HarmonicFrameSequence generate_odd_weak_fundamental(std::size_t harmonics,
                                                    double fundamental_attenuation_db,
                                                    double duration_s, double rate = 100.0);

// Harmonic sets boosted by each mode, loosely modelled on the seven modes of
// an 808-style sub-bass patch. Mode 1 is the bare baseline.
const std::vector<int>& woofer_mode_harmonics(int mode);
inline constexpr double kWooferBoostDb = 15.0;
inline constexpr std::size_t kWooferHarmonics = 12;

HarmonicFrameSequence generate_woofer_modes(int mode, double duration_s, double rate = 100.0);

// Distorted power-chord spectrum: harmonics {1, 2, 3, 4, 6} strong with a
// slow rolloff, the rest 25 dB lower.
HarmonicFrameSequence generate_power_chord(double f0_hz, double duration_s,
                                           double rate = 100.0);

// Full series with a steep rolloff, so only the fundamental is prominent.
HarmonicFrameSequence generate_strong_fundamental(std::size_t harmonics, double duration_s,
                                                  double rate = 100.0);

// Plain 1/k series.
HarmonicFrameSequence generate_sawtooth_series(std::size_t harmonics, double duration_s,
                                               double rate = 100.0);

// Render directive detuning harmonic `index` of `base` by `cents`.
RenderDirectives generate_inharmonic_variant(const HarmonicFrameSequence& base,
                                             std::size_t index, double cents);

// A numeric dial: preset argument or synthesis parameter.
struct Dial {
  std::string name;
  std::string unit;
  double min = 0.0;
  double max = 0.0;
  double default_value = 0.0;
  bool integer = false;
  bool min_exclusive = false;
};

// The synthesis dials exposed to clients, with their accepted ranges.
const std::vector<Dial>& synth_dials();

// Fully specified preset instance.
struct PresetSpec {
  std::string name;
  double duration_s = 4.0;
  F0Program f0;
  std::uint64_t seed = 0;
  std::map<std::string, double> args;  // generator arguments
  std::vector<int> favored;            // wandering favourite only
};

struct PresetInfo {
  std::string name;
  std::string family;
  std::string description;
  PresetSpec defaults;
  SynthParams params;          // recommended synthesis settings
  std::vector<Dial> arg_dials;
};

// Immutable registry, built on first use.
const std::vector<PresetInfo>& preset_registry();
// nullptr when unknown.
const PresetInfo* find_preset(const std::string& name);

struct PresetRender {
  Controls controls;
  RenderDirectives directives;
};

// Throws kInvalidInput for an unknown preset and kInvalidParameter (with a
// field path under "preset.") for out-of-range arguments.
PresetRender build_preset(const PresetSpec& spec);

// Catalog document served to clients: synthesis dials plus every preset with
// its family, defaults and argument dials.
std::string preset_catalog_json(int indent = -1);
// Throws kInvalidInput when the document does not follow the catalog schema.
void validate_preset_catalog(std::string_view text);

}  // namespace hctone

#endif  // HCTONE_PRESETS_H_
