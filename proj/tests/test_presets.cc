#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hctone/error.h"
#include "hctone/partials.h"
#include "hctone/presets.h"
#include "support.h"

namespace hctone {
namespace {

using test::analyze_run;
using test::run_preset;

ErrorCode code_of(const std::function<void()>& f, std::string* field = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (field) *field = e.field();
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIo;
}

std::size_t frame_argmax(const std::vector<double>& f) {
  return static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
}

TEST(WanderingFavorite, SingleFavoriteAlwaysWins) {
  const auto s = generate_wandering_favorite(16, 1.0, {3}, 4, 5.0);
  ASSERT_EQ(s.size(), 500u);
  for (const auto& f : s.frames) EXPECT_EQ(frame_argmax(f), 2u);
}

TEST(WanderingFavorite, BoostOverBaseline) {
  const auto s = generate_wandering_favorite(16, 1.0, {5}, 4, 1.0);
  const auto& f = s.frames[50];
  EXPECT_NEAR(f[4] - f[3], 18.0 - 20.0 * std::log10(5.0 / 4.0), 1e-9);
  EXPECT_NEAR(f[0] - f[1], 20.0 * std::log10(2.0), 1e-9);
}

TEST(WanderingFavorite, SameSeedSameFrames) {
  const auto a = generate_wandering_favorite(16, 1.0, {3, 5}, 17, 8.0);
  const auto b = generate_wandering_favorite(16, 1.0, {3, 5}, 17, 8.0);
  const auto c = generate_wandering_favorite(16, 1.0, {3, 5}, 18, 8.0);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_NE(a.frames, c.frames);
}

TEST(WanderingFavorite, VisitsEveryFavorite) {
  const auto s = generate_wandering_favorite(16, 1.0, {3, 5, 7}, 2, 20.0);
  std::set<std::size_t> seen;
  // Mid-crossfade frames can leave the fundamental on top.
  for (const auto& f : s.frames)
    if (frame_argmax(f) > 0) seen.insert(frame_argmax(f) + 1);
  EXPECT_EQ(seen, (std::set<std::size_t>{3, 5, 7}));
}

TEST(WanderingFavorite, Errors) {
  EXPECT_EQ(code_of([] { generate_wandering_favorite(16, 1.0, {}, 0, 1.0); }),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { generate_wandering_favorite(4, 1.0, {3, 5}, 0, 1.0); }),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { generate_wandering_favorite(16, 0.0, {3, 5}, 0, 1.0); }),
            ErrorCode::kInvalidParameter);
}

TEST(WanderingFavorite, AnalysisFindsTwoLines) {
  const auto r = analyze_run(run_preset("wandering-favorite"));
  std::set<int> indices;
  for (const auto& l : r.lines)
    if (l.harmonic_index && *l.harmonic_index > 1) indices.insert(*l.harmonic_index);
  EXPECT_GE(indices.size(), 2u);
}

TEST(OddWeakFundamental, Shape) {
  const auto s = generate_odd_weak_fundamental(9, 40.0, 1.0);
  const auto& f = s.frames[0];
  for (std::size_t k = 2; k <= 9; k += 2) EXPECT_EQ(f[k - 1], kFloorDb);
  for (std::size_t k = 3; k <= 9; k += 2) EXPECT_NEAR(f[k - 1], -20.0 * std::log10(k), 1e-12);
  EXPECT_NEAR(f[0], -40.0, 1e-12);
}

TEST(OddWeakFundamental, NoAttenuationLeavesFundamentalStrongest) {
  const auto s = generate_odd_weak_fundamental(9, 0.0, 1.0);
  EXPECT_EQ(frame_argmax(s.frames[0]), 0u);
}

TEST(OddWeakFundamental, SingleHarmonic) {
  const auto s = generate_odd_weak_fundamental(1, 40.0, 1.0);
  EXPECT_EQ(s.harmonics, 1u);
  EXPECT_NEAR(s.frames[0][0], -40.0, 1e-12);
  EXPECT_EQ(code_of([] { generate_odd_weak_fundamental(9, -1.0, 1.0); }),
            ErrorCode::kInvalidParameter);
}

TEST(WooferModes, BaselineDecreases) {
  const auto s = generate_woofer_modes(1, 1.0);
  for (std::size_t k = 1; k < s.harmonics; ++k) EXPECT_LT(s.frames[0][k], s.frames[0][k - 1]);
}

TEST(WooferModes, HarmonicTable) {
  EXPECT_TRUE(woofer_mode_harmonics(1).empty());
  EXPECT_EQ(woofer_mode_harmonics(3), std::vector<int>{3});
  EXPECT_EQ(woofer_mode_harmonics(7), (std::vector<int>{3, 5}));
  EXPECT_EQ(code_of([] { generate_woofer_modes(0, 1.0); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { generate_woofer_modes(8, 1.0); }), ErrorCode::kInvalidParameter);
}

TEST(WooferModes, SharedPitchProgram) {
  const auto ref = build_preset(find_preset("woofer-mode-1")->defaults).controls.f0.values;
  for (int m = 2; m <= 7; ++m)
    EXPECT_EQ(build_preset(find_preset("woofer-mode-" + std::to_string(m))->defaults).controls.f0.values, ref);
}

TEST(WooferModes, ModeThreeStandsOutAfterWeighting) {
  const auto run = run_preset("woofer-mode-3");
  const auto r = analyze_run(run);
  const auto levels = measure_harmonics(r.weighted, run.preset.controls.f0, 5);
  const std::size_t mid = levels.size() / 2;
  EXPECT_GE(levels[mid][2] - levels[mid][1], 10.0);
  EXPECT_GE(levels[mid][2] - levels[mid][3], 10.0);
}

TEST(PowerChord, StrongPartialsAreHarmonic) {
  const auto run = run_preset("power-chord");
  const auto r = analyze_run(run);
  ASSERT_GE(r.lines.size(), 2u);
  for (const auto& t : r.tracks) {
    if (t.mean_level_db() < -30.0) continue;
    const double m = t.median_frequency_hz() / 110.0;
    EXPECT_NEAR(t.median_frequency_hz(), std::round(m) * 110.0, 1.0);
  }
}

TEST(PowerChord, DeterministicAndRangeChecked) {
  EXPECT_EQ(generate_power_chord(110.0, 1.0).frames, generate_power_chord(110.0, 1.0).frames);
  const auto f = generate_power_chord(110.0, 1.0).frames[0];
  for (std::size_t k : {1u, 2u, 3u, 4u, 6u}) EXPECT_GT(f[k - 1], f[4]);
  std::string field;
  PresetSpec spec = find_preset("power-chord")->defaults;
  spec.f0.start_hz = spec.f0.end_hz = 300.0;
  EXPECT_EQ(code_of([&] { build_preset(spec); }, &field), ErrorCode::kInvalidParameter);
  EXPECT_EQ(field, "preset.f0");
}

TEST(InharmonicVariant, ZeroCentsMatchesBase) {
  PresetSpec spec = find_preset("inharmonic-variant")->defaults;
  spec.args["detune_cents"] = 0.0;
  PresetSpec base = find_preset("sawtooth")->defaults;
  base.f0 = spec.f0;
  base.duration_s = spec.duration_s;
  base.args["harmonics"] = spec.args.count("harmonics") ? spec.args["harmonics"] : 9.0;
  const auto a = run_preset(spec).render.audio.samples;
  auto b_run = test::PresetRun{build_preset(base), find_preset("inharmonic-variant")->params, {}};
  const auto b = sonify(b_run.preset.controls, b_run.params).audio.samples;
  EXPECT_EQ(a, b);
}

TEST(InharmonicVariant, DirectiveTargetsOnePartial) {
  const auto base = generate_sawtooth_series(9, 1.0);
  const auto d = generate_inharmonic_variant(base, 4, 80.0);
  EXPECT_NEAR(d.ratio(4), std::exp2(80.0 / 1200.0), 1e-12);
  EXPECT_EQ(d.ratio(3), 1.0);
  EXPECT_EQ(code_of([&] { generate_inharmonic_variant(base, 1, 80.0); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([&] { generate_inharmonic_variant(base, 10, 80.0); }), ErrorCode::kInvalidParameter);
}

TEST(Registry, NamesAreUniqueAndBuild) {
  std::set<std::string> names;
  for (const auto& p : preset_registry()) {
    EXPECT_TRUE(names.insert(p.name).second) << p.name;
    EXPECT_GT(p.defaults.duration_s, 0.0);
    EXPECT_NO_THROW(build_preset(p.defaults).controls.validate()) << p.name;
    EXPECT_NO_THROW(p.params.validate()) << p.name;
  }
  EXPECT_TRUE(names.count("wandering-favorite"));
  EXPECT_TRUE(names.count("odd-weak-fundamental"));
  EXPECT_EQ(find_preset("nope"), nullptr);
}

TEST(Registry, EveryPresetIsDeterministic) {
  for (const auto& p : preset_registry()) {
    const auto a = build_preset(p.defaults);
    const auto b = build_preset(p.defaults);
    EXPECT_EQ(a.controls.frames.frames, b.controls.frames.frames) << p.name;
    EXPECT_EQ(a.controls.f0.values, b.controls.f0.values) << p.name;
    EXPECT_EQ(a.directives.detune_cents, b.directives.detune_cents) << p.name;
  }
}

TEST(Registry, RoundTripOnEveryPreset) {
  // Harmonics rendered at or above -50 dBFS are all recovered as labeled
  // tracks, and nothing is labeled that was not rendered above the peak floor.
  for (const auto& p : preset_registry()) {
    const auto run = run_preset(p.defaults);
    const auto r = analyze_run(run);
    const std::size_t K = run.preset.controls.frames.harmonics;
    std::set<int> strong, present, found;
    const std::size_t frame = run.preset.controls.frames.size() / 2;
    for (std::size_t k = 1; k <= K; ++k) {
      if (run.preset.directives.ratio(k) != 1.0) continue;
      double best = kFloorDb;
      for (std::size_t t = 0; t < run.preset.controls.frames.size(); t += 5)
        best = std::max(best, rendered_partial_db(run.render, run.preset.controls, run.params,
                                                  run.preset.directives, t, k));
      if (rendered_partial_db(run.render, run.preset.controls, run.params, run.preset.directives,
                              frame, k) >= -50.0)
        strong.insert(static_cast<int>(k));
      if (best >= -85.0) present.insert(static_cast<int>(k));
    }
    for (const auto& t : r.tracks)
      if (t.harmonic_index) found.insert(*t.harmonic_index);
    for (int k : strong) EXPECT_TRUE(found.count(k)) << p.name << " missing " << k;
    for (int k : found) EXPECT_TRUE(present.count(k)) << p.name << " spurious " << k;
  }
}

TEST(BuildPreset, ArgumentErrors) {
  std::string field;
  PresetSpec spec = find_preset("odd-weak-fundamental")->defaults;
  spec.args["attenuation_db"] = -3.0;
  EXPECT_EQ(code_of([&] { build_preset(spec); }, &field), ErrorCode::kInvalidParameter);
  EXPECT_EQ(field, "preset.args.attenuation_db");

  spec = find_preset("odd-weak-fundamental")->defaults;
  spec.args["harmonics"] = 4.5;
  EXPECT_EQ(code_of([&] { build_preset(spec); }, &field), ErrorCode::kInvalidParameter);
  EXPECT_EQ(field, "preset.args.harmonics");

  spec.args = {{"bogus", 1.0}};
  EXPECT_EQ(code_of([&] { build_preset(spec); }, &field), ErrorCode::kInvalidInput);
  EXPECT_EQ(field, "preset.args.bogus");

  spec = find_preset("wandering-favorite")->defaults;
  spec.favored = {3, 40};
  EXPECT_EQ(code_of([&] { build_preset(spec); }, &field), ErrorCode::kInvalidParameter);
  EXPECT_EQ(field, "preset.favored");

  spec.name = "missing";
  EXPECT_EQ(code_of([&] { build_preset(spec); }, &field), ErrorCode::kInvalidInput);
  EXPECT_EQ(field, "preset.name");
}

TEST(MakeF0, Programs) {
  F0Program c;
  c.start_hz = 98.0;
  auto f = make_f0(c, 1.0);
  EXPECT_EQ(f.size(), 100u);
  for (const auto& v : f.values) EXPECT_EQ(v, 98.0);

  F0Program g;
  g.kind = F0ProgramKind::kGlissando;
  g.start_hz = 100.0;
  g.end_hz = 400.0;
  f = make_f0(g, 2.0);
  EXPECT_NEAR(*f.values.front(), 100.0, 1e-9);
  EXPECT_NEAR(*f.values[f.size() / 2], 200.0, 2.0);
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_GT(*f.values[i], *f.values[i - 1]);

  F0Program m;
  m.kind = F0ProgramKind::kStepMelody;
  m.steps_hz = {110.0, 165.0};
  m.step_s = 0.5;
  f = make_f0(m, 2.0);
  EXPECT_EQ(f.values[10], 110.0);
  EXPECT_EQ(f.values[60], 165.0);
  EXPECT_EQ(f.values[110], 110.0);
  EXPECT_EQ(parse_f0_program_kind("step-melody"), F0ProgramKind::kStepMelody);
  EXPECT_STREQ(f0_program_kind_name(F0ProgramKind::kGlissando), "glissando");
}

TEST(Catalog, ValidatesAndListsEveryPreset) {
  const std::string text = preset_catalog_json();
  EXPECT_NO_THROW(validate_preset_catalog(text));
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["presets"].size(), preset_registry().size());
  EXPECT_EQ(j["dials"].size(), synth_dials().size());
}

TEST(Catalog, RejectsMalformedDocuments) {
  auto j = nlohmann::json::parse(preset_catalog_json());
  j["presets"][0].erase("family");
  EXPECT_EQ(code_of([&] { validate_preset_catalog(j.dump()); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { validate_preset_catalog("[]"); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { validate_preset_catalog("{"); }), ErrorCode::kInvalidInput);
}

TEST(Dials, DefaultsLieInRange) {
  for (const auto& d : synth_dials()) {
    EXPECT_LE(d.min, d.default_value) << d.name;
    EXPECT_LE(d.default_value, d.max) << d.name;
    if (d.min_exclusive) EXPECT_LT(d.min, d.default_value) << d.name;
  }
}

}  // namespace
}  // namespace hctone
