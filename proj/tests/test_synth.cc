#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstring>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "hctone/error.h"
#include "hctone/presets.h"
#include "hctone/synth.h"
#include "support.h"

namespace hctone {
namespace {

using test::constant_f0;
using test::constant_frames;
using test::dft_level_db;

LevelEnvelope envelope_of(std::vector<double> db, double rate = 100.0) {
  return {rate, std::move(db)};
}

TEST(DetectOnsets, ConstantBelowThresholdGivesNothing) {
  EXPECT_TRUE(detect_onsets(envelope_of(std::vector<double>(100, -21.0)), -20.0, 3.0).empty());
}

TEST(DetectOnsets, SingleStep) {
  std::vector<double> env(200, -60.0);
  std::fill(env.begin() + 80, env.end(), 0.0);
  const auto notes = detect_onsets(envelope_of(env), -20.0, 3.0);
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_NEAR(notes[0].onset_s, 0.80, 1e-12);
  EXPECT_NEAR(notes[0].end_s(), 2.0, 1e-12);
}

TEST(DetectOnsets, ThreePulses) {
  // Expected count from scanning rising crossings of the synthetic envelope.
  std::vector<double> env(100, -60.0);
  for (int start : {10, 40, 70}) std::fill(env.begin() + start, env.begin() + start + 10, 0.0);
  const auto notes = detect_onsets(envelope_of(env), -20.0, 3.0);
  ASSERT_EQ(notes.size(), 3u);
  EXPECT_NEAR(notes[0].onset_s, 0.10, 1e-12);
  EXPECT_NEAR(notes[1].onset_s, 0.40, 1e-12);
  EXPECT_NEAR(notes[2].onset_s, 0.70, 1e-12);
  for (const auto& n : notes) EXPECT_NEAR(n.duration_s, 0.10, 1e-12);
}

TEST(DetectOnsets, EmptyEnvelope) {
  EXPECT_TRUE(detect_onsets(envelope_of({}), -20.0, 3.0).empty());
  EXPECT_THROW(detect_onsets(envelope_of({0.0}), -20.0, -1.0), Error);
}

TEST(DetectOnsetsProperty, NotesAreOrderedAndDisjoint) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> step(0.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> env(300);
    double x = -40.0;
    for (auto& v : env) v = x = std::clamp(x + step(rng), -90.0, 0.0);
    const auto notes = detect_onsets(envelope_of(env), -30.0, 3.0);
    for (std::size_t i = 0; i < notes.size(); ++i) {
      EXPECT_GE(notes[i].onset_s, 0.0);
      EXPECT_GT(notes[i].duration_s, 0.0);
      if (i > 0) EXPECT_GE(notes[i].onset_s, notes[i - 1].end_s() - 1e-12);
    }
  }
}

TEST(DetectOnsetsProperty, RaisingThresholdNeverAddsNotes) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> step(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> env(400);
    double x = -50.0;
    for (auto& v : env) v = x = std::clamp(x + step(rng), -100.0, 0.0);
    std::size_t last = std::numeric_limits<std::size_t>::max();
    for (double thr = -100.0; thr <= 0.0; thr += 0.5) {
      const std::size_t n = detect_onsets(envelope_of(env), thr, 3.0).size();
      EXPECT_LE(n, last) << "trial " << trial << " threshold " << thr;
      last = n;
    }
  }
}

SynthParams dry_params() {
  SynthParams p;
  p.attack_s = 0.005;
  p.release_s = 0.08;
  return p;
}

std::vector<AmplitudeFrame> amps_of(const HarmonicFrameSequence& seq, double t = 1.0) {
  std::vector<AmplitudeFrame> out;
  for (const auto& f : seq.frames) out.push_back(harmonic_variation_transform(f, t));
  return out;
}

TEST(RenderAdditive, PureSineHasNoOtherComponents) {
  const auto f0 = constant_f0(110.0, 100);
  const auto amps = amps_of(constant_frames({0.0}, 100));
  const std::vector<NoteEvent> notes = {{0.0, 1.0, 110.0}};
  const auto audio = render_additive(f0, amps, notes, dry_params());
  // 4800 samples hold exactly 11 periods, so bins are 10 Hz wide and 110 Hz
  // falls on bin 11 with no leakage.
  const std::span<const double> seg(audio.samples.data() + 24000, 4800);
  const double peak = dft_level_db(seg, 48000, 110.0);
  EXPECT_NEAR(peak, 0.0, 0.01);
  for (int bin = 0; bin <= 2400; ++bin) {
    if (std::abs(bin - 11) < 2) continue;
    EXPECT_LE(dft_level_db(seg, 48000, bin * 10.0), peak - 60.0) << bin;
  }
}

TEST(RenderAdditive, UniformFiveHarmonicsAreEqual) {
  const auto f0 = constant_f0(100.0, 100);
  const auto amps = amps_of(constant_frames({0, 0, 0, 0, 0}, 100));
  const std::vector<NoteEvent> notes = {{0.0, 1.0, 100.0}};
  const auto audio = render_additive(f0, amps, notes, dry_params());
  const std::span<const double> seg(audio.samples.data() + 24000, 4800);
  std::vector<double> levels;
  for (int k = 1; k <= 5; ++k) levels.push_back(dft_level_db(seg, 48000, 100.0 * k));
  const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
  EXPECT_LE(*hi - *lo, 0.5);
  EXPECT_NEAR(*lo, 0.0, 0.05);  // a_k = 1/5 times frame_gain = 5
}

TEST(RenderAdditive, NoNotesGivesSilence) {
  const auto audio = render_additive(constant_f0(100.0, 50), amps_of(constant_frames({0, -6}, 50)),
                                     {}, dry_params());
  EXPECT_EQ(audio.samples.size(), 24000u);
  for (double s : audio.samples) ASSERT_EQ(s, 0.0);
}

TEST(RenderAdditive, MismatchedLengthsAreAnError) {
  try {
    render_additive(constant_f0(100.0, 50), amps_of(constant_frames({0}, 49)), {},
                    dry_params());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(RenderAdditive, OmittedPartialsDoNotAlias) {
  // f0 = 1910 Hz: harmonics 13..16 lie above Nyquist and would fold to
  // 48000 - k * 1910, none of which coincides with a kept harmonic.
  const auto f0 = constant_f0(1910.0, 100);
  const auto amps = amps_of(constant_frames(std::vector<double>(16, 0.0), 100));
  const std::vector<NoteEvent> notes = {{0.0, 1.0, 1910.0}};
  const auto audio = render_additive(f0, amps, notes, dry_params());
  const std::span<const double> seg(audio.samples.data() + 24000, 4800);
  for (int k = 13; k <= 16; ++k)
    EXPECT_LE(dft_level_db(seg, 48000, 48000.0 - 1910.0 * k), -80.0) << k;
  EXPECT_GT(dft_level_db(seg, 48000, 1910.0 * 12), -40.0);
}

TEST(RenderAdditive, DetuneDirectiveMovesPartial) {
  const auto f0 = constant_f0(100.0, 100);
  const auto amps = amps_of(constant_frames({0, 0, 0, 0}, 100));
  const std::vector<NoteEvent> notes = {{0.0, 1.0, 100.0}};
  RenderDirectives d;
  d.detune_cents = {0, 0, 0, 1200};
  const auto audio = render_additive(f0, amps, notes, dry_params(), d);
  const std::span<const double> seg(audio.samples.data() + 24000, 4800);
  EXPECT_GT(dft_level_db(seg, 48000, 800.0), -13.0);
  EXPECT_LT(dft_level_db(seg, 48000, 400.0), -100.0);
}

TEST(RenderAdditiveProperty, NoClicksBetweenControlFrames) {
  PresetSpec spec = find_preset("wandering-favorite")->defaults;
  spec.duration_s = 2.0;
  spec.f0.kind = F0ProgramKind::kGlissando;
  spec.f0.start_hz = 80.0;
  spec.f0.end_hz = 320.0;
  const auto pr = build_preset(spec);
  SynthParams p = dry_params();
  p.harmonic_variation = 0.5;
  const auto amps = amps_of(pr.controls.frames, p.harmonic_variation);
  const std::vector<NoteEvent> notes = {{0.0, 2.0, 80.0}};
  const auto audio = render_additive(pr.controls.f0, amps, notes, p);

  double gain_max = 0.0, gain_step = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    gain_max = std::max(gain_max, amps[i].frame_gain);
    if (i > 0) {
      double d = 0.0;
      for (std::size_t k = 0; k < amps[i].amplitudes.size(); ++k)
        d += std::abs(amps[i].amplitudes[k] * amps[i].frame_gain -
                      amps[i - 1].amplitudes[k] * amps[i - 1].frame_gain);
      gain_step = std::max(gain_step, d);
    }
  }
  const double sr = p.sample_rate;
  const double bound = gain_max * 2.0 * std::numbers::pi * 16 * 320.0 / sr +
                       gain_step * pr.controls.f0.rate / sr + gain_max / (p.attack_s * sr);
  double worst = 0.0;
  for (std::size_t n = 1; n < audio.samples.size(); ++n)
    worst = std::max(worst, std::abs(audio.samples[n] - audio.samples[n - 1]));
  EXPECT_LE(worst, bound);
}

TEST(Lowpass, NearNyquistPassesBandLimitedInput) {
  AudioBuffer in;
  in.samples.resize(48000);
  for (std::size_t n = 0; n < in.samples.size(); ++n) {
    const double t = static_cast<double>(n) / 48000.0;
    in.samples[n] = 0.4 * std::sin(2 * std::numbers::pi * 220 * t) +
                    0.2 * std::sin(2 * std::numbers::pi * 660 * t);
  }
  const auto out = lowpass_filter(in, 0.95 * 24000.0, 0.707, 0.0, 261.63);
  double worst = 0.0;
  for (std::size_t n = 0; n < in.samples.size(); ++n)
    worst = std::max(worst, std::abs(out.samples[n] - in.samples[n]));
  EXPECT_LT(worst, 1e-2);
}

TEST(Lowpass, WhiteNoiseRolloff) {
  // Analytic response of this biquad puts 4 kHz 24.48 dB below 100 Hz.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 0.1);
  AudioBuffer in;
  in.samples.resize(48000 * 8);
  for (auto& s : in.samples) s = noise(rng);
  const auto out = lowpass_filter(in, 1000.0, 0.707, 0.0, 261.63);
  const double drop = test::welch_db(out.samples, 48000, 100.0) -
                      test::welch_db(out.samples, 48000, 4000.0) -
                      (test::welch_db(in.samples, 48000, 100.0) -
                       test::welch_db(in.samples, 48000, 4000.0));
  EXPECT_GE(drop, 23.0);
  EXPECT_LE(drop, 25.0);
}

TEST(Lowpass, ResonancePeakNearCutoff) {
  const Biquad bq = Biquad::lowpass(1000.0, 8.0, 48000);
  double best_f = 0.0, best = 0.0;
  for (double f = 500.0; f <= 1500.0; f += 0.05) {
    const double m = bq.magnitude(f, 48000);
    if (m > best) best = m, best_f = f;
  }
  EXPECT_NEAR(best_f, 996.095, 0.1);  // independent evaluation of the analytic response
  EXPECT_NEAR(best_f, 1000.0, 50.0);
  EXPECT_NEAR(20.0 * std::log10(bq.magnitude(1.0, 48000)), 0.0, 0.1);
  const double slope = 20.0 * std::log10(bq.magnitude(16000.0, 48000) / bq.magnitude(8000.0, 48000));
  EXPECT_LT(slope, -12.0);  // bilinear warping steepens the asymptote near Nyquist
}

TEST(Lowpass, ResonanceGrowsWithQ) {
  double last = 0.0;
  for (double q : {0.707, 2.0, 4.0, 8.0}) {
    const Biquad bq = Biquad::lowpass(1000.0, q, 48000);
    double peak = 0.0;
    for (double f = 200.0; f <= 2000.0; f += 1.0) peak = std::max(peak, bq.magnitude(f, 48000));
    EXPECT_GT(peak, last);
    last = peak;
  }
}

TEST(Lowpass, RejectsLowQ) {
  AudioBuffer in;
  in.samples = {0.0, 1.0};
  try {
    lowpass_filter(in, 1000.0, 0.4, 0.0, 261.63);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidParameter);
  }
}

TEST(Lowpass, KeytrackScalesCutoff) {
  EXPECT_NEAR(effective_cutoff(1000.0, 1.0, 523.26, 48000), 2000.0, 1e-9);
  EXPECT_NEAR(effective_cutoff(1000.0, 0.0, 523.26, 48000), 1000.0, 1e-12);
  EXPECT_NEAR(effective_cutoff(20000.0, 1.0, 523.26, 48000), 0.95 * 24000.0, 1e-9);
  EXPECT_GT(effective_cutoff(25.0, 1.0, 30.0, 48000), 20.0);
}

TEST(NormalizePeak, Examples) {
  AudioBuffer a;
  a.samples = {0.5, -0.25, 0.1};
  double gain = 0.0;
  EXPECT_NEAR(normalize_peak(a, -6.0206, &gain).samples[0], 0.5, 1e-4);
  EXPECT_NEAR(gain, 1.0, 1e-4);

  a.samples = {1.0, -0.5};
  EXPECT_NEAR(normalize_peak(a, -12.0).samples[0], 0.251188643150958, 1e-6);

  a.samples = {0.0, 0.0};
  EXPECT_EQ(normalize_peak(a, -1.0).samples, a.samples);
}

TEST(Sonify, DeterministicAndBounded) {
  const auto pr = build_preset(find_preset("wandering-favorite")->defaults);
  SynthParams p = find_preset("wandering-favorite")->params;
  const auto a = sonify(pr.controls, p);
  const auto b = sonify(pr.controls, p);
  ASSERT_EQ(a.audio.samples.size(), b.audio.samples.size());
  EXPECT_EQ(std::memcmp(a.audio.samples.data(), b.audio.samples.data(),
                        a.audio.samples.size() * sizeof(double)),
            0);
  EXPECT_NEAR(peak_abs(a.audio), std::pow(10.0, -1.0 / 20.0), 1e-6);
  for (double s : a.audio.samples) ASSERT_TRUE(std::isfinite(s));
}

TEST(Sonify, RestsProduceSeparateNotes) {
  Controls c;
  c.f0 = constant_f0(110.0, 300);
  for (std::size_t i = 100; i < 150; ++i) c.f0.values[i].reset();
  c.frames = constant_frames({0.0, -6.0}, 300);
  const auto r = sonify(c, SynthParams{});
  ASSERT_EQ(r.notes.size(), 2u);
  EXPECT_NEAR(r.notes[0].pitch_hz, 110.0, 1e-12);
  // The rest is silent once the release has decayed.
  const std::size_t quiet = static_cast<std::size_t>(1.4 * 48000);
  EXPECT_LT(std::abs(r.audio.samples[quiet]), 1e-6);
}

TEST(Sonify, RaisingThresholdNeverAddsNotes) {
  Controls c;
  c.f0 = constant_f0(110.0, 400);
  c.frames = constant_frames({0.0}, 400);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lv(-70.0, 0.0);
  for (std::size_t i = 0; i < 400; i += 20) {
    const double v = lv(rng);
    for (std::size_t j = i; j < i + 20; ++j) c.frames.frames[j][0] = v;
  }
  std::size_t last = std::numeric_limits<std::size_t>::max();
  for (double thr = -80.0; thr <= 0.0; thr += 5.0) {
    SynthParams p;
    p.onset_threshold_db = thr;
    const std::size_t n = sonify(c, p).notes.size();
    EXPECT_LE(n, last);
    last = n;
  }
}

}  // namespace
}  // namespace hctone
