#ifndef HCTONE_TESTS_SUPPORT_H_
#define HCTONE_TESTS_SUPPORT_H_

// Reference measurements computed by direct summation, independent of the
// library's FFT and spectrogram code.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "hctone/analysis_report.h"
#include "hctone/harmonic_model.h"
#include "hctone/presets.h"
#include "hctone/synth.h"

namespace hctone::test {

// Level (dBFS) of the sinusoidal component at `freq` in `x`, by a direct
// rectangular-window DFT. Exact for components with whole periods in x.
inline double dft_level_db(std::span<const double> x, int sample_rate, double freq) {
  double re = 0.0, im = 0.0;
  const double w = 2.0 * std::numbers::pi * freq / sample_rate;
  for (std::size_t n = 0; n < x.size(); ++n) {
    re += x[n] * std::cos(w * static_cast<double>(n));
    im -= x[n] * std::sin(w * static_cast<double>(n));
  }
  const double amp = 2.0 * std::hypot(re, im) / static_cast<double>(x.size());
  return 20.0 * std::log10(std::max(amp, 1e-300));
}

// Welch power spectral density estimate (Hann, 50% overlap) at `freq`, in dB
// up to a constant.
inline double welch_db(std::span<const double> x, int sample_rate, double freq,
                       std::size_t segment = 4096) {
  const double w = 2.0 * std::numbers::pi * freq / sample_rate;
  double power = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + segment <= x.size(); start += segment / 2, ++count) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < segment; ++n) {
      const double hann =
          0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / segment);
      const double v = x[start + n] * hann;
      re += v * std::cos(w * static_cast<double>(n));
      im -= v * std::sin(w * static_cast<double>(n));
    }
    power += re * re + im * im;
  }
  return 10.0 * std::log10(power / static_cast<double>(count));
}

inline F0Trajectory constant_f0(double hz, std::size_t frames, double rate = 100.0) {
  return {rate, std::vector<std::optional<double>>(frames, hz)};
}

inline HarmonicFrameSequence constant_frames(std::vector<double> frame, std::size_t frames,
                                             double rate = 100.0) {
  HarmonicFrameSequence s;
  s.rate = rate;
  s.harmonics = frame.size();
  s.frames.assign(frames, frame);
  return s;
}

struct PresetRun {
  PresetRender preset;
  SynthParams params;
  RenderResult render;
};

inline PresetRun run_preset(const PresetSpec& spec) {
  PresetRun r{build_preset(spec), find_preset(spec.name)->params, {}};
  r.render = sonify(r.preset.controls, r.params, r.preset.directives);
  return r;
}

inline PresetRun run_preset(const std::string& name) {
  return run_preset(find_preset(name)->defaults);
}

inline AnalysisReport analyze_run(const PresetRun& run, const AnalysisConfig& cfg = {}) {
  return analyze_audio(run.render.audio, cfg, &run.preset.controls.f0);
}

inline AudioBuffer sine(double hz, double seconds, double amplitude = 0.5, int sr = 48000) {
  AudioBuffer a;
  a.sample_rate = sr;
  a.samples.resize(static_cast<std::size_t>(seconds * sr));
  for (std::size_t n = 0; n < a.samples.size(); ++n)
    a.samples[n] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / sr);
  return a;
}

}  // namespace hctone::test

#endif  // HCTONE_TESTS_SUPPORT_H_
