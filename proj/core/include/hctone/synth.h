#ifndef HCTONE_SYNTH_H_
#define HCTONE_SYNTH_H_

#include <span>
#include <vector>

#include "hctone/audio.h"
#include "hctone/control_json.h"
#include "hctone/harmonic_model.h"

namespace hctone {

struct NoteEvent {
  double onset_s = 0.0;
  double duration_s = 0.0;
  double pitch_hz = 0.0;  // f0 at onset; 0 when unknown

  double end_s() const { return onset_s + duration_s; }
};

// Level in dB relative to full scale, sampled at `rate` frames per second.
struct LevelEnvelope {
  double rate = 100.0;
  std::vector<double> level_db;
};

// RMS of the frame gains over `window_s` windows centred on each frame,
// expressed in dB. Zero gain maps to kFloorDb.
LevelEnvelope level_envelope(std::span<const double> frame_gains, double rate,
                             double window_s = 0.010);

// Threshold-gated note detection.
//
// Candidate events are found independently of the threshold: an event begins
// when the level rises by at least `hysteresis_db` above the running minimum
// since the previous event peaked, and its peak is confirmed once the level
// falls `hysteresis_db` below it. An event becomes a note when its peak
// reaches `threshold_db`; the note starts at the event's rising crossing of
// the threshold and ends at the first fall below threshold - hysteresis, at
// the next note's onset, or at the end of the envelope. Because notes are a
// threshold-filtered subset of a fixed candidate list, raising the threshold
// never adds notes.
std::vector<NoteEvent> detect_onsets(const LevelEnvelope& envelope,
                                     double threshold_db, double hysteresis_db);

// Second-order resonant low-pass section (RBJ cookbook, bilinear transform).
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

  static Biquad lowpass(double cutoff_hz, double q, int sample_rate);
  double magnitude(double frequency_hz, int sample_rate) const;
};

// cutoff * (f0_ref / 261.63)^keytrack, clamped to (20, 0.95 * Nyquist).
double effective_cutoff(double cutoff_hz, double keytrack, double f0_ref_hz,
                        int sample_rate);

AudioBuffer lowpass_filter(const AudioBuffer& audio, double cutoff_hz, double q,
                           double keytrack, double f0_ref_hz);

// Scales so the peak magnitude equals 10^(target_dbfs / 20). Silence is
// returned unchanged. `applied_gain`, when given, receives the scale factor.
AudioBuffer normalize_peak(const AudioBuffer& audio, double target_dbfs,
                           double* applied_gain = nullptr);

// Per-partial overrides from render directives.
struct RenderDirectives {
  // detune_cents[k - 1] shifts harmonic k to k * f0 * 2^(cents / 1200).
  std::vector<double> detune_cents;

  double ratio(std::size_t harmonic) const;
  bool empty() const;
};

// Phase-continuous additive synthesis. `amplitudes` must have one frame per f0
// control frame. Partial k advances by 2*pi*k*f0/sample_rate per sample, its
// amplitude is a[k] * frame_gain interpolated linearly between control frames,
// and the whole sum is gated by a linear-attack / exponential-release
// envelope driven by `notes`. Partials at or above Nyquist are omitted.
AudioBuffer render_additive(const F0Trajectory& f0,
                            std::span<const AmplitudeFrame> amplitudes,
                            std::span<const NoteEvent> notes,
                            const SynthParams& params,
                            const RenderDirectives& directives = {});

struct RenderResult {
  AudioBuffer audio;
  std::vector<AmplitudeFrame> amplitudes;  // per control frame, after all dials
  LevelEnvelope level;
  std::vector<NoteEvent> notes;
  double f0_ref_hz = 0.0;
  double effective_cutoff_hz = 0.0;
  double output_gain = 1.0;  // applied by peak normalization
};

// Full sonification: dials -> onset gating -> additive render -> low-pass ->
// peak normalization.
RenderResult sonify(const Controls& controls, const SynthParams& params,
                    const RenderDirectives& directives = {});

// Steady-state level (dBFS) of harmonic k at control frame `frame` in a
// rendered result, assuming a fully open envelope. Returns kFloorDb for
// silent or omitted partials.
double rendered_partial_db(const RenderResult& result, const Controls& controls,
                           const SynthParams& params,
                           const RenderDirectives& directives, std::size_t frame,
                           std::size_t harmonic);

}  // namespace hctone

#endif  // HCTONE_SYNTH_H_
