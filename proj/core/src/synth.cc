#include "hctone/synth.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "hctone/error.h"

namespace hctone {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double to_db(double linear) {
  return linear > 0.0 ? std::max(20.0 * std::log10(linear), kFloorDb) : kFloorDb;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

// Sample-rate envelope generator shared by render_additive.
class NoteGate {
 public:
  NoteGate(std::span<const NoteEvent> notes, const SynthParams& params)
      : notes_(notes),
        attack_samples_(params.attack_s * params.sample_rate),
        release_coeff_(params.release_s > 0.0
                           ? std::exp(-std::log(1000.0) /
                                      (params.release_s * params.sample_rate))
                           : 0.0),
        sample_rate_(params.sample_rate) {}

  // Advances to sample n (called with consecutive n) and returns the gain.
  double next(std::size_t n) {
    const double t = static_cast<double>(n) / sample_rate_;
    while (current_ < notes_.size() && t >= notes_[current_].end_s()) ++current_;
    const bool on = current_ < notes_.size() && t >= notes_[current_].onset_s;
    if (on) {
      if (active_note_ != current_) {
        active_note_ = current_;
        attack_start_ = level_;
        attack_pos_ = 0.0;
      }
      if (attack_pos_ < attack_samples_) {
        level_ = attack_start_ + (1.0 - attack_start_) * (attack_pos_ / attack_samples_);
        attack_pos_ += 1.0;
      } else {
        level_ = 1.0;
      }
    } else {
      active_note_ = kNone;
      level_ *= release_coeff_;
      if (level_ < 1e-6) level_ = 0.0;
    }
    return level_;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::span<const NoteEvent> notes_;
  double attack_samples_;
  double release_coeff_;
  double sample_rate_;
  std::size_t current_ = 0;
  std::size_t active_note_ = kNone;
  double level_ = 0.0;
  double attack_start_ = 0.0;
  double attack_pos_ = 0.0;
};

}  // namespace

LevelEnvelope level_envelope(std::span<const double> frame_gains, double rate,
                             double window_s) {
  LevelEnvelope env;
  env.rate = rate;
  env.level_db.resize(frame_gains.size());
  const auto half = static_cast<std::ptrdiff_t>(
      std::max(0.0, std::round(window_s * rate) - 1.0) / 2.0);
  const auto n = static_cast<std::ptrdiff_t>(frame_gains.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    std::ptrdiff_t count = 0;
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - half);
         j <= std::min(n - 1, i + half); ++j, ++count)
      acc += frame_gains[static_cast<std::size_t>(j)] * frame_gains[static_cast<std::size_t>(j)];
    env.level_db[static_cast<std::size_t>(i)] = to_db(std::sqrt(acc / static_cast<double>(count)));
  }
  return env;
}

std::vector<NoteEvent> detect_onsets(const LevelEnvelope& envelope,
                                     double threshold_db, double hysteresis_db) {
  if (!(hysteresis_db >= 0.0))
    throw Error(ErrorCode::kInvalidParameter, "hysteresis must be >= 0",
                "onset_hysteresis");
  const auto& lv = envelope.level_db;
  std::vector<NoteEvent> notes;
  if (lv.empty()) return notes;

  // Threshold-independent candidate events: [begin, peak] index pairs.
  struct Candidate {
    std::size_t begin;
    std::size_t peak;
  };
  std::vector<Candidate> candidates;
  double running_min = -std::numeric_limits<double>::infinity();
  std::size_t min_index = 0;
  bool rising = false;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const double x = lv[i];
    if (!rising) {
      if (x < running_min) {
        running_min = x;
        min_index = i;
      }
      if (x >= running_min + hysteresis_db && (x > running_min || i == 0)) {
        rising = true;
        peak = i;
        candidates.push_back({min_index, i});
      }
    } else {
      if (x > lv[peak]) {
        peak = i;
        candidates.back().peak = i;
      }
      if (x <= lv[peak] - hysteresis_db && x < lv[peak]) {
        rising = false;
        running_min = x;
        min_index = i;
      }
    }
  }

  const double off_level = threshold_db - hysteresis_db;
  const double dt = 1.0 / envelope.rate;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // [on, off)
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& cand = candidates[c];
    if (lv[cand.peak] < threshold_db) continue;
    std::size_t on = cand.begin;
    while (on < cand.peak && lv[on] < threshold_db) ++on;
    std::size_t off = cand.peak + 1;
    while (off < lv.size() && lv[off] >= off_level) ++off;
    if (!spans.empty() && spans.back().second > on) spans.back().second = on;
    spans.emplace_back(on, off);
  }
  for (const auto& [on, off] : spans) {
    if (off <= on) continue;
    notes.push_back({static_cast<double>(on) * dt,
                     static_cast<double>(off - on) * dt, 0.0});
  }
  return notes;
}

Biquad Biquad::lowpass(double cutoff_hz, double q, int sample_rate) {
  const double w0 = kTwoPi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad bq;
  bq.b0 = (1.0 - cw) / 2.0 / a0;
  bq.b1 = (1.0 - cw) / a0;
  bq.b2 = bq.b0;
  bq.a1 = -2.0 * cw / a0;
  bq.a2 = (1.0 - alpha) / a0;
  return bq;
}

double Biquad::magnitude(double frequency_hz, int sample_rate) const {
  const std::complex<double> z1 = std::polar(1.0, -kTwoPi * frequency_hz / sample_rate);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

double effective_cutoff(double cutoff_hz, double keytrack, double f0_ref_hz,
                        int sample_rate) {
  double fc = cutoff_hz;
  if (keytrack > 0.0 && f0_ref_hz > 0.0)
    fc *= std::pow(f0_ref_hz / kKeytrackReferenceHz, keytrack);
  const double hi = 0.95 * sample_rate / 2.0;
  return std::clamp(fc, 20.0 + 1e-9, hi);
}

AudioBuffer lowpass_filter(const AudioBuffer& audio, double cutoff_hz, double q,
                           double keytrack, double f0_ref_hz) {
  if (!(q >= 0.5))
    throw Error(ErrorCode::kInvalidParameter, "resonance Q must be >= 0.5",
                "filter_resonance");
  const double fc = effective_cutoff(cutoff_hz, keytrack, f0_ref_hz, audio.sample_rate);
  const Biquad bq = Biquad::lowpass(fc, q, audio.sample_rate);
  AudioBuffer out{audio.sample_rate, std::vector<double>(audio.samples.size())};
  double s1 = 0.0, s2 = 0.0;  // transposed direct form II
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const double x = audio.samples[i];
    const double y = bq.b0 * x + s1;
    s1 = bq.b1 * x - bq.a1 * y + s2;
    s2 = bq.b2 * x - bq.a2 * y;
    out.samples[i] = y;
  }
  return out;
}

AudioBuffer normalize_peak(const AudioBuffer& audio, double target_dbfs,
                           double* applied_gain) {
  if (!(target_dbfs <= 0.0))
    throw Error(ErrorCode::kInvalidParameter, "target must be <= 0 dBFS", "normalize_dbfs");
  AudioBuffer out = audio;
  const double peak = peak_abs(audio);
  double gain = 1.0;
  if (peak > 0.0) {
    gain = std::pow(10.0, target_dbfs / 20.0) / peak;
    for (double& s : out.samples) s *= gain;
  }
  if (applied_gain) *applied_gain = gain;
  return out;
}

double RenderDirectives::ratio(std::size_t harmonic) const {
  if (harmonic == 0 || harmonic > detune_cents.size()) return 1.0;
  const double cents = detune_cents[harmonic - 1];
  return cents == 0.0 ? 1.0 : std::exp2(cents / 1200.0);
}

bool RenderDirectives::empty() const {
  return std::all_of(detune_cents.begin(), detune_cents.end(),
                     [](double c) { return c == 0.0; });
}

AudioBuffer render_additive(const F0Trajectory& f0,
                            std::span<const AmplitudeFrame> amplitudes,
                            std::span<const NoteEvent> notes,
                            const SynthParams& params,
                            const RenderDirectives& directives) {
  if (amplitudes.size() != f0.size())
    throw Error(ErrorCode::kInvalidInput,
                "amplitude frames (" + std::to_string(amplitudes.size()) +
                    ") do not match f0 frames (" + std::to_string(f0.size()) + ")",
                "frames");
  AudioBuffer out;
  out.sample_rate = params.sample_rate;
  if (f0.values.empty()) return out;
  const auto total = static_cast<std::size_t>(std::llround(f0.duration() * params.sample_rate));
  out.samples.assign(total, 0.0);
  if (notes.empty()) return out;

  std::size_t partials = 0;
  for (const auto& a : amplitudes) partials = std::max(partials, a.amplitudes.size());

  // f0 used for phase advance: rests hold the last voiced value so releasing
  // partials keep a stable frequency.
  std::vector<double> pitch(f0.size(), 0.0);
  std::vector<double> gain_scale(f0.size(), 0.0);
  {
    double last = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i)
      if (f0.values[i]) { last = *f0.values[i]; break; }
    for (std::size_t i = 0; i < f0.size(); ++i) {
      if (f0.values[i]) {
        last = *f0.values[i];
        gain_scale[i] = amplitudes[i].frame_gain;
      }
      pitch[i] = last;
    }
  }
  if (pitch.empty() || pitch[0] <= 0.0) return out;  // never voiced

  std::vector<double> phase(partials, 0.0);
  std::vector<double> ratio(partials, 1.0);
  for (std::size_t k = 0; k < partials; ++k) ratio[k] = directives.ratio(k + 1);

  NoteGate gate(notes, params);
  const double nyquist = params.sample_rate / 2.0;
  const double frame_per_sample = f0.rate / params.sample_rate;
  std::size_t note_idx = 0;
  const std::size_t last = f0.size() - 1;

  for (std::size_t n = 0; n < total; ++n) {
    const double env = gate.next(n);
    const double pos = static_cast<double>(n) * frame_per_sample;
    const std::size_t i0 = std::min(static_cast<std::size_t>(pos), last);
    const std::size_t i1 = std::min(i0 + 1, last);
    const double frac = std::min(pos - static_cast<double>(i0), 1.0);

    double fundamental;
    if (params.hold_pitch) {
      const double t = static_cast<double>(n) / params.sample_rate;
      while (note_idx + 1 < notes.size() && t >= notes[note_idx + 1].onset_s) ++note_idx;
      fundamental = notes[note_idx].pitch_hz > 0.0 ? notes[note_idx].pitch_hz : pitch[i0];
    } else {
      fundamental = std::exp((1.0 - frac) * std::log(pitch[i0]) + frac * std::log(pitch[i1]));
    }

    double sample = 0.0;
    const auto& a0 = amplitudes[i0].amplitudes;
    const auto& a1 = amplitudes[i1].amplitudes;
    for (std::size_t k = 0; k < partials; ++k) {
      const double freq = static_cast<double>(k + 1) * fundamental * ratio[k];
      if (freq >= nyquist) continue;
      phase[k] += kTwoPi * freq / params.sample_rate;
      if (phase[k] >= kTwoPi) phase[k] -= kTwoPi * std::floor(phase[k] / kTwoPi);
      const double amp0 = k < a0.size() ? a0[k] * gain_scale[i0] : 0.0;
      const double amp1 = k < a1.size() ? a1[k] * gain_scale[i1] : 0.0;
      const double amp = (1.0 - frac) * amp0 + frac * amp1;
      if (amp != 0.0) sample += amp * std::sin(phase[k]);
    }
    out.samples[n] = env * sample;
  }
  return out;
}

RenderResult sonify(const Controls& controls, const SynthParams& params,
                    const RenderDirectives& directives) {
  controls.validate();
  params.validate();
  RenderResult result;
  const auto& frames = controls.frames.frames;
  result.amplitudes.reserve(frames.size());
  std::vector<double> gains(frames.size(), 0.0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    AmplitudeFrame a = harmonic_variation_transform(frames[i], params.harmonic_variation);
    a = odd_even_balance(a, params.odd_even_balance);
    a = truncate_harmonics(a, static_cast<std::size_t>(params.harmonics));
    if (!controls.f0.values[i]) a.frame_gain = 0.0;
    gains[i] = a.frame_gain;
    result.amplitudes.push_back(std::move(a));
  }

  result.level = level_envelope(gains, controls.f0.rate);
  result.notes = detect_onsets(result.level, params.onset_threshold_db,
                               params.onset_hysteresis_db);
  for (auto& note : result.notes) {
    auto i = static_cast<std::size_t>(std::llround(note.onset_s * controls.f0.rate));
    while (i < controls.f0.size() && !controls.f0.values[i]) ++i;
    if (i < controls.f0.size()) note.pitch_hz = *controls.f0.values[i];
  }

  std::vector<double> voiced;
  for (const auto& v : controls.f0.values)
    if (v) voiced.push_back(*v);
  result.f0_ref_hz = median(std::move(voiced));

  AudioBuffer dry = render_additive(controls.f0, result.amplitudes, result.notes,
                                    params, directives);
  result.effective_cutoff_hz = effective_cutoff(params.filter_cutoff_hz, params.filter_keytrack,
                                                result.f0_ref_hz, params.sample_rate);
  AudioBuffer wet = lowpass_filter(dry, params.filter_cutoff_hz, params.filter_resonance,
                                   params.filter_keytrack, result.f0_ref_hz);
  result.audio = normalize_peak(wet, params.normalize_dbfs, &result.output_gain);
  return result;
}

double rendered_partial_db(const RenderResult& result, const Controls& controls,
                           const SynthParams& params,
                           const RenderDirectives& directives, std::size_t frame,
                           std::size_t harmonic) {
  if (frame >= result.amplitudes.size() || harmonic == 0) return kFloorDb;
  const auto& f0 = controls.f0.values[frame];
  const auto& a = result.amplitudes[frame];
  if (!f0 || harmonic > a.amplitudes.size()) return kFloorDb;
  const double freq = static_cast<double>(harmonic) * *f0 * directives.ratio(harmonic);
  if (freq >= params.sample_rate / 2.0) return kFloorDb;
  const Biquad bq = Biquad::lowpass(result.effective_cutoff_hz, params.filter_resonance,
                                    params.sample_rate);
  const double amp = a.amplitudes[harmonic - 1] * a.frame_gain *
                     bq.magnitude(freq, params.sample_rate) * result.output_gain;
  return to_db(amp);
}

}  // namespace hctone
