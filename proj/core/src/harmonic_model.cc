#include "hctone/harmonic_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hctone/error.h"

namespace hctone {
namespace {

constexpr double kDbToNat = std::numbers::ln10 / 20.0;

AmplitudeFrame silent_frame(std::size_t size) {
  AmplitudeFrame out;
  out.amplitudes.assign(size, size ? 1.0 / static_cast<double>(size) : 0.0);
  out.frame_gain = 0.0;
  return out;
}

// Renormalizes in place; degenerates to the silent placeholder when the mass
// is zero.
AmplitudeFrame renormalized(std::vector<double> amps, double gain) {
  double total = 0.0;
  for (double a : amps) total += a;
  if (!(total > 0.0)) return silent_frame(amps.size());
  for (double& a : amps) a /= total;
  return AmplitudeFrame{std::move(amps), gain};
}

std::size_t resampled_size(std::size_t n, double rate, double target_rate) {
  const double exact = static_cast<double>(n) * target_rate / rate;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(exact)));
}

}  // namespace

void F0Trajectory::validate() const {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw Error(ErrorCode::kInvalidInput, "f0 rate must be > 0", "rate");
  if (values.empty())
    throw Error(ErrorCode::kInvalidInput, "f0 trajectory is empty", "f0");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    const double f = *values[i];
    if (!(f > 10.0 && f < 4000.0))
      throw Error(ErrorCode::kInvalidInput,
                  "f0 value " + std::to_string(f) + " Hz outside (10, 4000)",
                  "f0/" + std::to_string(i));
  }
}

void HarmonicFrameSequence::validate() const {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw Error(ErrorCode::kInvalidInput, "frame rate must be > 0", "rate");
  if (harmonics < 1)
    throw Error(ErrorCode::kInvalidInput, "K must be >= 1", "K");
  if (frames.empty())
    throw Error(ErrorCode::kInvalidInput, "frame sequence is empty", "frames");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].size() != harmonics)
      throw Error(ErrorCode::kInvalidFrame,
                  "frame has " + std::to_string(frames[t].size()) +
                      " entries, expected " + std::to_string(harmonics),
                  "frames/" + std::to_string(t));
    for (double v : frames[t]) {
      if (!std::isfinite(v))
        throw Error(ErrorCode::kInvalidFrame, "non-finite log-magnitude",
                    "frames/" + std::to_string(t));
    }
  }
}

void SynthParams::validate() const {
  auto fail = [](const char* field, const std::string& what) {
    throw Error(ErrorCode::kInvalidParameter, what, std::string("params.") + field);
  };
  if (!std::isfinite(onset_threshold_db)) fail("onset_threshold", "must be finite");
  if (!(onset_hysteresis_db >= 0.0)) fail("onset_hysteresis", "must be >= 0");
  if (harmonics < 1) fail("harmonics", "must be >= 1");
  if (!(harmonic_variation > 0.0) || !std::isfinite(harmonic_variation))
    fail("harmonic_variation", "temperature must be > 0");
  if (!(odd_even_balance >= -1.0 && odd_even_balance <= 1.0))
    fail("odd_even_balance", "must be in [-1, 1]");
  if (sample_rate != 44100 && sample_rate != 48000 && sample_rate != 96000)
    fail("sample_rate", "must be one of 44100, 48000, 96000");
  if (!(filter_cutoff_hz > 20.0 && filter_cutoff_hz < sample_rate / 2.0))
    fail("filter_cutoff", "must be in (20, sample_rate / 2)");
  if (!(filter_resonance >= 0.5) || !std::isfinite(filter_resonance))
    fail("filter_resonance", "Q must be >= 0.5");
  if (!(filter_keytrack >= 0.0 && filter_keytrack <= 1.0))
    fail("filter_keytrack", "must be in [0, 1]");
  if (!(attack_s >= 0.0 && attack_s <= 10.0)) fail("attack", "must be in [0, 10] s");
  if (!(release_s >= 0.0 && release_s <= 10.0)) fail("release", "must be in [0, 10] s");
  if (!(normalize_dbfs <= 0.0) || !std::isfinite(normalize_dbfs))
    fail("normalize_dbfs", "must be <= 0");
}

AmplitudeFrame harmonic_variation_transform(std::span<const double> frame_db,
                                            double temperature) {
  if (!(temperature > 0.0) || std::isnan(temperature))
    throw Error(ErrorCode::kInvalidParameter, "temperature must be > 0",
                "harmonic_variation");
  if (frame_db.empty())
    throw Error(ErrorCode::kInvalidFrame, "frame has no harmonics");
  double max_db = -std::numeric_limits<double>::infinity();
  for (double v : frame_db) {
    if (!std::isfinite(v))
      throw Error(ErrorCode::kInvalidFrame, "non-finite log-magnitude");
    max_db = std::max(max_db, v);
  }
  if (max_db <= kFloorDb) return silent_frame(frame_db.size());

  AmplitudeFrame out;
  out.amplitudes.resize(frame_db.size());
  double total = 0.0;
  double gain = 0.0;
  for (std::size_t k = 0; k < frame_db.size(); ++k) {
    // Shift by the maximum so the exponent never overflows.
    const double e = std::exp((frame_db[k] - max_db) * kDbToNat / temperature);
    out.amplitudes[k] = e;
    total += e;
    gain += std::exp(frame_db[k] * kDbToNat);
  }
  for (double& a : out.amplitudes) a /= total;
  out.frame_gain = gain;
  return out;
}

AmplitudeFrame odd_even_balance(const AmplitudeFrame& frame, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0))
    throw Error(ErrorCode::kInvalidParameter, "balance must be in [-1, 1]",
                "odd_even_balance");
  if (rho == 0.0) return frame;
  const double even_scale = 1.0 - std::max(rho, 0.0);
  const double odd_scale = 1.0 - std::max(-rho, 0.0);
  std::vector<double> amps = frame.amplitudes;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const bool even = (i + 1) % 2 == 0;
    amps[i] *= even ? even_scale : odd_scale;
  }
  return renormalized(std::move(amps), frame.frame_gain);
}

AmplitudeFrame truncate_harmonics(const AmplitudeFrame& frame,
                                  std::size_t max_harmonics) {
  if (max_harmonics < 1)
    throw Error(ErrorCode::kInvalidParameter, "harmonic count must be >= 1",
                "harmonics");
  if (max_harmonics >= frame.amplitudes.size()) return frame;
  std::vector<double> amps(frame.amplitudes.begin(),
                           frame.amplitudes.begin() + max_harmonics);
  return renormalized(std::move(amps), frame.frame_gain);
}

F0Trajectory resample_controls(const F0Trajectory& trajectory,
                               double target_rate) {
  if (!(target_rate > 0.0))
    throw Error(ErrorCode::kInvalidParameter, "target rate must be > 0");
  if (trajectory.values.empty())
    throw Error(ErrorCode::kInvalidInput, "f0 trajectory is empty", "f0");
  const auto& src = trajectory.values;
  const std::size_t n = resampled_size(src.size(), trajectory.rate, target_rate);
  F0Trajectory out;
  out.rate = target_rate;
  out.offset_s = trajectory.offset_s;
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double pos = static_cast<double>(j) * trajectory.rate / target_rate;
    const std::size_t i0 = std::min(static_cast<std::size_t>(pos), src.size() - 1);
    const std::size_t i1 = std::min(i0 + 1, src.size() - 1);
    const double frac = std::clamp(pos - static_cast<double>(i0), 0.0, 1.0);
    if (frac == 0.0) {
      out.values[j] = src[i0];
    } else if (src[i0] && src[i1]) {
      out.values[j] = std::exp((1.0 - frac) * std::log(*src[i0]) +
                               frac * std::log(*src[i1]));
    } else {
      out.values[j] = frac < 0.5 ? src[i0] : src[i1];
    }
  }
  return out;
}

HarmonicFrameSequence resample_controls(const HarmonicFrameSequence& frames,
                                        double target_rate) {
  if (!(target_rate > 0.0))
    throw Error(ErrorCode::kInvalidParameter, "target rate must be > 0");
  if (frames.frames.empty())
    throw Error(ErrorCode::kInvalidInput, "frame sequence is empty", "frames");
  const auto& src = frames.frames;
  const std::size_t n = resampled_size(src.size(), frames.rate, target_rate);
  HarmonicFrameSequence out;
  out.rate = target_rate;
  out.harmonics = frames.harmonics;
  out.frames.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double pos = static_cast<double>(j) * frames.rate / target_rate;
    const std::size_t i0 = std::min(static_cast<std::size_t>(pos), src.size() - 1);
    const std::size_t i1 = std::min(i0 + 1, src.size() - 1);
    const double frac = std::clamp(pos - static_cast<double>(i0), 0.0, 1.0);
    auto& dst = out.frames[j];
    dst.resize(frames.harmonics);
    for (std::size_t k = 0; k < frames.harmonics; ++k)
      dst[k] = (1.0 - frac) * src[i0][k] + frac * src[i1][k];
  }
  return out;
}

double entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace hctone
