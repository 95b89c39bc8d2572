#ifndef HCTONE_HARMONIC_MODEL_H_
#define HCTONE_HARMONIC_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hctone {

// Log-magnitude used to encode silence in harmonic frames.
inline constexpr double kFloorDb = -120.0;

// Reference frequency for filter keytracking (middle C).
inline constexpr double kKeytrackReferenceHz = 261.63;

// Fundamental-frequency control signal. A rest is an empty optional, never a
// zero or negative frequency.
struct F0Trajectory {
  double rate = 100.0;  // control frames per second
  std::vector<std::optional<double>> values;
  double offset_s = 0.0;  // time of values[0]

  std::size_t size() const { return values.size(); }
  double duration() const { return static_cast<double>(values.size()) / rate; }
  // Throws kInvalidInput when the invariants do not hold.
  void validate() const;
};

// Per-frame log-magnitudes (dB, relative) over harmonic indices 1..K. Entry
// frames[t][k - 1] belongs to harmonic k.
struct HarmonicFrameSequence {
  double rate = 100.0;
  std::size_t harmonics = 0;
  std::vector<std::vector<double>> frames;

  std::size_t size() const { return frames.size(); }
  void validate() const;
};

// Relative partial strengths. `amplitudes` is a distribution (sums to 1)
// whenever `frame_gain` > 0.
struct AmplitudeFrame {
  std::vector<double> amplitudes;
  double frame_gain = 1.0;
};

struct SynthParams {
  double onset_threshold_db = -40.0;
  double onset_hysteresis_db = 3.0;
  int harmonics = 16;
  double harmonic_variation = 1.0;  // softmax temperature T
  double odd_even_balance = 0.0;    // rho in [-1, 1]
  double filter_cutoff_hz = 8000.0;
  double filter_resonance = 0.707;
  double filter_keytrack = 0.0;
  int sample_rate = 48000;
  double attack_s = 0.005;
  double release_s = 0.080;
  double normalize_dbfs = -1.0;
  bool hold_pitch = false;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidParameter) naming the offending field.
  void validate() const;
};

// Softmax over the frame's log-magnitudes at temperature T. The dB values are
// converted to nats (dB * ln(10) / 20) first, so T = 1 yields amplitudes
// proportional to the linear magnitudes; lower T sharpens the distribution.
// frame_gain is the sum of the frame's linear magnitudes (0 for floor frames).
AmplitudeFrame harmonic_variation_transform(std::span<const double> frame_db,
                                            double temperature);

// Scales even harmonics by (1 - max(rho, 0)) and odd ones by
// (1 - max(-rho, 0)), then renormalizes.
AmplitudeFrame odd_even_balance(const AmplitudeFrame& frame, double rho);

AmplitudeFrame truncate_harmonics(const AmplitudeFrame& frame,
                                  std::size_t max_harmonics);

// Log-frequency interpolation for f0, nearest neighbour for rests.
F0Trajectory resample_controls(const F0Trajectory& trajectory,
                               double target_rate);
// Linear interpolation in dB.
HarmonicFrameSequence resample_controls(const HarmonicFrameSequence& frames,
                                        double target_rate);

// Shannon entropy (nats) of a distribution; used by property tests and the
// catalog's dial documentation.
double entropy(std::span<const double> distribution);

}  // namespace hctone

#endif  // HCTONE_HARMONIC_MODEL_H_
