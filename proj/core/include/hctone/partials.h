#ifndef HCTONE_PARTIALS_H_
#define HCTONE_PARTIALS_H_

#include <optional>
#include <span>
#include <vector>

#include "hctone/harmonic_model.h"
#include "hctone/spectrogram.h"

namespace hctone {

struct SpectralPeak {
  double frequency_hz = 0.0;
  double level_db = 0.0;
  std::size_t bin = 0;
};

// Local maxima above `floor_db`, refined by a parabola through the three bins
// around each maximum. The parabola is fitted to magnitude^0.2308, which makes
// the fit nearly exact for the Hann main lobe.
std::vector<SpectralPeak> pick_peaks(std::span<const double> row_db,
                                     double bin_spacing_hz, double floor_db);

struct TrackPoint {
  std::size_t frame = 0;
  double time_s = 0.0;
  double frequency_hz = 0.0;
  double level_db = 0.0;  // unweighted dBFS
};

struct PartialTrack {
  std::vector<TrackPoint> points;
  std::optional<int> harmonic_index;
  double inharmonicity_cents = 0.0;  // relative to the nearest multiple of f0
  double harmonic_ratio = 0.0;       // median frequency / f0, 0 when unlabeled
  std::size_t frames_without_f0 = 0;  // points skipped during labeling

  double start_s() const { return points.empty() ? 0.0 : points.front().time_s; }
  double end_s() const { return points.empty() ? 0.0 : points.back().time_s; }
  double median_frequency_hz() const;
  double mean_level_db() const;
};

struct TrackingConfig {
  double peak_floor_db = -80.0;
  double max_jump_hz = 25.0;     // per frame
  double min_duration_s = 0.10;
  std::size_t max_gap_frames = 3;  // frames a track may coast unmatched
};

// Greedy nearest-frequency linking: each frame, (track, peak) pairs within
// max_jump of the track's linearly predicted frequency are assigned in order
// of increasing distance.
std::vector<PartialTrack> track_partials(const Spectrogram& spectrogram,
                                         const TrackingConfig& config = {});

inline constexpr double kDefaultLabelToleranceCents = 35.0;

// f0 value at `time_s` (log-linear interpolation; nullopt at rests or outside
// the trajectory).
std::optional<double> f0_at(const F0Trajectory& f0, double time_s);

// harmonic_index = round(median(freq / f0)) when within tolerance_cents of
// that multiple; otherwise none, with the deviation kept in
// inharmonicity_cents. `f0` is sampled by time (frame t at t / rate).
std::vector<PartialTrack> label_harmonics(std::vector<PartialTrack> tracks,
                                          const F0Trajectory& f0,
                                          double tolerance_cents = kDefaultLabelToleranceCents);

struct F0EstimatorConfig {
  double min_hz = 10.0;
  double max_hz = 500.0;
  double step_cents = 5.0;
  double match_cents = 30.0;
  double strong_range_db = 40.0;   // peaks within this of the frame max
  double sieve_fraction = 0.9;     // explained share of strong-peak power
  double voicing_floor_db = -70.0;
  int shs_harmonics = 15;
  double shs_decay = 0.84;
};

// Per-frame f0 by subharmonic summation on the candidate grid, restricted to
// candidates whose harmonic sieve explains most of the strong-peak power,
// then refined by least squares over the matched partials. Output rate is
// one value per spectrogram frame, aligned so value t sits at frame time t.
F0Trajectory estimate_f0(const Spectrogram& spectrogram,
                         const F0EstimatorConfig& config = {},
                         double peak_floor_db = -80.0);

// Level (dBFS) of the peak nearest k * f0 in each frame, kFloorDb when no
// peak lies within `tolerance_cents`. result[t][k - 1].
std::vector<std::vector<double>> measure_harmonics(const Spectrogram& spectrogram,
                                                   const F0Trajectory& f0,
                                                   std::size_t harmonics,
                                                   double tolerance_cents = 35.0,
                                                   double peak_floor_db = -80.0);

double cents_between(double frequency_hz, double reference_hz);

}  // namespace hctone

#endif  // HCTONE_PARTIALS_H_
