#ifndef HCTONE_ANALYSIS_REPORT_H_
#define HCTONE_ANALYSIS_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hctone/audio.h"
#include "hctone/lines.h"
#include "hctone/partials.h"
#include "hctone/spectrogram.h"

namespace hctone {

struct AnalysisConfig {
  StftConfig stft;
  double phon_level = 60.0;
  TrackingConfig tracking;
  double label_tolerance_cents = kDefaultLabelToleranceCents;
  F0EstimatorConfig f0;
  LineConfig lines;
  PerceptConfig percepts;  // phon_level is taken from `phon_level`
  bool quantize = true;
  bool include_spectrogram = false;  // weighted magnitudes in the JSON
  double spectrogram_max_hz = 5000.0;
};

struct AnalysisReport {
  AnalysisConfig config;
  int sample_rate = 48000;
  double duration_s = 0.0;
  Spectrogram spectrogram;  // unweighted
  Spectrogram weighted;
  F0Trajectory f0;
  bool f0_from_metadata = false;
  std::vector<PartialTrack> tracks;  // labeled
  std::vector<MelodicLine> lines;
  std::vector<PitchPercept> percepts;
  Transcription transcription;
};

// Full analysis chain. `known_f0` (for example the synthesis controls) is used
// for labeling when given; otherwise f0 is estimated from the audio.
AnalysisReport analyze_audio(const AudioBuffer& audio, const AnalysisConfig& config = {},
                             const F0Trajectory* known_f0 = nullptr);

// Versioned document {schema_version, params, f0, tracks, lines, percepts,
// transcription[, spectrogram]}.
std::string analysis_to_json(const AnalysisReport& report, int indent = -1);

// Binary PPM (P6) of the weighted spectrogram: one column per frame, one row
// per bin up to `max_hz`, low frequencies at the bottom. Levels are clamped to
// [floor_db, ceiling_db] relative to the loudest cell and mapped through the
// colormap below. With `overlay`, each melodic line segment is drawn as a
// yellow (255, 255, 0) horizontal line at its pitch.
//
// Colormap stops (position: R G B), linear between stops:
//   0.00: 0 0 0   0.25: 40 0 110   0.50: 180 30 90   0.75: 245 120 20   1.00: 255 240 200
std::vector<std::uint8_t> spectrogram_ppm(const Spectrogram& weighted,
                                          const std::vector<MelodicLine>* overlay = nullptr,
                                          double max_hz = 2000.0, double range_db = 90.0);

}  // namespace hctone

#endif  // HCTONE_ANALYSIS_REPORT_H_
