#ifndef HCTONE_LINES_H_
#define HCTONE_LINES_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hctone/partials.h"
#include "hctone/spectrogram.h"

namespace hctone {

struct MelodicSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  double pitch_hz = 0.0;       // median partial frequency
  double mean_level_db = 0.0;  // unweighted dBFS
};

struct MelodicLine {
  std::optional<int> harmonic_index;  // none for inharmonic partials
  double harmonic_ratio = 0.0;        // median frequency / f0
  std::vector<MelodicSegment> segments;

  bool active_at(double time_s) const;
  double mean_pitch_hz() const;
};

struct LineConfig {
  double audibility_margin_db = 20.0;  // below the weighted frame maximum
  double absolute_floor_db = -60.0;    // unweighted dBFS
  double min_duration_s = 0.15;
  // Harmonic 1 carries the residue pitch of the whole tone, so it is held
  // only to the absolute floor.
  bool exempt_fundamental = true;
  double merge_gap_s = 0.05;       // adjacent segments closer than this fuse
  double merge_pitch_cents = 50.0;  // when their pitches agree this closely
};

// Promotes the audible stretches of labeled tracks to melodic lines, one line
// per harmonic index (and one per unlabeled track). `weighted` supplies the
// weighted frame maxima and the phon level used to weight track points.
std::vector<MelodicLine> extract_melodic_lines(const std::vector<PartialTrack>& tracks,
                                               const Spectrogram& weighted,
                                               const LineConfig& config = {});

std::size_t active_line_count(const std::vector<MelodicLine>& lines, double time_s);

struct PerceptConfig {
  double span_s = 0.5;
  double strong_range_db = 10.0;     // strong partial: weighted, within this of max
  double spacing_tolerance = 0.10;   // relative, around 2 * f0
  double inharmonic_cents = 50.0;
  double span_rule_fraction = 0.5;   // share of span frames needed to fire a rule
  double phon_level = 60.0;          // weighting applied to track levels
};

struct PitchPercept {
  double start_s = 0.0;
  double end_s = 0.0;
  int pitch_count = 1;
  int concurrent_lines = 0;  // median over the span
  bool rule_a = false;       // two or more individually audible lines
  bool rule_b = false;       // odd lowest strong partial, 2 * f0 spacing
  bool rule_c = false;       // strong inharmonic partial

  std::string rules() const;  // e.g. "AB"
};

std::vector<PitchPercept> estimate_pitch_count(const std::vector<MelodicLine>& lines,
                                               const std::vector<PartialTrack>& tracks,
                                               const F0Trajectory& f0,
                                               const PerceptConfig& config = {});

struct TranscribedNote {
  double start_s = 0.0;
  double end_s = 0.0;
  double pitch_hz = 0.0;
  std::string name;    // e.g. "E4"; empty unless quantized
  double cents = 0.0;  // deviation from the named note
};

struct Voice {
  std::optional<int> harmonic_index;
  double harmonic_ratio = 0.0;
  std::vector<TranscribedNote> notes;
};

struct Transcription {
  bool quantized = true;
  std::vector<Voice> voices;  // ascending harmonic ratio

  bool operator==(const Transcription&) const = default;
};

bool operator==(const TranscribedNote& a, const TranscribedNote& b);
bool operator==(const Voice& a, const Voice& b);

// Nearest equal-tempered note (A4 = 440 Hz) and the deviation in cents.
std::string note_name(double frequency_hz, double* cents = nullptr);

Transcription transcribe(const std::vector<MelodicLine>& lines, bool quantize = true);
std::string transcription_to_json(const Transcription& transcription, int indent = -1);
Transcription transcription_from_json(std::string_view text);

}  // namespace hctone

#endif  // HCTONE_LINES_H_
