#include "hctone/lines.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hctone/iso226.h"
#include "json_fields.h"

namespace hctone {
namespace {

using detail::json;

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

struct Run {
  std::vector<const TrackPoint*> points;
};

MelodicSegment make_segment(const Run& run, double hop_s) {
  MelodicSegment seg;
  seg.start_s = run.points.front()->time_s - 0.5 * hop_s;
  seg.end_s = run.points.back()->time_s + 0.5 * hop_s;
  std::vector<double> f;
  double level = 0.0;
  for (const auto* p : run.points) {
    f.push_back(p->frequency_hz);
    level += p->level_db;
  }
  seg.pitch_hz = median_of(std::move(f));
  seg.mean_level_db = level / static_cast<double>(run.points.size());
  return seg;
}

}  // namespace

bool MelodicLine::active_at(double time_s) const {
  for (const auto& s : segments)
    if (time_s >= s.start_s && time_s < s.end_s) return true;
  return false;
}

double MelodicLine::mean_pitch_hz() const {
  double num = 0.0, den = 0.0;
  for (const auto& s : segments) {
    const double d = s.end_s - s.start_s;
    num += d * s.pitch_hz;
    den += d;
  }
  return den > 0.0 ? num / den : 0.0;
}

std::vector<MelodicLine> extract_melodic_lines(const std::vector<PartialTrack>& tracks,
                                               const Spectrogram& weighted,
                                               const LineConfig& config) {
  std::shared_ptr<const EqualLoudnessWeighting> weighting;
  if (weighted.weighting_phon) weighting = weighting_for(*weighted.weighting_phon);
  auto weight = [&](double f) { return weighting ? weighting->weight_db(f) : 0.0; };

  std::vector<double> frame_max(weighted.frames(), -std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < weighted.frames(); ++t)
    for (double v : weighted.magnitudes_db[t]) frame_max[t] = std::max(frame_max[t], v);
  for (const auto& tr : tracks)
    for (const auto& p : tr.points)
      if (p.frame < frame_max.size())
        frame_max[p.frame] = std::max(frame_max[p.frame], p.level_db + weight(p.frequency_hz));

  const double hop_s = weighted.hop_s();
  // Lines keyed by harmonic index; unlabeled tracks get their own negative key.
  std::map<long, MelodicLine> by_key;
  long unlabeled = 0;
  for (const auto& tr : tracks) {
    const bool exempt = config.exempt_fundamental && tr.harmonic_index == 1;
    std::vector<Run> runs;
    Run current;
    std::size_t last_frame = 0;
    for (const auto& p : tr.points) {
      const double wl = p.level_db + weight(p.frequency_hz);
      const bool audible =
          p.level_db > config.absolute_floor_db && p.frame < frame_max.size() &&
          (exempt || wl >= frame_max[p.frame] - config.audibility_margin_db);
      if (audible && !current.points.empty() && p.frame > last_frame + 1) {
        runs.push_back(std::move(current));
        current = {};
      }
      if (audible) {
        current.points.push_back(&p);
        last_frame = p.frame;
      } else if (!current.points.empty()) {
        runs.push_back(std::move(current));
        current = {};
      }
    }
    if (!current.points.empty()) runs.push_back(std::move(current));

    std::vector<MelodicSegment> segments;
    for (const auto& run : runs) {
      const double duration =
          run.points.back()->time_s - run.points.front()->time_s + hop_s;
      if (duration + 1e-9 >= config.min_duration_s)
        segments.push_back(make_segment(run, hop_s));
    }
    if (segments.empty()) continue;
    const long key = tr.harmonic_index ? *tr.harmonic_index : --unlabeled;
    auto& line = by_key[key];
    line.harmonic_index = tr.harmonic_index;
    if (line.segments.empty()) line.harmonic_ratio = tr.harmonic_ratio;
    line.segments.insert(line.segments.end(), segments.begin(), segments.end());
  }

  std::vector<MelodicLine> lines;
  for (auto& [key, line] : by_key) {
    auto& segs = line.segments;
    std::sort(segs.begin(), segs.end(), [](const MelodicSegment& a, const MelodicSegment& b) {
      return a.start_s < b.start_s;
    });
    std::vector<MelodicSegment> merged;
    for (const auto& s : segs) {
      if (!merged.empty()) {
        auto& prev = merged.back();
        const bool close = s.start_s <= prev.end_s + config.merge_gap_s;
        const bool same_pitch =
            std::abs(cents_between(s.pitch_hz, prev.pitch_hz)) <= config.merge_pitch_cents;
        if (close && (same_pitch || s.start_s < prev.end_s)) {
          const double da = prev.end_s - prev.start_s;
          const double db = s.end_s - s.start_s;
          if (same_pitch) {
            prev.pitch_hz = (prev.pitch_hz * da + s.pitch_hz * db) / (da + db);
            prev.mean_level_db = (prev.mean_level_db * da + s.mean_level_db * db) / (da + db);
            prev.end_s = std::max(prev.end_s, s.end_s);
            continue;
          }
          // Overlapping segments of different pitch: cut the earlier one.
          prev.end_s = s.start_s;
        }
      }
      merged.push_back(s);
    }
    segs = std::move(merged);
    lines.push_back(std::move(line));
  }
  std::stable_sort(lines.begin(), lines.end(), [](const MelodicLine& a, const MelodicLine& b) {
    return a.mean_pitch_hz() < b.mean_pitch_hz();
  });
  return lines;
}

std::size_t active_line_count(const std::vector<MelodicLine>& lines, double time_s) {
  return static_cast<std::size_t>(std::count_if(
      lines.begin(), lines.end(), [&](const MelodicLine& l) { return l.active_at(time_s); }));
}

std::string PitchPercept::rules() const {
  std::string r;
  if (rule_a) r += 'A';
  if (rule_b) r += 'B';
  if (rule_c) r += 'C';
  return r;
}

std::vector<PitchPercept> estimate_pitch_count(const std::vector<MelodicLine>& lines,
                                               const std::vector<PartialTrack>& tracks,
                                               const F0Trajectory& f0,
                                               const PerceptConfig& config) {
  const auto weighting = weighting_for(config.phon_level);
  struct Point {
    double frequency_hz;
    double weighted_db;
    const PartialTrack* track;
  };
  struct Frame {
    double time_s = 0.0;
    std::vector<Point> points;
  };
  std::map<std::size_t, Frame> frames;
  for (const auto& tr : tracks) {
    for (const auto& p : tr.points) {
      auto& fr = frames[p.frame];
      fr.time_s = p.time_s;
      fr.points.push_back({p.frequency_hz, p.level_db + weighting->weight_db(p.frequency_hz), &tr});
    }
  }

  struct FrameVerdict {
    double time_s;
    std::size_t lines;
    bool b;
    bool c;
  };
  std::vector<FrameVerdict> verdicts;
  for (auto& [index, fr] : frames) {
    const auto f = f0_at(f0, fr.time_s);
    if (!f) continue;
    double max_db = -std::numeric_limits<double>::infinity();
    for (const auto& p : fr.points) max_db = std::max(max_db, p.weighted_db);
    std::vector<Point> strong;
    for (const auto& p : fr.points)
      if (p.weighted_db >= max_db - config.strong_range_db) strong.push_back(p);
    std::sort(strong.begin(), strong.end(),
              [](const Point& a, const Point& b) { return a.frequency_hz < b.frequency_hz; });

    bool b = false;
    if (strong.size() >= 2) {
      const auto& lowest = strong.front();
      const auto h = lowest.track->harmonic_index;
      if (h && *h >= 3 && *h % 2 == 1) {
        b = true;
        for (std::size_t i = 1; i < strong.size() && b; ++i) {
          const double spacing = strong[i].frequency_hz - strong[i - 1].frequency_hz;
          b = std::abs(spacing - 2.0 * *f) <= config.spacing_tolerance * 2.0 * *f;
        }
      }
    }
    bool c = false;
    for (const auto& p : strong)
      if (std::abs(p.track->inharmonicity_cents) > config.inharmonic_cents) c = true;
    verdicts.push_back({fr.time_s, active_line_count(lines, fr.time_s), b, c});
  }

  std::vector<PitchPercept> percepts;
  std::size_t i = 0;
  while (i < verdicts.size()) {
    const double start = verdicts[i].time_s;
    std::size_t j = i;
    while (j < verdicts.size() && verdicts[j].time_s < start + config.span_s) ++j;
    std::vector<double> counts;
    std::size_t nb = 0, nc = 0;
    for (std::size_t k = i; k < j; ++k) {
      counts.push_back(static_cast<double>(verdicts[k].lines));
      nb += verdicts[k].b;
      nc += verdicts[k].c;
    }
    const double n = static_cast<double>(j - i);
    PitchPercept pp;
    pp.start_s = start;
    pp.end_s = verdicts[j - 1].time_s;
    pp.concurrent_lines = static_cast<int>(median_of(counts));
    pp.rule_a = pp.concurrent_lines >= 2;
    pp.rule_b = static_cast<double>(nb) >= config.span_rule_fraction * n;
    pp.rule_c = static_cast<double>(nc) >= config.span_rule_fraction * n;
    pp.pitch_count = std::max(1, pp.concurrent_lines);
    if ((pp.rule_b || pp.rule_c) && pp.pitch_count < 2) pp.pitch_count = 2;
    percepts.push_back(pp);
    i = j;
  }
  return percepts;
}

bool operator==(const TranscribedNote& a, const TranscribedNote& b) {
  return a.start_s == b.start_s && a.end_s == b.end_s && a.pitch_hz == b.pitch_hz &&
         a.name == b.name && a.cents == b.cents;
}

bool operator==(const Voice& a, const Voice& b) {
  return a.harmonic_index == b.harmonic_index && a.harmonic_ratio == b.harmonic_ratio &&
         a.notes == b.notes;
}

std::string note_name(double frequency_hz, double* cents) {
  static const char* kNames[] = {"C", "C#", "D", "D#", "E", "F",
                                 "F#", "G", "G#", "A", "A#", "B"};
  const double midi = 69.0 + 12.0 * std::log2(frequency_hz / 440.0);
  const long nearest = std::lround(midi);
  if (cents) *cents = 100.0 * (midi - static_cast<double>(nearest));
  const long pc = ((nearest % 12) + 12) % 12;
  const long octave = (nearest - pc) / 12 - 1;
  return std::string(kNames[pc]) + std::to_string(octave);
}

Transcription transcribe(const std::vector<MelodicLine>& lines, bool quantize) {
  Transcription out;
  out.quantized = quantize;
  for (const auto& line : lines) {
    Voice v;
    v.harmonic_index = line.harmonic_index;
    v.harmonic_ratio = line.harmonic_ratio;
    for (const auto& s : line.segments) {
      TranscribedNote n{s.start_s, s.end_s, s.pitch_hz, {}, 0.0};
      if (quantize) n.name = note_name(s.pitch_hz, &n.cents);
      v.notes.push_back(std::move(n));
    }
    out.voices.push_back(std::move(v));
  }
  std::stable_sort(out.voices.begin(), out.voices.end(), [](const Voice& a, const Voice& b) {
    return a.harmonic_ratio < b.harmonic_ratio;
  });
  return out;
}

std::string transcription_to_json(const Transcription& transcription, int indent) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["quantized"] = transcription.quantized;
  doc["voices"] = json::array();
  for (const auto& v : transcription.voices) {
    json jv;
    jv["harmonic_index"] = v.harmonic_index ? json(*v.harmonic_index) : json(nullptr);
    jv["harmonic_ratio"] = v.harmonic_ratio;
    jv["notes"] = json::array();
    for (const auto& n : v.notes) {
      json jn{{"start", n.start_s}, {"end", n.end_s}, {"pitch_hz", n.pitch_hz}};
      if (!n.name.empty()) {
        jn["name"] = n.name;
        jn["cents"] = n.cents;
      }
      jv["notes"].push_back(std::move(jn));
    }
    doc["voices"].push_back(std::move(jv));
  }
  return doc.dump(indent);
}

Transcription transcription_from_json(std::string_view text) {
  using namespace detail;
  const json doc = parse_document(text);
  check_schema_version(doc, "");
  Transcription out;
  out.quantized = as_bool(require(doc, "quantized", ""), "quantized");
  const json& voices = require(doc, "voices", "");
  if (!voices.is_array()) throw Error(ErrorCode::kInvalidInput, "expected an array", "voices");
  for (std::size_t i = 0; i < voices.size(); ++i) {
    const std::string vp = "voices/" + std::to_string(i);
    Voice v;
    const json& hi = require(voices[i], "harmonic_index", vp);
    if (!hi.is_null())
      v.harmonic_index = static_cast<int>(as_integer(hi, join_path(vp, "harmonic_index")));
    v.harmonic_ratio =
        as_number(require(voices[i], "harmonic_ratio", vp), join_path(vp, "harmonic_ratio"));
    const json& notes = require(voices[i], "notes", vp);
    if (!notes.is_array())
      throw Error(ErrorCode::kInvalidInput, "expected an array", join_path(vp, "notes"));
    for (std::size_t k = 0; k < notes.size(); ++k) {
      const std::string np = join_path(vp, "notes/" + std::to_string(k));
      TranscribedNote n;
      n.start_s = as_number(require(notes[k], "start", np), join_path(np, "start"));
      n.end_s = as_number(require(notes[k], "end", np), join_path(np, "end"));
      n.pitch_hz = as_number(require(notes[k], "pitch_hz", np), join_path(np, "pitch_hz"));
      if (auto it = notes[k].find("name"); it != notes[k].end()) {
        n.name = as_string(*it, join_path(np, "name"));
        n.cents = as_number(require(notes[k], "cents", np), join_path(np, "cents"));
      }
      v.notes.push_back(std::move(n));
    }
    out.voices.push_back(std::move(v));
  }
  return out;
}

}  // namespace hctone
