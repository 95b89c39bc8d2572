#include "hctone/analysis_report.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "json_fields.h"

namespace hctone {

using detail::json;

AnalysisReport analyze_audio(const AudioBuffer& audio, const AnalysisConfig& config,
                             const F0Trajectory* known_f0) {
  AnalysisReport r;
  r.config = config;
  r.sample_rate = audio.sample_rate;
  r.duration_s = audio.duration();
  r.spectrogram = stft(audio, config.stft);
  r.weighted = apply_equal_loudness(r.spectrogram, config.phon_level);
  if (known_f0) {
    r.f0 = *known_f0;
    r.f0_from_metadata = true;
  } else {
    r.f0 = estimate_f0(r.spectrogram, config.f0, config.tracking.peak_floor_db);
  }
  r.tracks = label_harmonics(track_partials(r.spectrogram, config.tracking), r.f0,
                             config.label_tolerance_cents);
  r.lines = extract_melodic_lines(r.tracks, r.weighted, config.lines);
  PerceptConfig pc = config.percepts;
  pc.phon_level = config.phon_level;
  r.percepts = estimate_pitch_count(r.lines, r.tracks, r.f0, pc);
  r.transcription = transcribe(r.lines, config.quantize);
  return r;
}

namespace {

json optional_index(const std::optional<int>& i) { return i ? json(*i) : json(nullptr); }

}  // namespace

std::string analysis_to_json(const AnalysisReport& r, int indent) {
  const auto& c = r.config;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["params"] = {
      {"sample_rate", r.sample_rate},
      {"duration_s", r.duration_s},
      {"window_size", c.stft.window_size},
      {"hop", c.stft.hop},
      {"window", window_kind_name(c.stft.window)},
      {"phon", c.phon_level},
      {"peak_floor_db", c.tracking.peak_floor_db},
      {"max_jump_hz", c.tracking.max_jump_hz},
      {"track_min_duration_s", c.tracking.min_duration_s},
      {"label_tolerance_cents", c.label_tolerance_cents},
      {"audibility_margin_db", c.lines.audibility_margin_db},
      {"absolute_floor_db", c.lines.absolute_floor_db},
      {"line_min_duration_s", c.lines.min_duration_s},
      {"percept_span_s", c.percepts.span_s},
  };

  json f0 = json::array();
  for (const auto& v : r.f0.values) f0.push_back(v ? json(*v) : json(nullptr));
  doc["f0"] = {{"source", r.f0_from_metadata ? "metadata" : "estimated"},
               {"rate", r.f0.rate},
               {"offset_s", r.f0.offset_s},
               {"values", std::move(f0)}};

  json tracks = json::array();
  for (const auto& t : r.tracks) {
    json points = json::array();
    for (const auto& p : t.points) points.push_back({p.time_s, p.frequency_hz, p.level_db});
    tracks.push_back({{"harmonic_index", optional_index(t.harmonic_index)},
                      {"harmonic_ratio", t.harmonic_ratio},
                      {"inharmonicity_cents", t.inharmonicity_cents},
                      {"frames_without_f0", t.frames_without_f0},
                      {"start", t.start_s()},
                      {"end", t.end_s()},
                      {"median_hz", t.median_frequency_hz()},
                      {"mean_level_db", t.mean_level_db()},
                      {"points", std::move(points)}});
  }
  doc["tracks"] = std::move(tracks);

  json lines = json::array();
  for (const auto& l : r.lines) {
    json segs = json::array();
    for (const auto& s : l.segments)
      segs.push_back({{"start", s.start_s},
                      {"end", s.end_s},
                      {"pitch_hz", s.pitch_hz},
                      {"mean_level_db", s.mean_level_db}});
    lines.push_back({{"harmonic_index", optional_index(l.harmonic_index)},
                     {"harmonic_ratio", l.harmonic_ratio},
                     {"segments", std::move(segs)}});
  }
  doc["lines"] = std::move(lines);

  json percepts = json::array();
  for (const auto& p : r.percepts)
    percepts.push_back({{"start", p.start_s},
                        {"end", p.end_s},
                        {"pitch_count", p.pitch_count},
                        {"concurrent_lines", p.concurrent_lines},
                        {"rules", p.rules()}});
  doc["percepts"] = std::move(percepts);
  doc["transcription"] = json::parse(transcription_to_json(r.transcription));

  if (c.include_spectrogram) {
    const auto& w = r.weighted;
    const std::size_t bins = std::min<std::size_t>(
        w.bin_hz.size(),
        static_cast<std::size_t>(std::floor(c.spectrogram_max_hz / w.bin_spacing_hz())) + 1);
    json mags = json::array();
    for (const auto& row : w.magnitudes_db) {
      json jr = json::array();
      for (std::size_t b = 0; b < bins; ++b) jr.push_back(std::round(row[b] * 10.0) / 10.0);
      mags.push_back(std::move(jr));
    }
    doc["spectrogram"] = {{"frame_time_s", w.frame_time_s},
                          {"bin_spacing_hz", w.bin_spacing_hz()},
                          {"bins", bins},
                          {"magnitudes_db", std::move(mags)}};
  }
  return doc.dump(indent);
}

namespace {

std::array<std::uint8_t, 3> colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> kStops = {{
      {0, 0, 0}, {40, 0, 110}, {180, 30, 90}, {245, 120, 20}, {255, 240, 200}}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const auto i = std::min<std::size_t>(3, static_cast<std::size_t>(t));
  const double f = t - static_cast<double>(i);
  std::array<std::uint8_t, 3> rgb{};
  for (int ch = 0; ch < 3; ++ch)
    rgb[ch] = static_cast<std::uint8_t>(
        std::lround(kStops[i][ch] + f * (kStops[i + 1][ch] - kStops[i][ch])));
  return rgb;
}

}  // namespace

std::vector<std::uint8_t> spectrogram_ppm(const Spectrogram& weighted,
                                          const std::vector<MelodicLine>* overlay,
                                          double max_hz, double range_db) {
  const std::size_t width = std::max<std::size_t>(1, weighted.frames());
  const std::size_t height = std::max<std::size_t>(
      1, std::min<std::size_t>(weighted.bin_hz.size(),
                               static_cast<std::size_t>(max_hz / weighted.bin_spacing_hz()) + 1));
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& row : weighted.magnitudes_db)
    for (std::size_t b = 0; b < height && b < row.size(); ++b) top = std::max(top, row[b]);
  if (!std::isfinite(top)) top = 0.0;

  const std::string header =
      "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> img(header.begin(), header.end());
  const std::size_t base = img.size();
  img.resize(base + width * height * 3, 0);
  auto put = [&](std::size_t x, std::size_t bin, std::array<std::uint8_t, 3> rgb) {
    const std::size_t y = height - 1 - bin;
    std::copy(rgb.begin(), rgb.end(), img.begin() + static_cast<std::ptrdiff_t>(base + (y * width + x) * 3));
  };
  for (std::size_t x = 0; x < weighted.frames(); ++x)
    for (std::size_t b = 0; b < height; ++b)
      put(x, b, colormap((weighted.magnitudes_db[x][b] - (top - range_db)) / range_db));

  if (overlay) {
    for (const auto& line : *overlay) {
      for (const auto& s : line.segments) {
        const double bin = s.pitch_hz / weighted.bin_spacing_hz();
        if (bin < 0.0 || bin > static_cast<double>(height - 1)) continue;
        const auto row = static_cast<std::size_t>(std::lround(bin));
        for (std::size_t x = 0; x < weighted.frames(); ++x) {
          const double t = weighted.frame_time_s[x];
          if (t >= s.start_s && t < s.end_s) put(x, row, {255, 255, 0});
        }
      }
    }
  }
  return img;
}

}  // namespace hctone
