#include "hctone/partials.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hctone/error.h"

namespace hctone {
namespace {

// Exponent for the power-scaled parabola (Hann window).
constexpr double kParabolaExponent = 0.2308;

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

std::vector<std::vector<SpectralPeak>> peaks_per_frame(const Spectrogram& spec,
                                                       double floor_db) {
  std::vector<std::vector<SpectralPeak>> out(spec.frames());
  for (std::size_t t = 0; t < spec.frames(); ++t)
    out[t] = pick_peaks(spec.magnitudes_db[t], spec.bin_spacing_hz(), floor_db);
  return out;
}

// Strongest peak within `cents` of `target`, or nullptr.
const SpectralPeak* nearest_peak(const std::vector<SpectralPeak>& peaks, double target,
                                 double cents) {
  const double lo = target * std::exp2(-cents / 1200.0);
  const double hi = target * std::exp2(cents / 1200.0);
  auto it = std::lower_bound(peaks.begin(), peaks.end(), lo,
                             [](const SpectralPeak& p, double f) { return p.frequency_hz < f; });
  const SpectralPeak* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (; it != peaks.end() && it->frequency_hz <= hi; ++it) {
    const double d = std::abs(std::log2(it->frequency_hz / target));
    if (d < best_dist) {
      best_dist = d;
      best = &*it;
    }
  }
  return best;
}

}  // namespace

double cents_between(double frequency_hz, double reference_hz) {
  return 1200.0 * std::log2(frequency_hz / reference_hz);
}

std::vector<SpectralPeak> pick_peaks(std::span<const double> row_db,
                                     double bin_spacing_hz, double floor_db) {
  std::vector<SpectralPeak> peaks;
  if (row_db.size() < 3) return peaks;
  for (std::size_t k = 1; k + 1 < row_db.size(); ++k) {
    const double b = row_db[k];
    if (b < floor_db || b <= row_db[k - 1] || b < row_db[k + 1]) continue;
    const double ya = std::pow(10.0, row_db[k - 1] * kParabolaExponent / 20.0);
    const double yb = std::pow(10.0, b * kParabolaExponent / 20.0);
    const double yc = std::pow(10.0, row_db[k + 1] * kParabolaExponent / 20.0);
    const double denom = ya - 2.0 * yb + yc;
    double offset = 0.0;
    double peak = yb;
    if (denom < 0.0) {
      offset = std::clamp(0.5 * (ya - yc) / denom, -0.5, 0.5);
      peak = yb - 0.25 * (ya - yc) * offset;
    }
    peaks.push_back({(static_cast<double>(k) + offset) * bin_spacing_hz,
                     20.0 / kParabolaExponent * std::log10(peak), k});
  }
  return peaks;
}

double PartialTrack::median_frequency_hz() const {
  std::vector<double> f;
  f.reserve(points.size());
  for (const auto& p : points) f.push_back(p.frequency_hz);
  return median_of(std::move(f));
}

double PartialTrack::mean_level_db() const {
  if (points.empty()) return kFloorDb;
  double s = 0.0;
  for (const auto& p : points) s += p.level_db;
  return s / static_cast<double>(points.size());
}

std::vector<PartialTrack> track_partials(const Spectrogram& spec,
                                         const TrackingConfig& config) {
  if (!std::isfinite(config.peak_floor_db) || !std::isfinite(config.max_jump_hz))
    throw Error(ErrorCode::kInvalidParameter, "tracking thresholds must be finite");
  const auto peaks = peaks_per_frame(spec, config.peak_floor_db);

  struct Active {
    PartialTrack track;
    std::size_t missed = 0;
  };
  std::vector<Active> active;
  std::vector<PartialTrack> finished;

  // Least-squares line through the last few points, so a peak pulled by a
  // neighbour does not derail the prediction.
  constexpr std::size_t kFitPoints = 6;
  auto predicted = [&](const PartialTrack& tr, std::size_t frame) {
    const std::size_t n = std::min(kFitPoints, tr.points.size());
    if (n < 2) return tr.points.back().frequency_hz;
    const auto first = tr.points.end() - static_cast<std::ptrdiff_t>(n);
    double mx = 0.0, my = 0.0;
    for (auto it = first; it != tr.points.end(); ++it) {
      mx += static_cast<double>(it->frame);
      my += it->frequency_hz;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (auto it = first; it != tr.points.end(); ++it) {
      const double dx = static_cast<double>(it->frame) - mx;
      sxy += dx * (it->frequency_hz - my);
      sxx += dx * dx;
    }
    return my + sxy / sxx * (static_cast<double>(frame) - mx);
  };

  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const auto& fp = peaks[t];
    struct Pair {
      bool young;  // tracks without a full velocity fit are matched last
      double dist;
      std::size_t track;
      std::size_t peak;
    };
    std::vector<Pair> pairs;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double pred = predicted(active[a].track, t);
      const double gap = static_cast<double>(t - active[a].track.points.back().frame);
      for (std::size_t p = 0; p < fp.size(); ++p) {
        const double d = std::abs(fp[p].frequency_hz - pred);
        if (d <= config.max_jump_hz * gap)
          pairs.push_back({active[a].track.points.size() < kFitPoints, d, a, p});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
      if (x.young != y.young) return y.young;
      if (x.dist != y.dist) return x.dist < y.dist;
      if (x.track != y.track) return x.track < y.track;
      return x.peak < y.peak;
    });
    std::vector<bool> track_used(active.size(), false), peak_used(fp.size(), false);
    for (const auto& pr : pairs) {
      if (track_used[pr.track] || peak_used[pr.peak]) continue;
      track_used[pr.track] = peak_used[pr.peak] = true;
      const auto& pk = fp[pr.peak];
      active[pr.track].track.points.push_back(
          {t, spec.frame_time_s[t], pk.frequency_hz, pk.level_db});
      active[pr.track].missed = 0;
    }
    std::vector<Active> next;
    next.reserve(active.size() + fp.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (!track_used[a] && ++active[a].missed > config.max_gap_frames) {
        finished.push_back(std::move(active[a].track));
      } else {
        next.push_back(std::move(active[a]));
      }
    }
    for (std::size_t p = 0; p < fp.size(); ++p) {
      if (peak_used[p]) continue;
      Active fresh;
      fresh.track.points.push_back({t, spec.frame_time_s[t], fp[p].frequency_hz, fp[p].level_db});
      next.push_back(std::move(fresh));
    }
    active = std::move(next);
  }
  for (auto& a : active) finished.push_back(std::move(a.track));

  std::vector<PartialTrack> kept;
  const double hop = spec.hop_s();
  for (auto& tr : finished) {
    const double duration = tr.end_s() - tr.start_s() + hop;
    if (duration + 1e-9 >= config.min_duration_s) kept.push_back(std::move(tr));
  }
  std::sort(kept.begin(), kept.end(), [](const PartialTrack& a, const PartialTrack& b) {
    if (a.points.front().frame != b.points.front().frame)
      return a.points.front().frame < b.points.front().frame;
    return a.points.front().frequency_hz < b.points.front().frequency_hz;
  });
  return kept;
}

std::optional<double> f0_at(const F0Trajectory& f0, double time_s) {
  if (f0.values.empty()) return std::nullopt;
  const double pos = (time_s - f0.offset_s) * f0.rate;
  if (pos < -0.5 || pos > static_cast<double>(f0.values.size()) - 0.5) return std::nullopt;
  const double clamped = std::clamp(pos, 0.0, static_cast<double>(f0.values.size() - 1));
  const auto i0 = static_cast<std::size_t>(clamped);
  const std::size_t i1 = std::min(i0 + 1, f0.values.size() - 1);
  const double frac = clamped - static_cast<double>(i0);
  const auto& a = f0.values[i0];
  const auto& b = f0.values[i1];
  if (a && b) return std::exp((1.0 - frac) * std::log(*a) + frac * std::log(*b));
  return frac < 0.5 ? a : b;
}

std::vector<PartialTrack> label_harmonics(std::vector<PartialTrack> tracks,
                                          const F0Trajectory& f0,
                                          double tolerance_cents) {
  for (auto& tr : tracks) {
    std::vector<double> ratios;
    tr.frames_without_f0 = 0;
    for (const auto& p : tr.points) {
      const auto f = f0_at(f0, p.time_s);
      if (!f) {
        ++tr.frames_without_f0;
        continue;
      }
      ratios.push_back(p.frequency_hz / *f);
    }
    tr.harmonic_index.reset();
    tr.inharmonicity_cents = 0.0;
    tr.harmonic_ratio = 0.0;
    if (ratios.empty()) continue;
    const double r = median_of(std::move(ratios));
    tr.harmonic_ratio = r;
    // Nearest multiple in cents: the boundary is the geometric midpoint.
    const double lo = std::max(1.0, std::floor(r));
    const double n = r > std::sqrt(lo * (lo + 1.0)) ? lo + 1.0 : lo;
    const double dev = cents_between(r, n);
    tr.inharmonicity_cents = dev;
    if (std::abs(dev) <= tolerance_cents) tr.harmonic_index = static_cast<int>(n);
  }
  return tracks;
}

F0Trajectory estimate_f0(const Spectrogram& spec, const F0EstimatorConfig& config,
                         double peak_floor_db) {
  F0Trajectory out;
  out.rate = 1.0 / spec.hop_s();
  out.offset_s = spec.frame_time_s.empty() ? 0.0 : spec.frame_time_s.front();
  out.values.resize(spec.frames());

  std::vector<double> candidates;
  for (double c = config.min_hz; c <= config.max_hz * (1.0 + 1e-12);
       c *= std::exp2(config.step_cents / 1200.0))
    candidates.push_back(c);
  const double match_ratio = std::exp2(config.match_cents / 1200.0);

  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const auto all = pick_peaks(spec.magnitudes_db[t], spec.bin_spacing_hz(), peak_floor_db);
    if (all.empty()) continue;
    double max_db = -std::numeric_limits<double>::infinity();
    for (const auto& p : all) max_db = std::max(max_db, p.level_db);
    if (max_db < config.voicing_floor_db) continue;
    std::vector<SpectralPeak> strong;
    for (const auto& p : all)
      if (p.level_db >= max_db - config.strong_range_db && p.frequency_hz > 0.0)
        strong.push_back(p);
    std::vector<double> power(strong.size()), amp(strong.size());
    double total_power = 0.0;
    for (std::size_t i = 0; i < strong.size(); ++i) {
      amp[i] = std::pow(10.0, (strong[i].level_db - max_db) / 20.0);
      power[i] = amp[i] * amp[i];
      total_power += power[i];
    }

    double best_score = -1.0;
    double best_c = 0.0;
    for (double c : candidates) {
      double explained = 0.0;
      for (std::size_t i = 0; i < strong.size(); ++i) {
        const double n = std::round(strong[i].frequency_hz / c);
        if (n < 1.0) continue;
        const double r = strong[i].frequency_hz / (n * c);
        if (r <= match_ratio && r >= 1.0 / match_ratio) explained += power[i];
      }
      if (explained < config.sieve_fraction * total_power) continue;
      double score = 0.0;
      double weight = 1.0;
      for (int h = 1; h <= config.shs_harmonics; ++h, weight *= config.shs_decay) {
        if (const SpectralPeak* p = nearest_peak(strong, h * c, config.match_cents)) {
          score += weight * std::sqrt(std::pow(10.0, (p->level_db - max_db) / 20.0));
        }
      }
      if (score > best_score) {
        best_score = score;
        best_c = c;
      }
    }
    if (best_score <= 0.0) continue;

    // Least-squares refinement over the partials matched to the winner.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < strong.size(); ++i) {
      const double n = std::round(strong[i].frequency_hz / best_c);
      if (n < 1.0) continue;
      const double r = strong[i].frequency_hz / (n * best_c);
      if (r > match_ratio || r < 1.0 / match_ratio) continue;
      num += amp[i] * n * strong[i].frequency_hz;
      den += amp[i] * n * n;
    }
    const double f0 = den > 0.0 ? num / den : best_c;
    if (f0 > config.min_hz * 0.9 && f0 < config.max_hz * 1.1) out.values[t] = f0;
  }
  return out;
}

std::vector<std::vector<double>> measure_harmonics(const Spectrogram& spec,
                                                   const F0Trajectory& f0,
                                                   std::size_t harmonics,
                                                   double tolerance_cents,
                                                   double peak_floor_db) {
  std::vector<std::vector<double>> out(spec.frames(),
                                       std::vector<double>(harmonics, kFloorDb));
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const auto f = f0_at(f0, spec.frame_time_s[t]);
    if (!f) continue;
    const auto peaks = pick_peaks(spec.magnitudes_db[t], spec.bin_spacing_hz(), peak_floor_db);
    for (std::size_t k = 1; k <= harmonics; ++k) {
      if (const SpectralPeak* p = nearest_peak(peaks, static_cast<double>(k) * *f, tolerance_cents))
        out[t][k - 1] = p->level_db;
    }
  }
  return out;
}

}  // namespace hctone
