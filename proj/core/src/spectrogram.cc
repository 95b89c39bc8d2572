#include "hctone/spectrogram.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "hctone/error.h"
#include "hctone/fft.h"
#include "hctone/iso226.h"

namespace hctone {

WindowKind parse_window_kind(const std::string& name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "blackman") return WindowKind::kBlackman;
  if (name == "rect" || name == "rectangular") return WindowKind::kRectangular;
  throw Error(ErrorCode::kInvalidParameter, "unknown window '" + name + "'", "window");
}

const char* window_kind_name(WindowKind kind) {
  switch (kind) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kBlackman: return "blackman";
    case WindowKind::kRectangular: return "rectangular";
  }
  return "hann";
}

// Periodic (DFT-even) tapers.
std::vector<double> make_window(WindowKind kind, std::size_t size) {
  std::vector<double> w(size, 1.0);
  const double n = static_cast<double>(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
    switch (kind) {
      case WindowKind::kHann: w[i] = 0.5 - 0.5 * std::cos(x); break;
      case WindowKind::kHamming: w[i] = 0.54 - 0.46 * std::cos(x); break;
      case WindowKind::kBlackman:
        w[i] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
        break;
      case WindowKind::kRectangular: break;
    }
  }
  return w;
}

Spectrogram stft(const AudioBuffer& audio, const StftConfig& config) {
  const std::size_t w = config.window_size;
  if (w < 2 || (w & (w - 1)) != 0)
    throw Error(ErrorCode::kInvalidParameter, "window size must be a power of two", "window");
  if (config.hop == 0 || config.hop > w)
    throw Error(ErrorCode::kInvalidParameter, "hop must be in [1, window size]", "hop");

  Spectrogram spec;
  spec.sample_rate = audio.sample_rate;
  spec.window_size = w;
  spec.hop = config.hop;
  spec.window = config.window;
  const std::size_t n = audio.samples.size();
  const std::size_t frames = n <= w ? 1 : 1 + (n - w + config.hop - 1) / config.hop;
  spec.frame_time_s.resize(frames);
  for (std::size_t t = 0; t < frames; ++t)
    spec.frame_time_s[t] =
        static_cast<double>(t * config.hop + w / 2) / audio.sample_rate;
  const std::size_t bins = w / 2 + 1;
  spec.bin_hz.resize(bins);
  for (std::size_t k = 0; k < bins; ++k)
    spec.bin_hz[k] = static_cast<double>(k) * audio.sample_rate / static_cast<double>(w);
  spec.magnitudes_db.assign(frames, std::vector<double>(bins, kSpectrumFloorDb));

  const auto window = make_window(config.window, w);
  double window_sum = 0.0;
  for (double v : window) window_sum += v;
  const double scale = 2.0 / window_sum;
  const RealFft fft(w);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> buf(w);
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t start = t * config.hop;
      for (std::size_t i = 0; i < w; ++i) {
        const std::size_t s = start + i;
        buf[i] = s < n ? audio.samples[s] * window[i] : 0.0;
      }
      const auto X = fft.forward(buf);
      auto& row = spec.magnitudes_db[t];
      for (std::size_t k = 0; k < bins; ++k) {
        const double mag = std::abs(X[k]) * scale;
        row[k] = mag > 0.0 ? std::max(20.0 * std::log10(mag), kSpectrumFloorDb)
                           : kSpectrumFloorDb;
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads,
                                                           static_cast<unsigned>(frames)));
  if (threads == 1) {
    work(0, frames);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (frames + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
      const std::size_t b = i * chunk;
      const std::size_t e = std::min(frames, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return spec;
}

Spectrogram apply_equal_loudness(const Spectrogram& spectrogram, double phon_level) {
  const auto w = weighting_for(phon_level);
  std::vector<double> weights(spectrogram.bin_hz.size());
  for (std::size_t k = 0; k < weights.size(); ++k)
    weights[k] = w->weight_db(spectrogram.bin_hz[k]);
  Spectrogram out = spectrogram;
  out.weighting_phon = phon_level;
  for (auto& row : out.magnitudes_db)
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += weights[k];
  return out;
}

}  // namespace hctone
