#ifndef HCTONE_SPECTROGRAM_H_
#define HCTONE_SPECTROGRAM_H_

#include <optional>
#include <string>
#include <vector>

#include "hctone/audio.h"

namespace hctone {

// Magnitude floor of spectrogram cells; digital silence maps here.
inline constexpr double kSpectrumFloorDb = -160.0;

enum class WindowKind { kHann, kHamming, kBlackman, kRectangular };

WindowKind parse_window_kind(const std::string& name);
const char* window_kind_name(WindowKind kind);
std::vector<double> make_window(WindowKind kind, std::size_t size);

struct StftConfig {
  std::size_t window_size = 4096;  // power of two
  std::size_t hop = 512;           // samples, <= window_size
  WindowKind window = WindowKind::kHann;
  unsigned threads = 1;            // frames are computed in parallel
};

// Time x frequency magnitudes in dB re full scale: a full-scale sinusoid
// centred on a bin reads 0 dB. Frame t covers samples
// [t * hop, t * hop + window_size) and is stamped at its centre.
struct Spectrogram {
  int sample_rate = 48000;
  std::size_t window_size = 0;
  std::size_t hop = 0;
  WindowKind window = WindowKind::kHann;
  std::optional<double> weighting_phon;  // set once equal-loudness weighted
  std::vector<double> frame_time_s;
  std::vector<double> bin_hz;
  std::vector<std::vector<double>> magnitudes_db;

  double hop_s() const { return static_cast<double>(hop) / sample_rate; }
  double bin_spacing_hz() const {
    return static_cast<double>(sample_rate) / static_cast<double>(window_size);
  }
  std::size_t frames() const { return magnitudes_db.size(); }
};

// Audio shorter than one window yields a single zero-padded frame.
Spectrogram stft(const AudioBuffer& audio, const StftConfig& config = {});

// Adds the equal-loudness weight of each bin's frequency to every frame.
Spectrogram apply_equal_loudness(const Spectrogram& spectrogram, double phon_level);

}  // namespace hctone

#endif  // HCTONE_SPECTROGRAM_H_
