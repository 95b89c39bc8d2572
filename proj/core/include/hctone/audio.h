#ifndef HCTONE_AUDIO_H_
#define HCTONE_AUDIO_H_

#include <vector>

namespace hctone {

// Mono audio. Samples are nominally in [-1, 1].
struct AudioBuffer {
  int sample_rate = 48000;
  std::vector<double> samples;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

double peak_abs(const AudioBuffer& audio);

}  // namespace hctone

#endif  // HCTONE_AUDIO_H_
