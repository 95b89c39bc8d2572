#ifndef HCTONE_CONTROL_JSON_H_
#define HCTONE_CONTROL_JSON_H_

#include <string>
#include <string_view>

#include "hctone/harmonic_model.h"

namespace hctone {

inline constexpr int kSchemaVersion = 1;

// Paired control data sharing one frame rate; the interchange document is
//
//   {"schema_version": 1, "rate": 100, "K": 9,
//    "f0": [110.0, null, ...], "frames": [[0.0, -6.02, ...], ...]}
//
// with rests as null and log-magnitudes in dB.
struct Controls {
  F0Trajectory f0;
  HarmonicFrameSequence frames;

  // Both sequences valid, same rate and same length.
  void validate() const;
};

std::string controls_to_json(const Controls& controls, int indent = -1);
// Throws Error(kInvalidInput) with the offending field path.
Controls controls_from_json(std::string_view text);

}  // namespace hctone

#endif  // HCTONE_CONTROL_JSON_H_
