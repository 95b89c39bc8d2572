#ifndef HCTONE_WAV_H_
#define HCTONE_WAV_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hctone/audio.h"
#include "hctone/io.h"

namespace hctone {

enum class WavFormat { kFloat32, kPcm16 };

WavFormat parse_wav_format(const std::string& name);  // "float32" | "pcm16"
const char* wav_format_name(WavFormat format);

// Serializes mono audio as a RIFF/WAVE byte stream. kPcm16 applies TPDF dither
// drawn from a generator seeded with `dither_seed`, so output is reproducible.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio, WavFormat format,
                                     std::uint64_t dither_seed = 0);

// Accepts PCM 8/16/24/32-bit and IEEE float 32/64-bit, plain or
// WAVE_FORMAT_EXTENSIBLE. Only mono streams are supported; anything else
// throws Error(kUnsupportedFormat). Truncated or malformed data throws
// Error(kInvalidInput).
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

AudioBuffer read_wav(const std::filesystem::path& path);

}  // namespace hctone

#endif  // HCTONE_WAV_H_
