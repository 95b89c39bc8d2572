#include "hctone/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "hctone/error.h"

namespace hctone {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteWriter {
 public:
  void tag(const char* t) { bytes_.insert(bytes_.end(), t, t + 4); }
  void u16(std::uint16_t v) {
    bytes_.push_back(static_cast<std::uint8_t>(v));
    bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

std::uint16_t rd16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t rd32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double peak_abs(const AudioBuffer& audio) {
  double peak = 0.0;
  for (double s : audio.samples) peak = std::max(peak, std::abs(s));
  return peak;
}

WavFormat parse_wav_format(const std::string& name) {
  if (name == "float32" || name == "f32") return WavFormat::kFloat32;
  if (name == "pcm16" || name == "s16") return WavFormat::kPcm16;
  throw Error(ErrorCode::kInvalidParameter, "unknown WAV format '" + name + "'",
              "format");
}

const char* wav_format_name(WavFormat format) {
  return format == WavFormat::kFloat32 ? "float32" : "pcm16";
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio, WavFormat format,
                                     std::uint64_t dither_seed) {
  const bool is_float = format == WavFormat::kFloat32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint16_t block_align = bits / 8;
  const auto frames = static_cast<std::uint32_t>(audio.samples.size());
  const std::uint32_t data_bytes = frames * block_align;
  const std::uint32_t fmt_bytes = is_float ? 18 : 16;
  const std::uint32_t fact_bytes = is_float ? 12 : 0;

  ByteWriter w;
  w.tag("RIFF");
  w.u32(4 + (8 + fmt_bytes) + fact_bytes + (8 + data_bytes) + (data_bytes & 1));
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(fmt_bytes);
  w.u16(is_float ? kFormatFloat : kFormatPcm);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(audio.sample_rate));
  w.u32(static_cast<std::uint32_t>(audio.sample_rate) * block_align);
  w.u16(block_align);
  w.u16(bits);
  if (is_float) {
    w.u16(0);  // cbSize
    w.tag("fact");
    w.u32(4);
    w.u32(frames);
  }
  w.tag("data");
  w.u32(data_bytes);
  if (is_float) {
    for (double s : audio.samples) w.f32(static_cast<float>(s));
  } else {
    std::mt19937_64 rng(dither_seed);
    for (double s : audio.samples) {
      // Triangular dither of +-1 LSB.
      const double tpdf = unit_uniform(rng) - unit_uniform(rng);
      const double scaled = std::round(s * 32767.0 + tpdf);
      w.u16(static_cast<std::uint16_t>(
          static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0))));
    }
  }
  if (data_bytes & 1) w.bytes().push_back(0);
  return std::move(w.bytes());
}

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::kInvalidInput, "not a RIFF/WAVE stream");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = rd32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size())
        throw Error(ErrorCode::kInvalidInput, "truncated fmt chunk");
      format = rd16(chunk + 8);
      channels = rd16(chunk + 10);
      sample_rate = rd32(chunk + 12);
      bits = rd16(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::kInvalidInput, "truncated extensible fmt chunk");
        format = rd16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::kInvalidInput, "data chunk before fmt chunk");
      data = chunk + 8;
      // Some writers leave the size field unset on streamed files.
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      if (size != 0xFFFFFFFFu && body + size > bytes.size())
        throw Error(ErrorCode::kInvalidInput, "truncated data chunk");
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw Error(ErrorCode::kInvalidInput, "missing fmt chunk");
  if (!data) throw Error(ErrorCode::kInvalidInput, "missing data chunk");
  if (channels != 1)
    throw Error(ErrorCode::kUnsupportedFormat,
                "only mono WAV is supported (got " + std::to_string(channels) + " channels)");
  if (sample_rate < 1000 || sample_rate > 384000)
    throw Error(ErrorCode::kUnsupportedFormat, "unsupported sample rate");

  AudioBuffer out;
  out.sample_rate = static_cast<int>(sample_rate);
  const std::size_t width = bits / 8;
  if (width == 0) throw Error(ErrorCode::kUnsupportedFormat, "unsupported bit depth");
  const std::size_t n = data_size / width;
  out.samples.resize(n);
  const std::uint8_t* p = data;
  if (format == kFormatFloat && bits == 32) {
    for (std::size_t i = 0; i < n; ++i, p += 4)
      out.samples[i] = std::bit_cast<float>(rd32(p));
  } else if (format == kFormatFloat && bits == 64) {
    for (std::size_t i = 0; i < n; ++i, p += 8) {
      const std::uint64_t v = rd32(p) | (static_cast<std::uint64_t>(rd32(p + 4)) << 32);
      out.samples[i] = std::bit_cast<double>(v);
    }
  } else if (format == kFormatPcm && bits == 8) {
    for (std::size_t i = 0; i < n; ++i, ++p) out.samples[i] = (p[0] - 128) / 128.0;
  } else if (format == kFormatPcm && bits == 16) {
    for (std::size_t i = 0; i < n; ++i, p += 2)
      out.samples[i] = static_cast<std::int16_t>(rd16(p)) / 32768.0;
  } else if (format == kFormatPcm && bits == 24) {
    for (std::size_t i = 0; i < n; ++i, p += 3) {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      out.samples[i] = v / 8388608.0;
    }
  } else if (format == kFormatPcm && bits == 32) {
    for (std::size_t i = 0; i < n; ++i, p += 4)
      out.samples[i] = static_cast<std::int32_t>(rd32(p)) / 2147483648.0;
  } else {
    throw Error(ErrorCode::kUnsupportedFormat,
                "unsupported WAV encoding (format " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits)");
  }
  for (double s : out.samples)
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidInput, "non-finite sample in WAV data");
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_wav(bytes);
}

}  // namespace hctone
