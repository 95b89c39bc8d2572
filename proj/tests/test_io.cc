#include <cstring>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hctone/control_json.h"
#include "hctone/error.h"
#include "hctone/hash.h"
#include "hctone/io.h"
#include "hctone/scene.h"
#include "hctone/wav.h"
#include "support.h"

namespace hctone {
namespace {

ErrorCode code_of(const std::function<void()>& f, std::string* field = nullptr,
                  std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (field) *field = e.field();
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIo;
}

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

// Minimal RIFF/WAVE stream with a plain fmt chunk.
std::vector<std::uint8_t> wav_bytes(std::uint16_t format, std::uint16_t channels,
                                    std::uint16_t bits, const std::vector<std::uint8_t>& data,
                                    std::uint32_t rate = 48000) {
  std::vector<std::uint8_t> b = {'R', 'I', 'F', 'F'};
  put32(b, static_cast<std::uint32_t>(36 + data.size()));
  for (char c : std::string("WAVEfmt ")) b.push_back(static_cast<std::uint8_t>(c));
  put32(b, 16);
  put16(b, format);
  put16(b, channels);
  put32(b, rate);
  put32(b, rate * channels * bits / 8);
  put16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put16(b, bits);
  for (char c : std::string("data")) b.push_back(static_cast<std::uint8_t>(c));
  put32(b, static_cast<std::uint32_t>(data.size()));
  b.insert(b.end(), data.begin(), data.end());
  return b;
}

TEST(Hash, KnownVector) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(std::string_view("")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Wav, Float32RoundTripIsExactForFloatValues) {
  AudioBuffer a = test::sine(440.0, 0.1, 0.5, 44100);
  for (auto& v : a.samples) v = static_cast<float>(v);
  const auto b = decode_wav(encode_wav(a, WavFormat::kFloat32));
  EXPECT_EQ(b.sample_rate, 44100);
  EXPECT_EQ(b.samples, a.samples);
}

TEST(Wav, Pcm16WithinDitherOfInput) {
  const AudioBuffer a = test::sine(440.0, 0.1);
  const auto b = decode_wav(encode_wav(a, WavFormat::kPcm16, 3));
  ASSERT_EQ(b.samples.size(), a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    ASSERT_NEAR(b.samples[i], a.samples[i], 2.0 / 32768.0);
}

TEST(Wav, Pcm16DitherIsSeeded) {
  const AudioBuffer a = test::sine(440.0, 0.1);
  EXPECT_EQ(encode_wav(a, WavFormat::kPcm16, 9), encode_wav(a, WavFormat::kPcm16, 9));
  EXPECT_NE(encode_wav(a, WavFormat::kPcm16, 9), encode_wav(a, WavFormat::kPcm16, 10));
}

TEST(Wav, DecodesOtherPcmWidths) {
  // One sample at half scale in each width.
  EXPECT_NEAR(decode_wav(wav_bytes(1, 1, 8, {192})).samples.at(0), 0.5, 1e-12);
  EXPECT_NEAR(decode_wav(wav_bytes(1, 1, 24, {0x00, 0x00, 0x40})).samples.at(0), 0.5, 1e-12);
  EXPECT_NEAR(decode_wav(wav_bytes(1, 1, 32, {0, 0, 0, 0x40})).samples.at(0), 0.5, 1e-12);
  double d = -0.25;
  std::vector<std::uint8_t> raw(8);
  std::memcpy(raw.data(), &d, 8);
  EXPECT_EQ(decode_wav(wav_bytes(3, 1, 64, raw)).samples.at(0), -0.25);
}

TEST(Wav, RejectsStereo) {
  EXPECT_EQ(code_of([] { decode_wav(wav_bytes(1, 2, 16, {0, 0, 0, 0})); }),
            ErrorCode::kUnsupportedFormat);
}

TEST(Wav, RejectsTruncatedStreams) {
  const auto good = encode_wav(test::sine(440.0, 0.01), WavFormat::kFloat32);
  for (std::size_t keep : {std::size_t{0}, std::size_t{11}, std::size_t{30}, good.size() - 3}) {
    const std::vector<std::uint8_t> cut(good.begin(), good.begin() + static_cast<long>(keep));
    EXPECT_EQ(code_of([&] { decode_wav(cut); }), ErrorCode::kInvalidInput) << keep;
  }
  std::vector<std::uint8_t> junk(100, 'x');
  EXPECT_EQ(code_of([&] { decode_wav(junk); }), ErrorCode::kInvalidInput);
}

TEST(Wav, FormatNames) {
  EXPECT_EQ(parse_wav_format("pcm16"), WavFormat::kPcm16);
  EXPECT_STREQ(wav_format_name(WavFormat::kFloat32), "float32");
  EXPECT_THROW(parse_wav_format("mp3"), Error);
}

TEST(Io, AtomicWriteAndMissingRead) {
  const auto dir = std::filesystem::temp_directory_path() / "hctone_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "x.txt";
  write_text_atomically(path, "hello");
  EXPECT_EQ(read_text_file(path), "hello");
  EXPECT_FALSE(std::filesystem::exists(dir / "x.txt.partial"));
  std::filesystem::remove_all(dir);
  EXPECT_EQ(code_of([&] { read_file(path); }), ErrorCode::kInvalidInput);
}

Controls sample_controls() {
  Controls c;
  c.f0 = test::constant_f0(110.0, 4);
  c.f0.values[2].reset();
  c.frames = test::constant_frames({0.0, -6.5, -120.0}, 4);
  return c;
}

TEST(ControlJson, RoundTrip) {
  const Controls c = sample_controls();
  const Controls back = controls_from_json(controls_to_json(c));
  EXPECT_EQ(back.f0.values, c.f0.values);
  EXPECT_EQ(back.f0.rate, c.f0.rate);
  EXPECT_EQ(back.frames.frames, c.frames.frames);
  EXPECT_EQ(controls_to_json(back, 2), controls_to_json(c, 2));
}

TEST(ControlJson, Errors) {
  const auto good = nlohmann::json::parse(controls_to_json(sample_controls()));
  std::string field, msg;

  EXPECT_EQ(code_of([] { controls_from_json("{\"a\": "); }, &field, &msg), ErrorCode::kInvalidInput);
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;

  auto j = good;
  j["schema_version"] = 99;
  EXPECT_EQ(code_of([&] { controls_from_json(j.dump()); }), ErrorCode::kInvalidInput);

  j = good;
  j["frames"][1] = {0.0, -1.0};
  EXPECT_EQ(code_of([&] { controls_from_json(j.dump()); }, &field), ErrorCode::kInvalidFrame);
  EXPECT_EQ(field, "frames/1");

  j = good;
  j["frames"][1][0] = "loud";
  EXPECT_EQ(code_of([&] { controls_from_json(j.dump()); }), ErrorCode::kInvalidInput);
}

TEST(Scene, PresetByName) {
  const Scene s = parse_scene(R"({"schema_version": 1, "preset": "odd-weak-fundamental"})");
  ASSERT_TRUE(s.preset.has_value());
  EXPECT_EQ(s.preset->name, "odd-weak-fundamental");
  EXPECT_FALSE(s.controls.has_value());
}

TEST(Scene, ParamOverridesAndOutput) {
  const Scene s = parse_scene(R"({"schema_version": 1,
    "preset": {"name": "wandering-favorite", "seed": 7, "duration_s": 2},
    "params": {"harmonic_variation": 0.25},
    "output": {"wav": "a.wav", "format": "pcm16"}})");
  EXPECT_EQ(s.preset->seed, 7u);
  EXPECT_EQ(s.params.harmonic_variation, 0.25);
  EXPECT_EQ(s.format, WavFormat::kPcm16);
  EXPECT_EQ(s.wav_path, std::filesystem::path("a.wav"));
}

TEST(Scene, SyntaxErrorsCarryLocation) {
  std::string msg;
  EXPECT_EQ(code_of([] { parse_scene("{\n  \"preset\": \"sawtooth\",\n  oops\n}"); }, nullptr, &msg),
            ErrorCode::kInvalidInput);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Scene, FieldErrorsCarryPath) {
  std::string field;
  EXPECT_EQ(code_of([] { parse_scene(R"({"schema_version": 1, "preset": "sawtooth", "params": {"harmonic_variation": 0}})"); },
                    &field),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(field, "params.harmonic_variation");
  EXPECT_EQ(code_of([] { parse_scene(R"({"schema_version": 1, "preset": "no-such"})"); }, &field),
            ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { parse_scene(R"({"schema_version": 1})"); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { parse_scene(R"({"schema_version": 1, "preset": "sawtooth", "params": {"volume": 1}})"); }),
            ErrorCode::kInvalidInput);
}

TEST(Scene, RenderIsDeterministic) {
  Scene s = preset_scene("wandering-favorite");
  s.preset->duration_s = 2.0;
  const auto a = render_scene(s);
  const auto b = render_scene(s);
  EXPECT_EQ(a.wav, b.wav);
  EXPECT_EQ(a.manifest, b.manifest);
  EXPECT_EQ(a.wav_sha256, sha256_hex(a.wav));
  const auto m = nlohmann::json::parse(a.manifest);
  EXPECT_EQ(m["wav_sha256"], a.wav_sha256);
  EXPECT_EQ(m["controls_sha256"], sha256_hex(controls_to_json(a.controls)));
}

TEST(Scene, SeedChangesWanderingRender) {
  Scene s = preset_scene("wandering-favorite");
  s.preset->duration_s = 4.0;
  const auto a = render_scene(s);
  s.preset->seed = 1;
  EXPECT_NE(render_scene(s).wav_sha256, a.wav_sha256);
}

TEST(Scene, ControlsSceneRenders) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["controls"] = nlohmann::json::parse(controls_to_json(sample_controls()));
  const Scene s = parse_scene(j.dump());
  ASSERT_TRUE(s.controls.has_value());
  const auto r = render_scene(s);
  EXPECT_EQ(r.result.audio.samples.size(), 48000u * 4 / 100);
}

TEST(Scene, JsonReparsesToSameRender) {
  Scene s = preset_scene("odd-weak-fundamental");
  s.preset->duration_s = 1.0;
  const Scene again = parse_scene(scene_json(s));
  EXPECT_EQ(render_scene(again).wav_sha256, render_scene(s).wav_sha256);
}

}  // namespace
}  // namespace hctone
