// hctone: render harmonic complex tones, analyze them, and serve both over HTTP.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hctone/analysis_report.h"
#include "hctone/control_json.h"
#include "hctone/error.h"
#include "hctone/io.h"
#include "hctone/iso226.h"
#include "hctone/presets.h"
#include "hctone/scene.h"
#include "hctone/service.h"
#include "hctone/wav.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEnvironment = 3;

int exit_code_for(const hctone::Error& e) {
  return e.code() == hctone::ErrorCode::kIo ? kExitEnvironment : kExitInput;
}

void report(const hctone::Error& e) {
  std::cerr << "hctone: error: " << e.what();
  if (!e.field().empty()) std::cerr << " (at " << e.field() << ")";
  std::cerr << "\n";
}

// Writes every output or none: files already written are removed when a
// later one fails.
void write_outputs(const std::vector<std::pair<fs::path, std::string>>& outputs) {
  std::vector<fs::path> done;
  try {
    for (const auto& [path, data] : outputs) {
      hctone::write_text_atomically(path, data);
      done.push_back(path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : done) fs::remove(p, ec);
    throw;
  }
}

std::string bytes_to_string(const std::vector<std::uint8_t>& b) {
  return std::string(b.begin(), b.end());
}

struct AnalysisOptions {
  double phon = 60.0;
  std::size_t window = 4096;
  std::size_t hop = 512;
  std::string window_kind = "hann";
  unsigned threads = 1;
  bool spectrogram = false;
  bool quantize = true;
};

void add_analysis_options(CLI::App* cmd, AnalysisOptions& o) {
  cmd->add_option("--phon", o.phon, "Equal-loudness reference level")
      ->check(CLI::Range(20.0, 80.0))
      ->capture_default_str();
  cmd->add_option("--window", o.window, "STFT window size (power of two)")->capture_default_str();
  cmd->add_option("--hop", o.hop, "STFT hop in samples")->capture_default_str();
  cmd->add_option("--taper", o.window_kind, "Window taper: hann, hamming, blackman, rect")
      ->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads for the STFT")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();
  cmd->add_flag("--spectrogram", o.spectrogram, "Embed weighted magnitudes in the JSON");
  cmd->add_flag("!--no-quantize", o.quantize, "Keep transcribed pitches unquantized");
}

hctone::AnalysisConfig analysis_config(const AnalysisOptions& o) {
  if (o.window < 64 || (o.window & (o.window - 1)) != 0)
    throw hctone::Error(hctone::ErrorCode::kInvalidParameter,
                        "window must be a power of two >= 64", "--window");
  if (o.hop < 1 || o.hop > o.window)
    throw hctone::Error(hctone::ErrorCode::kInvalidParameter,
                        "hop must be in [1, window]", "--hop");
  hctone::AnalysisConfig cfg;
  cfg.phon_level = o.phon;
  cfg.stft.window_size = o.window;
  cfg.stft.hop = o.hop;
  cfg.stft.window = hctone::parse_window_kind(o.window_kind);
  cfg.stft.threads = o.threads;
  cfg.include_spectrogram = o.spectrogram;
  cfg.quantize = o.quantize;
  return cfg;
}

struct RenderOptions {
  std::string scene;
  std::string preset;
  std::string out;
  std::string manifest;
  std::string analysis;
  std::optional<std::uint64_t> seed;
  std::string format;
  std::optional<double> duration;
  AnalysisOptions analysis_options;
};

int cmd_render(const RenderOptions& o) {
  hctone::Scene scene =
      o.scene.empty() ? hctone::preset_scene(o.preset) : hctone::load_scene(o.scene);
  if (o.seed) {
    scene.params.seed = *o.seed;
    if (scene.preset) scene.preset->seed = *o.seed;
  }
  if (!o.format.empty()) scene.format = hctone::parse_wav_format(o.format);
  if (o.duration) {
    if (!scene.preset)
      throw hctone::Error(hctone::ErrorCode::kInvalidInput,
                          "--duration applies to preset scenes only", "--duration");
    if (!(*o.duration > 0.0))
      throw hctone::Error(hctone::ErrorCode::kInvalidParameter, "must be > 0", "--duration");
    scene.preset->duration_s = *o.duration;
  }
  fs::path wav_path;
  if (!o.out.empty()) {
    wav_path = o.out;
  } else if (scene.wav_path) {
    wav_path = fs::path(o.scene).parent_path() / *scene.wav_path;
  } else {
    throw hctone::Error(hctone::ErrorCode::kInvalidInput,
                        "no output path: pass --out or set output.wav in the scene", "--out");
  }
  fs::path manifest_path;
  if (!o.manifest.empty()) {
    manifest_path = o.manifest;
  } else if (scene.manifest_path && o.out.empty()) {
    manifest_path = fs::path(o.scene).parent_path() / *scene.manifest_path;
  } else {
    manifest_path = fs::path(wav_path).replace_extension(".manifest.json");
  }

  const hctone::SceneRender render = hctone::render_scene(scene);
  std::vector<std::pair<fs::path, std::string>> outputs = {
      {wav_path, bytes_to_string(render.wav)}, {manifest_path, render.manifest + "\n"}};
  if (!o.analysis.empty()) {
    const auto report = hctone::analyze_audio(
        render.result.audio, analysis_config(o.analysis_options), &render.controls.f0);
    outputs.emplace_back(o.analysis, hctone::analysis_to_json(report, 2) + "\n");
  }
  write_outputs(outputs);
  std::cout << wav_path.string() << " sha256=" << render.wav_sha256 << "\n";
  return kExitOk;
}

struct AnalyzeOptions {
  std::string input;
  std::string out;
  std::string image;
  std::string controls;
  bool overlay = false;
  double image_max_hz = 2000.0;
  AnalysisOptions analysis;
};

int cmd_analyze(const AnalyzeOptions& o) {
  const hctone::AudioBuffer audio = hctone::read_wav(o.input);
  const hctone::AnalysisConfig cfg = analysis_config(o.analysis);
  std::optional<hctone::Controls> controls;
  if (!o.controls.empty()) {
    try {
      controls = hctone::controls_from_json(hctone::read_text_file(o.controls));
    } catch (const hctone::Error& e) {
      throw hctone::Error(e.code(), o.controls + ": " + e.what(), e.field());
    }
  }
  const auto report = hctone::analyze_audio(audio, cfg, controls ? &controls->f0 : nullptr);
  const std::string json = hctone::analysis_to_json(report, 2) + "\n";
  std::vector<std::pair<fs::path, std::string>> outputs;
  if (!o.out.empty()) outputs.emplace_back(o.out, json);
  if (!o.image.empty())
    outputs.emplace_back(o.image, bytes_to_string(hctone::spectrogram_ppm(
                                      report.weighted, o.overlay ? &report.lines : nullptr,
                                      o.image_max_hz)));
  write_outputs(outputs);
  if (o.out.empty()) std::cout << json;
  return kExitOk;
}

struct ServeOptions {
  hctone::ServiceConfig config;
};

int cmd_serve(const ServeOptions& o) {
  // Signals are taken by a dedicated thread so shutdown runs outside a
  // signal handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  hctone::Service service(o.config);
  if (!service.bind()) {
    std::cerr << "hctone: error: cannot bind " << o.config.host << ":" << o.config.port << "\n";
    return kExitEnvironment;
  }
  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    service.stop();
  });
  std::cout << "hctone listening on http://" << o.config.host << ":" << service.port()
            << std::endl;
  service.run();
  // Unblock the waiter if the server stopped for another reason.
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << "hctone stopped" << std::endl;
  return kExitOk;
}

int cmd_iso_tables(bool json) {
  const auto& t = hctone::active_iso_tables();
  if (json) {
    std::cout << hctone::iso_tables_json(t) << "\n";
    return kExitOk;
  }
  std::cout << t.version << "  sha256 " << t.checksum() << "\n";
  std::cout << "    f_Hz   alpha_f    L_U    T_f\n";
  char line[80];
  for (std::size_t i = 0; i < hctone::kIsoAnchors; ++i) {
    std::snprintf(line, sizeof line, "%8.1f  %7.3f  %6.1f  %5.1f\n", t.frequency_hz[i],
                  t.alpha_f[i], t.l_u[i], t.t_f[i]);
    std::cout << line;
  }
  return kExitOk;
}

int cmd_presets(const std::string& dump, const std::string& out) {
  if (dump.empty()) {
    std::cout << hctone::preset_catalog_json(2) << "\n";
    return kExitOk;
  }
  const hctone::PresetInfo* info = hctone::find_preset(dump);
  if (!info)
    throw hctone::Error(hctone::ErrorCode::kInvalidInput, "unknown preset '" + dump + "'",
                        "--dump");
  const auto pr = hctone::build_preset(info->defaults);
  const std::string text = hctone::controls_to_json(pr.controls) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_outputs({{out, text}});
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic complex tone synthesis and multi-pitch analysis"};
  app.set_version_flag("--version", HCTONE_VERSION_STRING);
  app.require_subcommand(1);

  RenderOptions render;
  auto* render_cmd = app.add_subcommand("render", "Render a scene or preset to WAV");
  auto* scene_opt = render_cmd->add_option("--scene", render.scene, "Scene JSON file");
  auto* preset_opt = render_cmd->add_option("--preset", render.preset, "Registered preset name");
  scene_opt->excludes(preset_opt);
  render_cmd->add_option("--out", render.out, "Output WAV path");
  render_cmd->add_option("--manifest", render.manifest,
                         "Manifest path (default: <out>.manifest.json)");
  render_cmd->add_option("--analysis", render.analysis, "Also write analysis JSON here");
  render_cmd->add_option("--seed", render.seed, "Seed for preset generators and dither");
  render_cmd->add_option("--format", render.format, "float32 or pcm16");
  render_cmd->add_option("--duration", render.duration, "Preset duration in seconds");
  add_analysis_options(render_cmd, render.analysis_options);

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a mono WAV file");
  analyze_cmd->add_option("input", analyze.input, "WAV file")->required();
  analyze_cmd->add_option("--out", analyze.out, "Analysis JSON path (default: stdout)");
  analyze_cmd->add_option("--image", analyze.image, "Weighted spectrogram PPM path");
  analyze_cmd->add_option("--image-max-hz", analyze.image_max_hz, "Top of the image")
      ->capture_default_str();
  analyze_cmd->add_flag("--overlay", analyze.overlay, "Draw melodic lines on the image");
  analyze_cmd->add_option("--controls", analyze.controls,
                          "Control JSON whose f0 replaces estimation");
  add_analysis_options(analyze_cmd, analyze.analysis);

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", serve.config.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve.config.port, "Port (0 picks a free one)")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  serve_cmd->add_option("--workers", serve.config.workers, "Worker threads (0: one per core)")
      ->capture_default_str();
  serve_cmd->add_option("--max-duration", serve.config.max_duration_s,
                        "Longest scene a request may render, in seconds")
      ->capture_default_str();
  serve_cmd->add_option("--cors-origin", serve.config.cors_origin, "Allowed UI origin")
      ->capture_default_str();

  bool iso_json = false;
  auto* iso_cmd = app.add_subcommand("iso-tables", "Print the active ISO 226 constant tables");
  iso_cmd->add_flag("--json", iso_json, "Print the JSON asset form");

  std::string dump, dump_out;
  auto* presets_cmd = app.add_subcommand("presets", "Print the preset catalog");
  presets_cmd->add_option("--dump", dump, "Print this preset's control data instead");
  presets_cmd->add_option("--out", dump_out, "Write the control data here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*render_cmd) {
      if (render.scene.empty() && render.preset.empty()) {
        std::cerr << "hctone: error: render needs --scene or --preset\n";
        return kExitInput;
      }
      return cmd_render(render);
    }
    if (*analyze_cmd) return cmd_analyze(analyze);
    if (*serve_cmd) return cmd_serve(serve);
    if (*iso_cmd) return cmd_iso_tables(iso_json);
    if (*presets_cmd) return cmd_presets(dump, dump_out);
  } catch (const hctone::Error& e) {
    report(e);
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "hctone: error: " << e.what() << "\n";
    return kExitEnvironment;
  }
  return kExitInput;
}
