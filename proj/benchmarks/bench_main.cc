#include <benchmark/benchmark.h>

#include "hctone/analysis_report.h"
#include "hctone/harmonic_model.h"
#include "hctone/iso226.h"
#include "hctone/presets.h"
#include "hctone/spectrogram.h"
#include "hctone/synth.h"

namespace {

void BM_Softmax(benchmark::State& state) {
  std::vector<double> frame(static_cast<std::size_t>(state.range(0)));
  for (std::size_t k = 0; k < frame.size(); ++k) frame[k] = -6.0 * static_cast<double>(k % 7);
  for (auto _ : state) benchmark::DoNotOptimize(hctone::harmonic_variation_transform(frame, 0.5));
}
BENCHMARK(BM_Softmax)->Arg(16)->Arg(64);

void BM_RenderPreset(benchmark::State& state) {
  hctone::PresetSpec spec = hctone::find_preset("wandering-favorite")->defaults;
  spec.duration_s = static_cast<double>(state.range(0));
  const auto pr = hctone::build_preset(spec);
  hctone::SynthParams params;
  params.harmonic_variation = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(hctone::sonify(pr.controls, params));
  state.SetItemsProcessed(state.iterations() * state.range(0) * params.sample_rate);
}
BENCHMARK(BM_RenderPreset)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

hctone::AudioBuffer test_audio(double seconds) {
  const auto pr = hctone::build_preset([&] {
    auto spec = hctone::find_preset("sawtooth")->defaults;
    spec.duration_s = seconds;
    return spec;
  }());
  return hctone::sonify(pr.controls, {}).audio;
}

void BM_Stft(benchmark::State& state) {
  const auto audio = test_audio(4.0);
  hctone::StftConfig cfg;
  cfg.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hctone::stft(audio, cfg));
}
BENCHMARK(BM_Stft)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Analyze(benchmark::State& state) {
  const auto audio = test_audio(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(hctone::analyze_audio(audio));
}
BENCHMARK(BM_Analyze)->Unit(benchmark::kMillisecond);

void BM_WeightLookup(benchmark::State& state) {
  const auto w = hctone::weighting_for(60.0);
  double f = 20.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(w->weight_db(f));
    f = f > 12000.0 ? 20.0 : f * 1.01;
  }
}
BENCHMARK(BM_WeightLookup);

}  // namespace
BENCHMARK_MAIN();
