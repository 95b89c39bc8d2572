#include "hctone/iso226.h"

#include <cmath>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>

#include "hctone/error.h"
#include "hctone/fft.h"
#include "hctone/hash.h"
#include "hctone/io.h"
#include "json_fields.h"

namespace hctone {
namespace {

constexpr std::size_t kRefIndex = 17;  // 1000 Hz
constexpr double kPhonMin = 20.0;
constexpr double kPhonMax = 80.0;

// SHA-256 of IsoTables::canonical_text() for the embedded asset.
constexpr const char* kEmbeddedChecksum =
    "c85a8880aa42d305338222fb5445310f5b4a20919ddc1f3d0416309534b1b2a6";

IsoTables make_embedded() {
  return IsoTables{
      "ISO 226:2003",
      {20, 25, 31.5, 40, 50, 63, 80, 100, 125, 160, 200, 250, 315, 400, 500,
       630, 800, 1000, 1250, 1600, 2000, 2500, 3150, 4000, 5000, 6300, 8000,
       10000, 12500},
      {0.532, 0.506, 0.480, 0.455, 0.432, 0.409, 0.387, 0.367, 0.349, 0.330,
       0.315, 0.301, 0.288, 0.276, 0.267, 0.259, 0.253, 0.250, 0.246, 0.244,
       0.243, 0.243, 0.243, 0.242, 0.242, 0.245, 0.254, 0.271, 0.301},
      {-31.6, -27.2, -23.0, -19.1, -15.9, -13.0, -10.3, -8.1, -6.2, -4.5, -3.1,
       -2.0, -1.1, -0.4, 0.0, 0.3, 0.5, 0.0, -2.7, -4.1, -1.0, 1.7, 2.5, 1.2,
       -2.1, -7.1, -11.2, -10.7, -3.1},
      {78.5, 68.7, 59.5, 51.1, 44.0, 37.5, 31.5, 26.5, 22.1, 17.9, 14.4, 11.4,
       8.6, 6.2, 4.4, 3.0, 2.2, 2.4, 3.5, 1.7, -1.3, -4.2, -6.0, -5.4, -1.5, 6.0,
       12.6, 13.9, 12.3},
  };
}

void check_tables(const IsoTables& t, const std::string& origin) {
  for (std::size_t i = 0; i < kIsoAnchors; ++i) {
    if (!(t.frequency_hz[i] > 0.0) || !(t.alpha_f[i] > 0.0))
      throw Error(ErrorCode::kInvalidInput, origin + ": non-positive table entry");
    if (i > 0 && !(t.frequency_hz[i] > t.frequency_hz[i - 1]))
      throw Error(ErrorCode::kInvalidInput, origin + ": anchors not strictly increasing");
  }
  if (t.frequency_hz[kRefIndex] != 1000.0)
    throw Error(ErrorCode::kInvalidInput, origin + ": anchor 18 must be 1000 Hz");
}

std::array<double, kIsoAnchors> read_row(const nlohmann::json& doc, const char* key,
                                         const std::string& origin) {
  const auto& row = detail::require(doc, key, origin);
  if (!row.is_array() || row.size() != kIsoAnchors)
    throw Error(ErrorCode::kInvalidInput, "expected 29 numbers", origin + "." + key);
  std::array<double, kIsoAnchors> out{};
  for (std::size_t i = 0; i < kIsoAnchors; ++i)
    out[i] = detail::as_number(row[i], origin + "." + key + "/" + std::to_string(i));
  return out;
}

}  // namespace

std::string IsoTables::canonical_text() const {
  std::string text = version + "\n";
  char line[96];
  for (std::size_t i = 0; i < kIsoAnchors; ++i) {
    std::snprintf(line, sizeof line, "%.1f %.3f %.1f %.1f\n", frequency_hz[i],
                  alpha_f[i], l_u[i], t_f[i]);
    text += line;
  }
  return text;
}

std::string IsoTables::checksum() const { return sha256_hex(canonical_text()); }

const IsoTables& embedded_iso_tables() {
  static const IsoTables tables = [] {
    IsoTables t = make_embedded();
    if (t.checksum() != kEmbeddedChecksum) std::abort();  // corrupted build
    return t;
  }();
  return tables;
}

IsoTables load_iso_tables(const std::filesystem::path& path) {
  const std::string origin = path.string();
  const auto bytes = read_file(path);
  const auto doc = detail::parse_document(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  IsoTables t;
  t.version = detail::as_string(detail::require(doc, "version", ""), "version");
  t.frequency_hz = read_row(doc, "frequency_hz", origin);
  t.alpha_f = read_row(doc, "alpha_f", origin);
  t.l_u = read_row(doc, "l_u", origin);
  t.t_f = read_row(doc, "t_f", origin);
  check_tables(t, origin);
  const std::string declared =
      detail::as_string(detail::require(doc, "sha256", ""), "sha256");
  if (declared != t.checksum())
    throw Error(ErrorCode::kInvalidInput, origin + ": checksum mismatch", "sha256");
  return t;
}

const IsoTables& active_iso_tables() {
  static const IsoTables tables = [] {
    if (const char* dir = std::getenv("HF_DATA_DIR")) {
      const auto path = std::filesystem::path(dir) / "iso226_2003.json";
      if (std::filesystem::exists(path)) return load_iso_tables(path);
    }
    return embedded_iso_tables();
  }();
  return tables;
}

std::string iso_tables_json(const IsoTables& tables) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["version"] = tables.version;
  doc["frequency_hz"] = tables.frequency_hz;
  doc["alpha_f"] = tables.alpha_f;
  doc["l_u"] = tables.l_u;
  doc["t_f"] = tables.t_f;
  doc["sha256"] = tables.checksum();
  return doc.dump(2);
}

LoudnessContour contour(double phon_level, const IsoTables& tables) {
  if (!(phon_level >= kPhonMin && phon_level <= kPhonMax))
    throw Error(ErrorCode::kOutOfDomain, "phon level must be within [20, 80]", "phon");
  LoudnessContour c;
  c.phon_level = phon_level;
  c.frequency_hz = tables.frequency_hz;
  for (std::size_t i = 0; i < kIsoAnchors; ++i) {
    const double af = tables.alpha_f[i];
    const double lu = tables.l_u[i];
    const double tf = tables.t_f[i];
    const double a = 4.47e-3 * (std::pow(10.0, 0.025 * phon_level) - 1.15) +
                     std::pow(0.4 * std::pow(10.0, (tf + lu) / 10.0 - 9.0), af);
    c.spl_db[i] = 10.0 / af * std::log10(a) - lu + 94.0;
  }
  c.spl_db[kRefIndex] = phon_level;
  return c;
}

struct EqualLoudnessWeighting::Interp {
  boost::math::interpolators::pchip<std::vector<double>> curve;
};

EqualLoudnessWeighting::EqualLoudnessWeighting(const LoudnessContour& c)
    : phon_(c.phon_level) {
  for (std::size_t i = 0; i < kIsoAnchors; ++i) {
    log_f_[i] = std::log10(c.frequency_hz[i]);
    anchor_weights_[i] = c.spl_db[kRefIndex] - c.spl_db[i];
  }
  std::vector<double> x(log_f_.begin(), log_f_.end());
  std::vector<double> y(anchor_weights_.begin(), anchor_weights_.end());
  interp_ = std::make_unique<Interp>(Interp{{std::move(x), std::move(y)}});
}

EqualLoudnessWeighting::~EqualLoudnessWeighting() = default;

double EqualLoudnessWeighting::weight_db(double frequency_hz) const {
  // Non-positive and NaN frequencies take the low-edge weight.
  if (!(frequency_hz > 0.0)) return anchor_weights_.front();
  const double lf = std::log10(frequency_hz);
  if (lf <= log_f_.front()) return anchor_weights_.front();
  if (lf >= log_f_.back()) return anchor_weights_.back();
  // Exact values at the anchors.
  const auto it = std::lower_bound(log_f_.begin(), log_f_.end(), lf);
  if (it != log_f_.end() && *it == lf)
    return anchor_weights_[static_cast<std::size_t>(it - log_f_.begin())];
  return interp_->curve(lf);
}

std::shared_ptr<const EqualLoudnessWeighting> weighting_for(double phon_level) {
  static std::shared_mutex mutex;
  static std::map<double, std::shared_ptr<const EqualLoudnessWeighting>> cache;
  {
    std::shared_lock lock(mutex);
    auto it = cache.find(phon_level);
    if (it != cache.end()) return it->second;
  }
  auto built = std::make_shared<const EqualLoudnessWeighting>(contour(phon_level));
  std::unique_lock lock(mutex);
  return cache.try_emplace(phon_level, std::move(built)).first->second;
}

std::vector<double> weight_spectrum(std::span<const double> frequency_hz,
                                    std::span<const double> level_db,
                                    double phon_level) {
  if (frequency_hz.size() != level_db.size())
    throw Error(ErrorCode::kInvalidInput, "frequency and level arrays differ in length");
  const auto w = weighting_for(phon_level);
  std::vector<double> out(level_db.size());
  for (std::size_t i = 0; i < level_db.size(); ++i)
    out[i] = level_db[i] + w->weight_db(frequency_hz[i]);
  return out;
}

std::vector<double> design_weighting_fir(double phon_level, int sample_rate,
                                         std::size_t taps) {
  if (taps < 3 || taps % 2 == 0)
    throw Error(ErrorCode::kInvalidParameter, "FIR length must be odd and >= 3");
  const auto w = weighting_for(phon_level);
  std::size_t n = 1;
  while (n < 4 * taps) n <<= 1;
  const RealFft fft(n);
  std::vector<std::complex<double>> desired(fft.bins());
  for (std::size_t k = 0; k < desired.size(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
    desired[k] = std::pow(10.0, w->weight_db(f) / 20.0);
  }
  const auto impulse = fft.inverse(desired);  // zero-phase, scaled by n
  const std::size_t half = taps / 2;
  std::vector<double> h(taps);
  for (std::size_t i = 0; i < taps; ++i) {
    const std::ptrdiff_t lag = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(half);
    const std::size_t src = static_cast<std::size_t>((lag + static_cast<std::ptrdiff_t>(n)) %
                                                     static_cast<std::ptrdiff_t>(n));
    const double window =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) /
                             static_cast<double>(taps + 1));
    h[i] = impulse[src] / static_cast<double>(n) * window;
  }
  return h;
}

double fir_response_db(std::span<const double> taps, double frequency_hz,
                       int sample_rate) {
  const double omega = 2.0 * std::numbers::pi * frequency_hz / sample_rate;
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i)
    acc += taps[i] * std::polar(1.0, -omega * static_cast<double>(i));
  return 20.0 * std::log10(std::max(std::abs(acc), 1e-300));
}

AudioBuffer apply_weighting_fir(const AudioBuffer& audio, double phon_level,
                                std::size_t taps) {
  AudioBuffer out{audio.sample_rate, {}};
  if (audio.samples.empty()) return out;
  const auto h = design_weighting_fir(phon_level, audio.sample_rate, taps);
  std::size_t n = 1;
  while (n < audio.samples.size() + taps) n <<= 1;
  const RealFft fft(n);
  auto x = fft.forward(audio.samples);
  const auto hf = fft.forward(h);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] *= hf[k];
  const auto y = fft.inverse(x);
  const std::size_t delay = taps / 2;
  out.samples.resize(audio.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = y[i + delay] / static_cast<double>(n);
  return out;
}

}  // namespace hctone
