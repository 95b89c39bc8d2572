#ifndef HCTONE_ISO226_H_
#define HCTONE_ISO226_H_

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hctone/audio.h"

namespace hctone {

inline constexpr std::size_t kIsoAnchors = 29;
inline constexpr double kDefaultPhon = 60.0;

// Per-frequency constants of the ISO 226:2003 equal-loudness formula:
// exponent a_f, magnitude of the linear transfer function L_U, and the hearing
// threshold T_f, at the 29 standard frequencies from 20 Hz to 12.5 kHz.
struct IsoTables {
  std::string version;
  std::array<double, kIsoAnchors> frequency_hz;
  std::array<double, kIsoAnchors> alpha_f;
  std::array<double, kIsoAnchors> l_u;
  std::array<double, kIsoAnchors> t_f;

  // Canonical text form; the checksum covers exactly these bytes.
  std::string canonical_text() const;
  std::string checksum() const;
};

// The embedded asset. Its checksum is verified once on first use.
const IsoTables& embedded_iso_tables();
// Embedded asset unless $HF_DATA_DIR/iso226_2003.json exists, in which case
// that file is loaded (and its "sha256" field must match its content).
const IsoTables& active_iso_tables();
IsoTables load_iso_tables(const std::filesystem::path& path);
std::string iso_tables_json(const IsoTables& tables);

struct LoudnessContour {
  double phon_level = kDefaultPhon;
  std::array<double, kIsoAnchors> frequency_hz{};
  std::array<double, kIsoAnchors> spl_db{};
};

// Equal-loudness contour at `phon_level` (valid range [20, 80] phon). The
// 1 kHz anchor equals the phon level by definition of the phon.
LoudnessContour contour(double phon_level, const IsoTables& tables = active_iso_tables());

// Frequency weighting derived from a contour: weight(f) = SPL(1 kHz) - SPL(f),
// cubic (PCHIP) in log-frequency through the anchors, flat outside
// [20, 12500] Hz.
class EqualLoudnessWeighting {
 public:
  explicit EqualLoudnessWeighting(const LoudnessContour& contour);
  ~EqualLoudnessWeighting();
  EqualLoudnessWeighting(const EqualLoudnessWeighting&) = delete;
  EqualLoudnessWeighting& operator=(const EqualLoudnessWeighting&) = delete;

  double phon_level() const { return phon_; }
  double weight_db(double frequency_hz) const;
  const std::array<double, kIsoAnchors>& anchor_weights_db() const { return anchor_weights_; }

 private:
  struct Interp;
  double phon_;
  std::array<double, kIsoAnchors> log_f_{};
  std::array<double, kIsoAnchors> anchor_weights_{};
  std::unique_ptr<Interp> interp_;
};

// Shared, cached per phon level; safe for concurrent callers.
std::shared_ptr<const EqualLoudnessWeighting> weighting_for(double phon_level);

// output_db[i] = input_db[i] + weight(frequency_hz[i]).
std::vector<double> weight_spectrum(std::span<const double> frequency_hz,
                                    std::span<const double> level_db,
                                    double phon_level = kDefaultPhon);

// Linear-phase FIR approximating the weighting curve (for listening, not for
// analysis). `taps` must be odd.
std::vector<double> design_weighting_fir(double phon_level, int sample_rate,
                                         std::size_t taps = 16383);
double fir_response_db(std::span<const double> taps, double frequency_hz,
                       int sample_rate);
// Applies the FIR with FFT overlap-add; the group delay is compensated so the
// output is time-aligned with the input and has the same length.
AudioBuffer apply_weighting_fir(const AudioBuffer& audio, double phon_level,
                                std::size_t taps = 16383);

}  // namespace hctone

#endif  // HCTONE_ISO226_H_
