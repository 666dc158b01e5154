// diar/analysis.hpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Corpus-characterization analyses: WADA SNR estimation, speech-to-nonspeech
// ratio, overlap fraction, and domain-wise report aggregation.

#ifndef DIAR_ANALYSIS_HPP_
#define DIAR_ANALYSIS_HPP_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diar/core.hpp"
#include "diar/manifest.hpp"
#include "diar/rng.hpp"

namespace diar {
namespace analysis {

inline constexpr double kWadaGammaShape = 0.45;
inline constexpr int kWadaSnrMin = -20;
inline constexpr int kWadaSnrMax = 100;

/// Synthesizes `n` samples of gamma-amplitude "speech" mixed with Gaussian
/// noise at the given SNR. snr_db >= kWadaSnrMax means clean speech,
/// snr_db <= kWadaSnrMin - 40 means noise only. Shared by the lookup-table
/// generator, the synthetic corpus, and the tests (the simulation is the
/// oracle).
std::vector<double> simulate_gamma_speech(std::size_t n, double snr_db, Rng &rng);

/// The scale-free amplitude statistic G = ln(mean|x|) - mean(ln(|x| + 1e-10)).
double wada_statistic(std::span<const double> samples);

/// Monotone G -> SNR lookup table, generated once per process by simulation
/// over SNR in {-20,...,100} dB at gamma shape 0.45.
class WadaTable {
 public:
  static const WadaTable &instance();

  /// Inverts G to SNR by linear interpolation; clamped to [-20, 100] dB.
  double snr_from_statistic(double g) const;
  double g_at(int snr_db) const;

 private:
  WadaTable();
  std::array<double, kWadaSnrMax - kWadaSnrMin + 1> g_;  // indexed by snr - min
};

/// WADA SNR estimate in dB, clamped to [-20, +100].
double wada_snr(std::span<const double> samples);

/// (speech_pct, nonspeech_pct); the pair sums to 100.
std::pair<double, double> speech_nonspeech_ratio(const Timeline &sad,
                                                 double recording_duration);

/// Percent of speech time (>=1 active speaker, within `sad` if non-empty)
/// during which >=2 distinct speakers are active.
double overlap_fraction(const Annotation &ann, const Timeline &sad);

struct DomainRow {
  std::string domain;
  int n_recordings = 0;
  std::array<double, 3> snr_quartiles{0, 0, 0};  // q25, q50, q75 (dB)
  bool has_snr = false;
  double mean_speech_ratio = 0.0;  // percent
  double mean_overlap_pct = 0.0;   // percent
  std::string ltas_path;           // empty when no audio was available
};

struct DomainReport {
  std::vector<DomainRow> rows;
  std::vector<std::string> warnings;
};

struct ReportOptions {
  bool snr_speech_only = false;  // restrict WADA SNR to SAD regions
  bool with_ltas = true;
  std::size_t ltas_nfft = 1024;
};

/// Runs the per-recording analyses over a manifest and writes
/// snr.csv / speech_ratio.csv / overlap.csv / ltas_<domain>.csv to out_dir.
/// Missing files produce warnings, not failures.
DomainReport build_domain_report(const Manifest &manifest, const std::string &out_dir,
                                 const ReportOptions &opts = {});

}  // namespace analysis
}  // namespace diar

#endif  // DIAR_ANALYSIS_HPP_
