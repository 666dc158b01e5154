// src/analysis.cpp

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

#include "diar/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "diar/dsp.hpp"
#include "diar/rttm.hpp"
#include "diar/uem.hpp"
#include "diar/wav.hpp"

namespace diar {
namespace analysis {

namespace fs = std::filesystem;

std::vector<double> simulate_gamma_speech(std::size_t n, double snr_db, Rng &rng) {
  std::vector<double> x(n);
  const bool speech_only = snr_db >= kWadaSnrMax;
  const bool noise_only = snr_db <= kWadaSnrMin - 40;
  // Unit-power gamma-amplitude speech: amplitude ~ Gamma(0.45, theta) with a
  // random sign. Second moment of Gamma(k, theta) is k(k+1) theta^2.
  const double shape = kWadaGammaShape;
  const double theta = 1.0 / std::sqrt(shape * (shape + 1.0));
  const double noise_sigma =
      noise_only ? 1.0 : std::pow(10.0, -snr_db / 20.0);  // speech power fixed at 1
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    if (!noise_only) {
      const double amp = rng.gamma(shape) * theta;
      v = rng.uniform() < 0.5 ? -amp : amp;
    }
    if (!speech_only) v += noise_sigma * rng.normal();
    x[i] = v;
  }
  return x;
}

double wada_statistic(std::span<const double> samples) {
  if (samples.empty()) throw InvalidArgument("wada_statistic: empty input");
  constexpr double eps = 1e-10;
  double sum_abs = 0.0, sum_log = 0.0;
  for (const double s : samples) {
    const double a = std::fabs(s);
    sum_abs += a;
    sum_log += std::log(a + eps);
  }
  const double n = static_cast<double>(samples.size());
  if (sum_abs <= 0.0) throw DataError("wada_statistic: all-zero signal, SNR undefined");
  return std::log(sum_abs / n) - sum_log / n;
}

WadaTable::WadaTable() {
  // One-off Monte Carlo over the SNR grid; large enough that table noise is
  // well under the estimator's own sampling error on real-length audio.
  constexpr std::size_t kSamplesPerPoint = 200000;
  Rng rng(0x57ada5eedULL);
  for (int snr = kWadaSnrMin; snr <= kWadaSnrMax; ++snr) {
    Rng point = rng.derive(static_cast<std::uint64_t>(snr - kWadaSnrMin));
    const auto x = simulate_gamma_speech(kSamplesPerPoint, snr, point);
    g_[snr - kWadaSnrMin] = wada_statistic(x);
  }
  // Enforce monotonicity (isotonic sweep); MC jitter in the saturated tails
  // would otherwise break the inversion.
  for (std::size_t i = 1; i < g_.size(); ++i) g_[i] = std::max(g_[i], g_[i - 1]);
}

const WadaTable &WadaTable::instance() {
  static const WadaTable table;
  return table;
}

double WadaTable::g_at(int snr_db) const {
  if (snr_db < kWadaSnrMin || snr_db > kWadaSnrMax)
    throw InvalidArgument("WadaTable: SNR out of table range");
  return g_[snr_db - kWadaSnrMin];
}

double WadaTable::snr_from_statistic(double g) const {
  if (g <= g_.front()) return kWadaSnrMin;
  if (g >= g_.back()) return kWadaSnrMax;
  // first index with g_[i] >= g
  std::size_t lo = 0, hi = g_.size() - 1;
  while (lo + 1 < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (g_[mid] >= g)
      hi = mid;
    else
      lo = mid;
  }
  const double g0 = g_[lo], g1 = g_[hi];
  const double t = g1 > g0 ? (g - g0) / (g1 - g0) : 1.0;
  return kWadaSnrMin + static_cast<double>(lo) + t;
}

double wada_snr(std::span<const double> samples) {
  const double g = wada_statistic(samples);
  return WadaTable::instance().snr_from_statistic(g);
}

std::pair<double, double> speech_nonspeech_ratio(const Timeline &sad,
                                                 double recording_duration) {
  if (!(recording_duration > 0.0))
    throw InvalidArgument("speech_nonspeech_ratio: duration must be positive");
  const double speech = sad.total();
  if (speech > recording_duration + kTimeEpsilon)
    throw InvalidArgument("speech_nonspeech_ratio: SAD exceeds recording duration");
  const double pct = 100.0 * speech / recording_duration;
  return {pct, 100.0 - pct};
}

double overlap_fraction(const Annotation &ann, const Timeline &sad) {
  if (ann.empty()) throw InvalidArgument("overlap_fraction: empty annotation");
  // Boundary sweep over turn edges; within each elementary region the set of
  // active speakers is constant.
  std::vector<double> bounds;
  for (const auto &t : ann.turns()) {
    bounds.push_back(t.onset);
    bounds.push_back(t.offset());
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  double speech = 0.0, overlap = 0.0;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double lo = bounds[i], hi = bounds[i + 1];
    if (hi - lo <= kTimeEpsilon) continue;
    const double mid = 0.5 * (lo + hi);
    std::set<std::string> active;
    for (const auto &t : ann.turns())
      if (t.onset <= mid && mid < t.offset()) active.insert(t.speaker_id);
    if (active.empty()) continue;
    double d = hi - lo;
    if (!sad.empty()) {
      const Timeline region = Timeline::canonicalize({{lo, hi}});
      d = timeline_intersect(region, sad).total();
    }
    speech += d;
    if (active.size() >= 2) overlap += d;
  }
  if (speech <= 0.0) return 0.0;
  return 100.0 * overlap / speech;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0.0;
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double t = pos - static_cast<double>(i);
  return v[i] * (1.0 - t) + v[i + 1] * t;
}

}  // namespace

DomainReport build_domain_report(const Manifest &manifest, const std::string &out_dir,
                                 const ReportOptions &opts) {
  fs::create_directories(out_dir);
  DomainReport report;

  struct Acc {
    std::vector<double> snr;
    std::vector<double> speech_pct;
    std::vector<double> overlap_pct;
    Eigen::VectorXd ltas_power;  // accumulated mean power per bin
    int ltas_count = 0;
    int sample_rate = 0;
    int n = 0;
  };
  std::map<std::string, Acc> by_domain;
  std::vector<std::string> domain_order;

  std::ofstream snr_csv(fs::path(out_dir) / "snr.csv");
  snr_csv << "recording,domain,snr_db\n";
  std::ofstream ratio_csv(fs::path(out_dir) / "speech_ratio.csv");
  ratio_csv << "recording,domain,speech_pct,nonspeech_pct\n";
  std::ofstream overlap_csv(fs::path(out_dir) / "overlap.csv");
  overlap_csv << "recording,domain,overlap_pct\n";
  char buf[128];

  for (const auto &e : manifest.entries()) {
    const std::string domain = e.meta.domain.value_or("unknown");
    if (!by_domain.count(domain)) domain_order.push_back(domain);
    Acc &acc = by_domain[domain];
    ++acc.n;

    std::optional<Timeline> sad;
    if (e.sad) {
      try {
        sad = formats::parse_sad_lab_file(*e.sad);
      } catch (const Error &err) {
        report.warnings.push_back(e.meta.id + ": SAD unreadable: " + err.what());
      }
    }

    if (sad && e.meta.duration > 0.0) {
      const auto [sp, nsp] = speech_nonspeech_ratio(*sad, e.meta.duration);
      acc.speech_pct.push_back(sp);
      std::snprintf(buf, sizeof(buf), "%s,%s,%.3f,%.3f\n", e.meta.id.c_str(),
                    domain.c_str(), sp, nsp);
      ratio_csv << buf;
    } else {
      report.warnings.push_back(e.meta.id + ": missing SAD or duration, speech ratio skipped");
    }

    if (e.rttm) {
      try {
        const auto anns = formats::parse_rttm_file(*e.rttm);
        const auto it = anns.find(e.meta.id);
        if (it != anns.end() && !it->second.empty()) {
          const double ov = overlap_fraction(it->second, sad.value_or(Timeline()));
          acc.overlap_pct.push_back(ov);
          std::snprintf(buf, sizeof(buf), "%s,%s,%.3f\n", e.meta.id.c_str(),
                        domain.c_str(), ov);
          overlap_csv << buf;
        }
      } catch (const Error &err) {
        report.warnings.push_back(e.meta.id + ": RTTM unreadable: " + err.what());
      }
    }

    if (e.wav) {
      try {
        const auto wav = formats::read_wav_file(*e.wav, /*downmix_mono=*/true);
        std::vector<double> samples = wav.samples;
        if (opts.snr_speech_only && sad) {
          std::vector<double> kept;
          for (const auto &iv : sad->intervals()) {
            const auto b = static_cast<std::size_t>(iv.onset * wav.sample_rate);
            const auto e2 = std::min(samples.size(),
                                     static_cast<std::size_t>(iv.offset * wav.sample_rate));
            for (std::size_t i = b; i < e2; ++i) kept.push_back(samples[i]);
          }
          samples = std::move(kept);
        }
        if (!samples.empty()) {
          const double snr = wada_snr(samples);
          acc.snr.push_back(snr);
          std::snprintf(buf, sizeof(buf), "%s,%s,%.2f\n", e.meta.id.c_str(),
                        domain.c_str(), snr);
          snr_csv << buf;
        }
        if (opts.with_ltas) {
          const Eigen::VectorXd db =
              dsp::ltas(wav.samples, wav.sample_rate, dsp::FrameSpec{0.025, 0.010,
                        dsp::Window::kHann, 0.0}, opts.ltas_nfft);
          // Average across recordings in the power domain, convert at the end.
          Eigen::VectorXd power(db.size());
          for (Eigen::Index k = 0; k < db.size(); ++k)
            power(k) = std::pow(10.0, db(k) / 10.0);
          if (acc.ltas_count == 0) {
            acc.ltas_power = power;
            acc.sample_rate = wav.sample_rate;
          } else if (acc.sample_rate == wav.sample_rate) {
            acc.ltas_power += power;
          } else {
            report.warnings.push_back(e.meta.id +
                                      ": sample rate differs within domain, LTAS skipped");
            --acc.ltas_count;  // cancel the ++ below
          }
          ++acc.ltas_count;
        }
      } catch (const Error &err) {
        report.warnings.push_back(e.meta.id + ": WAV unreadable: " + err.what());
      }
    } else {
      report.warnings.push_back(e.meta.id + ": no WAV, SNR/LTAS skipped");
    }
  }

  for (const auto &domain : domain_order) {
    Acc &acc = by_domain[domain];
    DomainRow row;
    row.domain = domain;
    row.n_recordings = acc.n;
    if (!acc.snr.empty()) {
      row.snr_quartiles = {quantile(acc.snr, 0.25), quantile(acc.snr, 0.50),
                           quantile(acc.snr, 0.75)};
      row.has_snr = true;
    }
    if (!acc.speech_pct.empty()) {
      double s = 0.0;
      for (double v : acc.speech_pct) s += v;
      row.mean_speech_ratio = s / static_cast<double>(acc.speech_pct.size());
    }
    if (!acc.overlap_pct.empty()) {
      double s = 0.0;
      for (double v : acc.overlap_pct) s += v;
      row.mean_overlap_pct = s / static_cast<double>(acc.overlap_pct.size());
    }
    if (acc.ltas_count > 0) {
      std::string fname = "ltas_" + domain + ".csv";
      std::replace(fname.begin(), fname.end(), ' ', '_');
      const fs::path p = fs::path(out_dir) / fname;
      std::ofstream f(p);
      f << "bin_hz,db\n";
      for (Eigen::Index k = 0; k < acc.ltas_power.size(); ++k) {
        const double mean_power = acc.ltas_power(k) / acc.ltas_count;
        const double hz = static_cast<double>(k) * acc.sample_rate /
                          static_cast<double>(opts.ltas_nfft);
        std::snprintf(buf, sizeof(buf), "%.2f,%.4f\n", hz,
                      10.0 * std::log10(std::max(mean_power, 1e-12)));
        f << buf;
      }
      row.ltas_path = p.string();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace analysis
}  // namespace diar
