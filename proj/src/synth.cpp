// src/synth.cpp

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

#include "diar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <Eigen/Dense>

#include "diar/analysis.hpp"
#include "diar/embeddings.hpp"
#include "diar/rng.hpp"
#include "diar/rttm.hpp"
#include "diar/uem.hpp"
#include "diar/wav.hpp"

namespace diar {
namespace synth {

namespace fs = std::filesystem;

void SynthSpec::validate() const {
  if (domains.empty()) throw InvalidArgument("SynthSpec: no domains");
  if (embedding_dim < 4) throw InvalidArgument("SynthSpec: embedding_dim too small");
  if (domain_separation < 0.0)
    throw InvalidArgument("SynthSpec: separation must be non-negative");
  std::set<std::string> names;
  for (const auto &d : domains) {
    if (d.name.empty()) throw InvalidArgument("SynthSpec: empty domain name");
    if (!names.insert(d.name).second)
      throw InvalidArgument("SynthSpec: duplicate domain '" + d.name + "'");
    if (d.n_recordings < 1)
      throw InvalidArgument("SynthSpec: domain '" + d.name + "' has no recordings");
    if (d.min_speakers < 1 || d.max_speakers < d.min_speakers)
      throw InvalidArgument("SynthSpec: bad speaker range for '" + d.name + "'");
    if (d.overlap_pct < 0.0 || d.overlap_pct >= 100.0)
      throw InvalidArgument("SynthSpec: overlap_pct must be in [0, 100)");
    if (d.max_speakers == 1 && d.overlap_pct > 0.0)
      throw InvalidArgument("SynthSpec: overlap target " +
                            std::to_string(d.overlap_pct) +
                            "% is infeasible with 1 speaker in '" + d.name + "'");
    if (d.recording_duration < 10.0)
      throw InvalidArgument("SynthSpec: recording_duration too short in '" + d.name + "'");
    // The speaker direction frame needs max_speakers + 1 orthogonal axes.
    if (d.max_speakers + 1 > embedding_dim)
      throw InvalidArgument("SynthSpec: embedding_dim must exceed max_speakers in '" +
                            d.name + "'");
  }
}

SynthSpec default_spec(int n_domains, std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  for (int d = 0; d < n_domains; ++d) {
    DomainSpec dom;
    char name[32];
    std::snprintf(name, sizeof(name), "dom%02d", d);
    dom.name = name;
    dom.n_recordings = 4;
    dom.min_speakers = 2;
    dom.max_speakers = 4;
    dom.overlap_pct = 5.0 + 20.0 * d / std::max(1, n_domains - 1);
    dom.snr_db = 5.0 + 25.0 * d / std::max(1, n_domains - 1);
    dom.score_offset = n_domains > 1 ? static_cast<double>(d) / (n_domains - 1) : 0.0;
    spec.domains.push_back(dom);
  }
  return spec;
}

namespace {

double round_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

// Overlap fraction of speech time for K independent speakers with duty rho.
double expected_overlap(double rho, int k) {
  const double p_none = std::pow(1.0 - rho, k);
  const double p_one = k * rho * std::pow(1.0 - rho, k - 1);
  const double p_any = 1.0 - p_none;
  return p_any > 0.0 ? (p_any - p_one) / p_any : 0.0;
}

double solve_duty_cycle(double target, int k) {
  double lo = 1e-4, hi = 0.999;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_overlap(mid, k) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct TurnDraft {
  int speaker;
  double onset, offset;
};

// Independent two-state talk/silence chains, one per speaker.
std::vector<TurnDraft> independent_turns(int k, double duration, double rho, Rng &rng) {
  std::vector<TurnDraft> turns;
  const double mean_on = 2.0;
  const double mean_off = mean_on * (1.0 - rho) / std::max(rho, 1e-4);
  for (int s = 0; s < k; ++s) {
    double t = rng.uniform() * std::min(mean_off, duration * 0.25);
    while (t < duration) {
      const double on = std::clamp(rng.exponential(mean_on), 0.5, 8.0);
      const double off = std::clamp(rng.exponential(mean_off), 0.3, 30.0);
      const double end = std::min(t + on, duration);
      if (end - t >= 0.4) turns.push_back({s, t, end});
      t = end + off;
    }
  }
  return turns;
}

// Strict turn-taking: no overlap, short gaps.
std::vector<TurnDraft> sequential_turns(int k, double duration, Rng &rng) {
  std::vector<TurnDraft> turns;
  double t = 0.2;
  int s = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  while (t < duration) {
    const double on = std::clamp(rng.exponential(2.0), 0.6, 6.0);
    const double end = std::min(t + on, duration);
    if (end - t >= 0.4) turns.push_back({s, t, end});
    t = end + std::clamp(rng.exponential(0.4), 0.2, 1.5);
    if (k > 1) {
      int next = s;
      while (next == s) next = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      s = next;
    }
  }
  return turns;
}

double measure_overlap(const std::vector<TurnDraft> &turns) {
  std::vector<std::pair<double, int>> events;
  for (const auto &t : turns) {
    events.emplace_back(t.onset, +1);
    events.emplace_back(t.offset, -1);
  }
  std::sort(events.begin(), events.end());
  double speech = 0.0, overlap = 0.0, prev = 0.0;
  int active = 0;
  for (const auto &[time, delta] : events) {
    if (active >= 1) speech += time - prev;
    if (active >= 2) overlap += time - prev;
    active += delta;
    prev = time;
  }
  return speech > 0.0 ? 100.0 * overlap / speech : 0.0;
}

// Draws turn sequences, recalibrating the duty cycle until the realized
// overlap lands near the target (deterministic: derived streams per attempt).
std::vector<TurnDraft> draw_turns(const DomainSpec &dom, int k, double duration,
                                  const Rng &rec_rng) {
  if (k == 1 || dom.overlap_pct < 1.0) {
    Rng rng = rec_rng.derive(900);
    return sequential_turns(k, duration, rng);
  }
  const double target = dom.overlap_pct / 100.0;
  double rho = solve_duty_cycle(target, k);
  std::vector<TurnDraft> best;
  double best_err = 1e9;
  for (int attempt = 0; attempt < 10; ++attempt) {
    Rng rng = rec_rng.derive(901 + static_cast<std::uint64_t>(attempt));
    const auto turns = independent_turns(k, duration, rho, rng);
    const double measured = measure_overlap(turns) / 100.0;
    const double err = std::fabs(measured - target);
    if (err < best_err && !turns.empty()) {
      best = turns;
      best_err = err;
    }
    if (err < 0.02) break;
    // one multiplicative correction step toward the target
    if (measured > 1e-6) rho = std::clamp(rho * std::sqrt(target / measured), 1e-3, 0.97);
  }
  if (best.empty()) throw DataError("synth: failed to draw turns for " + dom.name);
  return best;
}

// Orthonormal frame: u plus k further axes, via Gram-Schmidt on random draws.
Eigen::MatrixXd orthonormal_frame(int rows, int dim, Rng &rng) {
  Eigen::MatrixXd frame(rows, dim);
  for (int r = 0; r < rows; ++r) {
    Eigen::VectorXd v(dim);
    for (;;) {
      for (int i = 0; i < dim; ++i) v(i) = rng.normal();
      for (int p = 0; p < r; ++p) v -= frame.row(p).dot(v) * frame.row(p).transpose();
      const double n = v.norm();
      if (n > 1e-6) {
        frame.row(r) = v.transpose() / n;
        break;
      }
    }
  }
  return frame;
}

}  // namespace

GeneratedCorpus gen_corpus(const SynthSpec &spec, const std::string &out_dir) {
  spec.validate();
  const fs::path root(out_dir);
  fs::create_directories(root / "sad");
  fs::create_directories(root / "rttm");
  fs::create_directories(root / "emb");
  if (spec.with_wav) fs::create_directories(root / "wav");

  const Rng master(spec.seed);
  Manifest manifest;

  // Domain centers for the recording-level hierarchy.
  Eigen::MatrixXd centers(spec.domains.size(), spec.embedding_dim);
  {
    Rng rng = master.derive(1);
    for (Eigen::Index d = 0; d < centers.rows(); ++d)
      for (int i = 0; i < spec.embedding_dim; ++i)
        centers(d, i) = spec.domain_separation * rng.normal();
  }

  std::size_t global_rec = 0;
  for (std::size_t di = 0; di < spec.domains.size(); ++di) {
    const DomainSpec &dom = spec.domains[di];

    // Similarity-band geometry from the per-domain score offset.
    const double q_same = std::clamp(0.35 + 0.6 * dom.score_offset, 0.05, 0.97);
    const double p_cross = std::max(q_same - spec.speaker_gap, 0.02);
    const double dir_cos = p_cross / q_same;
    const double noise_sigma = std::sqrt((1.0 / q_same - 1.0) / spec.embedding_dim);

    for (int r = 0; r < dom.n_recordings; ++r, ++global_rec) {
      const Rng rec_rng = master.derive(1000 + global_rec);
      char rec_name[64];
      std::snprintf(rec_name, sizeof(rec_name), "%s_rec%02d", dom.name.c_str(), r);
      const std::string rec_id(rec_name);

      Rng krng = rec_rng.derive(1);
      const int k = krng.uniform_int(dom.min_speakers, dom.max_speakers);

      // --- reference turns and SAD ---
      auto drafts = draw_turns(dom, k, dom.recording_duration, rec_rng);
      std::vector<Turn> turns;
      std::vector<Interval> speech;
      for (const auto &d : drafts) {
        const double on = round_ms(d.onset);
        const double off = round_ms(d.offset);
        if (off - on < 0.01) continue;
        char spk[32];
        std::snprintf(spk, sizeof(spk), "spk%02d", d.speaker);
        turns.emplace_back(rec_id, spk, on, off - on);
        speech.push_back({on, off});
      }
      if (turns.empty()) throw DataError("synth: empty recording " + rec_id);
      const Annotation reference(rec_id, std::move(turns));
      const Timeline sad = Timeline::canonicalize(speech);

      const std::string sad_path = (root / "sad" / (rec_id + ".lab")).string();
      formats::write_sad_lab_file(sad_path, sad);
      const std::string rttm_path = (root / "rttm" / (rec_id + ".rttm")).string();
      formats::write_rttm_file(rttm_path, {{rec_id, reference}});

      // --- speaker geometry and segment embeddings ---
      Rng geo = rec_rng.derive(2);
      const Eigen::MatrixXd frame =
          orthonormal_frame(k + 1, spec.embedding_dim, geo);
      Eigen::MatrixXd speaker_means(k, spec.embedding_dim);
      for (int s = 0; s < k; ++s)
        speaker_means.row(s) = std::sqrt(dir_cos) * frame.row(0) +
                               std::sqrt(1.0 - dir_cos) * frame.row(s + 1);

      const diarize::SegmentGrid grid =
          diarize::slide_segments(rec_id, sad, spec.segments);
      EmbeddingSet seg_set(spec.embedding_dim);
      Rng emb_rng = rec_rng.derive(3);
      for (const auto &seg : grid.segments) {
        // dominant speaker in the window
        const Timeline window = Timeline::canonicalize({{seg.onset, seg.offset()}});
        int best_spk = 0;
        double best_dur = -1.0;
        for (int s = 0; s < k; ++s) {
          char spk[32];
          std::snprintf(spk, sizeof(spk), "spk%02d", s);
          const double d =
              timeline_intersect(reference.speaker_timeline(spk), window).total();
          if (d > best_dur + kTimeEpsilon) {
            best_dur = d;
            best_spk = s;
          }
        }
        Eigen::VectorXd e = speaker_means.row(best_spk).transpose();
        for (int i = 0; i < spec.embedding_dim; ++i) e(i) += noise_sigma * emb_rng.normal();
        seg_set.add(diarize::segment_key(rec_id, seg), e);
      }
      const std::string emb_path = (root / "emb" / (rec_id + ".emb")).string();
      formats::write_emb1_file(emb_path, seg_set);

      // --- recording-level embedding (domain hierarchy) ---
      EmbeddingSet rec_set(spec.embedding_dim);
      {
        Rng rng = rec_rng.derive(4);
        Eigen::VectorXd e = centers.row(static_cast<Eigen::Index>(di)).transpose();
        for (int i = 0; i < spec.embedding_dim; ++i) e(i) += rng.normal();
        rec_set.add(rec_id, e);
      }
      const std::string rec_emb_path = (root / "emb" / (rec_id + ".rec.emb")).string();
      formats::write_emb1_file(rec_emb_path, rec_set);

      // --- waveform ---
      std::string wav_path;
      if (spec.with_wav) {
        Rng wrng = rec_rng.derive(5);
        const std::size_t n =
            static_cast<std::size_t>(dom.recording_duration * spec.sample_rate);
        std::vector<double> samples(n, 0.0);
        const double shape = analysis::kWadaGammaShape;
        const double theta = 1.0 / std::sqrt(shape * (shape + 1.0));
        const double noise_amp = std::pow(10.0, -dom.snr_db / 20.0);
        std::size_t iv = 0;
        const auto &ivs = sad.intervals();
        for (std::size_t i = 0; i < n; ++i) {
          const double t = static_cast<double>(i) / spec.sample_rate;
          while (iv < ivs.size() && t >= ivs[iv].offset) ++iv;
          double v = noise_amp * wrng.normal();
          if (iv < ivs.size() && t >= ivs[iv].onset) {
            const double amp = wrng.gamma(shape) * theta;
            v += wrng.uniform() < 0.5 ? -amp : amp;
          }
          samples[i] = 0.05 * v;
        }
        wav_path = (root / "wav" / (rec_id + ".wav")).string();
        formats::write_wav_file(wav_path, samples, spec.sample_rate);
      }

      ManifestEntry entry;
      entry.meta.id = rec_id;
      entry.meta.sample_rate = spec.sample_rate;
      entry.meta.duration = dom.recording_duration;
      entry.meta.domain = dom.name;
      entry.sad = sad_path;
      entry.rttm = rttm_path;
      entry.emb = emb_path;
      entry.rec_emb = rec_emb_path;
      if (!wav_path.empty()) entry.wav = wav_path;
      entry.split = (r % 2 == 0) ? "dev" : "eval";
      entry.core = (r / 2) % 2 == 0;
      manifest.add(std::move(entry));
    }
  }

  GeneratedCorpus out;
  out.manifest_path = (root / "manifest.cfg").string();
  manifest.save(out.manifest_path);
  out.manifest = Manifest::load(out.manifest_path);
  return out;
}

}  // namespace synth
}  // namespace diar
