// src/pipeline.cpp

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

#include "diar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "diar/dsp.hpp"
#include "diar/parallel.hpp"
#include "diar/rttm.hpp"
#include "diar/score.hpp"
#include "diar/uem.hpp"
#include "diar/wav.hpp"

namespace diar {
namespace diarize {

void ThresholdTable::save(const std::string &path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open threshold table for writing: " + path);
  char buf[256];
  f << "domain\tthreshold\tdev_der\n";
  std::snprintf(buf, sizeof(buf), "*\t%.9g\t%.6f\n", fallback, fallback_dev_der);
  f << buf;
  for (const auto &[domain, t] : by_domain) {
    const auto it = dev_der.find(domain);
    std::snprintf(buf, sizeof(buf), "%s\t%.9g\t%.6f\n", domain.c_str(), t,
                  it == dev_der.end() ? 0.0 : it->second);
    f << buf;
  }
  if (!f) throw IoError("failed writing threshold table: " + path);
}

ThresholdTable ThresholdTable::load(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open threshold table: " + path);
  ThresholdTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_fallback = false;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "domain\tthreshold\tdev_der") continue;
    std::istringstream iss(line);
    std::string domain, t_s, der_s;
    if (!std::getline(iss, domain, '\t') || !std::getline(iss, t_s, '\t'))
      throw ParseError("threshold table: expected 'domain<TAB>threshold[<TAB>dev_der]'",
                       lineno);
    std::getline(iss, der_s, '\t');
    double t = 0.0, d = 0.0;
    try {
      t = std::stod(t_s);
      if (!der_s.empty()) d = std::stod(der_s);
    } catch (const std::exception &) {
      throw ParseError("threshold table: bad number", lineno);
    }
    if (domain == "*") {
      table.fallback = t;
      table.fallback_dev_der = d;
      have_fallback = true;
    } else {
      table.by_domain[domain] = t;
      table.dev_der[domain] = d;
    }
  }
  if (!have_fallback)
    throw DataError("threshold table: missing fallback row '*' in " + path);
  return table;
}

Mode mode_from_string(const std::string &s) {
  if (s == "baseline") return Mode::kBaseline;
  if (s == "P1" || s == "p1") return Mode::kP1;
  if (s == "P2" || s == "p2") return Mode::kP2;
  throw InvalidArgument("unknown pipeline mode '" + s + "' (baseline|P1|P2)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kBaseline: return "baseline";
    case Mode::kP1: return "P1";
    case Mode::kP2: return "P2";
  }
  return "baseline";
}

namespace {

Eigen::MatrixXd internal_segment_embeddings(const ManifestEntry &entry,
                                            const std::vector<Segment> &segments,
                                            const ivector::TvModel &tv) {
  if (!entry.wav)
    throw DataError(entry.meta.id + ": no WAV for internal embedding extraction");
  const auto wav = formats::read_wav_file(*entry.wav, /*downmix_mono=*/true);
  const dsp::FrameSpec fspec = dsp::frame_spec_embedding();
  dsp::MelSpec mspec = dsp::mel_spec_embedding();
  mspec.n_ceps = tv.ubm.dim();
  mspec.n_filters = std::max(mspec.n_filters, mspec.n_ceps);

  Eigen::MatrixXd out(segments.size(), tv.rank());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto &seg = segments[s];
    const auto begin = static_cast<std::size_t>(std::lround(seg.onset * wav.sample_rate));
    const auto end = std::min(wav.samples.size(),
                              static_cast<std::size_t>(std::lround(seg.offset() * wav.sample_rate)));
    if (end <= begin)
      throw DataError(entry.meta.id + ": segment outside audio at " +
                      segment_key(entry.meta.id, seg));
    const std::span<const double> slice(wav.samples.data() + begin, end - begin);
    const Eigen::MatrixXd feats = dsp::mfcc(slice, wav.sample_rate, fspec, mspec);
    const auto stats = ivector::accumulate_bw_stats(feats, tv.ubm);
    out.row(static_cast<Eigen::Index>(s)) = ivector::extract_ivector(tv, stats).transpose();
  }
  return out;
}

Eigen::MatrixXd raw_segment_embeddings(const ManifestEntry &entry,
                                       const std::vector<Segment> &segments,
                                       const std::optional<ivector::TvModel> &tv) {
  if (entry.emb) {
    const EmbeddingSet set = formats::read_embeddings_auto(*entry.emb);
    Eigen::MatrixXd out(segments.size(), set.dim());
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const std::string key = segment_key(entry.meta.id, segments[s]);
      if (!set.contains(key))
        throw DataError(entry.meta.id + ": embeddings file lacks key '" + key + "'");
      out.row(static_cast<Eigen::Index>(s)) = set.at(key).transpose();
    }
    return out;
  }
  if (tv) return internal_segment_embeddings(entry, segments, *tv);
  throw DataError(entry.meta.id +
                  ": no segment embeddings (neither EMB1 file nor WAV+TV model)");
}

Timeline load_sad(const ManifestEntry &entry) {
  if (!entry.sad) throw DataError(entry.meta.id + ": manifest has no SAD file");
  return formats::parse_sad_lab_file(*entry.sad);
}

}  // namespace

Eigen::VectorXd recording_embedding(const ManifestEntry &entry,
                                    const PipelineModels &models,
                                    const SegmentSpec &segments) {
  if (entry.rec_emb) {
    const EmbeddingSet set = formats::read_embeddings_auto(*entry.rec_emb);
    if (set.contains(entry.meta.id)) return set.at(entry.meta.id);
    throw DataError(entry.meta.id + ": recording-level embeddings file lacks key '" +
                    entry.meta.id + "'");
  }
  const Timeline sad = load_sad(entry);
  const SegmentGrid grid = slide_segments(entry.meta.id, sad, segments);
  const Eigen::MatrixXd raw = raw_segment_embeddings(entry, grid.segments, models.tv);
  return raw.colwise().mean();
}

PreparedRecording prepare_recording(const ManifestEntry &entry,
                                    const PipelineModels &models,
                                    const PipelineOptions &opts) {
  PreparedRecording rec;
  rec.id = entry.meta.id;
  rec.duration = entry.meta.duration;
  rec.core = entry.core;
  rec.sad = load_sad(entry);
  if (rec.duration <= 0.0) rec.duration = rec.sad.span_offset();

  SegmentGrid grid = slide_segments(entry.meta.id, rec.sad, opts.segments);
  rec.segments = std::move(grid.segments);
  rec.warnings = std::move(grid.warnings);
  if (rec.segments.empty())
    throw DataError(entry.meta.id + ": no segments inside SAD");

  // Map each segment to its SAD interval for the midpoint-splitting stage.
  rec.segment_interval.resize(rec.segments.size());
  {
    std::size_t iv = 0;
    for (std::size_t s = 0; s < rec.segments.size(); ++s) {
      while (iv + 1 < rec.sad.size() &&
             rec.segments[s].onset >= rec.sad.intervals()[iv].offset - kTimeEpsilon)
        ++iv;
      rec.segment_interval[s] = iv;
    }
  }

  // Domain: true label on the dev protocol, ADI prediction on eval.
  if (opts.use_true_domains) {
    if (entry.meta.domain)
      rec.domain = *entry.meta.domain;
    else if (opts.mode != Mode::kBaseline)
      throw DataError(entry.meta.id + ": dev protocol needs a manifest domain label");
  } else if (opts.mode != Mode::kBaseline) {
    if (!models.adi_model)
      throw DataError(entry.meta.id + ": eval protocol needs an ADI model");
    const Eigen::VectorXd rec_emb = recording_embedding(entry, models, opts.segments);
    rec.domain = adi_predict(*models.adi_model, rec_emb).domain;
  }

  const Eigen::MatrixXd raw = raw_segment_embeddings(entry, rec.segments, models.tv);
  const Eigen::MatrixXd whitened = models.base.whitener.apply_rows(raw);

  // Mode-dependent PLDA choice (P1 uses the per-domain adapted model).
  const backend::PldaModel *plda = &models.base.plda;
  if (opts.mode == Mode::kP1) {
    const auto it = models.per_domain_plda.find(rec.domain);
    if (it != models.per_domain_plda.end()) {
      plda = &it->second;
    } else {
      rec.warnings.push_back(entry.meta.id + ": no per-domain PLDA for '" +
                             rec.domain + "', using the global model");
    }
  }

  bool pca_degenerate = false;
  const backend::ConversationPca pca =
      backend::fit_conversation_pca(whitened, opts.pca_fraction, &pca_degenerate);
  if (pca_degenerate)
    rec.warnings.push_back(entry.meta.id + ": single segment, PCA passthrough");
  rec.projected = pca.project_rows(whitened);
  rec.plda_projected = plda->project(pca);

  const backend::PldaScorer scorer(rec.plda_projected);
  const Eigen::MatrixXd scores = scorer.score_matrix(rec.projected);
  rec.score_sample.reserve(static_cast<std::size_t>(scores.rows()) *
                           (static_cast<std::size_t>(scores.rows()) - 1) / 2);
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    for (Eigen::Index j = i + 1; j < scores.cols(); ++j)
      rec.score_sample.push_back(scores(i, j));
  rec.trace.emplace(scores);

  if (entry.rttm) {
    const auto anns = formats::parse_rttm_file(*entry.rttm);
    const auto it = anns.find(entry.meta.id);
    if (it != anns.end()) rec.reference = it->second;
  }
  return rec;
}

Annotation labels_to_annotation(const PreparedRecording &rec,
                                const std::vector<int> &labels) {
  if (labels.size() != rec.segments.size())
    throw InvalidArgument("labels_to_annotation: label count mismatch");

  std::vector<Turn> turns;
  std::size_t s = 0;
  while (s < rec.segments.size()) {
    const std::size_t iv = rec.segment_interval[s];
    std::size_t e = s;
    while (e < rec.segments.size() && rec.segment_interval[e] == iv) ++e;
    const Interval interval = rec.sad.intervals()[iv];

    // Boundaries at midpoints between consecutive windows; one label per
    // region; adjacent same-label regions merge into one turn.
    double region_start = interval.onset;
    for (std::size_t j = s; j < e; ++j) {
      if (j + 1 < e && labels[j + 1] == labels[j]) continue;  // run extends
      const double region_end =
          (j + 1 < e)
              ? 0.5 * (rec.segments[j].offset() + rec.segments[j + 1].onset)
              : interval.offset;
      if (region_end - region_start > kTimeEpsilon) {
        char spk[32];
        std::snprintf(spk, sizeof(spk), "spk%02d", labels[j]);
        turns.emplace_back(rec.id, spk, region_start, region_end - region_start);
      }
      region_start = region_end;
    }
    s = e;
  }
  return Annotation(rec.id, std::move(turns));
}

DiarizationResult diarize_prepared(const PreparedRecording &rec,
                                   const ThresholdTable &thresholds,
                                   const PipelineOptions &opts) {
  DiarizationResult result;
  result.warnings = rec.warnings;
  result.domain_used = rec.domain;
  result.threshold_used =
      opts.mode == Mode::kBaseline ? thresholds.fallback : thresholds.at(rec.domain);

  std::vector<int> labels = rec.trace->labels_at(result.threshold_used);
  result.n_segments = static_cast<int>(labels.size());
  result.n_clusters_first_pass =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

  if (opts.resegment && result.n_clusters_first_pass > 1)
    labels = resegment_hmm(rec.projected, labels, rec.plda_projected, opts.reseg);
  result.n_clusters_final =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

  result.annotation = labels_to_annotation(rec, labels);
  return result;
}

PipelineRunResult diarize_pipeline(const Manifest &manifest, const std::string &split,
                                   const PipelineModels &models,
                                   const ThresholdTable &thresholds,
                                   const PipelineOptions &opts, int jobs) {
  const auto entries = manifest.split(split);
  std::vector<std::optional<DiarizationResult>> slots(entries.size());
  std::vector<std::string> errors(entries.size());

  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    try {
      const PreparedRecording rec = prepare_recording(*entries[i], models, opts);
      slots[i] = diarize_prepared(rec, thresholds, opts);
    } catch (const Error &e) {
      errors[i] = entries[i]->meta.id + ": " + e.what();
    }
  });

  PipelineRunResult out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i])
      out.results.push_back(std::move(*slots[i]));
    else
      out.errors.push_back(errors[i]);
  }
  return out;
}

namespace {

double aggregate_first_pass_der(const std::vector<const PreparedRecording *> &recs,
                                double threshold) {
  double err = 0.0, denom = 0.0;
  for (const auto *rec : recs) {
    const Annotation sys = labels_to_annotation(*rec, rec->trace->labels_at(threshold));
    const Timeline uem = Timeline::canonicalize({{0.0, rec->duration}});
    const scoring::ScoreRow row = scoring::der(*rec->reference, sys, uem);
    err += row.miss_s + row.fa_s + row.confusion_s;
    denom += row.ref_speech_s;
  }
  return denom > 0.0 ? 100.0 * err / denom : 0.0;
}

std::vector<double> linear_grid(std::vector<double> pooled, int points, double lo_pct,
                                double hi_pct) {
  std::sort(pooled.begin(), pooled.end());
  if (pooled.empty()) return {0.0};
  auto pct = [&](double q) {
    const double pos = q / 100.0 * (static_cast<double>(pooled.size()) - 1.0);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= pooled.size()) return pooled.back();
    const double t = pos - static_cast<double>(i);
    return pooled[i] * (1.0 - t) + pooled[i + 1] * t;
  };
  const double lo = pct(lo_pct), hi = pct(hi_pct);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  if (points == 1 || hi <= lo) {
    grid.push_back(lo);
    return grid;
  }
  for (int i = 0; i < points; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (points - 1));
  return grid;
}

}  // namespace

SweepResult sweep_thresholds(const Manifest &manifest, const PipelineModels &models,
                             const PipelineOptions &opts, const SweepOptions &sweep,
                             int jobs) {
  PipelineOptions dev_opts = opts;
  dev_opts.use_true_domains = true;
  dev_opts.resegment = false;  // the stopping rule is a first-pass criterion

  const auto entries = manifest.split("dev");
  std::vector<std::optional<PreparedRecording>> slots(entries.size());
  std::vector<std::string> errors(entries.size());

  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    try {
      if (!entries[i]->rttm)
        throw DataError(entries[i]->meta.id + ": dev recording lacks reference RTTM");
      PreparedRecording rec = prepare_recording(*entries[i], models, dev_opts);
      if (!rec.reference)
        throw DataError(rec.id + ": reference RTTM has no rows for this recording");
      slots[i] = std::move(rec);
    } catch (const Error &e) {
      errors[i] = entries[i]->meta.id + ": " + e.what();
    }
  });

  SweepResult result;
  std::vector<const PreparedRecording *> recs;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      recs.push_back(&*slots[i]);
    } else {
      result.warnings.push_back("sweep: skipped " + errors[i]);
    }
  }
  if (recs.empty()) throw DataError("sweep_thresholds: no usable dev recordings");

  // ---- global sweep ----
  std::vector<double> pooled;
  for (const auto *rec : recs)
    pooled.insert(pooled.end(), rec->score_sample.begin(), rec->score_sample.end());
  const std::vector<double> global_grid =
      linear_grid(pooled, sweep.grid_points, sweep.lo_percentile, sweep.hi_percentile);

  result.global_curve.domain = "";
  result.global_curve.thresholds = global_grid;
  result.global_curve.der.resize(global_grid.size());
  parallel_for(global_grid.size(), jobs, [&](std::size_t g) {
    result.global_curve.der[g] = aggregate_first_pass_der(recs, global_grid[g]);
  });

  double best_global = global_grid[0];
  double best_global_der = result.global_curve.der[0];
  for (std::size_t g = 1; g < global_grid.size(); ++g) {
    const double d = result.global_curve.der[g];
    // ties prefer the larger threshold
    if (d < best_global_der - 1e-12 ||
        (std::fabs(d - best_global_der) <= 1e-12 && global_grid[g] > best_global)) {
      best_global_der = d;
      best_global = global_grid[g];
    }
  }
  result.table.fallback = best_global;
  result.table.fallback_dev_der = best_global_der;

  if (!sweep.per_domain) return result;

  // ---- per-domain sweeps ----
  std::map<std::string, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < recs.size(); ++i) by_domain[recs[i]->domain].push_back(i);

  for (const auto &[domain, idx] : by_domain) {
    if (domain.empty()) continue;
    std::vector<double> dom_pool;
    std::vector<const PreparedRecording *> dom_recs;
    for (const auto i : idx) {
      dom_pool.insert(dom_pool.end(), recs[i]->score_sample.begin(),
                      recs[i]->score_sample.end());
      dom_recs.push_back(recs[i]);
    }
    std::vector<double> grid =
        linear_grid(dom_pool, sweep.grid_points, sweep.lo_percentile, sweep.hi_percentile);
    // The global optimum joins every domain grid: the selected threshold can
    // then never score worse than the global one on dev.
    grid.push_back(best_global);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    SweepCurve curve;
    curve.domain = domain;
    curve.thresholds = grid;
    curve.der.resize(grid.size());
    parallel_for(grid.size(), jobs, [&, &curve = curve, &dom_recs = dom_recs](std::size_t g) {
      curve.der[g] = aggregate_first_pass_der(dom_recs, curve.thresholds[g]);
    });

    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
      const double d = curve.der[g], bd = curve.der[best];
      if (d < bd - 1e-12) {
        best = g;
      } else if (std::fabs(d - bd) <= 1e-12) {
        const double cand_dist = std::fabs(grid[g] - best_global);
        const double best_dist = std::fabs(grid[best] - best_global);
        if (cand_dist < best_dist - 1e-12 ||
            (std::fabs(cand_dist - best_dist) <= 1e-12 && grid[g] > grid[best]))
          best = g;
      }
    }
    result.table.by_domain[domain] = grid[best];
    result.table.dev_der[domain] = curve.der[best];
    result.domain_curves.push_back(std::move(curve));
  }
  return result;
}

TrainedModels train_backend(const Manifest &manifest,
                            const std::optional<ivector::TvModel> &tv,
                            const BackendTrainOptions &opts, int jobs) {
  const auto entries = manifest.split("dev");
  struct PerRec {
    Eigen::MatrixXd emb;
    std::vector<std::string> speakers;  // per segment, globally unique ids
    std::string domain;
  };
  std::vector<std::optional<PerRec>> slots(entries.size());
  std::vector<std::string> errors(entries.size());

  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    const ManifestEntry &entry = *entries[i];
    try {
      if (!entry.rttm) throw DataError("no reference RTTM");
      const auto anns = formats::parse_rttm_file(*entry.rttm);
      const auto it = anns.find(entry.meta.id);
      if (it == anns.end()) throw DataError("reference RTTM has no rows");
      const Annotation &ref = it->second;

      const Timeline sad = load_sad(entry);
      SegmentGrid grid = slide_segments(entry.meta.id, sad, opts.segments);
      const Eigen::MatrixXd raw = raw_segment_embeddings(entry, grid.segments, tv);

      PerRec rec;
      rec.domain = entry.meta.domain.value_or("unknown");
      std::vector<Eigen::Index> keep;
      for (std::size_t s = 0; s < grid.segments.size(); ++s) {
        const auto &seg = grid.segments[s];
        // dominant reference speaker inside the window
        std::string best_spk;
        double best_dur = 0.0;
        for (const auto &spk : ref.speakers()) {
          const Timeline tl = ref.speaker_timeline(spk);
          const Timeline window = Timeline::canonicalize({{seg.onset, seg.offset()}});
          const double d = timeline_intersect(tl, window).total();
          if (d > best_dur + kTimeEpsilon) {
            best_dur = d;
            best_spk = spk;
          }
        }
        if (best_dur <= 0.0) continue;  // window with no attributed speech
        keep.push_back(static_cast<Eigen::Index>(s));
        rec.speakers.push_back(entry.meta.id + "#" + best_spk);
      }
      rec.emb.resize(static_cast<Eigen::Index>(keep.size()), raw.cols());
      for (std::size_t k = 0; k < keep.size(); ++k)
        rec.emb.row(static_cast<Eigen::Index>(k)) = raw.row(keep[k]);
      slots[i] = std::move(rec);
    } catch (const Error &e) {
      errors[i] = entry.meta.id + ": " + e.what();
    }
  });

  TrainedModels out;
  Eigen::Index total = 0;
  int dim = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) {
      if (!errors[i].empty())
        out.warnings.push_back("train_backend: skipped " + errors[i]);
      continue;
    }
    total += slots[i]->emb.rows();
    dim = static_cast<int>(slots[i]->emb.cols());
  }
  if (total < 4) throw DataError("train_backend: not enough labeled dev segments");

  Eigen::MatrixXd all(total, dim);
  std::vector<std::string> spk_names;
  std::vector<std::string> domains;
  Eigen::Index row = 0;
  for (auto &slot : slots) {
    if (!slot) continue;
    all.middleRows(row, slot->emb.rows()) = slot->emb;
    for (const auto &s : slot->speakers) spk_names.push_back(s);
    for (Eigen::Index k = 0; k < slot->emb.rows(); ++k) domains.push_back(slot->domain);
    row += slot->emb.rows();
  }

  out.base.whitener = backend::fit_whitener(all);
  const Eigen::MatrixXd whitened = out.base.whitener.apply_rows(all);

  std::map<std::string, int> spk_ids;
  std::vector<int> labels(spk_names.size());
  for (std::size_t i = 0; i < spk_names.size(); ++i) {
    const auto it = spk_ids.find(spk_names[i]);
    if (it == spk_ids.end()) {
      const int id = static_cast<int>(spk_ids.size());
      spk_ids[spk_names[i]] = id;
      labels[i] = id;
    } else {
      labels[i] = it->second;
    }
  }

  backend::PldaTrainOptions plda_opts;
  plda_opts.n_iter = opts.plda_iters;
  const backend::PldaModel plda = backend::plda_train_em(whitened, labels, plda_opts);

  // All-data adaptation (baseline and P2 share this model).
  out.base.plda =
      backend::plda_adapt(plda, whitened, opts.adapt_w_within, opts.adapt_w_between);

  if (opts.per_domain_adapt) {
    std::map<std::string, std::vector<Eigen::Index>> by_domain;
    for (Eigen::Index i = 0; i < whitened.rows(); ++i)
      by_domain[domains[static_cast<std::size_t>(i)]].push_back(i);
    for (const auto &[domain, idx] : by_domain) {
      if (static_cast<int>(idx.size()) < dim + 1) {
        out.warnings.push_back("train_backend: domain '" + domain +
                               "' has too few segments for adaptation, using the "
                               "global model");
        out.per_domain_plda[domain] = out.base.plda;
        continue;
      }
      Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), dim);
      for (std::size_t k = 0; k < idx.size(); ++k)
        sub.row(static_cast<Eigen::Index>(k)) = whitened.row(idx[k]);
      out.per_domain_plda[domain] =
          backend::plda_adapt(plda, sub, opts.adapt_w_within, opts.adapt_w_between);
    }
  }
  return out;
}

}  // namespace diarize
}  // namespace diar
