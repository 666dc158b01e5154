// tools/diarkit.cpp

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

// diarkit: batch driver for the domain-aware diarization toolkit.
//
// Subcommands: synth | analyze | ubm-train | tv-train | embed | adi-train |
// adi-eval | sweep | diarize | score. Logs go to stderr, data to files.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "diar/adi.hpp"
#include "diar/analysis.hpp"
#include "diar/dsp.hpp"
#include "diar/embeddings.hpp"
#include "diar/gmm.hpp"
#include "diar/manifest.hpp"
#include "diar/parallel.hpp"
#include "diar/pipeline.hpp"
#include "diar/rttm.hpp"
#include "diar/score.hpp"
#include "diar/synth.hpp"
#include "diar/tvspace.hpp"
#include "diar/uem.hpp"
#include "diar/wav.hpp"

namespace fs = std::filesystem;
using namespace diar;

namespace {

constexpr const char *kVersion = "diarkit 0.1.0";

void write_run_meta(const std::string &out_dir, CLI::App *sub) {
  std::ofstream meta(fs::path(out_dir) / "run.meta", std::ios::binary);
  meta << "version = " << kVersion << "\n";
  meta << "command = " << sub->get_name() << "\n";
  meta << sub->config_to_str(true, false);
}

Timeline uem_for(const ManifestEntry &entry) {
  double dur = entry.meta.duration;
  if (dur <= 0.0 && entry.sad) dur = formats::parse_sad_lab_file(*entry.sad).span_offset();
  if (dur <= 0.0) throw DataError(entry.meta.id + ": no usable duration for scoring");
  return Timeline::canonicalize({{0.0, dur}});
}

// Enumerates missing required inputs up front so a run fails before any work.
void require_files(const Manifest &manifest, const std::string &split, bool need_sad,
                   bool need_rttm, bool need_emb_or_wav) {
  std::vector<std::string> missing;
  for (const auto *e : manifest.split(split)) {
    if (need_sad && !e->sad) missing.push_back(e->meta.id + ": sad");
    if (need_rttm && !e->rttm) missing.push_back(e->meta.id + ": rttm");
    if (need_emb_or_wav && !e->emb && !e->wav)
      missing.push_back(e->meta.id + ": emb or wav");
  }
  if (!missing.empty()) {
    std::string msg = "missing required inputs:";
    for (const auto &m : missing) msg += "\n  " + m;
    throw DataError(msg);
  }
}

EmbeddingSet dev_recording_embeddings(const Manifest &manifest,
                                      const diarize::PipelineModels &models,
                                      const std::string &split,
                                      std::map<std::string, std::string> *labels) {
  EmbeddingSet set;
  for (const auto *e : manifest.split(split)) {
    if (!e->meta.domain)
      throw DataError(e->meta.id + ": domain label required for ADI");
    set.add(e->meta.id, diarize::recording_embedding(*e, models, {}));
    (*labels)[e->meta.id] = *e->meta.domain;
  }
  return set;
}

Eigen::MatrixXd pooled_dev_mfcc(const Manifest &manifest, int max_frames_per_rec) {
  std::vector<Eigen::MatrixXd> chunks;
  Eigen::Index total = 0;
  for (const auto *e : manifest.split("dev")) {
    if (!e->wav) continue;
    const auto wav = formats::read_wav_file(*e->wav, true);
    const auto sad = e->sad ? formats::parse_sad_lab_file(*e->sad) : Timeline();
    std::vector<double> speech;
    if (sad.empty()) {
      speech = wav.samples;
    } else {
      for (const auto &iv : sad.intervals()) {
        const auto b = static_cast<std::size_t>(iv.onset * wav.sample_rate);
        const auto en = std::min(wav.samples.size(),
                                 static_cast<std::size_t>(iv.offset * wav.sample_rate));
        for (std::size_t i = b; i < en; ++i) speech.push_back(wav.samples[i]);
      }
    }
    if (speech.size() < 4000) continue;
    Eigen::MatrixXd feats = dsp::mfcc(speech, wav.sample_rate,
                                      dsp::frame_spec_embedding(),
                                      dsp::mel_spec_embedding());
    if (feats.rows() > max_frames_per_rec) feats = feats.topRows(max_frames_per_rec);
    total += feats.rows();
    chunks.push_back(std::move(feats));
  }
  if (chunks.empty()) throw DataError("no dev WAV audio available for UBM features");
  Eigen::MatrixXd all(total, chunks[0].cols());
  Eigen::Index row = 0;
  for (const auto &c : chunks) {
    all.middleRows(row, c.rows()) = c;
    row += c.rows();
  }
  return all;
}

void write_system_rttms(const std::string &out_dir,
                        const diarize::PipelineRunResult &run) {
  fs::create_directories(fs::path(out_dir) / "rttm");
  std::map<std::string, Annotation> all;
  for (const auto &res : run.results) {
    const std::string rec = res.annotation.recording_id();
    formats::write_rttm_file((fs::path(out_dir) / "rttm" / (rec + ".rttm")).string(),
                             {{rec, res.annotation}});
    all.emplace(rec, res.annotation);
  }
  formats::write_rttm_file((fs::path(out_dir) / "system.rttm").string(), all);
}

diarize::PipelineModels load_models(const std::string &models_dir, bool want_adi) {
  diarize::PipelineModels models;
  models.base = backend::Backend::load((fs::path(models_dir) / "backend.pld1").string());
  for (const auto &entry : fs::directory_iterator(models_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("backend_", 0) == 0 && entry.path().extension() == ".pld1") {
      const std::string domain = name.substr(8, name.size() - 8 - 5);
      models.per_domain_plda[domain] =
          backend::Backend::load(entry.path().string()).plda;
    }
  }
  const fs::path adi_path = fs::path(models_dir) / "adi.adi1";
  if (fs::exists(adi_path)) models.adi_model = adi::CentroidModel::load(adi_path.string());
  else if (want_adi)
    throw DataError("models directory lacks adi.adi1 (needed for eval-mode P1/P2)");
  const fs::path tv_path = fs::path(models_dir) / "tv.ivm1";
  if (fs::exists(tv_path)) models.tv = ivector::TvModel::load(tv_path.string());
  return models;
}

int run_synth(const std::string &out_dir, int n_domains, int recordings, double duration,
              double separation, std::uint64_t seed, bool with_wav) {
  synth::SynthSpec spec = synth::default_spec(n_domains, seed);
  for (auto &d : spec.domains) {
    d.n_recordings = recordings;
    d.recording_duration = duration;
  }
  spec.domain_separation = separation;
  spec.with_wav = with_wav;
  const auto corpus = synth::gen_corpus(spec, out_dir);
  std::cerr << "synth: wrote " << corpus.manifest.entries().size()
            << " recordings under " << out_dir << "\n";
  std::cerr << "synth: manifest at " << corpus.manifest_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{std::string(kVersion) +
               " - acoustic domain identification and speaker diarization"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file; command-line overrides");

  // ---------- synth ----------
  auto *synth_cmd = app.add_subcommand("synth", "generate a synthetic multi-domain corpus");
  std::string synth_out = "corpus";
  int synth_domains = 11, synth_recordings = 4;
  double synth_duration = 90.0, synth_separation = 10.0;
  std::uint64_t synth_seed = 0;
  bool synth_wav = false;
  synth_cmd->add_option("--out", synth_out, "output directory")->capture_default_str();
  synth_cmd->add_option("--domains", synth_domains, "number of domains")
      ->capture_default_str();
  synth_cmd->add_option("--recordings", synth_recordings, "recordings per domain")
      ->capture_default_str();
  synth_cmd->add_option("--duration", synth_duration, "recording duration in seconds")
      ->capture_default_str();
  synth_cmd->add_option("--separation", synth_separation,
                        "domain separation in within-domain std units")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed, "master seed")->capture_default_str();
  synth_cmd->add_flag("--with-wav", synth_wav, "also write waveforms");

  // ---------- analyze ----------
  auto *analyze_cmd = app.add_subcommand("analyze", "corpus analyses (SNR, LTAS, ratios)");
  std::string analyze_manifest, analyze_out = "analysis";
  bool analyze_speech_only = false;
  analyze_cmd->add_option("--manifest", analyze_manifest, "manifest path")->required();
  analyze_cmd->add_option("--out", analyze_out, "output directory")->capture_default_str();
  analyze_cmd->add_flag("--speech-only", analyze_speech_only,
                        "restrict SNR estimation to SAD regions");

  // ---------- ubm-train ----------
  auto *ubm_cmd = app.add_subcommand("ubm-train", "train the diagonal GMM-UBM from dev audio");
  std::string ubm_manifest, ubm_out = "models/ubm.gmm";
  int ubm_components = 64, ubm_iters = 15;
  std::uint64_t ubm_seed = 0;
  int ubm_max_frames = 50000;
  ubm_cmd->add_option("--manifest", ubm_manifest, "manifest path")->required();
  ubm_cmd->add_option("--out", ubm_out, "output model path")->capture_default_str();
  ubm_cmd->add_option("--components", ubm_components, "GMM components")
      ->capture_default_str();
  ubm_cmd->add_option("--iters", ubm_iters, "EM iterations")->capture_default_str();
  ubm_cmd->add_option("--seed", ubm_seed, "seed")->capture_default_str();
  ubm_cmd->add_option("--max-frames", ubm_max_frames, "frames kept per recording")
      ->capture_default_str();

  // ---------- tv-train ----------
  auto *tv_cmd = app.add_subcommand("tv-train", "train the total-variability matrix");
  std::string tv_manifest, tv_ubm, tv_out = "models/tv.ivm1";
  int tv_rank = 100, tv_iters = 10;
  std::uint64_t tv_seed = 0;
  tv_cmd->add_option("--manifest", tv_manifest, "manifest path")->required();
  tv_cmd->add_option("--ubm", tv_ubm, "UBM model path")->required();
  tv_cmd->add_option("--out", tv_out, "output model path")->capture_default_str();
  tv_cmd->add_option("--rank", tv_rank, "i-vector dimension")->capture_default_str();
  tv_cmd->add_option("--iters", tv_iters, "EM iterations")->capture_default_str();
  tv_cmd->add_option("--seed", tv_seed, "seed")->capture_default_str();

  // ---------- embed ----------
  auto *embed_cmd = app.add_subcommand(
      "embed", "extract i-vector embeddings for every recording (writes a new manifest)");
  std::string embed_manifest, embed_tv, embed_out = "embedded";
  int embed_jobs = 1;
  embed_cmd->add_option("--manifest", embed_manifest, "manifest path")->required();
  embed_cmd->add_option("--tv", embed_tv, "TV model path")->required();
  embed_cmd->add_option("--out", embed_out, "output directory")->capture_default_str();
  embed_cmd->add_option("--jobs", embed_jobs, "parallel workers")->capture_default_str();

  // ---------- adi-train ----------
  auto *adi_train_cmd =
      app.add_subcommand("adi-train", "train the domain centroid model on dev recordings");
  std::string adi_train_manifest, adi_train_out = "models/adi.adi1";
  bool adi_no_normalize = false;
  std::string adi_train_split = "dev";
  adi_train_cmd->add_option("--manifest", adi_train_manifest, "manifest path")->required();
  adi_train_cmd->add_option("--out", adi_train_out, "output model path")
      ->capture_default_str();
  adi_train_cmd->add_option("--split", adi_train_split, "training split (dev|eval)")
      ->capture_default_str();
  adi_train_cmd->add_flag("--no-normalize", adi_no_normalize,
                          "skip length normalization before averaging");

  // ---------- adi-eval ----------
  auto *adi_eval_cmd = app.add_subcommand(
      "adi-eval", "repeated-random-split ADI evaluation on the dev split");
  std::string adi_eval_manifest, adi_eval_out = "adi_eval";
  int adi_n_train = 200, adi_repeats = 1000;
  std::uint64_t adi_seed = 0;
  adi_eval_cmd->add_option("--manifest", adi_eval_manifest, "manifest path")->required();
  adi_eval_cmd->add_option("--out", adi_eval_out, "output directory")
      ->capture_default_str();
  adi_eval_cmd->add_option("--n-train", adi_n_train, "training recordings per split")
      ->capture_default_str();
  adi_eval_cmd->add_option("--repeats", adi_repeats, "number of random splits")
      ->capture_default_str();
  adi_eval_cmd->add_option("--seed", adi_seed, "seed")->capture_default_str();

  // ---------- sweep ----------
  auto *sweep_cmd = app.add_subcommand(
      "sweep", "train the backend on dev and sweep AHC thresholds per domain");
  std::string sweep_manifest, sweep_out = "models";
  std::string sweep_mode = "P2";
  int sweep_points = 101, sweep_jobs = 1;
  double sweep_pca = 0.30;
  sweep_cmd->add_option("--manifest", sweep_manifest, "manifest path")->required();
  sweep_cmd->add_option("--out", sweep_out, "output models directory")
      ->capture_default_str();
  sweep_cmd->add_option("--mode", sweep_mode, "pipeline mode (baseline|P1|P2)")
      ->capture_default_str();
  sweep_cmd->add_option("--grid-points", sweep_points, "threshold grid size")
      ->capture_default_str();
  sweep_cmd->add_option("--pca-fraction", sweep_pca, "conversation PCA variance fraction")
      ->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep_jobs, "parallel workers")->capture_default_str();

  // ---------- diarize ----------
  auto *diarize_cmd = app.add_subcommand("diarize", "run the diarization pipeline");
  std::string dia_manifest, dia_models = "models", dia_out = "diarized";
  std::string dia_mode = "P2", dia_split = "eval";
  bool dia_no_reseg = false, dia_true_domains = false;
  int dia_jobs = 1;
  double dia_pca = 0.30, dia_kappa = 0.3, dia_ploop = 0.9;
  diarize_cmd->add_option("--manifest", dia_manifest, "manifest path")->required();
  diarize_cmd->add_option("--models", dia_models, "models directory (from sweep)")
      ->capture_default_str();
  diarize_cmd->add_option("--out", dia_out, "output directory")->capture_default_str();
  diarize_cmd->add_option("--mode", dia_mode, "baseline|P1|P2")->capture_default_str();
  diarize_cmd->add_option("--split", dia_split, "manifest split to process")
      ->capture_default_str();
  diarize_cmd->add_option("--jobs", dia_jobs, "parallel workers")->capture_default_str();
  diarize_cmd->add_option("--pca-fraction", dia_pca, "conversation PCA variance fraction")
      ->capture_default_str();
  diarize_cmd->add_option("--acoustic-scale", dia_kappa,
                          "re-segmentation emission scale")
      ->capture_default_str();
  diarize_cmd->add_option("--p-loop", dia_ploop, "re-segmentation self-transition prob")
      ->capture_default_str();
  diarize_cmd->add_flag("--no-reseg", dia_no_reseg, "skip HMM re-segmentation");
  diarize_cmd->add_flag("--true-domains", dia_true_domains,
                        "use manifest domain labels instead of ADI predictions");

  // ---------- score ----------
  auto *score_cmd = app.add_subcommand("score", "score system RTTMs against references");
  std::string score_manifest, score_sys, score_out = "scores";
  std::string score_split = "eval";
  double score_collar = 0.0;
  score_cmd->add_option("--manifest", score_manifest, "manifest path")->required();
  score_cmd->add_option("--sys", score_sys,
                        "system RTTM file or directory of <rec>.rttm files")
      ->required();
  score_cmd->add_option("--out", score_out, "output directory")->capture_default_str();
  score_cmd->add_option("--split", score_split, "manifest split to score")
      ->capture_default_str();
  score_cmd->add_option("--collar", score_collar, "collar in seconds")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      fs::create_directories(synth_out);
      const int rc = run_synth(synth_out, synth_domains, synth_recordings,
                               synth_duration, synth_separation, synth_seed, synth_wav);
      write_run_meta(synth_out, synth_cmd);
      return rc;
    }

    if (analyze_cmd->parsed()) {
      const Manifest manifest = Manifest::load(analyze_manifest);
      fs::create_directories(analyze_out);
      analysis::ReportOptions opts;
      opts.snr_speech_only = analyze_speech_only;
      const auto report = analysis::build_domain_report(manifest, analyze_out, opts);
      for (const auto &w : report.warnings) std::cerr << "analyze: warning: " << w << "\n";
      std::ofstream summary(fs::path(analyze_out) / "report.tsv", std::ios::binary);
      summary << "domain\tn\tsnr_q25\tsnr_q50\tsnr_q75\tmean_speech_pct\tmean_overlap_"
                 "pct\tltas\n";
      char buf[512];
      for (const auto &row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%s\t%d\t%.2f\t%.2f\t%.2f\t%.3f\t%.3f\t%s\n",
                      row.domain.c_str(), row.n_recordings, row.snr_quartiles[0],
                      row.snr_quartiles[1], row.snr_quartiles[2],
                      row.mean_speech_ratio, row.mean_overlap_pct,
                      row.ltas_path.c_str());
        summary << buf;
      }
      write_run_meta(analyze_out, analyze_cmd);
      return 0;
    }

    if (ubm_cmd->parsed()) {
      const Manifest manifest = Manifest::load(ubm_manifest);
      require_files(manifest, "dev", false, false, false);
      const Eigen::MatrixXd feats = pooled_dev_mfcc(manifest, ubm_max_frames);
      std::cerr << "ubm-train: " << feats.rows() << " frames, C=" << ubm_components
                << "\n";
      ivector::UbmTrainOptions opts;
      opts.n_iter = ubm_iters;
      opts.seed = ubm_seed;
      const auto ubm = ivector::train_ubm_em(feats, ubm_components, opts);
      fs::create_directories(fs::path(ubm_out).parent_path().empty()
                                 ? "."
                                 : fs::path(ubm_out).parent_path().string());
      std::ofstream f(ubm_out, std::ios::binary);
      f.write("IVMG", 4);
      ubm.write(f);
      if (!f) throw IoError("failed writing UBM: " + ubm_out);
      return 0;
    }

    if (tv_cmd->parsed()) {
      const Manifest manifest = Manifest::load(tv_manifest);
      std::ifstream uf(tv_ubm, std::ios::binary);
      if (!uf) throw IoError("cannot open UBM: " + tv_ubm);
      {
        char magic[4];
        uf.read(magic, 4);
        if (!uf || std::string(magic, 4) != "IVMG")
          throw BadMagicError("not a UBM file: " + tv_ubm, 0);
      }
      const auto ubm = ivector::DiagGmm::read(uf);
      // per-utterance statistics: one utterance per dev recording's SAD speech
      std::vector<ivector::BwStats> stats;
      for (const auto *e : manifest.split("dev")) {
        if (!e->wav) continue;
        const auto wav = formats::read_wav_file(*e->wav, true);
        const auto sad = e->sad ? formats::parse_sad_lab_file(*e->sad) : Timeline();
        const auto grid = diarize::slide_segments(
            e->meta.id, sad.empty()
                            ? Timeline::canonicalize(
                                  {{0.0, wav.samples.size() /
                                             static_cast<double>(wav.sample_rate)}})
                            : sad);
        for (const auto &seg : grid.segments) {
          const auto b = static_cast<std::size_t>(seg.onset * wav.sample_rate);
          const auto en = std::min(wav.samples.size(),
                                   static_cast<std::size_t>(seg.offset() * wav.sample_rate));
          if (en <= b) continue;
          const std::span<const double> slice(wav.samples.data() + b, en - b);
          const auto feats = dsp::mfcc(slice, wav.sample_rate,
                                       dsp::frame_spec_embedding(),
                                       dsp::mel_spec_embedding());
          stats.push_back(ivector::accumulate_bw_stats(feats, ubm));
        }
      }
      std::cerr << "tv-train: " << stats.size() << " utterances, R=" << tv_rank << "\n";
      ivector::TvTrainOptions opts;
      opts.n_iter = tv_iters;
      opts.seed = tv_seed;
      const auto tv = ivector::train_tv_em(stats, ubm, tv_rank, opts);
      if (!fs::path(tv_out).parent_path().empty())
        fs::create_directories(fs::path(tv_out).parent_path());
      tv.save(tv_out);
      return 0;
    }

    if (embed_cmd->parsed()) {
      const Manifest manifest = Manifest::load(embed_manifest);
      const auto tv = ivector::TvModel::load(embed_tv);
      fs::create_directories(fs::path(embed_out) / "emb");
      Manifest updated = manifest;
      const auto &entries = updated.entries();
      std::vector<std::string> emb_paths(entries.size()), rec_paths(entries.size());
      parallel_for(entries.size(), embed_jobs, [&](std::size_t i) {
        const ManifestEntry &e = entries[i];
        if (!e.wav || !e.sad) throw DataError(e.meta.id + ": embed needs wav and sad");
        const auto wav = formats::read_wav_file(*e.wav, true);
        const auto sad = formats::parse_sad_lab_file(*e.sad);
        const auto grid = diarize::slide_segments(e.meta.id, sad);
        EmbeddingSet segs(tv.rank());
        ivector::BwStats whole(tv.ubm.num_components(), tv.ubm.dim());
        for (const auto &seg : grid.segments) {
          const auto b = static_cast<std::size_t>(seg.onset * wav.sample_rate);
          const auto en = std::min(wav.samples.size(),
                                   static_cast<std::size_t>(seg.offset() * wav.sample_rate));
          const std::span<const double> slice(wav.samples.data() + b, en - b);
          const auto feats = dsp::mfcc(slice, wav.sample_rate,
                                       dsp::frame_spec_embedding(),
                                       dsp::mel_spec_embedding());
          const auto st = ivector::accumulate_bw_stats(feats, tv.ubm);
          segs.add(diarize::segment_key(e.meta.id, seg),
                   ivector::extract_ivector(tv, st));
          whole += st;
        }
        EmbeddingSet rec_level(tv.rank());
        rec_level.add(e.meta.id, ivector::extract_ivector(tv, whole));
        emb_paths[i] = (fs::path(embed_out) / "emb" / (e.meta.id + ".emb")).string();
        rec_paths[i] = (fs::path(embed_out) / "emb" / (e.meta.id + ".rec.emb")).string();
        formats::write_emb1_file(emb_paths[i], segs);
        formats::write_emb1_file(rec_paths[i], rec_level);
      });
      for (std::size_t i = 0; i < updated.entries().size(); ++i) {
        updated.entries()[i].emb = emb_paths[i];
        updated.entries()[i].rec_emb = rec_paths[i];
      }
      updated.save((fs::path(embed_out) / "manifest.cfg").string());
      write_run_meta(embed_out, embed_cmd);
      return 0;
    }

    if (adi_train_cmd->parsed()) {
      const Manifest manifest = Manifest::load(adi_train_manifest);
      diarize::PipelineModels models;  // rec_emb files only; no backend needed
      std::map<std::string, std::string> labels;
      const EmbeddingSet set =
          dev_recording_embeddings(manifest, models, adi_train_split, &labels);
      const DomainRegistry registry = manifest.domains();
      const auto model =
          adi::adi_train(set, labels, registry, !adi_no_normalize);
      for (const auto &w : model.warnings) std::cerr << "adi-train: warning: " << w << "\n";
      if (!fs::path(adi_train_out).parent_path().empty())
        fs::create_directories(fs::path(adi_train_out).parent_path());
      model.save(adi_train_out);
      std::cerr << "adi-train: " << model.domains.size() << " domains, dim "
                << model.dim << "\n";
      return 0;
    }

    if (adi_eval_cmd->parsed()) {
      const Manifest manifest = Manifest::load(adi_eval_manifest);
      diarize::PipelineModels models;
      std::map<std::string, std::string> labels;
      const EmbeddingSet set =
          dev_recording_embeddings(manifest, models, "dev", &labels);
      const DomainRegistry registry = manifest.domains();
      adi::CrossvalOptions opts;
      opts.n_train = adi_n_train;
      opts.n_repeats = adi_repeats;
      opts.seed = adi_seed;
      if (static_cast<std::size_t>(opts.n_train) >= set.size())
        opts.n_train = static_cast<int>(set.size()) - 1;
      const auto result = adi::adi_crossval(set, labels, registry, opts);

      fs::create_directories(adi_eval_out);
      std::ofstream metrics(fs::path(adi_eval_out) / "metrics.txt", std::ios::binary);
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "accuracy_mean = %.6f\naccuracy_std = %.6f\nmacro_f1_mean = "
                    "%.6f\nmacro_f1_std = %.6f\nuar_mean = %.6f\nuar_std = "
                    "%.6f\nmcc_mean = %.6f\nmcc_std = %.6f\nresampled_splits = %d\n",
                    result.mean.accuracy, result.stddev.accuracy, result.mean.macro_f1,
                    result.stddev.macro_f1, result.mean.uar, result.stddev.uar,
                    result.mean.mcc, result.stddev.mcc, result.resampled_splits);
      metrics << buf;
      std::ofstream conf(fs::path(adi_eval_out) / "confusion.csv", std::ios::binary);
      for (Eigen::Index i = 0; i < result.pooled_confusion.rows(); ++i) {
        for (Eigen::Index j = 0; j < result.pooled_confusion.cols(); ++j)
          conf << (j ? "," : "") << result.pooled_confusion(i, j);
        conf << "\n";
      }
      write_run_meta(adi_eval_out, adi_eval_cmd);
      std::cerr << "adi-eval: mean accuracy " << result.mean.accuracy << "\n";
      return 0;
    }

    if (sweep_cmd->parsed()) {
      const Manifest manifest = Manifest::load(sweep_manifest);
      require_files(manifest, "dev", true, true, true);
      fs::create_directories(sweep_out);

      diarize::BackendTrainOptions train_opts;
      const auto trained = diarize::train_backend(manifest, std::nullopt, train_opts,
                                                  sweep_jobs);
      for (const auto &w : trained.warnings) std::cerr << "sweep: warning: " << w << "\n";
      trained.base.save((fs::path(sweep_out) / "backend.pld1").string());
      for (const auto &[domain, plda] : trained.per_domain_plda) {
        backend::Backend b;
        b.whitener = trained.base.whitener;
        b.plda = plda;
        b.save((fs::path(sweep_out) / ("backend_" + domain + ".pld1")).string());
      }

      diarize::PipelineModels models;
      models.base = trained.base;
      models.per_domain_plda = trained.per_domain_plda;

      diarize::PipelineOptions popts;
      popts.mode = diarize::mode_from_string(sweep_mode);
      popts.use_true_domains = true;
      popts.pca_fraction = sweep_pca;
      diarize::SweepOptions sopts;
      sopts.grid_points = sweep_points;
      sopts.per_domain = popts.mode != diarize::Mode::kBaseline;
      const auto result = diarize::sweep_thresholds(manifest, models, popts, sopts,
                                                    sweep_jobs);
      for (const auto &w : result.warnings) std::cerr << "sweep: warning: " << w << "\n";
      result.table.save((fs::path(sweep_out) / "thresholds.tsv").string());

      auto write_curve = [&](const diarize::SweepCurve &curve, const std::string &name) {
        std::ofstream f(fs::path(sweep_out) / name, std::ios::binary);
        f << "threshold,dev_der\n";
        char buf[128];
        for (std::size_t g = 0; g < curve.thresholds.size(); ++g) {
          std::snprintf(buf, sizeof(buf), "%.9g,%.6f\n", curve.thresholds[g],
                        curve.der[g]);
          f << buf;
        }
      };
      write_curve(result.global_curve, "sweep_global.csv");
      for (const auto &curve : result.domain_curves) {
        std::string fname = "sweep_" + curve.domain + ".csv";
        std::replace(fname.begin(), fname.end(), ' ', '_');
        write_curve(curve, fname);
      }

      // the ADI model rides along when recording-level embeddings exist
      try {
        std::map<std::string, std::string> labels;
        const EmbeddingSet set =
            dev_recording_embeddings(manifest, models, "dev", &labels);
        const auto adi_model = adi::adi_train(set, labels, manifest.domains(), true);
        adi_model.save((fs::path(sweep_out) / "adi.adi1").string());
      } catch (const Error &e) {
        std::cerr << "sweep: ADI model skipped: " << e.what() << "\n";
      }

      write_run_meta(sweep_out, sweep_cmd);
      std::cerr << "sweep: fallback threshold " << result.table.fallback << " (dev DER "
                << result.table.fallback_dev_der << ")\n";
      return 0;
    }

    if (diarize_cmd->parsed()) {
      const Manifest manifest = Manifest::load(dia_manifest);
      require_files(manifest, dia_split, true, false, true);
      const diarize::Mode mode = diarize::mode_from_string(dia_mode);
      const bool want_adi = mode != diarize::Mode::kBaseline && !dia_true_domains;
      diarize::PipelineModels models = load_models(dia_models, want_adi);
      const auto table = diarize::ThresholdTable::load(
          (fs::path(dia_models) / "thresholds.tsv").string());

      diarize::PipelineOptions opts;
      opts.mode = mode;
      opts.use_true_domains = dia_true_domains;
      opts.resegment = !dia_no_reseg;
      opts.pca_fraction = dia_pca;
      opts.reseg.acoustic_scale = dia_kappa;
      opts.reseg.p_loop = dia_ploop;

      const auto run =
          diarize::diarize_pipeline(manifest, dia_split, models, table, opts, dia_jobs);
      fs::create_directories(dia_out);
      write_system_rttms(dia_out, run);
      for (const auto &err : run.errors) std::cerr << "diarize: skipped " << err << "\n";
      std::ofstream log(fs::path(dia_out) / "diarize.log", std::ios::binary);
      for (const auto &res : run.results) {
        log << res.annotation.recording_id() << "\tdomain=" << res.domain_used
            << "\tthreshold=" << res.threshold_used
            << "\tsegments=" << res.n_segments
            << "\tclusters_first=" << res.n_clusters_first_pass
            << "\tclusters_final=" << res.n_clusters_final << "\n";
        for (const auto &w : res.warnings) log << "# " << w << "\n";
      }
      write_run_meta(dia_out, diarize_cmd);
      if (!run.errors.empty() && run.results.empty())
        throw DataError("diarize: every recording failed");
      std::cerr << "diarize: wrote " << run.results.size() << " recordings to "
                << dia_out << "\n";
      return 0;
    }

    if (score_cmd->parsed()) {
      const Manifest manifest = Manifest::load(score_manifest);
      const auto entries = manifest.split(score_split);
      // enumerate missing inputs before any scoring work
      std::vector<std::string> missing;
      std::map<std::string, Annotation> sys;
      if (fs::is_directory(score_sys)) {
        for (const auto *e : entries) {
          const fs::path p = fs::path(score_sys) / (e->meta.id + ".rttm");
          if (!fs::exists(p)) {
            missing.push_back(p.string());
            continue;
          }
          const auto anns = formats::parse_rttm_file(p.string());
          const auto it = anns.find(e->meta.id);
          if (it != anns.end()) sys.emplace(e->meta.id, it->second);
        }
      } else if (fs::exists(score_sys)) {
        sys = formats::parse_rttm_file(score_sys);
      } else {
        missing.push_back(score_sys);
      }
      for (const auto *e : entries)
        if (!e->rttm) missing.push_back(e->meta.id + ": reference rttm");
      if (!missing.empty()) {
        std::string msg = "score: missing inputs:";
        for (const auto &m : missing) msg += "\n  " + m;
        throw DataError(msg);
      }

      std::vector<scoring::ScoreRow> rows;
      std::vector<bool> core_flags;
      for (const auto *e : entries) {
        const auto refs = formats::parse_rttm_file(*e->rttm);
        const auto rit = refs.find(e->meta.id);
        if (rit == refs.end()) {
          std::cerr << "score: warning: no reference rows for " << e->meta.id << "\n";
          continue;
        }
        const auto sit = sys.find(e->meta.id);
        const Annotation system =
            sit == sys.end() ? Annotation(e->meta.id) : sit->second;
        scoring::DerOptions dopts;
        dopts.collar = score_collar;
        rows.push_back(scoring::score_recording(rit->second, system, uem_for(*e), dopts));
        core_flags.push_back(e->core);
      }
      if (rows.empty()) throw DataError("score: nothing to score");
      const auto report = scoring::aggregate_scores(std::move(rows), core_flags);
      fs::create_directories(score_out);
      std::ofstream tsv(fs::path(score_out) / "score.tsv", std::ios::binary);
      scoring::write_score_tsv(tsv, report);
      write_run_meta(score_out, score_cmd);
      for (const auto &agg : report.aggregates)
        std::cerr << "score: " << agg.condition << " DER " << agg.der_pct << " JER "
                  << agg.jer_pct << " over " << agg.n_recordings << " recordings\n";
      return 0;
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
