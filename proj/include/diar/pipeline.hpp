// diar/pipeline.hpp

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

// The diarization pipeline: segmentation under reference SAD, embedding
// lookup or extraction, whitening, conversation-dependent PCA, PLDA scoring,
// threshold-stopped AHC, per-domain threshold sweeping, and HMM smoothing.
//
// Modes: baseline uses the fallback threshold for every recording; P1 uses
// domain thresholds with per-domain adapted PLDA; P2 uses domain thresholds
// with the all-data adapted PLDA (baseline and P2 share the PLDA, so a
// threshold table that maps every domain to the fallback makes them equal).

#ifndef DIAR_PIPELINE_HPP_
#define DIAR_PIPELINE_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "diar/adi.hpp"
#include "diar/ahc.hpp"
#include "diar/core.hpp"
#include "diar/manifest.hpp"
#include "diar/plda.hpp"
#include "diar/resegment.hpp"
#include "diar/segments.hpp"
#include "diar/tvspace.hpp"

namespace diar {
namespace diarize {

/// Domain -> AHC stopping threshold, with a mandatory global fallback.
struct ThresholdTable {
  std::map<std::string, double> by_domain;
  double fallback = 0.0;
  std::map<std::string, double> dev_der;  // diagnostics written to thresholds.tsv
  double fallback_dev_der = 0.0;

  double at(const std::string &domain) const {
    const auto it = by_domain.find(domain);
    return it == by_domain.end() ? fallback : it->second;
  }

  void save(const std::string &path) const;
  static ThresholdTable load(const std::string &path);
};

enum class Mode { kBaseline, kP1, kP2 };
Mode mode_from_string(const std::string &s);
std::string to_string(Mode m);

struct PipelineModels {
  backend::Backend base;  // whitener + all-data adapted PLDA (baseline / P2)
  std::map<std::string, backend::PldaModel> per_domain_plda;  // P1
  std::optional<adi::CentroidModel> adi_model;  // eval-mode domain prediction
  std::optional<ivector::TvModel> tv;           // internal embedding extractor
};

struct PipelineOptions {
  Mode mode = Mode::kBaseline;
  SegmentSpec segments;
  double pca_fraction = 0.30;
  bool resegment = true;
  ResegmentOptions reseg;
  /// Dev protocol: use manifest domain labels; eval protocol predicts them.
  bool use_true_domains = false;
};

struct DiarizationResult {
  Annotation annotation;
  std::string domain_used;
  double threshold_used = 0.0;
  int n_segments = 0;
  int n_clusters_first_pass = 0;
  int n_clusters_final = 0;
  std::vector<std::string> warnings;
};

/// A recording prepared up to the threshold-independent stage: segment grid,
/// projected embeddings, projected PLDA, score matrix and the AHC trace.
struct PreparedRecording {
  std::string id;
  double duration = 0.0;
  bool core = true;
  Timeline sad;
  std::vector<Segment> segments;
  std::vector<std::size_t> segment_interval;  // SAD interval index per segment
  Eigen::MatrixXd projected;                  // segments x k
  backend::PldaModel plda_projected;
  std::optional<AhcTrace> trace;
  std::vector<double> score_sample;  // upper triangle of the score matrix
  std::string domain;  // domain used for threshold lookup
  std::optional<Annotation> reference;
  std::vector<std::string> warnings;
};

/// Runs segmentation, embedding, whitening, PCA and scoring for one
/// recording. The domain is the true label (dev protocol) or the ADI
/// prediction (eval protocol); baseline mode leaves it empty.
PreparedRecording prepare_recording(const ManifestEntry &entry,
                                    const PipelineModels &models,
                                    const PipelineOptions &opts);

/// Cuts the trace at `threshold` and materializes the output annotation:
/// consecutive segment regions split at overlap midpoints, one cluster label
/// per instant, covering the SAD exactly.
Annotation labels_to_annotation(const PreparedRecording &rec,
                                const std::vector<int> &labels);

/// Full per-recording pass at a threshold table (AHC cut + optional HMM
/// smoothing).
DiarizationResult diarize_prepared(const PreparedRecording &rec,
                                   const ThresholdTable &thresholds,
                                   const PipelineOptions &opts);

struct PipelineRunResult {
  std::vector<DiarizationResult> results;  // manifest order, skipped omitted
  std::vector<std::string> errors;         // one per skipped recording
};

/// Batch driver over one manifest split; parallel over recordings with
/// index-ordered reduction, so outputs are independent of `jobs`.
PipelineRunResult diarize_pipeline(const Manifest &manifest, const std::string &split,
                                   const PipelineModels &models,
                                   const ThresholdTable &thresholds,
                                   const PipelineOptions &opts, int jobs = 1);

struct SweepCurve {
  std::string domain;  // empty for the global curve
  std::vector<double> thresholds;
  std::vector<double> der;  // aggregate dev DER at each threshold
};

struct SweepOptions {
  int grid_points = 101;
  double lo_percentile = 1.0;
  double hi_percentile = 99.0;
  bool per_domain = true;  // false: global threshold only
};

struct SweepResult {
  ThresholdTable table;
  SweepCurve global_curve;
  std::vector<SweepCurve> domain_curves;
  std::vector<std::string> warnings;
};

/// First-pass threshold sweep on the dev split. The global best threshold is
/// appended to every domain grid, so each domain's selected threshold scores
/// no worse than the global one on dev by construction. Ties prefer the
/// threshold closest to the global optimum, then the larger value.
SweepResult sweep_thresholds(const Manifest &manifest, const PipelineModels &models,
                             const PipelineOptions &opts, const SweepOptions &sweep,
                             int jobs = 1);

struct BackendTrainOptions {
  SegmentSpec segments;
  int plda_iters = 20;
  double adapt_w_within = 0.75;
  double adapt_w_between = 0.25;
  bool per_domain_adapt = true;  // also produce the P1 per-domain models
};

struct TrainedModels {
  backend::Backend base;
  std::map<std::string, backend::PldaModel> per_domain_plda;
  std::vector<std::string> warnings;
};

/// Trains whitener + PLDA from the dev split's reference speaker labels and
/// produces the adapted variants (all-data for baseline/P2; per-domain for
/// P1). Embeddings come from per-recording EMB1 files or the TV extractor.
TrainedModels train_backend(const Manifest &manifest,
                            const std::optional<ivector::TvModel> &tv,
                            const BackendTrainOptions &opts, int jobs = 1);

/// Recording-level embedding for ADI: the rec_emb file entry when present,
/// otherwise the mean of the recording's raw segment embeddings.
Eigen::VectorXd recording_embedding(const ManifestEntry &entry,
                                    const PipelineModels &models,
                                    const SegmentSpec &segments);

}  // namespace diarize
}  // namespace diar

#endif  // DIAR_PIPELINE_HPP_
