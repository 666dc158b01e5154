// diar/score.hpp

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

// DER and JER with optimal reference-to-system speaker mapping. Conventions:
// no collar by default, overlap regions scored.

#ifndef DIAR_SCORE_HPP_
#define DIAR_SCORE_HPP_

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "diar/core.hpp"

namespace diar {
namespace scoring {

/// One-to-one partial map maximizing total ref/sys overlap duration.
/// Pairs with zero overlap are dropped.
std::map<std::string, std::string> optimal_mapping(const Annotation &ref,
                                                   const Annotation &sys,
                                                   const Timeline &uem);

struct ScoreRow {
  std::string recording;
  std::string condition = "full";  // "core" when the recording is core-tagged
  double der_pct = 0.0;
  double jer_pct = 0.0;
  double miss_pct = 0.0;
  double fa_pct = 0.0;
  double confusion_pct = 0.0;
  double ref_speech_s = 0.0;  // total reference speaker time (denominator)
  // raw error seconds, used for duration-weighted aggregation
  double miss_s = 0.0, fa_s = 0.0, confusion_s = 0.0;
  std::vector<double> speaker_jers;  // one per reference speaker, in [0, 1]
};

struct DerOptions {
  double collar = 0.0;  // seconds excluded around each reference turn boundary
};

/// Region-decomposition DER over the UEM. Components satisfy
/// der = miss + fa + confusion.
ScoreRow der(const Annotation &ref, const Annotation &sys, const Timeline &uem,
             const DerOptions &opts = {});

/// Mean over reference speakers of 1 - Jaccard(ref_i, sys_{m(i)}) within the
/// UEM, times 100. Fills jer_pct and speaker_jers on the given row.
double jer(const Annotation &ref, const Annotation &sys, const Timeline &uem);

/// Scores one recording (DER + JER in a single row).
ScoreRow score_recording(const Annotation &ref, const Annotation &sys,
                         const Timeline &uem, const DerOptions &opts = {});

struct AggregateRow {
  std::string condition;  // "full" or "core"
  int n_recordings = 0;
  double der_pct = 0.0;   // duration-weighted
  double jer_pct = 0.0;   // mean over all reference speakers
  double miss_pct = 0.0;
  double fa_pct = 0.0;
  double confusion_pct = 0.0;
  double ref_speech_s = 0.0;
};

struct ScoreReport {
  std::vector<ScoreRow> rows;
  std::vector<AggregateRow> aggregates;  // full always, core when tagged
};

/// Aggregates rows; `core_flags` marks rows included in the core condition.
ScoreReport aggregate_scores(std::vector<ScoreRow> rows,
                             const std::vector<bool> &core_flags);

/// score.tsv: one row per recording plus aggregate footer rows.
void write_score_tsv(std::ostream &os, const ScoreReport &report);

}  // namespace scoring
}  // namespace diar

#endif  // DIAR_SCORE_HPP_
