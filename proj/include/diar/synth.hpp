// diar/synth.hpp

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

// Synthetic multi-domain corpus generator. Recording-level embeddings follow
// a domain -> recording Gaussian hierarchy (controls how separable the
// domains are); segment-level embeddings follow speaker direction + session
// noise geometry on the unit sphere (score_offset moves the same/different
// speaker similarity bands so that no single clustering threshold fits every
// domain); turn sequences come from independent two-state talk/silence
// processes calibrated to the overlap target; waveforms are gamma-amplitude
// speech plus Gaussian noise at the target SNR.

#ifndef DIAR_SYNTH_HPP_
#define DIAR_SYNTH_HPP_

#include <optional>
#include <string>
#include <vector>

#include "diar/core.hpp"
#include "diar/manifest.hpp"
#include "diar/segments.hpp"

namespace diar {
namespace synth {

struct DomainSpec {
  std::string name;
  int n_recordings = 4;  // alternating dev/eval tags
  int min_speakers = 2;
  int max_speakers = 4;
  double overlap_pct = 15.0;     // target percent of speech time
  double snr_db = 20.0;          // waveform SNR target
  double score_offset = 0.0;     // in [0, 1]; shifts the similarity bands
  double recording_duration = 90.0;  // seconds
};

struct SynthSpec {
  std::vector<DomainSpec> domains;
  int embedding_dim = 16;
  double domain_separation = 10.0;  // in within-domain std units
  double speaker_gap = 0.25;        // same-vs-cross cosine band gap
  bool with_wav = false;
  int sample_rate = 16000;
  std::uint64_t seed = 0;
  diarize::SegmentSpec segments;  // grid used for segment-level embeddings

  void validate() const;
};

/// Spec with `n` domains named dom00.. with evenly spread score offsets.
SynthSpec default_spec(int n_domains = 11, std::uint64_t seed = 0);

struct GeneratedCorpus {
  std::string manifest_path;
  Manifest manifest;
};

/// Writes WAV/SAD/RTTM/EMB1 files plus the manifest under out_dir. Byte
/// identical for identical specs (including the seed).
GeneratedCorpus gen_corpus(const SynthSpec &spec, const std::string &out_dir);

}  // namespace synth
}  // namespace diar

#endif  // DIAR_SYNTH_HPP_
