// diar/manifest.hpp

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

// Experiment manifest: a flat key=value file describing the corpus.
//
//   recording.<id>.wav         = path (optional)
//   recording.<id>.sad         = path to SAD .lab (optional)
//   recording.<id>.rttm        = path to reference RTTM (optional)
//   recording.<id>.emb         = path to segment-level EMB1/TSV (optional)
//   recording.<id>.rec_emb     = path to recording-level EMB1/TSV (optional)
//   recording.<id>.domain      = domain label (optional)
//   recording.<id>.split       = dev | eval
//   recording.<id>.core        = 0 | 1 (condition tag, default 1)
//   recording.<id>.sample_rate = Hz (default 16000)
//   recording.<id>.duration    = seconds
//
// Paths are resolved relative to the manifest file. Every referenced path
// must exist at load time; unknown keys are rejected.

#ifndef DIAR_MANIFEST_HPP_
#define DIAR_MANIFEST_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diar/core.hpp"

namespace diar {

struct ManifestEntry {
  RecordingMeta meta;
  std::optional<std::string> wav;
  std::optional<std::string> sad;
  std::optional<std::string> rttm;
  std::optional<std::string> emb;      // segment-level embeddings
  std::optional<std::string> rec_emb;  // recording-level embeddings
  std::string split = "dev";           // dev | eval
  bool core = true;
};

class Manifest {
 public:
  static Manifest load(const std::string &path);
  void save(const std::string &path) const;

  const std::vector<ManifestEntry> &entries() const { return entries_; }
  std::vector<ManifestEntry> &entries() { return entries_; }
  const ManifestEntry &at(const std::string &id) const;
  bool contains(const std::string &id) const;

  void add(ManifestEntry entry);

  std::vector<const ManifestEntry *> split(const std::string &which) const;
  /// Registry seeded with the DIHARD domains plus every domain the manifest
  /// mentions, in first-appearance order.
  DomainRegistry domains() const;

 private:
  std::vector<ManifestEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace diar

#endif  // DIAR_MANIFEST_HPP_
