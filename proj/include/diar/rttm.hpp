// diar/rttm.hpp

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

#ifndef DIAR_RTTM_HPP_
#define DIAR_RTTM_HPP_

#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "diar/core.hpp"

namespace diar {
namespace formats {

/// Parses NIST 10-field RTTM. Only SPEAKER rows are accepted; malformed rows
/// raise ParseError with the offending line number.
std::map<std::string, Annotation> parse_rttm(std::istream &is);
std::map<std::string, Annotation> parse_rttm_file(const std::string &path);

/// Canonical writer: rows sorted by (recording, onset, speaker), onset and
/// duration as fixed-point with 3 decimals. parse(write(parse(x))) == parse(x).
void write_rttm(std::ostream &os, const std::map<std::string, Annotation> &anns);
void write_rttm(std::ostream &os, const Annotation &ann);
void write_rttm_file(const std::string &path,
                     const std::map<std::string, Annotation> &anns);

}  // namespace formats
}  // namespace diar

#endif  // DIAR_RTTM_HPP_
