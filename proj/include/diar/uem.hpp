// diar/uem.hpp

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

#ifndef DIAR_UEM_HPP_
#define DIAR_UEM_HPP_

#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "diar/core.hpp"

namespace diar {
namespace formats {

/// UEM rows: "recording channel onset offset". Touching rows merge.
std::map<std::string, Timeline> parse_uem(std::istream &is);
std::map<std::string, Timeline> parse_uem_file(const std::string &path);

/// SAD label rows: "onset offset speech". The file carries a single
/// recording's regions; the caller supplies the recording id (the manifest
/// maps files to recordings).
Timeline parse_sad_lab(std::istream &is);
Timeline parse_sad_lab_file(const std::string &path);

void write_uem(std::ostream &os, const std::map<std::string, Timeline> &uem);
void write_sad_lab(std::ostream &os, const Timeline &sad);
void write_sad_lab_file(const std::string &path, const Timeline &sad);

}  // namespace formats
}  // namespace diar

#endif  // DIAR_UEM_HPP_
