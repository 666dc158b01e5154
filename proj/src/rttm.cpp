// src/rttm.cpp

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

#include "diar/rttm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace diar {
namespace formats {

namespace {

std::vector<std::string> split_ws(const std::string &line) {
  std::vector<std::string> fields;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) fields.push_back(tok);
  return fields;
}

double parse_seconds(const std::string &s, const char *what, std::size_t lineno) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception &) {
    throw ParseError(std::string("RTTM: bad ") + what + " field '" + s + "'", lineno);
  }
  if (pos != s.size() || !std::isfinite(v))
    throw ParseError(std::string("RTTM: bad ") + what + " field '" + s + "'", lineno);
  return v;
}

}  // namespace

std::map<std::string, Annotation> parse_rttm(std::istream &is) {
  std::map<std::string, std::vector<Turn>> turns;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == ';' || line[0] == '#') continue;  // comment rows
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() < 9)
      throw ParseError("RTTM: expected at least 9 fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    if (fields[0] != "SPEAKER")
      throw ParseError("RTTM: expected type SPEAKER, got '" + fields[0] + "'", lineno);
    const std::string &rec = fields[1];
    const double onset = parse_seconds(fields[3], "onset", lineno);
    const double dur = parse_seconds(fields[4], "duration", lineno);
    const std::string &spk = fields[7];
    if (onset < 0.0)
      throw ParseError("RTTM: negative onset " + fields[3], lineno);
    if (dur <= 0.0)
      throw ParseError("RTTM: non-positive duration " + fields[4], lineno);
    if (rec.empty() || spk.empty())
      throw ParseError("RTTM: empty recording or speaker field", lineno);
    turns[rec].emplace_back(rec, spk, onset, dur);
  }
  std::map<std::string, Annotation> out;
  for (auto &[rec, tv] : turns) out.emplace(rec, Annotation(rec, std::move(tv)));
  return out;
}

std::map<std::string, Annotation> parse_rttm_file(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open RTTM file: " + path);
  return parse_rttm(f);
}

void write_rttm(std::ostream &os, const Annotation &ann) {
  char buf[64];
  for (const auto &t : ann.turns()) {
    std::snprintf(buf, sizeof(buf), "%.3f %.3f", t.onset, t.duration);
    os << "SPEAKER " << t.recording_id << " 1 " << buf << " <NA> <NA> "
       << t.speaker_id << " <NA> <NA>\n";
  }
}

void write_rttm(std::ostream &os, const std::map<std::string, Annotation> &anns) {
  for (const auto &[rec, ann] : anns) write_rttm(os, ann);
}

void write_rttm_file(const std::string &path,
                     const std::map<std::string, Annotation> &anns) {
  std::ofstream f(path, std::ios::binary);  // binary: no CRLF translation
  if (!f) throw IoError("cannot open RTTM file for writing: " + path);
  write_rttm(f, anns);
  if (!f) throw IoError("failed writing RTTM file: " + path);
}

}  // namespace formats
}  // namespace diar
