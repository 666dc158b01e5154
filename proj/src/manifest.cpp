// src/manifest.cpp

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

#include "diar/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace diar {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string resolve_path(const fs::path &base, const std::string &rel,
                         const std::string &key, std::size_t lineno) {
  fs::path p(rel);
  if (p.is_relative()) p = base / p;
  if (!fs::exists(p))
    throw ParseError("manifest: " + key + " references missing file '" +
                         p.string() + "'",
                     lineno);
  return p.lexically_normal().string();
}

}  // namespace

Manifest Manifest::load(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();

  // Collect raw keys first so entries come out in first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, std::pair<std::string, std::size_t>>> raw;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("manifest: expected 'key = value'", lineno);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.rfind("recording.", 0) != 0)
      throw ParseError("manifest: unknown key '" + key + "'", lineno);
    const std::string rest = key.substr(10);
    const auto dot = rest.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= rest.size())
      throw ParseError("manifest: malformed key '" + key + "'", lineno);
    const std::string id = rest.substr(0, dot);
    const std::string field = rest.substr(dot + 1);
    if (!raw.count(id)) order.push_back(id);
    auto &fields = raw[id];
    if (fields.count(field))
      throw ParseError("manifest: duplicate key '" + key + "'", lineno);
    fields[field] = {value, lineno};
  }

  Manifest m;
  for (const auto &id : order) {
    ManifestEntry e;
    e.meta.id = id;
    for (const auto &[field, vp] : raw[id]) {
      const auto &[value, ln] = vp;
      if (field == "wav")
        e.wav = resolve_path(base, value, "recording." + id + ".wav", ln);
      else if (field == "sad")
        e.sad = resolve_path(base, value, "recording." + id + ".sad", ln);
      else if (field == "rttm")
        e.rttm = resolve_path(base, value, "recording." + id + ".rttm", ln);
      else if (field == "emb")
        e.emb = resolve_path(base, value, "recording." + id + ".emb", ln);
      else if (field == "rec_emb")
        e.rec_emb = resolve_path(base, value, "recording." + id + ".rec_emb", ln);
      else if (field == "domain")
        e.meta.domain = value;
      else if (field == "split") {
        if (value != "dev" && value != "eval")
          throw ParseError("manifest: split must be dev or eval, got '" + value + "'", ln);
        e.split = value;
      } else if (field == "core") {
        if (value != "0" && value != "1")
          throw ParseError("manifest: core must be 0 or 1, got '" + value + "'", ln);
        e.core = (value == "1");
      } else if (field == "sample_rate") {
        try {
          e.meta.sample_rate = std::stoi(value);
        } catch (const std::exception &) {
          throw ParseError("manifest: bad sample_rate '" + value + "'", ln);
        }
      } else if (field == "duration") {
        try {
          e.meta.duration = std::stod(value);
        } catch (const std::exception &) {
          throw ParseError("manifest: bad duration '" + value + "'", ln);
        }
      } else {
        throw ParseError("manifest: unknown field '" + field + "' for recording '" +
                             id + "'",
                         ln);
      }
    }
    m.add(std::move(e));
  }
  return m;
}

void Manifest::save(const std::string &path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open manifest for writing: " + path);
  const fs::path base = fs::path(path).parent_path();
  char buf[64];
  for (const auto &e : entries_) {
    const std::string p = "recording." + e.meta.id + ".";
    auto rel = [&](const std::string &abs) {
      const fs::path r = fs::path(abs).lexically_relative(base.empty() ? "." : base);
      return (r.empty() || r.native().rfind("..", 0) == 0) ? abs : r.string();
    };
    if (e.wav) f << p << "wav = " << rel(*e.wav) << "\n";
    if (e.sad) f << p << "sad = " << rel(*e.sad) << "\n";
    if (e.rttm) f << p << "rttm = " << rel(*e.rttm) << "\n";
    if (e.emb) f << p << "emb = " << rel(*e.emb) << "\n";
    if (e.rec_emb) f << p << "rec_emb = " << rel(*e.rec_emb) << "\n";
    if (e.meta.domain) f << p << "domain = " << *e.meta.domain << "\n";
    f << p << "split = " << e.split << "\n";
    f << p << "core = " << (e.core ? 1 : 0) << "\n";
    f << p << "sample_rate = " << e.meta.sample_rate << "\n";
    std::snprintf(buf, sizeof(buf), "%.3f", e.meta.duration);
    f << p << "duration = " << buf << "\n";
  }
  if (!f) throw IoError("failed writing manifest: " + path);
}

const ManifestEntry &Manifest::at(const std::string &id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw DataError("manifest: unknown recording '" + id + "'");
  return entries_[it->second];
}

bool Manifest::contains(const std::string &id) const { return index_.count(id) > 0; }

void Manifest::add(ManifestEntry entry) {
  if (index_.count(entry.meta.id))
    throw InvalidArgument("manifest: duplicate recording id '" + entry.meta.id + "'");
  index_[entry.meta.id] = entries_.size();
  entries_.push_back(std::move(entry));
}

std::vector<const ManifestEntry *> Manifest::split(const std::string &which) const {
  std::vector<const ManifestEntry *> out;
  for (const auto &e : entries_)
    if (e.split == which) out.push_back(&e);
  return out;
}

DomainRegistry Manifest::domains() const {
  DomainRegistry reg;
  for (const auto &e : entries_)
    if (e.meta.domain) reg.register_domain(*e.meta.domain);
  return reg;
}

}  // namespace diar
