// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/manifest.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "piets/csv.hpp"
#include "piets/errors.hpp"

namespace piets {

std::filesystem::path RunManifest::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

RunManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  RunManifest m;
  m.base_dir = base_dir;
  try {
    m.origin = j.value("origin", std::string());
    for (const auto& s : j.at("sources")) {
      ManifestSource src;
      src.id = s.at("id").get<std::string>();
      src.path = s.at("path").get<std::string>();
      const auto role = s.value("role", std::string("feature"));
      if (role != "target" && role != "feature") {
        throw ParseError("manifest: source '" + src.id + "' has unknown role '" + role + "'");
      }
      src.is_target = role == "target";
      src.target_column = s.value("target_column", std::string("target"));
      m.sources.push_back(std::move(src));
    }
    m.data.lag = j.value("lag", m.data.lag);
    m.data.horizon = j.value("horizon", m.data.horizon);
    m.data.normalize = j.value("normalize", m.data.normalize);
    if (j.contains("split")) {
      m.data.train_frac = j["split"].value("train", m.data.train_frac);
      m.data.val_frac = j["split"].value("val", m.data.val_frac);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      m.train.epochs = t.value("epochs", m.train.epochs);
      m.train.lr = t.value("lr", m.train.lr);
      m.train.hidden = t.value("hidden", m.train.hidden);
      m.train.batch_size = t.value("batch_size", m.train.batch_size);
      m.train.seed = t.value("seed", m.train.seed);
      m.train.warm_start = t.value("warm_start", m.train.warm_start);
      m.train.attention = t.value("attention", m.train.attention);
      m.train.pretrain_epochs = t.value("pretrain_epochs", m.train.pretrain_epochs);
      if (t.contains("pretrain_objective")) {
        m.train.pretrain_objective = parse_objective(t["pretrain_objective"].get<std::string>());
      }
    }
    if (j.contains("seeds")) m.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("out")) m.out = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (m.sources.empty()) throw ParseError("manifest: no sources listed");
  std::size_t targets = 0;
  for (const auto& s : m.sources) targets += s.is_target ? 1 : 0;
  if (targets != 1) {
    throw ParseError("manifest: exactly one source must have role 'target', found " + std::to_string(targets));
  }
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  RunManifest m = parse_manifest(ss.str(), path.parent_path());
  for (const auto& s : m.sources) {
    if (!std::filesystem::exists(m.resolve(s.path))) {
      throw IoError("manifest: source file '" + m.resolve(s.path).string() + "' does not exist");
    }
  }
  return m;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["origin"] = m.origin;
  nlohmann::ordered_json sources = nlohmann::ordered_json::array();
  for (const auto& s : m.sources) {
    nlohmann::ordered_json e;
    e["id"] = s.id;
    e["path"] = s.path.generic_string();
    e["role"] = s.is_target ? "target" : "feature";
    if (s.is_target) e["target_column"] = s.target_column;
    sources.push_back(e);
  }
  j["sources"] = sources;
  j["lag"] = m.data.lag;
  j["horizon"] = m.data.horizon;
  j["split"] = {{"train", m.data.train_frac}, {"val", m.data.val_frac}};
  j["normalize"] = m.data.normalize;
  nlohmann::ordered_json t;
  t["epochs"] = m.train.epochs;
  t["lr"] = m.train.lr;
  t["hidden"] = m.train.hidden;
  t["batch_size"] = m.train.batch_size;
  t["seed"] = m.train.seed;
  t["warm_start"] = m.train.warm_start;
  t["attention"] = m.train.attention;
  t["pretrain_epochs"] = m.train.pretrain_epochs;
  t["pretrain_objective"] = objective_name(m.train.pretrain_objective);
  j["train"] = t;
  j["seeds"] = m.seeds;
  j["out"] = m.out.generic_string();
  return j.dump(2) + "\n";
}

AlignedTimeline load_timeline(const RunManifest& m) {
  std::vector<SourceSeries> sources;
  std::size_t target_source = 0, target_column = 0;
  for (std::size_t k = 0; k < m.sources.size(); ++k) {
    const auto& s = m.sources[k];
    CsvSchema schema;
    schema.source_id = s.id;
    schema.origin = m.origin;
    auto series = ingest_csv(m.resolve(s.path), schema);
    if (s.is_target) {
      auto col = series.column_index(s.target_column);
      if (!col) {
        throw ParseError("manifest: target source '" + s.id + "' has no column '" + s.target_column + "'");
      }
      target_source = k;
      target_column = *col;
    }
    sources.push_back(std::move(series));
  }
  return make_timeline(std::move(sources), target_source, target_column);
}

}  // namespace piets
