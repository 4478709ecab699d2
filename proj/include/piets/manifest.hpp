// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run manifest: a JSON file naming the source CSVs and every setting a run
// needs. Relative paths resolve against the manifest's directory. See
// docs/manifest.md for an annotated example.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "piets/data.hpp"
#include "piets/model.hpp"

namespace piets {

struct ManifestSource {
  std::string id;
  std::filesystem::path path;
  bool is_target = false;
  /// Column holding the forecasting target; only for the target source.
  std::string target_column;
};

struct RunManifest {
  std::filesystem::path base_dir;
  std::string origin;
  std::vector<ManifestSource> sources;
  DataConfig data;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path out = "runs";

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

RunManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);
/// Parses and checks that every referenced CSV exists and exactly one
/// source is the target.
RunManifest load_manifest(const std::filesystem::path& path);
std::string manifest_json(const RunManifest& m);

/// Ingests every source and aligns them.
AlignedTimeline load_timeline(const RunManifest& m);

}  // namespace piets
