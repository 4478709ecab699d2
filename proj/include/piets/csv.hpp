// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// One CSV file per source: a header row, a `time` column holding either ISO
// dates (YYYY-MM-DD) or non-negative integers, and numeric feature columns.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "piets/data.hpp"

namespace piets {

/// Days since 1970-01-01, or nullopt when `s` is not a valid YYYY-MM-DD date.
std::optional<std::int64_t> parse_iso_date(const std::string& s);
std::string format_iso_date(std::int64_t days);

struct CsvSchema {
  std::string source_id;
  /// Timeline origin: an ISO date for date-stamped files, an integer for
  /// integer-stamped files. Empty means the file's own first timestamp.
  std::string origin;
  std::string time_column = "time";
};

SourceSeries parse_source_csv(const std::string& text, const CsvSchema& schema);
SourceSeries ingest_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Renders a source in the ingest format. Times are dates when `origin` is a
/// date, integers otherwise. Values use the shortest round-trip form.
std::string format_source_csv(const SourceSeries& s, const std::string& origin);
void write_source_csv(const std::filesystem::path& path, const SourceSeries& s,
                      const std::string& origin);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Reads one named numeric column; used by the autocorrelation command.
std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column);

}  // namespace piets
