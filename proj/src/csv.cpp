// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/csv.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "piets/errors.hpp"

namespace piets {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

struct Lines {
  std::vector<std::string> text;
  std::vector<std::size_t> number;  // 1-based line numbers
};

Lines read_lines(const std::string& text) {
  Lines out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    out.text.push_back(line);
    out.number.push_back(n);
  }
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_integer(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

std::optional<std::int64_t> parse_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = parse_integer(s.substr(0, 4));
  auto m = parse_integer(s.substr(5, 2));
  auto d = parse_integer(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*m)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days(ymd).time_since_epoch().count();
}

std::string format_iso_date(std::int64_t days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

SourceSeries parse_source_csv(const std::string& text, const CsvSchema& schema) {
  const std::string where = schema.source_id.empty() ? std::string("csv") : schema.source_id;
  const Lines lines = read_lines(text);
  if (lines.text.empty()) throw DomainError(where + ": file is empty (no header)");
  const auto header = split_cells(lines.text[0]);
  auto time_it = std::find(header.begin(), header.end(), schema.time_column);
  if (time_it == header.end()) {
    throw ParseError(where + ": header has no '" + schema.time_column + "' column");
  }
  const auto time_col = static_cast<std::size_t>(time_it - header.begin());
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != time_col) names.push_back(header[c]);
  }
  if (names.empty()) throw ParseError(where + ": no feature columns");
  if (lines.text.size() == 1) throw DomainError(where + ": data section is empty");

  enum class Kind { integer, date };
  std::optional<Kind> kind;
  struct Row {
    std::int64_t t;
    std::string stamp;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  for (std::size_t k = 1; k < lines.text.size(); ++k) {
    const std::size_t line_no = lines.number[k];
    const auto cells = split_cells(lines.text[k]);
    if (cells.size() != header.size()) {
      throw ParseError(where + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(header.size()));
    }
    const std::string& stamp = cells[time_col];
    Kind this_kind;
    std::optional<std::int64_t> t;
    if ((t = parse_integer(stamp))) {
      this_kind = Kind::integer;
    } else if ((t = parse_iso_date(stamp))) {
      this_kind = Kind::date;
    } else {
      throw ParseError(where + ": line " + std::to_string(line_no) + ", column '" +
                       schema.time_column + "': invalid timestamp '" + stamp + "'");
    }
    if (kind && *kind != this_kind) {
      throw ParseError(where + ": line " + std::to_string(line_no) + " mixes date and integer timestamps");
    }
    kind = this_kind;
    Row row{*t, stamp, {}};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == time_col) continue;
      auto v = parse_number(cells[c]);
      if (!v) {
        throw ParseError(where + ": line " + std::to_string(line_no) + ", column " +
                         std::to_string(c + 1) + " ('" + header[c] + "'): non-numeric value '" +
                         cells[c] + "'");
      }
      row.values.push_back(*v);
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  std::vector<std::string> missing;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].t == rows[k - 1].t) {
      throw ParseError(where + ": duplicate timestamp '" + rows[k].stamp + "'");
    }
    for (auto t = rows[k - 1].t + 1; t < rows[k].t; ++t) {
      missing.push_back(*kind == Kind::date ? format_iso_date(t) : std::to_string(t));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 10) list += ", ... (" + std::to_string(missing.size()) + " total)";
    throw GapError(where + ": missing timestamps " + list);
  }

  std::int64_t origin = rows.front().t;
  if (!schema.origin.empty()) {
    auto o = *kind == Kind::date ? parse_iso_date(schema.origin) : parse_integer(schema.origin);
    if (!o) {
      throw ParseError(where + ": timeline origin '" + schema.origin + "' does not match the file's " +
                       (*kind == Kind::date ? "date" : "integer") + " timestamps");
    }
    origin = *o;
  }

  SourceSeries s;
  s.id = schema.source_id;
  s.initial_t = rows.front().t - origin;
  s.feature_names = std::move(names);
  s.features = Matrix(rows.size(), s.feature_names.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].values.begin(), rows[r].values.end(), s.features.data.begin() + r * s.dim());
  }
  return s;
}

SourceSeries ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  CsvSchema sc = schema;
  if (sc.source_id.empty()) sc.source_id = path.stem().string();
  return parse_source_csv(read_file(path), sc);
}

std::string format_source_csv(const SourceSeries& s, const std::string& origin) {
  const auto origin_day = parse_iso_date(origin);
  std::int64_t origin_int = 0;
  if (!origin_day && !origin.empty()) {
    auto o = parse_integer(origin);
    if (!o) throw ParseError("invalid timeline origin '" + origin + "'");
    origin_int = *o;
  }
  std::string out = "time";
  for (const auto& n : s.feature_names) out += "," + n;
  out += "\n";
  for (std::size_t r = 0; r < s.n_obs(); ++r) {
    const std::int64_t t = s.initial_t + static_cast<std::int64_t>(r) * s.interval;
    out += origin_day ? format_iso_date(*origin_day + t) : std::to_string(origin_int + t);
    for (std::size_t c = 0; c < s.dim(); ++c) out += "," + format_double(s.features.at(r, c));
    out += "\n";
  }
  return out;
}

void write_source_csv(const std::filesystem::path& path, const SourceSeries& s,
                      const std::string& origin) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << format_source_csv(s, origin);
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column) {
  const Lines lines = read_lines(read_file(path));
  if (lines.text.empty()) throw DomainError(path.string() + ": file is empty (no header)");
  const auto header = split_cells(lines.text[0]);
  auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw ParseError(path.string() + ": no column named '" + column + "'");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  for (std::size_t k = 1; k < lines.text.size(); ++k) {
    const auto cells = split_cells(lines.text[k]);
    auto v = col < cells.size() ? parse_number(cells[col]) : std::nullopt;
    if (!v) {
      throw ParseError(path.string() + ": line " + std::to_string(lines.number[k]) +
                       ", column '" + column + "': non-numeric value");
    }
    out.push_back(*v);
  }
  if (out.empty()) throw DomainError(path.string() + ": data section is empty");
  return out;
}

}  // namespace piets
