#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergokit/error.hpp"
#include "ergokit/harness/config.hpp"

#ifndef ERGOKIT_VERSION
#define ERGOKIT_VERSION "0.0.0"
#endif

namespace ergokit::harness {

inline constexpr const char* kSchema = "ergokit.report/1";

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

enum class Status { Clean, Flagged, Failed };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Clean: return "clean";
    case Status::Flagged: return "flagged";
    case Status::Failed: return "failed";
  }
  return "failed";
}

inline int exit_code(Status s) { return s == Status::Clean ? 0 : s == Status::Flagged ? 2 : 1; }

struct Report {
  ExperimentConfig config;
  Json parameters = Json::object();   // design parameters the run depended on
  Json payload = Json::object();
  Json diagnostics = Json::object();
  std::vector<std::string> flags;
  std::vector<Table> tables;
  Status status = Status::Clean;
  std::string errorKind, errorMessage;
  double wallClockSeconds = 0.0;

  void flag(std::string f) {
    flags.push_back(std::move(f));
    if (status == Status::Clean) status = Status::Flagged;
  }
};

/// JSON numbers cannot carry inf/nan; they become null and the caller adds an explicit flag field.
inline Json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline Json to_json(const Report& r, bool withWallClock = true) {
  Json j;
  j["schema"] = kSchema;
  j["version"] = ERGOKIT_VERSION;
  j["task"] = r.config.task;
  j["status"] = to_string(r.status);
  j["config"] = r.config.echo();
  j["parameters"] = r.parameters;
  j["payload"] = r.payload;
  j["diagnostics"] = r.diagnostics;
  j["flags"] = r.flags;
  if (r.status == Status::Failed) j["error"] = {{"kind", r.errorKind}, {"message", r.errorMessage}};
  Json tables = Json::object();
  for (const auto& t : r.tables) {
    Json rows = Json::array();
    for (const auto& row : t.rows) {
      Json jr = Json::array();
      for (double v : row) jr.push_back(number(v));
      rows.push_back(jr);
    }
    tables[t.name] = {{"columns", t.columns}, {"rows", rows}};
  }
  j["tables"] = tables;
  if (withWallClock) j["wall_clock_seconds"] = r.wallClockSeconds;
  return j;
}

/// Everything except the wall clock; the reproducibility contract covers this string.
inline std::string payload_dump(const Report& r) { return to_json(r, false).dump(2); }

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_double(row[i]);
    s += "\n";
  }
  return s;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + p.string());
  out << content;
  if (!out) fail(ErrorKind::IoError, "write failed for " + p.string());
}

/// <out>/<task>.json; CSV: <task>.csv for the first table, <task>-<name>.csv for the rest.
inline std::vector<std::filesystem::path> emit_report(const Report& r, const std::filesystem::path& outDir, bool json,
                                                      bool csv) {
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + outDir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (json) {
    const auto p = outDir / (r.config.task + ".json");
    write_file(p, to_json(r).dump(2) + "\n");
    written.push_back(p);
  }
  if (csv)
    for (std::size_t i = 0; i < r.tables.size(); ++i) {
      const auto p = outDir / (r.config.task + (i == 0 ? "" : "-" + r.tables[i].name) + ".csv");
      write_file(p, to_csv(r.tables[i]));
      written.push_back(p);
    }
  return written;
}

}  // namespace ergokit::harness
