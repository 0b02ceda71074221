#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace polybubble {

// One check: observed value against a prediction with an absolute
// tolerance. Rows with one_sided set pass when value <= predicted +
// tolerance instead of |value - predicted| <= tolerance.
struct ReportRow {
  std::string name;
  std::string inputs;  // "k=2048 h=0.05" style; no commas
  double value = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;
  bool one_sided = false;
  bool pass = false;
};

struct Report {
  std::string command;
  std::string config_hash;  // 16 hex digits of the canonical config text
  uint64_t seed = 0;
  std::string version;
  std::vector<ReportRow> rows;
  // 0 all rows pass, 1 some row failed, 3 solver did not converge.
  int status = 0;
  // Optional bulk table (scaling rows, solve trajectory) written next to
  // the report under artifact_name when nonempty.
  std::string artifact_name;
  std::string artifact_csv;

  // |value - predicted| <= tolerance
  void add(const std::string& name, const std::string& inputs, double value,
           double predicted, double tolerance);
  // value <= predicted + tolerance
  void add_upper(const std::string& name, const std::string& inputs,
                 double value, double predicted, double tolerance);
  bool all_pass() const;
  // Recompute status from rows, preserving a sticky nonconvergence mark.
  void finalize();
};

uint64_t fnv1a64(std::string_view s);
std::string hex64(uint64_t v);

std::string report_csv(const Report& r);
std::string report_json(const Report& r);

// Writes <out_dir>/<command>_report.csv, .json and the artifact if present;
// creates out_dir. Returns the paths written.
std::vector<std::string> write_report(const Report& r,
                                      const std::string& out_dir);

inline constexpr const char* kReportVersion = "polybubble-1";

}  // namespace polybubble
