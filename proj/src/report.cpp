#include "polybubble/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace polybubble {

namespace {

// %.17g round-trips doubles, so identical inputs give identical bytes.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n') c = ';';
  return out;
}

}  // namespace

void Report::add(const std::string& name, const std::string& inputs,
                 double value, double predicted, double tolerance) {
  ReportRow row{name, inputs, value, predicted, tolerance, false, false};
  row.pass = std::isfinite(value) &&
             std::fabs(value - predicted) <= tolerance;
  rows.push_back(std::move(row));
}

void Report::add_upper(const std::string& name, const std::string& inputs,
                       double value, double predicted, double tolerance) {
  ReportRow row{name, inputs, value, predicted, tolerance, true, false};
  row.pass = std::isfinite(value) && value <= predicted + tolerance;
  rows.push_back(std::move(row));
}

bool Report::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

void Report::finalize() {
  if (status != 3) status = all_pass() ? 0 : 1;
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return buf;
}

std::string report_csv(const Report& r) {
  std::string out;
  out += "# command=" + r.command + "\n";
  out += "# config=" + r.config_hash + "\n";
  out += "# seed=" + std::to_string(r.seed) + "\n";
  out += "# version=" + r.version + "\n";
  out += "# status=" + std::to_string(r.status) + "\n";
  out += "name,inputs,value,predicted,tolerance,bound,pass\n";
  for (const auto& row : r.rows) {
    out += sanitize(row.name) + "," + sanitize(row.inputs) + "," +
           num(row.value) + "," + num(row.predicted) + "," +
           num(row.tolerance) + "," + (row.one_sided ? "upper" : "two-sided") +
           "," + (row.pass ? "1" : "0") + "\n";
  }
  return out;
}

std::string report_json(const Report& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["config"] = r.config_hash;
  j["seed"] = r.seed;
  j["version"] = r.version;
  j["status"] = r.status;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["name"] = row.name;
    o["inputs"] = row.inputs;
    o["value"] = row.value;
    o["predicted"] = row.predicted;
    o["tolerance"] = row.tolerance;
    o["bound"] = row.one_sided ? "upper" : "two-sided";
    o["pass"] = row.pass;
    j["rows"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

std::vector<std::string> write_report(const Report& r,
                                      const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> paths;
  const std::string base = out_dir + "/" + r.command + "_report";
  {
    std::ofstream f(base + ".csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + base + ".csv");
    f << report_csv(r);
    paths.push_back(base + ".csv");
  }
  {
    std::ofstream f(base + ".json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + base + ".json");
    f << report_json(r);
    paths.push_back(base + ".json");
  }
  if (!r.artifact_name.empty()) {
    const std::string p = out_dir + "/" + r.artifact_name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p);
    f << r.artifact_csv;
    paths.push_back(p);
  }
  return paths;
}

}  // namespace polybubble
