#include "polybubble/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace polybubble {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
  if (pos != v.size())
    throw ConfigError("config key '" + key + "': trailing junk in '" + v + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long x;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  }
  if (pos != v.size())
    throw ConfigError("config key '" + key + "': trailing junk in '" + v + "'");
  return int(x);
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  size_t pos = 0;
  unsigned long long x;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: '" +
                      v + "'");
  }
  if (pos != v.size())
    throw ConfigError("config key '" + key + "': trailing junk in '" + v + "'");
  return x;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(v);
  while (std::getline(is, cur, ',')) out.push_back(trim(cur));
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SpaceParams RunConfig::space() const { return SpaceParams(N, m, iota); }

RegimeParams RunConfig::regime() const {
  RegimeParams rp;
  rp.case_id = case_id;
  rp.M1 = M1;
  rp.M2 = M2;
  rp.a = a;
  rp.L0 = L0;
  rp.L1 = L1;
  rp.theta = theta;
  rp.A = A;
  return rp;
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["N"] = std::to_string(N);
  kv["m"] = std::to_string(m);
  kv["iota"] = num(iota);
  kv["case"] = std::to_string(case_id);
  kv["M1"] = num(M1);
  kv["M2"] = num(M2);
  kv["a"] = num(a);
  kv["L0"] = num(L0);
  kv["L1"] = num(L1);
  kv["theta"] = num(theta);
  kv["A"] = num(A);
  kv["delta"] = num(delta);
  kv["r0"] = num(r0);
  {
    std::string v;
    for (size_t i = 0; i < y20.size(); ++i)
      v += (i ? "," : "") + num(y20[i]);
    kv["y20"] = v;
  }
  kv["preset"] = preset;
  kv["width"] = num(width);
  kv["amplitude"] = num(amplitude);
  {
    std::string v;
    for (size_t i = 0; i < sweep_k.size(); ++i)
      v += (i ? "," : "") + std::to_string(sweep_k[i]);
    kv["sweep_k"] = v;
    v.clear();
    for (size_t i = 0; i < sweep_t.size(); ++i)
      v += (i ? "," : "") + num(sweep_t[i]);
    kv["sweep_t"] = v;
  }
  kv["lattice_k"] = std::to_string(lattice_k);
  kv["h_bar"] = num(h_bar);
  kv["r_bar"] = num(r_bar);
  kv["ansatz_k"] = std::to_string(ansatz_k);
  kv["lambda"] = num(lambda);
  kv["mass_samples"] = std::to_string(mass_samples);
  kv["window_rho"] = num(window_rho);
  kv["seed"] = std::to_string(seed);
  // jobs and out_dir steer execution, not results; they stay out of the hash
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

RunConfig parse_run_config(const std::string& text) {
  static const char* known[] = {
      "N",         "m",         "iota",      "case",        "M1",
      "M2",        "a",         "L0",        "L1",          "theta",
      "A",         "delta",     "r0",        "y20",         "preset",
      "width",     "amplitude", "sweep_k",   "sweep_t",     "lattice_k",
      "h_bar",     "r_bar",     "ansatz_k",  "lambda",      "mass_samples",
      "window_rho", "seed",     "jobs",      "out_dir"};

  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
          return key == k;
        }) == std::end(known))
      throw ConfigError("unknown config key '" + key + "'");
    if (kv.count(key))
      throw ConfigError("duplicate config key '" + key + "'");
    kv[key] = val;
  }

  for (const char* req : {"N", "m", "case"})
    if (!kv.count(req))
      throw ConfigError("missing required config key '" + std::string(req) +
                        "'");

  RunConfig c;
  auto take = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  c.N = parse_int("N", kv["N"]);
  c.m = parse_int("m", kv["m"]);
  if (auto v = take("iota")) c.iota = parse_double("iota", *v);
  c.case_id = parse_int("case", kv["case"]);
  if (auto v = take("M1")) c.M1 = parse_double("M1", *v);
  if (auto v = take("M2")) c.M2 = parse_double("M2", *v);
  if (auto v = take("a")) c.a = parse_double("a", *v);
  if (auto v = take("L0")) c.L0 = parse_double("L0", *v);
  if (auto v = take("L1")) c.L1 = parse_double("L1", *v);
  if (auto v = take("theta")) c.theta = parse_double("theta", *v);
  if (auto v = take("A")) c.A = parse_double("A", *v);
  if (auto v = take("delta")) c.delta = parse_double("delta", *v);
  if (auto v = take("r0")) c.r0 = parse_double("r0", *v);
  if (auto v = take("preset")) c.preset = *v;
  if (auto v = take("width")) c.width = parse_double("width", *v);
  if (auto v = take("amplitude")) c.amplitude = parse_double("amplitude", *v);
  if (auto v = take("lattice_k")) c.lattice_k = parse_int("lattice_k", *v);
  if (auto v = take("h_bar")) c.h_bar = parse_double("h_bar", *v);
  if (auto v = take("r_bar")) c.r_bar = parse_double("r_bar", *v);
  if (auto v = take("ansatz_k")) c.ansatz_k = parse_int("ansatz_k", *v);
  if (auto v = take("lambda")) c.lambda = parse_double("lambda", *v);
  if (auto v = take("mass_samples"))
    c.mass_samples = parse_int("mass_samples", *v);
  if (auto v = take("window_rho"))
    c.window_rho = parse_double("window_rho", *v);
  if (auto v = take("seed")) c.seed = parse_u64("seed", *v);
  if (auto v = take("jobs")) c.jobs = parse_int("jobs", *v);
  if (auto v = take("out_dir")) c.out_dir = *v;

  // basic shape checks before the derived-parameter arithmetic
  if (c.m < 1) throw ConfigError("config key 'm': must be >= 1");
  if (c.N <= 2 * c.m)
    throw ConfigError("config key 'N': must satisfy N > 2m");
  if (!(c.iota > 0.0) || !(c.iota < double(c.N - 4 * c.m)))
    throw ConfigError("config key 'iota': must lie in (0, N-4m)");
  if (c.case_id < 1 || c.case_id > 3)
    throw ConfigError("config key 'case': must be 1, 2 or 3");
  if (!(c.a >= 0.0) || !(c.a < 1.0))
    throw ConfigError("config key 'a': must lie in [0, 1)");
  if (!(c.L0 > 0.0) || !(c.L1 > c.L0))
    throw ConfigError("config keys 'L0'/'L1': need 0 < L0 < L1");
  if (!(c.theta > 0.0) || !(c.theta < 1.0))
    throw ConfigError("config key 'theta': must lie in (0, 1)");
  if (!(c.delta > 0.0)) throw ConfigError("config key 'delta': must be > 0");
  if (!(c.r0 > 0.0)) throw ConfigError("config key 'r0': must be > 0");
  if (!(c.width > 0.0)) throw ConfigError("config key 'width': must be > 0");
  if (!(c.amplitude > 0.0))
    throw ConfigError("config key 'amplitude': must be > 0");
  if (c.lattice_k < 2)
    throw ConfigError("config key 'lattice_k': must be >= 2");
  if (!(c.h_bar > 0.0) || !(c.h_bar < 1.0))
    throw ConfigError("config key 'h_bar': must lie in (0, 1)");
  if (!(c.r_bar > 0.0)) throw ConfigError("config key 'r_bar': must be > 0");
  if (c.ansatz_k < 2)
    throw ConfigError("config key 'ansatz_k': must be >= 2");
  if (!(c.lambda >= 0.0))
    throw ConfigError("config key 'lambda': must be >= 0");
  if (c.mass_samples < 1000)
    throw ConfigError("config key 'mass_samples': must be >= 1000");
  if (!(c.window_rho > 0.0))
    throw ConfigError("config key 'window_rho': must be > 0");
  if (c.jobs < 0) throw ConfigError("config key 'jobs': must be >= 0");
  if (c.out_dir.empty())
    throw ConfigError("config key 'out_dir': must be nonempty");

  if (auto v = take("y20")) {
    for (const std::string& part : split_list(*v))
      c.y20.push_back(parse_double("y20", part));
  }
  if (c.y20.empty()) c.y20.assign(size_t(c.N - 3), 0.0);
  if (int(c.y20.size()) != c.N - 3)
    throw ConfigError("config key 'y20': expected " + std::to_string(c.N - 3) +
                      " components, got " + std::to_string(c.y20.size()));

  if (auto v = take("sweep_k")) {
    for (const std::string& part : split_list(*v)) {
      const int k = parse_int("sweep_k", part);
      if (k < 2) throw ConfigError("config key 'sweep_k': entries must be >= 2");
      c.sweep_k.push_back(k);
    }
  }
  if (auto v = take("sweep_t")) {
    for (const std::string& part : split_list(*v)) {
      const double t = parse_double("sweep_t", part);
      if (!(t > 0.0))
        throw ConfigError("config key 'sweep_t': entries must be > 0");
      c.sweep_t.push_back(t);
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace polybubble
