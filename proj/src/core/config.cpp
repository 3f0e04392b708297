#include "config.hpp"

#include "errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bucktop {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  return v;
}

int to_int(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < -2147483647LL || v > 2147483647LL)
    throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + text + "'");
}

const std::vector<std::string> kKeys = {
    "preset", "nelx", "nely", "lx", "output_dir", "x0", "maxit", "image_every", "write_images",
    "problem", "bounds", "penalK", "penalK_cont", "penalG", "penalG_cont", "rmin", "ft", "ftBC",
    "eta", "beta", "beta_cont", "pAgg", "pAgg_cont", "nEig", "ocPar", "E0", "Emin", "nu",
    "eig_method", "eig_tol", "eig_max_restarts", "seed", "stop_change", "log_timings",
};

const std::map<std::string, std::string> kDefaults = {
    {"preset", "column"},   {"nelx", "240"},        {"nely", "120"},      {"lx", "2"},
    {"output_dir", "out"},  {"x0", ""},             {"maxit", "300"},     {"image_every", "0"},
    {"write_images", "true"}, {"problem", "VC"},    {"bounds", "{2.5}"},  {"penalK", "3"},
    {"penalG", "3"},        {"rmin", "2"},          {"ft", "2"},          {"ftBC", "N"},
    {"eta", "0.5"},         {"beta", "2"},          {"pAgg", "160"},      {"nEig", "12"},
    {"ocPar", "{0.1, 0.7, 1.2}"}, {"E0", "1"},      {"Emin", "1e-6"},     {"nu", "0.3"},
    {"eig_method", "auto"}, {"eig_tol", "1e-10"},   {"eig_max_restarts", "600"},
    {"seed", "1"},          {"stop_change", "1e-6"}, {"log_timings", "true"},
};

}  // namespace

std::vector<double> parse_tuple(const std::string& text, const std::string& key) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '{') {
    if (s.back() != '}') throw ConfigError("'" + key + "': unbalanced braces in '" + text + "'");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item, key));
  return out;
}

ContinuationSchedule parse_schedule(const std::string& text, const std::string& key) {
  const std::vector<double> v = parse_tuple(text, key);
  if (v.size() != 4)
    throw ConfigError("'" + key + "' expects {istart, max, isteps, delta}, got '" + text + "'");
  ContinuationSchedule s;
  s.istart = static_cast<int>(v[0]);
  s.max_value = v[1];
  s.isteps = static_cast<int>(v[2]);
  s.delta = v[3];
  if (s.istart != v[0] || s.isteps != v[2] || s.isteps < 1 || s.istart < 1)
    throw ConfigError("'" + key + "': istart and isteps must be positive integers");
  return s;
}

ConfigMap::ConfigMap() : values_(kDefaults) {}

const std::vector<std::string>& ConfigMap::known_keys() { return kKeys; }

void ConfigMap::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_string(ss.str(), path.string());
}

void ConfigMap::load_string(const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
    throw ConfigError("unknown configuration key '" + key + "'");
  values_[key] = value;
}

std::optional<std::string> ConfigMap::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

RunConfig ConfigMap::resolve() const {
  auto str = [&](const char* k) { return get(k).value_or(""); };
  auto has = [&](const char* k) { return values_.count(k) > 0 && !trim(values_.at(k)).empty(); };

  RunConfig rc;
  rc.preset = str("preset");
  rc.nelx = to_int(str("nelx"), "nelx");
  rc.nely = to_int(str("nely"), "nely");
  rc.lx = to_double(str("lx"), "lx");
  rc.output_dir = str("output_dir");
  rc.x0 = str("x0");
  rc.maxit = to_int(str("maxit"), "maxit");
  rc.image_every = to_int(str("image_every"), "image_every");
  rc.write_images = to_bool(str("write_images"), "write_images");
  if (rc.nelx < 1 || rc.nely < 1) throw ConfigError("nelx and nely must be positive");
  if (!(rc.lx > 0.0)) throw ConfigError("lx must be positive");
  if (rc.maxit < 0) throw ConfigError("maxit must be non-negative");
  if (rc.image_every < 0) throw ConfigError("image_every must be non-negative");

  OptimizerSettings& s = rc.settings;
  s.problem = ProblemSpec::parse(str("problem"), parse_tuple(str("bounds"), "bounds"));
  s.interp.e0 = to_double(str("E0"), "E0");
  s.interp.emin = to_double(str("Emin"), "Emin");
  s.interp.penal_k = to_double(str("penalK"), "penalK");
  s.interp.penal_g = to_double(str("penalG"), "penalG");
  if (!(s.interp.e0 > 0.0) || !(s.interp.emin > 0.0) || s.interp.emin >= s.interp.e0)
    throw ConfigError("moduli must satisfy 0 < Emin < E0");
  if (!(s.interp.penal_k >= 1.0) || !(s.interp.penal_g >= 1.0))
    throw ConfigError("penalization exponents must be at least 1");
  s.nu = to_double(str("nu"), "nu");
  if (!(s.nu > -1.0 && s.nu < 0.5)) throw ConfigError("nu must lie in (-1, 0.5)");

  s.rmin = to_double(str("rmin"), "rmin");
  if (!(s.rmin > 0.0)) throw ConfigError("rmin must be positive");
  const int ft = to_int(str("ft"), "ft");
  if (ft < 1 || ft > 3) throw ConfigError("ft must be 1, 2 or 3");
  s.filter_mode = static_cast<FilterMode>(ft);
  const std::string bc = str("ftBC");
  if (bc == "N")
    s.filter_bc = FilterBC::Neumann;
  else if (bc == "D")
    s.filter_bc = FilterBC::Dirichlet;
  else
    throw ConfigError("ftBC must be N or D");
  s.eta = to_double(str("eta"), "eta");
  if (!(s.eta >= 0.0 && s.eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  s.beta = to_double(str("beta"), "beta");
  if (!(s.beta >= 0.0)) throw ConfigError("beta must be non-negative");
  s.rho = to_double(str("pAgg"), "pAgg");
  if (!(s.rho >= 1.0)) throw ConfigError("pAgg must be at least 1");
  s.n_eig = to_int(str("nEig"), "nEig");
  if (s.problem.has_buckling() && s.n_eig < 1) throw ConfigError("nEig must be at least 1");

  auto schedule = [&](const char* key, double start) {
    if (has(key)) return parse_schedule(str(key), key);
    return ContinuationSchedule{1, start, 1, 0.0};
  };
  s.penal_k_cont = schedule("penalK_cont", s.interp.penal_k);
  s.penal_g_cont = schedule("penalG_cont", s.interp.penal_g);
  s.beta_cont = schedule("beta_cont", s.beta);
  s.rho_cont = schedule("pAgg_cont", s.rho);

  const std::vector<double> oc = parse_tuple(str("ocPar"), "ocPar");
  if (oc.size() != 3) throw ConfigError("ocPar expects {move, asReduce, asRelax}");
  s.oc = {oc[0], oc[1], oc[2]};
  if (!(s.oc.move >= 0.0 && s.oc.move <= 1.0)) throw ConfigError("move must lie in [0, 1]");
  if (!(s.oc.as_reduce > 0.0) || !(s.oc.as_relax > 0.0))
    throw ConfigError("asymptote factors must be positive");

  const std::string em = str("eig_method");
  if (em == "auto")
    s.eig.method = EigenMethod::Auto;
  else if (em == "lanczos")
    s.eig.method = EigenMethod::Lanczos;
  else if (em == "dense")
    s.eig.method = EigenMethod::Dense;
  else
    throw ConfigError("eig_method must be auto, lanczos or dense");
  s.eig.tolerance = to_double(str("eig_tol"), "eig_tol");
  s.eig.max_restarts = to_int(str("eig_max_restarts"), "eig_max_restarts");
  if (!(s.eig.tolerance > 0.0) || s.eig.max_restarts < 1)
    throw ConfigError("eigensolver tolerance and restart limit must be positive");
  const double seed = to_double(str("seed"), "seed");
  if (seed < 0 || seed != std::floor(seed)) throw ConfigError("seed must be a non-negative integer");
  s.eig.seed = static_cast<std::uint64_t>(seed);
  s.stop_change = to_double(str("stop_change"), "stop_change");
  s.log_timings = to_bool(str("log_timings"), "log_timings");
  return rc;
}

}  // namespace bucktop
