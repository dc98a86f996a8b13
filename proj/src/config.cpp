#include "apparatus/config.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "apparatus/csv.hpp"

namespace apparatus {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

/// 1-based line of `"key":` in the source, searched after the line of `parent`.
int line_of_key(const std::string& source, const std::string& key, std::size_t from = 0) {
  if (source.empty()) return 0;
  const std::string needle = "\"" + key + "\"";
  std::size_t pos = source.find(needle, from);
  while (pos != std::string::npos) {
    std::size_t after = pos + needle.size();
    while (after < source.size() && std::isspace(static_cast<unsigned char>(source[after]))) ++after;
    if (after < source.size() && source[after] == ':') break;
    pos = source.find(needle, pos + 1);
  }
  if (pos == std::string::npos) return 0;
  return 1 + int(std::count(source.begin(), source.begin() + std::ptrdiff_t(pos), '\n'));
}

std::size_t offset_of_key(const std::string& source, const std::string& key) {
  const std::size_t pos = source.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : pos;
}

class Reader {
 public:
  Reader(const std::string& source, std::string path, std::size_t from = 0)
      : source_(source), path_(std::move(path)), from_(from) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const int line = line_of_key(source_, key, from_);
    std::string where = path_.empty() ? key : path_ + "." + key;
    throw ConfigError("config: " + (line ? "line " + std::to_string(line) + ": " : std::string()) +
                      "'" + where + "' " + what);
  }

  void check_keys(const json& obj, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
    for (const auto& [k, v] : obj.items()) {
      if (!allowed.count(k)) fail(k, "is not a recognised key");
    }
  }

  template <typename T>
  void get(const json& obj, const std::string& key, T& out) const {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(key, std::string("has the wrong type (") + e.what() + ")");
    }
  }

  Reader child(const std::string& key) const {
    return Reader(source_, path_.empty() ? key : path_ + "." + key,
                  std::max(from_, offset_of_key(source_, key)));
  }

 private:
  const std::string& source_;
  std::string path_;
  std::size_t from_;
};

ordered_json complex_vector_json(const Eigen::VectorXcd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

ordered_json real_vector_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

GridSpec parse_grid_spec(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(p);
  try {
    if (parts.size() == 4 && parts[0] == "r") {
      PolarGridSpec g;
      g.radius = std::stod(parts[1]);
      g.n_r = std::stoi(parts[2]);
      g.n_phi = std::stoi(parts[3]);
      if (!(g.radius > 0) || g.n_r <= 0 || g.n_phi <= 0) throw ConfigError("non-positive value");
      return g;
    }
    if (parts.size() == 3 && parts[0] == "sphere") {
      SphereGridSpec g;
      g.n_theta = std::stoi(parts[1]);
      g.n_phi = std::stoi(parts[2]);
      if (g.n_theta <= 0 || g.n_phi <= 0) throw ConfigError("non-positive value");
      return g;
    }
  } catch (const std::exception& e) {
    throw ConfigError("grid spec '" + s + "': " + e.what());
  }
  throw ConfigError("grid spec '" + s + "' must be r:R:NR:NPHI or sphere:NTH:NPHI");
}

std::string format_grid_spec(const GridSpec& g) {
  if (const auto* p = std::get_if<PolarGridSpec>(&g)) {
    return "r:" + format_double(p->radius) + ":" + std::to_string(p->n_r) + ":" +
           std::to_string(p->n_phi);
  }
  const auto& s = std::get<SphereGridSpec>(g);
  return "sphere:" + std::to_string(s.n_theta) + ":" + std::to_string(s.n_phi);
}

ordered_json to_json(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  ordered_json model = {
      {"kind", to_string(m.kind)},
      {"N", m.N},
      {"tau", m.tau},
      {"couplings", {{"g1", m.couplings.g1}, {"eta", m.couplings.eta}, {"omega", m.couplings.omega}}},
      {"gamma_state", complex_vector_json(m.gamma_state)},
      {"truncation", m.truncation},
      {"s0", m.s0},
      {"theta0", m.theta0},
      {"phi0", m.phi0},
      {"measure",
       {{"g", m.measure_coupling}, {"eps", real_vector_json(m.eps)},
        {"energies", real_vector_json(m.energies)}}}};
  ordered_json j;
  j["schema"] = kConfigSchema;
  j["model"] = model;
  j["grid"] = cfg.grid ? ordered_json(format_grid_spec(*cfg.grid)) : ordered_json(nullptr);
  j["N"] = cfg.ns;
  j["n"] = cfg.excitations;
  j["m_over_S"] = cfg.m_over_s;
  j["tau_list"] = cfg.taus;
  j["support_fraction"] = cfg.support_fraction;
  j["ozawa"] = {{"samples", cfg.ozawa.samples}, {"t_max", cfg.ozawa.t_max}};
  return j;
}

RunConfig run_config_from_json(const json& j, const std::string& source) {
  Reader top(source, "");
  top.check_keys(j, {"schema", "model", "grid", "N", "n", "m_over_S", "tau_list",
                     "support_fraction", "ozawa"});
  if (!j.contains("schema")) throw ConfigError("config: missing 'schema' (expected " + std::string(kConfigSchema) + ")");
  std::string schema;
  top.get(j, "schema", schema);
  if (schema != kConfigSchema) top.fail("schema", "is '" + schema + "', expected '" + kConfigSchema + "'");

  RunConfig cfg;
  if (j.contains("model")) {
    const json& mj = j.at("model");
    const Reader mr = top.child("model");
    mr.check_keys(mj, {"kind", "N", "tau", "couplings", "gamma_state", "truncation", "s0",
                       "theta0", "phi0", "measure"});
    ModelConfig& m = cfg.model;
    std::string kind = to_string(m.kind);
    mr.get(mj, "kind", kind);
    try {
      m.kind = model_kind_from_string(kind);
    } catch (const ConfigError& e) {
      mr.fail("kind", e.what());
    }
    mr.get(mj, "N", m.N);
    if (m.N < 1) mr.fail("N", "must be a positive integer");
    mr.get(mj, "tau", m.tau);
    if (!(m.tau >= 0.0)) mr.fail("tau", "must be non-negative");
    if (mj.contains("couplings")) {
      const Reader cr = mr.child("couplings");
      cr.check_keys(mj.at("couplings"), {"g1", "eta", "omega"});
      cr.get(mj.at("couplings"), "g1", m.couplings.g1);
      cr.get(mj.at("couplings"), "eta", m.couplings.eta);
      cr.get(mj.at("couplings"), "omega", m.couplings.omega);
    }
    if (mj.contains("gamma_state")) {
      std::vector<std::vector<double>> g;
      mr.get(mj, "gamma_state", g);
      m.gamma_state.resize(Eigen::Index(g.size()));
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i].size() != 2) mr.fail("gamma_state", "entries must be [re, im] pairs");
        m.gamma_state(Eigen::Index(i)) = {g[i][0], g[i][1]};
      }
      if (g.size() != 0 && g.size() != 2) mr.fail("gamma_state", "must have 2 entries (qubit)");
      if (g.size() == 2 && m.gamma_state.norm() == 0.0) mr.fail("gamma_state", "is the zero vector");
    }
    mr.get(mj, "truncation", m.truncation);
    if (m.truncation < 0) mr.fail("truncation", "must be non-negative");
    mr.get(mj, "s0", m.s0);
    mr.get(mj, "theta0", m.theta0);
    mr.get(mj, "phi0", m.phi0);
    if (mj.contains("measure")) {
      const Reader xr = mr.child("measure");
      const json& xj = mj.at("measure");
      xr.check_keys(xj, {"g", "eps", "energies"});
      xr.get(xj, "g", m.measure_coupling);
      std::vector<double> eps, energies;
      xr.get(xj, "eps", eps);
      xr.get(xj, "energies", energies);
      m.eps = Eigen::Map<const Eigen::VectorXd>(eps.data(), Eigen::Index(eps.size()));
      m.energies = Eigen::Map<const Eigen::VectorXd>(energies.data(), Eigen::Index(energies.size()));
    }
  }
  if (j.contains("grid") && !j.at("grid").is_null()) {
    std::string g;
    top.get(j, "grid", g);
    try {
      cfg.grid = parse_grid_spec(g);
    } catch (const ConfigError& e) {
      top.fail("grid", e.what());
    }
  }
  top.get(j, "N", cfg.ns);
  for (int n : cfg.ns) {
    if (n < 1) top.fail("N", "entries must be positive");
  }
  top.get(j, "n", cfg.excitations);
  for (double n : cfg.excitations) {
    if (!(n >= 0.0)) top.fail("n", "entries must be non-negative");
  }
  top.get(j, "m_over_S", cfg.m_over_s);
  for (double r : cfg.m_over_s) {
    if (!(r >= 0.0 && r <= 2.0)) top.fail("m_over_S", "entries must lie in [0, 2]");
  }
  top.get(j, "tau_list", cfg.taus);
  top.get(j, "support_fraction", cfg.support_fraction);
  if (!(cfg.support_fraction > 0.0 && cfg.support_fraction < 1.0)) {
    top.fail("support_fraction", "must lie in (0, 1)");
  }
  if (j.contains("ozawa")) {
    const Reader orr = top.child("ozawa");
    orr.check_keys(j.at("ozawa"), {"samples", "t_max"});
    orr.get(j.at("ozawa"), "samples", cfg.ozawa.samples);
    orr.get(j.at("ozawa"), "t_max", cfg.ozawa.t_max);
    if (cfg.ozawa.samples < 1) orr.fail("samples", "must be positive");
  }
  cfg.model.grid = cfg.grid;
  cfg.model.support_fraction = cfg.support_fraction;
  return cfg;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return run_config_from_json(j, text);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const RunConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace apparatus
