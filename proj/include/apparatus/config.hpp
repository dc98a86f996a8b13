#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apparatus/coherent.hpp"
#include "apparatus/convergence.hpp"

namespace apparatus {

inline constexpr const char* kConfigSchema = "apparatus.config/1";

struct OzawaSpec {
  int samples = 20;
  double t_max = 0.0;  // 0 means 2 tau (1 when tau is 0)
};

/// Parameters shared by every CLI subcommand. JSON form:
///   {"schema": "apparatus.config/1", "model": {...}, "grid": "sphere:NTH:NPHI" | null,
///    "N": [...], "n": [...], "m_over_S": [...], "tau_list": [...],
///    "support_fraction": 1e-3, "ozawa": {"samples": 20, "t_max": 0}}
struct RunConfig {
  ModelConfig model;
  std::optional<GridSpec> grid;
  std::vector<int> ns;
  std::vector<double> excitations;
  std::vector<double> m_over_s;
  std::vector<double> taus;
  double support_fraction = 1e-3;
  OzawaSpec ozawa;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
/// `source` is the raw text the JSON came from; used for line numbers in errors.
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& source = {});
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize(const RunConfig& cfg);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// "r:R:NR:NPHI" or "sphere:NTH:NPHI".
GridSpec parse_grid_spec(const std::string& s);
std::string format_grid_spec(const GridSpec& g);

}  // namespace apparatus
