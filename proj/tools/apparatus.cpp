#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apparatus/commands.hpp"
#include "apparatus/parallel.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::vector<double> n;
  std::vector<int> N;
  std::vector<double> m_over_s;
  std::string grid;
  std::vector<double> tau;
  int threads = 1;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--grid", o.grid, "r:R:NR:NPHI or sphere:NTH:NPHI");
  sub->add_option("--threads", o.threads, "worker threads (APPARATUS_THREADS overrides)")
      ->check(CLI::PositiveNumber);
}

apparatus::RunConfig resolve(const Options& o) {
  apparatus::RunConfig cfg = o.config.empty() ? apparatus::RunConfig{} : apparatus::load_run_config(o.config);
  if (!o.N.empty()) cfg.ns = o.N;
  if (!o.n.empty()) cfg.excitations = o.n;
  if (!o.m_over_s.empty()) cfg.m_over_s = o.m_over_s;
  if (!o.grid.empty()) cfg.grid = apparatus::parse_grid_spec(o.grid);
  if (o.tau.size() == 1) {
    cfg.model.tau = o.tau.front();
    cfg.taus.clear();
  } else if (o.tau.size() > 1) {
    cfg.taus = o.tau;
  }
  cfg.model.grid = cfg.grid;
  cfg.model.support_fraction = cfg.support_fraction;
  return cfg;
}

int thread_setting(int flag) {
  if (const char* env = std::getenv("APPARATUS_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw apparatus::ConfigError(std::string("APPARATUS_THREADS must be a positive integer, got '") + env + "'");
  }
  return flag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measure-like maps and coherent-state diagnostics"};
  app.require_subcommand(1);
  Options o;

  auto* field = app.add_subcommand("overlap-field", "Fock-state Husimi datasets on the plane");
  add_common(field, o);
  field->add_option("--n", o.n, "classical excitations n (Fock index round(nN))")->delimiter(',');
  field->add_option("--N", o.N, "component counts")->delimiter(',');

  auto* spin = app.add_subcommand("overlap-spin", "Weight-state Husimi datasets on the sphere");
  add_common(spin, o);
  spin->add_option("--m-over-S", o.m_over_s, "weight ratios m/S")->delimiter(',');
  spin->add_option("--N", o.N, "component counts")->delimiter(',');

  auto* compare = app.add_subcommand("compare-maps", "Compare the true and measure-like maps");
  add_common(compare, o);
  compare->add_option("--N", o.N, "component count")->expected(1);
  compare->add_option("--tau", o.tau, "interaction time")->expected(1);

  auto* sweep = app.add_subcommand("sweep", "Distance between the maps over N");
  add_common(sweep, o);
  sweep->add_option("--N", o.N, "component counts")->delimiter(',');
  sweep->add_option("--tau", o.tau, "interaction times; more than one writes one table each")->delimiter(',');

  auto* checks = app.add_subcommand("checks", "Identity resolution and overlap-limit diagnostics");
  add_common(checks, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : apparatus::kExitConfig;
  }

  try {
    apparatus::set_thread_count(thread_setting(o.threads));
    apparatus::RunConfig cfg = resolve(o);
    if (compare->parsed() && !o.N.empty()) {
      cfg.model.N = o.N.front();
      cfg.ns.clear();
    }
    if (field->parsed()) return apparatus::cmd_overlap_field(cfg, o.out);
    if (spin->parsed()) return apparatus::cmd_overlap_spin(cfg, o.out);
    if (compare->parsed()) return apparatus::cmd_compare_maps(cfg, o.out);
    if (sweep->parsed()) return apparatus::cmd_sweep(cfg, o.out);
    return apparatus::cmd_checks(cfg, o.out);
  } catch (const apparatus::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return apparatus::kExitConfig;
  } catch (const apparatus::ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return apparatus::kExitResource;
  } catch (const apparatus::InvariantError& e) {
    std::cerr << "tolerance failure: " << e.what() << "\n";
    return apparatus::kExitVerdict;
  } catch (const apparatus::DimensionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return apparatus::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return apparatus::kExitError;
  }
}
