#include "apparatus/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "apparatus/parallel.hpp"

namespace apparatus {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::vector<int> kFieldNs = {1, 10, 1000};
const std::vector<double> kFieldExcitations = {1, 4};
const std::vector<int> kSpinNs = {10, 100, 1000};
const std::vector<double> kSpinRatios = {0.8, 0.4};
const std::vector<int> kSweepNs = {10, 20, 40, 80, 160};

constexpr int kSpinDatasetTheta = 1024;
constexpr int kSpinDatasetPhi = 64;

double sequential_integral(const HusimiField& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) s += f.grid->weights[std::size_t(i)] * f.values(i);
  return s;
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw Error("cannot create output directory " + out.string());
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << "\n";
  if (!f) throw Error("write failed: " + path.string());
}

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

template <typename Vec>
ordered_json list_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (const auto& x : v) a.push_back(number(double(x)));
  return a;
}

std::string tag(double v) { return format_double(v); }

std::string comment(const std::string& hash, const std::string& what) {
  return "config_hash=" + hash + " " + what;
}

ordered_json field_entry(const std::string& file, const std::string& profile_file,
                         const HusimiField& f, const Profile& p) {
  ordered_json e;
  e["file"] = file;
  e["profile_file"] = profile_file;
  e["grid"] = format_grid_spec(f.grid->spec);
  e["integral"] = number(sequential_integral(f));
  e["peak"] = number(f.peak());
  e["clipped"] = f.clipped;
  e["profile_peak_position"] = number(p.peak_position());
  e["profile_peak_value"] = number(p.values.empty() ? 0.0 : p.values[p.argmax()]);
  e["profile_step"] = number(p.step);
  e["fwhm"] = number(p.fwhm());
  return e;
}

ordered_json support_entry(const std::string& a, const std::string& b, int N,
                           const SupportPair& s) {
  ordered_json e;
  e["N"] = N;
  e["a"] = a;
  e["b"] = b;
  e["measure_a"] = number(s.measure_a);
  e["measure_b"] = number(s.measure_b);
  e["base_measure_a"] = number(s.base_measure_a);
  e["base_measure_b"] = number(s.base_measure_b);
  e["intersection"] = number(s.intersection);
  e["base_intersection"] = number(s.base_intersection);
  e["intersection_fraction"] = number(s.intersection_fraction());
  return e;
}

void write_rho_csv(const fs::path& path, const std::string& c, const Eigen::MatrixXcd& rho) {
  CsvWriter w(path, c, {"row", "col", "re", "im"});
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      w.row({double(i), double(j), rho(i, j).real(), rho(i, j).imag()});
    }
  }
  w.close();
}

ordered_json ozawa_json(const OzawaReport<double>& r) {
  ordered_json j;
  j["target"] = vector_json(r.target);
  j["times"] = list_json(r.times);
  j["schmidt_deviation"] = list_json(r.schmidt_deviation);
  j["population_deviation"] = list_json(r.population_deviation);
  j["max_schmidt_deviation"] = number(r.max_schmidt_deviation);
  j["max_population_deviation"] = number(r.max_population_deviation);
  return j;
}

std::vector<double> ozawa_times(const RunConfig& cfg) {
  double t_max = cfg.ozawa.t_max;
  if (t_max <= 0.0) t_max = cfg.model.tau > 0.0 ? 2.0 * cfg.model.tau : 1.0;
  std::vector<double> times;
  for (int k = 1; k <= cfg.ozawa.samples; ++k) times.push_back(t_max * k / cfg.ozawa.samples);
  return times;
}

ordered_json pass_item(const std::string& name, double value, double limit, bool pass) {
  ordered_json j;
  j["name"] = name;
  j["value"] = number(value);
  j["limit"] = number(limit);
  j["result"] = pass ? "PASS" : "FAIL";
  return j;
}

}  // namespace

std::size_t Profile::argmax() const {
  if (values.empty()) throw DimensionError("Profile: empty");
  return std::size_t(std::max_element(values.begin(), values.end()) - values.begin());
}

double Profile::peak_position() const { return x[argmax()]; }

double Profile::fwhm() const {
  const std::size_t k = argmax();
  const double half = 0.5 * values[k];
  double left = x.front();
  for (std::size_t i = k; i > 0; --i) {
    if (values[i - 1] < half) {
      const double f = (half - values[i - 1]) / (values[i] - values[i - 1]);
      left = x[i - 1] + f * (x[i] - x[i - 1]);
      break;
    }
  }
  double right = x.back();
  for (std::size_t i = k; i + 1 < values.size(); ++i) {
    if (values[i + 1] < half) {
      const double f = (values[i] - half) / (values[i] - values[i + 1]);
      right = x[i] + f * (x[i + 1] - x[i]);
      break;
    }
  }
  return right - left;
}

Profile profile_of(const HusimiField& field) {
  const ManifoldGrid& g = *field.grid;
  Profile p;
  int outer = 0;
  if (const auto* s = std::get_if<PolarGridSpec>(&g.spec)) {
    outer = s->n_r;
    p.step = s->radius / s->n_r;
  } else {
    const auto& sp = std::get<SphereGridSpec>(g.spec);
    outer = sp.n_theta;
    p.step = (sp.theta_max - sp.theta_min) / sp.n_theta;
  }
  for (int i = 0; i < outer; ++i) {
    const std::size_t idx = g.index(i, 0);
    if (const auto* fp = std::get_if<FieldPoint>(&g.points[idx])) {
      p.x.push_back(std::abs(fp->alpha));
    } else {
      p.x.push_back(std::get<SpinPoint>(g.points[idx]).theta);
    }
    p.values.push_back(field.values(Eigen::Index(idx)));
  }
  return p;
}

double SupportPair::intersection_fraction() const {
  const double m = std::min(measure_a, measure_b);
  return m > 0.0 ? intersection / m : 0.0;
}

SupportPair compare_supports(const HusimiField& a, const HusimiField& b, double fraction) {
  const SupportRegion sa = support_set(a, relative_threshold(a, fraction));
  const SupportRegion sb = support_set(b, relative_threshold(b, fraction));
  SupportPair r;
  r.measure_a = sa.measure;
  r.measure_b = sb.measure;
  r.base_measure_a = sa.base_measure;
  r.base_measure_b = sb.base_measure;
  r.intersection = support_intersection(sa, sb);
  r.base_intersection = r.intersection / a.grid->measure_constant;
  return r;
}

GridPtr fock_dataset_grid(double n_max, int N, const std::optional<GridSpec>& override_spec) {
  const CoherentFamily fam = CoherentFamily::field(N);
  if (override_spec) return std::make_shared<const ManifoldGrid>(make_grid(fam, *override_spec));
  return std::make_shared<const ManifoldGrid>(make_grid(fam, default_field_grid(n_max, N)));
}

GridPtr superposition_dataset_grid(int N, const std::optional<GridSpec>& override_spec) {
  return fock_dataset_grid(2.0 / N, N, override_spec);
}

GridPtr spin_dataset_grid(int N, double s0, const std::optional<GridSpec>& override_spec) {
  const CoherentFamily fam = CoherentFamily::spin(N, s0);
  SphereGridSpec spec;
  spec.n_theta = kSpinDatasetTheta;
  spec.n_phi = kSpinDatasetPhi;
  return std::make_shared<const ManifoldGrid>(make_grid(fam, override_spec ? *override_spec : GridSpec(spec)));
}

HusimiField fock_field(double n, const CoherentFamily& fam, GridPtr grid) {
  const long m = fam.scaled_fock_index(n);
  Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(m + 1);
  xi(m) = 1.0;
  return husimi_of_state(xi, fam, std::move(grid));
}

HusimiField superposition_field(int sign, const CoherentFamily& fam, GridPtr grid) {
  Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(3);
  xi(1) = 1.0 / std::sqrt(2.0);
  xi(2) = (sign < 0 ? -1.0 : 1.0) / std::sqrt(2.0);
  return husimi_of_state(xi, fam, std::move(grid));
}

HusimiField spin_weight_field(double ratio, const CoherentFamily& fam, GridPtr grid) {
  const long m = fam.scaled_weight_index(ratio);
  Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(fam.two_s() + 1);
  xi(m) = 1.0;
  return husimi_of_state(xi, fam, std::move(grid));
}

void write_field_csv(const fs::path& path, const std::string& c, const HusimiField& field) {
  const ManifoldGrid& g = *field.grid;
  const bool polar = g.kind == FamilyKind::field;
  CsvWriter w(path, c,
              polar ? std::vector<std::string>{"re_alpha", "im_alpha", "weight", "value"}
                    : std::vector<std::string>{"theta", "phi", "weight", "value"});
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (polar) {
      const auto a = std::get<FieldPoint>(g.points[i]).alpha;
      w.row({a.real(), a.imag(), g.weights[i], field.values(Eigen::Index(i))});
    } else {
      const auto& p = std::get<SpinPoint>(g.points[i]);
      w.row({p.theta, p.phi, g.weights[i], field.values(Eigen::Index(i))});
    }
  }
  w.close();
}

void write_profile_csv(const fs::path& path, const std::string& c, const Profile& profile,
                       FamilyKind kind) {
  CsvWriter w(path, c, {kind == FamilyKind::field ? "abs_alpha" : "theta", "value"});
  for (std::size_t i = 0; i < profile.x.size(); ++i) w.row({profile.x[i], profile.values[i]});
  w.close();
}

double csv_field_integral(const CsvTable& table) {
  const std::size_t w = table.column("weight");
  const std::size_t v = table.column("value");
  double s = 0.0;
  for (const auto& r : table.rows) s += r[w] * r[v];
  return s;
}

int cmd_overlap_field(const RunConfig& cfg, const fs::path& out) {
  prepare_out(out);
  const std::string hash = config_hash(cfg);
  const std::vector<int> ns = cfg.ns.empty() ? kFieldNs : cfg.ns;
  const std::vector<double> excitations = cfg.excitations.empty() ? kFieldExcitations : cfg.excitations;
  if (cfg.grid && !std::holds_alternative<PolarGridSpec>(*cfg.grid)) {
    throw ConfigError("overlap-field needs a polar grid (r:R:NR:NPHI)");
  }
  const double n_max = *std::max_element(excitations.begin(), excitations.end());

  ordered_json summary;
  summary["command"] = "overlap-field";
  summary["config_hash"] = hash;
  summary["support_fraction"] = cfg.support_fraction;
  ordered_json datasets = ordered_json::array();
  ordered_json supports = ordered_json::array();

  for (const int N : ns) {
    const CoherentFamily fam = CoherentFamily::field(N);
    const GridPtr grid = fock_dataset_grid(n_max, N, cfg.grid);
    std::vector<HusimiField> fields;
    for (const double n : excitations) {
      HusimiField f = fock_field(n, fam, grid);
      f.validate(tolerances().quadrature);
      const Profile p = profile_of(f);
      const std::string name = "field_n" + tag(n) + "_N" + std::to_string(N) + ".csv";
      const std::string pname = "field_profile_n" + tag(n) + "_N" + std::to_string(N) + ".csv";
      const std::string what = "n=" + tag(n) + " N=" + std::to_string(N);
      write_field_csv(out / name, comment(hash, what), f);
      write_profile_csv(out / pname, comment(hash, what), p, FamilyKind::field);
      ordered_json e = field_entry(name, pname, f, p);
      e["state"] = "fock";
      e["n"] = n;
      e["N"] = N;
      e["fock_index"] = fam.scaled_fock_index(n);
      datasets.push_back(e);
      fields.push_back(std::move(f));
    }
    for (std::size_t a = 0; a < fields.size(); ++a) {
      for (std::size_t b = a + 1; b < fields.size(); ++b) {
        supports.push_back(support_entry("n=" + tag(excitations[a]), "n=" + tag(excitations[b]), N,
                                         compare_supports(fields[a], fields[b], cfg.support_fraction)));
      }
    }

    const GridPtr sgrid = superposition_dataset_grid(N, cfg.grid);
    const HusimiField plus = superposition_field(+1, fam, sgrid);
    const HusimiField minus = superposition_field(-1, fam, sgrid);
    for (const auto& [label, f] : {std::pair<std::string, const HusimiField*>{"plus", &plus},
                                   std::pair<std::string, const HusimiField*>{"minus", &minus}}) {
      f->validate(tolerances().quadrature);
      const Profile p = profile_of(*f);
      const std::string name = "field_" + label + "_N" + std::to_string(N) + ".csv";
      const std::string pname = "field_profile_" + label + "_N" + std::to_string(N) + ".csv";
      const std::string what = label + " N=" + std::to_string(N);
      write_field_csv(out / name, comment(hash, what), *f);
      write_profile_csv(out / pname, comment(hash, what), p, FamilyKind::field);
      ordered_json e = field_entry(name, pname, *f, p);
      e["state"] = label;
      e["N"] = N;
      datasets.push_back(e);
    }
    supports.push_back(support_entry("plus", "minus", N, compare_supports(plus, minus, cfg.support_fraction)));
  }
  summary["datasets"] = datasets;
  summary["supports"] = supports;
  write_json(out / "summary.json", summary);
  return kExitOk;
}

int cmd_overlap_spin(const RunConfig& cfg, const fs::path& out) {
  prepare_out(out);
  const std::string hash = config_hash(cfg);
  const std::vector<int> ns = cfg.ns.empty() ? kSpinNs : cfg.ns;
  const std::vector<double> ratios = cfg.m_over_s.empty() ? kSpinRatios : cfg.m_over_s;
  if (cfg.grid && !std::holds_alternative<SphereGridSpec>(*cfg.grid)) {
    throw ConfigError("overlap-spin needs a sphere grid (sphere:NTH:NPHI)");
  }
  const double s0 = cfg.model.s0;

  ordered_json summary;
  summary["command"] = "overlap-spin";
  summary["config_hash"] = hash;
  summary["support_fraction"] = cfg.support_fraction;
  ordered_json datasets = ordered_json::array();
  ordered_json supports = ordered_json::array();

  for (const int N : ns) {
    const CoherentFamily fam = CoherentFamily::spin(N, s0);
    const GridPtr grid = spin_dataset_grid(N, s0, cfg.grid);
    std::vector<HusimiField> fields;
    for (const double r : ratios) {
      HusimiField f = spin_weight_field(r, fam, grid);
      f.validate(tolerances().quadrature);
      const Profile p = profile_of(f);
      const long m = fam.scaled_weight_index(r);
      const std::string name = "spin_mS" + tag(r) + "_N" + std::to_string(N) + ".csv";
      const std::string pname = "spin_profile_mS" + tag(r) + "_N" + std::to_string(N) + ".csv";
      const std::string what = "m/S=" + tag(r) + " N=" + std::to_string(N);
      write_field_csv(out / name, comment(hash, what), f);
      write_profile_csv(out / pname, comment(hash, what), p, FamilyKind::spin);
      ordered_json e = field_entry(name, pname, f, p);
      e["m_over_S"] = r;
      e["N"] = N;
      e["m"] = m;
      e["two_S"] = fam.two_s();
      e["expected_theta"] = 2.0 * std::asin(std::sqrt(double(m) / fam.two_s()));
      datasets.push_back(e);
      fields.push_back(std::move(f));
    }
    for (std::size_t a = 0; a < fields.size(); ++a) {
      for (std::size_t b = a + 1; b < fields.size(); ++b) {
        supports.push_back(support_entry("m/S=" + tag(ratios[a]), "m/S=" + tag(ratios[b]), N,
                                         compare_supports(fields[a], fields[b], cfg.support_fraction)));
      }
    }
  }
  summary["datasets"] = datasets;
  summary["supports"] = supports;
  write_json(out / "summary.json", summary);
  return kExitOk;
}

int cmd_compare_maps(const RunConfig& cfg, const fs::path& out) {
  prepare_out(out);
  const std::string hash = config_hash(cfg);
  const InstanceResult res = run_instance_detailed(cfg.model);
  const SchmidtDecomposition<double>& sd = res.schmidt;

  write_field_csv(out / "husimi_true.csv", comment(hash, "true map"), res.husimi_true);
  write_field_csv(out / "husimi_measure.csv", comment(hash, "measure-like map"), res.husimi_measure);
  write_rho_csv(out / "rho_true.csv", comment(hash, "true map"), res.rho_true.matrix());
  write_rho_csv(out / "rho_measure.csv", comment(hash, "measure-like map"), res.rho_measure.matrix());

  const std::vector<double> times = ozawa_times(cfg);
  const auto oz_measure = ozawa_reproducibility_check(res.measure_hamiltonian, res.measure_state,
                                                      std::span<const double>(times), sd.gamma_basis);
  const CatalogModel model = catalog(cfg.model);
  const PureState<double> psi0 =
      tensor(PureState<double>::normalized(cfg.model.input_gamma()), model.xi0);
  const auto oz_true = ozawa_reproducibility_check(model.hamiltonian, psi0,
                                                   std::span<const double>(times), sd.gamma_basis);

  ordered_json r;
  r["command"] = "compare-maps";
  r["config_hash"] = hash;
  r["model"] = to_json(cfg)["model"];
  r["N"] = cfg.model.N;
  r["tau"] = cfg.model.tau;
  r["grid"] = format_grid_spec(res.husimi_true.grid->spec);
  r["schmidt_coefficients"] = vector_json(sd.coefficients);
  r["schmidt_rank"] = sd.gamma_max();
  r["degenerate"] = sd.degenerate;
  r["probabilities"] = vector_json(res.input.probabilities());
  r["trace_dist"] = number(res.row.trace_dist);
  r["husimi_l1"] = number(res.row.husimi_l1);
  r["support_overlap"] = number(res.row.support_overlap);
  r["truncation_leakage"] = number(res.truncation_leakage);
  r["husimi_true"] = {{"file", "husimi_true.csv"},
                      {"integral", number(sequential_integral(res.husimi_true))},
                      {"peak", number(res.husimi_true.peak())},
                      {"clipped", res.husimi_true.clipped}};
  r["husimi_measure"] = {{"file", "husimi_measure.csv"},
                         {"integral", number(sequential_integral(res.husimi_measure))},
                         {"peak", number(res.husimi_measure.peak())},
                         {"clipped", res.husimi_measure.clipped}};
  r["rho_files"] = {{"true", "rho_true.csv"}, {"measure", "rho_measure.csv"}};
  r["ozawa"] = {{"measure_like", ozawa_json(oz_measure)}, {"true_model", ozawa_json(oz_true)}};
  write_json(out / "report.json", r);
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out) {
  prepare_out(out);
  const std::string hash = config_hash(cfg);
  const std::vector<int> ns = cfg.ns.empty() ? kSweepNs : cfg.ns;
  const bool multi = !cfg.taus.empty();
  const std::vector<double> taus = multi ? cfg.taus : std::vector<double>{cfg.model.tau};

  ordered_json verdict;
  verdict["command"] = "sweep";
  verdict["config_hash"] = hash;
  verdict["N"] = ns;
  verdict["slack"] = kSweepSlack;
  verdict["endpoint_ratio_limit"] = kSweepEndpointRatio;
  ordered_json runs = ordered_json::array();
  ordered_json timings = ordered_json::array();
  bool failed = false;

  for (const double tau : taus) {
    ModelConfig m = cfg.model;
    m.tau = tau;
    const SweepReport rep = sweep(m, ns);
    const std::string name = multi ? "sweep_tau_" + tag(tau) + ".csv" : "sweep.csv";
    CsvWriter w(out / name, comment(hash, "tau=" + tag(tau)),
                {"N", "husimi_l1", "trace_dist", "support_overlap", "schmidt_rank"});
    ordered_json wall = ordered_json::array();
    for (const auto& row : rep.rows) {
      w.row({double(row.N), row.husimi_l1, row.trace_dist, row.support_overlap, double(row.schmidt_rank)});
      wall.push_back({{"N", row.N}, {"seconds", row.wall_time}});
    }
    w.close();
    ordered_json e;
    e["tau"] = tau;
    e["file"] = name;
    e["verdict"] = to_string(rep.verdict);
    e["monotone"] = rep.monotone;
    e["endpoint_ratio"] = number(rep.endpoint_ratio);
    e["fit_exponent"] = number(rep.fit_exponent);
    e["failures"] = rep.failures;
    runs.push_back(e);
    timings.push_back({{"tau", tau}, {"rows", wall}});
    failed = failed || rep.verdict == Verdict::fail;
  }
  verdict["runs"] = runs;
  verdict["verdict"] = failed ? "FAIL" : to_string(ns.size() < 3 ? Verdict::not_applicable : Verdict::pass);
  write_json(out / "sweep_verdict.json", verdict);
  write_json(out / "sweep_timings.json", {{"config_hash", hash}, {"runs", timings}});
  return failed ? kExitVerdict : kExitOk;
}

ChecksResult run_checks() {
  ChecksResult res;
  const double quad = tolerances().quadrature;
  auto record = [&](ordered_json& section, ordered_json item) {
    if (item["result"] != "PASS") res.pass = false;
    section.push_back(std::move(item));
  };

  // resolution of the identity on truncated subspaces, coarse then refined
  ordered_json identity = ordered_json::array();
  {
    const CoherentFamily fam = CoherentFamily::field(1);
    const Eigen::MatrixXcd basis = Eigen::MatrixXcd::Identity(12, 6);
    const PolarGridSpec coarse{8.0, 200, 16};
    const PolarGridSpec fine{8.0, 400, 16};
    const double d0 = resolution_of_identity_check(fam, make_grid(fam, coarse), basis).max_defect;
    const double d1 = resolution_of_identity_check(fam, make_grid(fam, fine), basis).max_defect;
    record(identity, pass_item("field N=1 span{|0>..|5>} " + format_grid_spec(coarse), d0, quad, d0 < quad));
    record(identity, pass_item("field N=1 span{|0>..|5>} " + format_grid_spec(fine), d1, quad, d1 < quad));
    record(identity, pass_item("field refinement ratio", d1 / d0, 0.5, d1 <= 0.5 * d0));
  }
  {
    const CoherentFamily fam = CoherentFamily::spin(20);
    const Eigen::MatrixXcd basis = Eigen::MatrixXcd::Identity(fam.two_s() + 1, fam.two_s() + 1);
    SphereGridSpec coarse;
    coarse.n_theta = 128;
    coarse.n_phi = 32;
    SphereGridSpec fine = coarse;
    fine.n_theta = 256;
    const double d0 = resolution_of_identity_check(fam, make_grid(fam, coarse), basis).max_defect;
    const double d1 = resolution_of_identity_check(fam, make_grid(fam, fine), basis).max_defect;
    record(identity, pass_item("spin S=10 full basis " + format_grid_spec(coarse), d0, quad, d0 < quad));
    record(identity, pass_item("spin S=10 full basis " + format_grid_spec(fine), d1, quad, d1 < quad));
    record(identity, pass_item("spin refinement ratio", d1 / d0, 0.5, d1 <= 0.5 * d0));
  }
  res.report["identity_resolution"] = identity;

  // overlap decay (1/N) ln|<w|w'>|
  ordered_json decay = ordered_json::array();
  const std::vector<int> decay_ns = {1, 10, 100, 1000, 10000};
  {
    const std::complex<double> a{0.3, 0.1}, b{-0.2, 0.4};
    const double expected = -0.5 * std::norm(a - b);
    double worst = 0.0;
    ordered_json rows = ordered_json::array();
    for (const auto& r : gcs_overlap_decay_check(FamilyKind::field, FieldPoint{a}, FieldPoint{b}, decay_ns)) {
      worst = std::max(worst, std::abs(r.value - expected));
      rows.push_back({{"N", r.N}, {"value", r.value}});
    }
    ordered_json item = pass_item("field (1/N) ln|<a|b>| + |a-b|^2/2", worst, tolerances().algebraic,
                                  worst < tolerances().algebraic);
    item["expected"] = expected;
    item["rows"] = rows;
    record(decay, item);
  }
  {
    const SpinPoint a(std::numbers::pi / 3, 0.5), b(2 * std::numbers::pi / 3, 2.0);
    double largest = -std::numeric_limits<double>::infinity();
    ordered_json rows = ordered_json::array();
    for (const auto& r : gcs_overlap_decay_check(FamilyKind::spin, a, b, decay_ns)) {
      largest = std::max(largest, r.value);
      rows.push_back({{"N", r.N}, {"value", r.value}});
    }
    ordered_json item = pass_item("spin (1/N) ln|<a|b>| strictly negative", largest, 0.0, largest < 0.0);
    item["rows"] = rows;
    record(decay, item);
  }
  res.report["overlap_decay"] = decay;

  // orthonormality in the limit for the Fock pair |N>, |4N>
  ordered_json ortho = ordered_json::array();
  {
    const std::vector<int> ns = {1, 10, 100};
    const auto states = [](int N) {
      Eigen::VectorXcd x1 = Eigen::VectorXcd::Zero(4 * N + 1), x2 = x1;
      x1(N) = 1.0;
      x2(4 * N) = 1.0;
      return std::make_pair(x1, x2);
    };
    const auto grid_for = [](const CoherentFamily& fam) {
      PolarGridSpec spec = default_field_grid(4.0, fam.N());
      spec.n_phi = 3 * fam.N() + 8;
      spec.n_r *= 2;
      return make_grid(fam, spec);
    };
    const auto rows = orthonormality_limit_check(FamilyKind::field, states, ns, grid_for);
    for (const auto& r : rows) {
      const double d = std::max({r.defect_first, r.defect_second, r.defect_cross});
      ordered_json item = pass_item("Fock n=1 vs n=4 N=" + std::to_string(r.N), d, 1e-6, d < 1e-6);
      item["defect_first"] = r.defect_first;
      item["defect_second"] = r.defect_second;
      item["defect_cross"] = r.defect_cross;
      item["product_mass"] = r.product_mass;
      record(ortho, item);
    }
    const double ratio = rows.back().product_mass / rows.front().product_mass;
    record(ortho, pass_item("product mass N=100 / N=1", ratio, 0.1, ratio < 0.1));
  }
  res.report["orthonormality_limit"] = ortho;
  res.report["result"] = res.pass ? "PASS" : "FAIL";
  return res;
}

int cmd_checks(const RunConfig& cfg, const fs::path& out) {
  prepare_out(out);
  ChecksResult r = run_checks();
  ordered_json j;
  j["command"] = "checks";
  j["config_hash"] = config_hash(cfg);
  for (auto& [k, v] : r.report.items()) j[k] = v;
  write_json(out / "checks.json", j);
  return r.pass ? kExitOk : kExitVerdict;
}

}  // namespace apparatus
