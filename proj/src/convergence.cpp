#include "apparatus/convergence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "apparatus/parallel.hpp"

namespace apparatus {

namespace {

MeasureModel<double> measure_model(const ModelConfig& cfg, const HilbertDims& dims) {
  MeasureModel<double> ladder = MeasureModel<double>::ladder(dims, cfg.tau, cfg.measure_coupling);
  Eigen::VectorXd eps = cfg.eps.size() ? cfg.eps : ladder.eps();
  Eigen::VectorXd e = cfg.energies.size() ? cfg.energies : ladder.energies();
  return MeasureModel<double>(std::move(eps), std::move(e), cfg.measure_coupling, cfg.tau);
}

GridSpec default_grid(const ModelConfig& cfg, const CoherentFamily& fam) {
  if (cfg.grid) return *cfg.grid;
  if (fam.kind() == FamilyKind::spin) return default_sphere_grid(fam);
  return default_field_grid(double(cfg.effective_truncation()) / cfg.N, cfg.N);
}

double top_level_population(const DensityOperator<double>& rho, int levels) {
  const Eigen::Index d = rho.dim();
  double s = 0.0;
  for (Eigen::Index i = std::max<Eigen::Index>(0, d - levels); i < d; ++i) s += rho.matrix()(i, i).real();
  return s;
}

}  // namespace

InstanceResult run_instance_detailed(const ModelConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const CatalogModel model = catalog(cfg);
  const PureState<double> gamma = PureState<double>::normalized(cfg.input_gamma());
  if (gamma.size() != 2) throw ConfigError("run_instance: |Gamma> must be a qubit state");

  const PureState<double> psi0 = tensor(gamma, model.xi0);
  const SpectralCache<double> cache = diagonalize(model.hamiltonian);
  const PureState<double> psi_tau = evolve(cache, psi0, cfg.tau);

  double leakage = 0.0;
  if (cfg.kind == ModelKind::qubit_boson) {
    leakage = top_level_population(partial_trace_gamma(psi_tau), 5);
    if (leakage > 1e-8) {
      throw ResourceCapError("truncation leakage: population " + std::to_string(leakage) +
                             " in the top 5 Fock levels of " +
                             std::to_string(cfg.effective_truncation()) +
                             "; increase truncation");
    }
  }

  SchmidtDecomposition<double> sd = schmidt_decompose(psi_tau, cfg.tau);
  InputState<double> in = input_state(sd, gamma);
  const MeasureModel<double> mm = measure_model(cfg, sd.dims);
  const SchmidtOperators<double> ops = build_schmidt_operators(sd, mm.eps(), mm.energies());
  Hamiltonian<double> h_m = build_measure_hamiltonian(ops, mm.coupling());
  PureState<double> psi_m = measure_initial_state(sd, gamma);

  DensityOperator<double> rho_true = true_map_output(sd);
  DensityOperator<double> rho_meas = measure_map_output(in, sd, mm);

  const auto grid = std::make_shared<const ManifoldGrid>(make_grid(model.family, default_grid(cfg, model.family)));
  HusimiField chi_true = husimi_true(sd, model.family, grid);
  HusimiField chi_meas = husimi_of_density(rho_meas, model.family, grid);
  chi_true.validate(tolerances().quadrature);
  chi_meas.validate(tolerances().quadrature);

  ConvergenceRow row;
  row.N = cfg.N;
  row.trace_dist = trace_distance(rho_true, rho_meas);
  row.husimi_l1 = l1_distance(chi_true, chi_meas);
  row.schmidt_rank = long(sd.gamma_max());
  if (sd.gamma_max() >= 2) {
    const HusimiField f1 = husimi_of_state(sd.xi_basis.col(0), model.family, grid);
    const HusimiField f2 = husimi_of_state(sd.xi_basis.col(1), model.family, grid);
    row.support_overlap =
        support_intersection(support_set(f1, relative_threshold(f1, cfg.support_fraction)),
                             support_set(f2, relative_threshold(f2, cfg.support_fraction)));
  }
  row.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  return InstanceResult{row,
                        std::move(sd),
                        std::move(in),
                        std::move(rho_true),
                        std::move(rho_meas),
                        std::move(chi_true),
                        std::move(chi_meas),
                        model.family,
                        std::move(h_m),
                        std::move(psi_m),
                        leakage};
}

ConvergenceRow run_instance(const ModelConfig& cfg) { return run_instance_detailed(cfg).row; }

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::not_applicable: return "NOT_APPLICABLE";
  }
  return "?";
}

SweepReport assess_sweep(std::vector<ConvergenceRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.N < b.N; });
  SweepReport rep;
  rep.rows = std::move(rows);
  rep.fit_exponent = std::numeric_limits<double>::quiet_NaN();
  if (rep.rows.size() < 3) {
    rep.verdict = Verdict::not_applicable;
    rep.failures.push_back("fewer than 3 values of N");
    return rep;
  }

  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double prev = rep.rows[i - 1].husimi_l1;
    const double cur = rep.rows[i].husimi_l1;
    if (cur > (1.0 + kSweepSlack) * prev + kSweepFloor) {
      rep.monotone = false;
      rep.failures.push_back("husimi_l1 rises from " + std::to_string(prev) + " at N=" +
                             std::to_string(rep.rows[i - 1].N) + " to " + std::to_string(cur) +
                             " at N=" + std::to_string(rep.rows[i].N));
    }
  }
  const double first = rep.rows.front().husimi_l1;
  const double last = rep.rows.back().husimi_l1;
  bool endpoint_ok = true;
  if (first > kSweepFloor) {
    rep.endpoint_ratio = last / first;
    endpoint_ok = rep.endpoint_ratio < kSweepEndpointRatio;
  } else {
    rep.endpoint_ratio = std::numeric_limits<double>::quiet_NaN();
    endpoint_ok = last <= kSweepFloor;
  }
  if (!endpoint_ok) {
    rep.failures.push_back("endpoint ratio " + std::to_string(rep.endpoint_ratio) +
                           " not below " + std::to_string(kSweepEndpointRatio));
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rep.rows) {
    if (r.husimi_l1 <= kSweepFloor) continue;
    const double x = std::log(double(r.N));
    const double y = std::log(r.husimi_l1);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double den = n * sxx - sx * sx;
  if (n >= 2 && den > 0.0) rep.fit_exponent = (n * sxy - sx * sy) / den;

  rep.verdict = rep.monotone && endpoint_ok ? Verdict::pass : Verdict::fail;
  return rep;
}

SweepReport sweep(const ModelConfig& base, std::vector<int> ns) {
  std::vector<ConvergenceRow> rows(ns.size());
  parallel_for(ns.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ModelConfig cfg = base;
      cfg.N = ns[i];
      rows[i] = run_instance(cfg);
    }
  });
  return assess_sweep(std::move(rows));
}

}  // namespace apparatus
