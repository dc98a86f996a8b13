#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "apparatus/coherent.hpp"
#include "apparatus/dynamics.hpp"
#include "apparatus/husimi.hpp"
#include "apparatus/schmidt_maps.hpp"

namespace apparatus {

enum class ModelKind { qubit_spin, qubit_boson };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct Couplings {
  double g1 = 1.0;
  double eta = 0.5;
  double omega = 0.3;
};

/// One instance of the qubit + N-component environment experiment.
struct ModelConfig {
  ModelKind kind = ModelKind::qubit_spin;
  int N = 10;
  Couplings couplings;
  double tau = 1.0;
  /// Input |Gamma>; empty means (|0> + |1>)/sqrt(2).
  Eigen::VectorXcd gamma_state;
  /// Fock truncation (boson only); 0 picks a default from g1 and tau.
  int truncation = 0;
  double s0 = 0.5;
  /// Initial spin coherent state of Xi; (0, 0) is the S^z = -S reference state.
  double theta0 = 0.0;
  double phi0 = 0.0;
  /// Measure-like model; empty eps / energies mean the ladders 1, 2, ...
  double measure_coupling = 1.0;
  Eigen::VectorXd eps;
  Eigen::VectorXd energies;
  /// Husimi grid; nullopt picks the family default.
  std::optional<GridSpec> grid;
  double support_fraction = 1e-3;

  Eigen::VectorXcd input_gamma() const;
  int effective_truncation() const;
};

struct CatalogModel {
  Hamiltonian<double> hamiltonian;
  PureState<double> xi0;
  CoherentFamily family;
};

/// qubit_spin:  g1 sz (x) Sx/S + eta sx (x) Sz/S + omega I (x) Sz/S, Xi0 = spin coherent state.
/// qubit_boson: g1 sz (x) (a + a^dag)/sqrt(N) + eta sx (x) n/N + omega I (x) n/N, Xi0 = vacuum.
CatalogModel catalog(const ModelConfig& cfg);

/// Spin operators in the weight basis m = 0..2S (S^z = m - S).
struct SpinOperators {
  Eigen::MatrixXcd sx, sy, sz;
};
SpinOperators spin_operators(int two_s);

/// Annihilation operator on Fock levels 0..dim-1.
Eigen::MatrixXcd annihilation(int dim);

struct ConvergenceRow {
  int N = 0;
  double husimi_l1 = 0;
  double trace_dist = 0;
  double support_overlap = 0;
  long schmidt_rank = 0;
  double wall_time = 0;  // seconds; not part of the deterministic output
};

/// Everything run_instance computes, for reports that need more than the row.
struct InstanceResult {
  ConvergenceRow row;
  SchmidtDecomposition<double> schmidt;
  InputState<double> input;
  DensityOperator<double> rho_true;
  DensityOperator<double> rho_measure;
  HusimiField husimi_true;
  HusimiField husimi_measure;
  CoherentFamily family;
  Hamiltonian<double> measure_hamiltonian;
  PureState<double> measure_state;
  double truncation_leakage = 0;  // population in the top 5 Fock levels (boson)
};

InstanceResult run_instance_detailed(const ModelConfig& cfg);
ConvergenceRow run_instance(const ModelConfig& cfg);

enum class Verdict { pass, fail, not_applicable };
const char* to_string(Verdict v);

struct SweepReport {
  std::vector<ConvergenceRow> rows;  // sorted by N
  Verdict verdict = Verdict::not_applicable;
  bool monotone = false;
  double endpoint_ratio = 0;
  /// Least-squares slope of ln(husimi_l1) against ln(N); NaN if undefined.
  double fit_exponent = 0;
  std::vector<std::string> failures;
};

/// Monotonicity slack and endpoint-ratio bound of the sweep verdict.
inline constexpr double kSweepSlack = 0.10;
inline constexpr double kSweepEndpointRatio = 0.5;
/// Distances below this are treated as converged.
inline constexpr double kSweepFloor = 1e-10;

SweepReport sweep(const ModelConfig& base, std::vector<int> ns);
SweepReport assess_sweep(std::vector<ConvergenceRow> rows);

}  // namespace apparatus
