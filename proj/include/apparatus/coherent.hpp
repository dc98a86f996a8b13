#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "apparatus/tolerances.hpp"

namespace apparatus {

enum class FamilyKind { field, spin };

const char* to_string(FamilyKind kind);

/// Phase-plane point of the h4 family.
struct FieldPoint {
  std::complex<double> alpha;
};

/// Point on the unit sphere of the su(2) family, theta in [0, pi], phi in [0, 2 pi).
struct SpinPoint {
  double theta = 0;
  double phi = 0;

  SpinPoint() = default;
  SpinPoint(double theta_, double phi_);
};

using ManifoldPoint = std::variant<FieldPoint, SpinPoint>;

/// Generalized coherent-state family with quanticity parameter k = 1/N.
///
/// Field: manifold coordinate alpha is fixed across N; the kernels act on the
/// scaled displacement beta = alpha sqrt(N) and a classical excitation n maps
/// to the Fock index round(n N).
///
/// Spin: total spin S = s0 N (2S must be integral), reference state |0> with
/// S^z|0> = -S|0>, weight basis |m>, S^z|m> = (m - S)|m>, m = 0..2S.
class CoherentFamily {
 public:
  static CoherentFamily field(int n_components);
  static CoherentFamily spin(int n_components, double s0 = 0.5);

  FamilyKind kind() const { return kind_; }
  int N() const { return n_; }
  /// Quanticity parameter; only N is stored, so k * N == 1 by construction.
  double k() const { return 1.0 / n_; }
  double s0() const { return s0_; }
  /// Spin only.
  int two_s() const { return two_s_; }
  double S() const { return 0.5 * two_s_; }
  /// Classical-excitation scale sqrt(N) of the field embedding.
  double displacement_scale() const;
  /// Measure constant c_k = 1/k multiplying the base measure.
  double measure_constant() const { return double(n_); }

  /// Field: Fock index round(n N) for classical excitation n >= 0.
  long scaled_fock_index(double n) const;
  /// Spin: weight index round(ratio * S) for m/S = ratio.
  long scaled_weight_index(double ratio) const;

  friend bool operator==(const CoherentFamily&, const CoherentFamily&) = default;

 private:
  CoherentFamily(FamilyKind kind, int n, double s0, int two_s)
      : kind_(kind), n_(n), s0_(s0), two_s_(two_s) {}

  FamilyKind kind_;
  int n_;
  double s0_;
  int two_s_;
};

double log_factorial(long m);
double log_binomial(long n, long m);

/// |<beta|m>|^2 with beta = alpha sqrt(N), m = round(n N); log-domain.
double field_overlap_sq(std::complex<double> alpha, double n, const CoherentFamily& fam);

/// <beta|m> = exp(-|beta|^2/2) beta^m / sqrt(m!), beta = alpha sqrt(N).
std::complex<double> field_overlap(std::complex<double> alpha, long m, const CoherentFamily& fam);

/// <Omega|m> = sqrt(C(2S, m)) cos(theta/2)^(2S-m) sin(theta/2)^m exp(-i m phi).
std::complex<double> spin_overlap(const SpinPoint& omega, long m, const CoherentFamily& fam);

/// Kernel <omega|omega'> between two coherent states of one family, closed form.
std::complex<double> gcs_overlap(const CoherentFamily& fam, const ManifoldPoint& a,
                                 const ManifoldPoint& b);
/// ln|<omega|omega'>| without exponentiating.
double gcs_log_abs_overlap(const CoherentFamily& fam, const ManifoldPoint& a,
                           const ManifoldPoint& b);

/// Amplitudes <m|omega> of the coherent state in the canonical basis, m < dim.
Eigen::VectorXcd coherent_state(const CoherentFamily& fam, const ManifoldPoint& omega,
                                Eigen::Index dim);

struct PolarGridSpec {
  double radius = 6;
  int n_r = 200;
  int n_phi = 64;
};

struct SphereGridSpec {
  int n_theta = 128;
  int n_phi = 256;
  double theta_min = 0;
  double theta_max = 3.14159265358979323846;
};

using GridSpec = std::variant<PolarGridSpec, SphereGridSpec>;

/// Midpoint quadrature over the manifold. weights carry dmu = c_k dm:
/// field (N/pi) |alpha| d|alpha| dphi; spin ((2S+1)/4pi) times the exact area
/// of each (theta, phi) cell, i.e. sin(theta) dtheta dphi up to O(dtheta^2).
struct ManifoldGrid {
  FamilyKind kind = FamilyKind::field;
  GridSpec spec;
  double measure_constant = 1.0;  // c_k folded into the weights
  std::vector<ManifoldPoint> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  /// Row-major (radial/polar index outer, azimuth inner).
  std::size_t index(int outer, int azimuth) const;
  double total_weight() const;
  friend bool operator==(const ManifoldGrid&, const ManifoldGrid&);
};

ManifoldGrid make_grid(const CoherentFamily& fam, const GridSpec& spec);

/// Polar grid covering Fock supports up to classical excitation n_max:
/// R = sqrt(n_max) + 6 safety / sqrt(N).
PolarGridSpec default_field_grid(double n_max, int n_components, double safety = 1.0,
                                 int n_phi = 64);
/// Uniform (theta, phi) grid resolving coherent widths ~ 1/sqrt(S).
SphereGridSpec default_sphere_grid(const CoherentFamily& fam);

/// Overlaps <omega_p|xi> for every grid point; xi is given in the canonical
/// basis (Fock or weight). Zero entries of xi are skipped.
Eigen::VectorXcd overlaps(const CoherentFamily& fam, const ManifoldGrid& grid,
                          const Eigen::VectorXcd& xi);

/// K(p, m) = <omega_p|m> for grid points [begin, end) and m < dim.
Eigen::MatrixXcd overlap_matrix(const CoherentFamily& fam, const ManifoldGrid& grid,
                                std::size_t begin, std::size_t end, Eigen::Index dim);

struct IdentityResolutionReport {
  double max_defect = 0;
  double max_diagonal_defect = 0;
  double max_offdiagonal_defect = 0;
};

/// Defect of sum_p w_p |omega_p><omega_p| - I on span(basis columns).
IdentityResolutionReport resolution_of_identity_check(const CoherentFamily& fam,
                                                      const ManifoldGrid& grid,
                                                      const Eigen::MatrixXcd& basis);

struct DecayRow {
  int N = 0;
  double value = 0;  // (1/N) ln|<omega|omega'>|
};

std::vector<DecayRow> gcs_overlap_decay_check(FamilyKind kind, const ManifoldPoint& a,
                                              const ManifoldPoint& b, const std::vector<int>& ns,
                                              double s0 = 0.5);

struct OrthonormalityRow {
  int N = 0;
  double defect_first = 0;    // |int <xi'|w><w|xi'> - 1|
  double defect_second = 0;   // |int <xi''|w><w|xi''> - 1|
  double defect_cross = 0;    // |int <xi'|w><w|xi''>|
  double product_mass = 0;    // int |<xi'|w><w|xi''>|
};

using StatePairForN = std::function<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>(int)>;
using GridForFamily = std::function<ManifoldGrid(const CoherentFamily&)>;

std::vector<OrthonormalityRow> orthonormality_limit_check(FamilyKind kind,
                                                          const StatePairForN& states,
                                                          const std::vector<int>& ns,
                                                          const GridForFamily& grid_for,
                                                          double s0 = 0.5);

}  // namespace apparatus
