#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "apparatus/dynamics.hpp"
#include "apparatus/states.hpp"

namespace apparatus {

/// Schmidt form of a bipartite pure state at time tau:
///   |Psi(tau)> = sum_{g < gamma_max} c_g |gamma_g> (x) |xi_g>.
/// Both bases are complete; the first gamma_max columns of xi_basis are the
/// partners of the retained coefficients, the rest complete H_Xi.
template <typename Real = double>
struct SchmidtDecomposition {
  RVector<Real> coefficients;  // non-increasing, all > schmidt_cutoff
  CMatrix<Real> gamma_basis;   // dim_gamma x dim_gamma, orthonormal columns
  CMatrix<Real> xi_basis;      // dim_xi x dim_xi, orthonormal columns
  HilbertDims dims;
  Real tau = 0;
  bool degenerate = false;     // two retained coefficients closer than tolerances().degeneracy

  Eigen::Index gamma_max() const { return coefficients.size(); }

  CVector<Real> reassemble() const {
    CVector<Real> out = CVector<Real>::Zero(dims.composite());
    for (Eigen::Index g = 0; g < gamma_max(); ++g) {
      out += coefficients(g) * kron(gamma_basis.col(g), xi_basis.col(g));
    }
    return out;
  }
};

namespace detail {

/// Index of the largest-magnitude entry; ties resolve to the lowest index.
template <typename Derived>
Eigen::Index argmax_abs(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  return idx;
}

template <typename Real, typename Derived>
Complex<Real> gauge_phase(const Eigen::MatrixBase<Derived>& v) {
  const Complex<Real> z = v(argmax_abs(v));
  const Real m = std::abs(z);
  return m > Real(0) ? z / m : Complex<Real>(1);
}

}  // namespace detail

/// Singular-value factorization of the dim_gamma x dim_xi amplitude matrix.
/// Each Gamma vector is rotated so that its largest entry is real positive,
/// with the conjugate phase moved onto its Xi partner.
template <typename Real>
SchmidtDecomposition<Real> schmidt_decompose(const PureState<Real>& psi, Real tau = 0) {
  const HilbertDims dims = psi.require_dims();
  const CMatrix<Real> a = psi.coefficient_matrix();
  Eigen::JacobiSVD<CMatrix<Real>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);

  SchmidtDecomposition<Real> sd;
  sd.dims = dims;
  sd.tau = tau;
  sd.gamma_basis = svd.matrixU();
  sd.xi_basis = svd.matrixV().conjugate();

  const RVector<Real>& s = svd.singularValues();
  Eigen::Index kept = 0;
  while (kept < s.size() && s(kept) > Real(tolerances().schmidt_cutoff)) ++kept;
  if (kept == 0) throw InvariantError("schmidt_decompose: state has no coefficient above cutoff");
  sd.coefficients = s.head(kept);

  const Eigen::Index paired = std::min(dims.dim_gamma, dims.dim_xi);
  for (Eigen::Index k = 0; k < dims.dim_gamma; ++k) {
    const Complex<Real> ph = detail::gauge_phase<Real>(sd.gamma_basis.col(k));
    sd.gamma_basis.col(k) *= std::conj(ph);
    if (k < paired) sd.xi_basis.col(k) *= ph;
  }
  for (Eigen::Index k = paired; k < dims.dim_xi; ++k) {
    sd.xi_basis.col(k) *= std::conj(detail::gauge_phase<Real>(sd.xi_basis.col(k)));
  }
  for (Eigen::Index k = 0; k + 1 < kept; ++k) {
    if (sd.coefficients(k) - sd.coefficients(k + 1) < Real(tolerances().degeneracy)) {
      sd.degenerate = true;
    }
  }
  return sd;
}

/// Output of the true channel: sum_g c_g^2 |xi_g><xi_g|.
template <typename Real>
DensityOperator<Real> true_map_output(const SchmidtDecomposition<Real>& sd) {
  const auto xr = sd.xi_basis.leftCols(sd.gamma_max());
  CMatrix<Real> rho = xr * sd.coefficients.array().square().matrix().asDiagonal() * xr.adjoint();
  rho = Real(0.5) * (rho + rho.adjoint()).eval();
  return DensityOperator<Real>(std::move(rho));
}

/// Amplitudes a_g = <gamma_g|Gamma> of the input in the tau-Schmidt Gamma basis.
template <typename Real = double>
struct InputState {
  CVector<Real> a;

  explicit InputState(CVector<Real> amplitudes) : a(std::move(amplitudes)) {
    if (std::abs(a.squaredNorm() - Real(1)) > Real(tolerances().physics)) {
      throw InvariantError("InputState: sum |a|^2 deviates from 1");
    }
  }

  RVector<Real> probabilities() const { return a.cwiseAbs2(); }
};

template <typename Real>
InputState<Real> input_state(const SchmidtDecomposition<Real>& sd, const PureState<Real>& gamma) {
  if (gamma.size() != sd.dims.dim_gamma) {
    throw DimensionError("input_state: |Gamma> has dimension " + std::to_string(gamma.size()) +
                         ", expected " + std::to_string(sd.dims.dim_gamma));
  }
  return InputState<Real>(sd.gamma_basis.adjoint() * gamma.amplitudes());
}

/// Parameters of the measure-like interaction g O_Gamma (x) O_Xi evolved for tau.
/// phases(g, j) = tau * g * eps_g * E_j.
template <typename Real = double>
class MeasureModel {
 public:
  MeasureModel(RVector<Real> eps, RVector<Real> e, Real g, Real tau)
      : eps_(std::move(eps)), e_(std::move(e)), g_(g), tau_(tau) {
    phases_.resize(eps_.size(), e_.size());
    for (Eigen::Index i = 0; i < eps_.size(); ++i) {
      for (Eigen::Index j = 0; j < e_.size(); ++j) phases_(i, j) = tau_ * g_ * eps_(i) * e_(j);
    }
  }

  /// eps_g = g + 1, E_j = j + 1, coupling 1.
  static MeasureModel ladder(const HilbertDims& dims, Real tau, Real g = 1) {
    return MeasureModel(RVector<Real>::LinSpaced(dims.dim_gamma, 1, Real(dims.dim_gamma)),
                        RVector<Real>::LinSpaced(dims.dim_xi, 1, Real(dims.dim_xi)), g, tau);
  }

  const RVector<Real>& eps() const { return eps_; }
  const RVector<Real>& energies() const { return e_; }
  Real coupling() const { return g_; }
  Real tau() const { return tau_; }
  const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& phases() const { return phases_; }

 private:
  RVector<Real> eps_;
  RVector<Real> e_;
  Real g_;
  Real tau_;
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> phases_;
};

template <typename Real = double>
struct SchmidtOperators {
  CMatrix<Real> gamma;  // sum_g eps_g |gamma_g><gamma_g|
  CMatrix<Real> xi;     // sum_j E_j |xi_j><xi_j|
};

namespace detail {

template <typename Real>
void require_distinct(const RVector<Real>& v, Eigen::Index expected, const char* name) {
  if (v.size() != expected) {
    throw DimensionError(std::string("build_schmidt_operators: ") + name + " has " +
                         std::to_string(v.size()) + " entries, expected " +
                         std::to_string(expected));
  }
  std::vector<Real> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] - sorted[i - 1] <= Real(tolerances().algebraic)) {
      throw InvariantError(std::string("build_schmidt_operators: repeated eigenvalue in ") + name);
    }
  }
}

template <typename Real>
CMatrix<Real> spectral_sum(const CMatrix<Real>& basis, const RVector<Real>& values) {
  CMatrix<Real> m = basis * values.template cast<Complex<Real>>().asDiagonal() * basis.adjoint();
  return Real(0.5) * (m + m.adjoint());
}

}  // namespace detail

template <typename Real>
SchmidtOperators<Real> build_schmidt_operators(const SchmidtDecomposition<Real>& sd,
                                               const RVector<Real>& eps, const RVector<Real>& e) {
  detail::require_distinct(eps, sd.dims.dim_gamma, "eps");
  detail::require_distinct(e, sd.dims.dim_xi, "E");
  return {detail::spectral_sum(sd.gamma_basis, eps), detail::spectral_sum(sd.xi_basis, e)};
}

/// H^M = g O_Gamma (x) O_Xi in the Gamma-major composite basis.
template <typename Real>
Hamiltonian<Real> build_measure_hamiltonian(const SchmidtOperators<Real>& ops, Real g) {
  CMatrix<Real> h = g * kron(ops.gamma, ops.xi);
  h = Real(0.5) * (h + h.adjoint()).eval();
  return Hamiltonian<Real>(std::move(h), "measure-like");
}

/// |Psi^M> = |Gamma> (x) sum_g c_g |xi_g>.
template <typename Real>
PureState<Real> measure_initial_state(const SchmidtDecomposition<Real>& sd,
                                      const PureState<Real>& gamma) {
  if (gamma.size() != sd.dims.dim_gamma) {
    throw DimensionError("measure_initial_state: |Gamma> dimension mismatch");
  }
  const CVector<Real> xi_m =
      sd.xi_basis.leftCols(sd.gamma_max()) * sd.coefficients.template cast<Complex<Real>>();
  return tensor(gamma, PureState<Real>::normalized(xi_m));
}

/// Closed-form output of the measure-and-prepare channel:
///   sum_{g,g',g''} |a_g|^2 c_g' c_g'' exp(i(phi_{g g''} - phi_{g g'})) |xi_g'><xi_g''|.
template <typename Real>
DensityOperator<Real> measure_map_output(const InputState<Real>& in,
                                         const SchmidtDecomposition<Real>& sd,
                                         const MeasureModel<Real>& mm) {
  const Eigen::Index gmax = sd.gamma_max();
  const Eigen::Index dg = sd.dims.dim_gamma;
  if (in.a.size() != dg || mm.eps().size() != dg || mm.energies().size() < gmax) {
    throw DimensionError("measure_map_output: inconsistent sizes");
  }
  const RVector<Real> p = in.probabilities();
  const auto& phi = mm.phases();
  CMatrix<Real> k = CMatrix<Real>::Zero(gmax, gmax);
  for (Eigen::Index g = 0; g < dg; ++g) {
    if (p(g) == Real(0)) continue;
    for (Eigen::Index g1 = 0; g1 < gmax; ++g1) {
      for (Eigen::Index g2 = 0; g2 < gmax; ++g2) {
        k(g1, g2) += p(g) * sd.coefficients(g1) * sd.coefficients(g2) *
                     std::polar(Real(1), phi(g, g2) - phi(g, g1));
      }
    }
  }
  const auto xr = sd.xi_basis.leftCols(gmax);
  CMatrix<Real> rho = xr * k * xr.adjoint();
  rho = Real(0.5) * (rho + rho.adjoint()).eval();
  return DensityOperator<Real>(std::move(rho));
}

/// Populations sum_j |(<b_g| (x) <j|) psi|^2 in the Gamma basis given by the columns of `basis`.
template <typename Real>
RVector<Real> gamma_populations(const PureState<Real>& psi, const CMatrix<Real>& basis) {
  const CMatrix<Real> rotated = basis.adjoint() * psi.coefficient_matrix();
  return rotated.rowwise().squaredNorm();
}

template <typename Real = double>
struct OzawaReport {
  RVector<Real> target;  // |a_g|^2, descending
  std::vector<Real> times;
  std::vector<Real> schmidt_deviation;     // max_g |c_g(t)^2 - |a_g|^2|, sorted multisets
  std::vector<Real> population_deviation;  // max_g |p_g(t) - |a_g|^2| in the measured basis
  Real max_schmidt_deviation = 0;
  Real max_population_deviation = 0;
};

/// Probability reproducibility: evolves psi under h to each time, Schmidt
/// decomposes, and compares the squared coefficients against the Born weights
/// |a_g|^2 of psi in `measured_basis` (sorted, zero-padded to dim_gamma). The
/// populations of the evolved state in the same basis are reported alongside.
template <typename Real>
OzawaReport<Real> ozawa_reproducibility_check(const Hamiltonian<Real>& h, const PureState<Real>& psi,
                                              std::span<const Real> times,
                                              const CMatrix<Real>& measured_basis) {
  const HilbertDims dims = psi.require_dims();
  if (measured_basis.rows() != dims.dim_gamma || measured_basis.cols() != dims.dim_gamma) {
    throw DimensionError("ozawa_reproducibility_check: measured basis has wrong shape");
  }
  OzawaReport<Real> rep;
  const RVector<Real> p0 = gamma_populations(psi, measured_basis);
  rep.target = p0;
  std::sort(rep.target.data(), rep.target.data() + rep.target.size(), std::greater<Real>());

  const SpectralCache<Real> cache = diagonalize(h);
  for (const Real t : times) {
    const PureState<Real> psi_t = evolve(cache, psi, t);
    const SchmidtDecomposition<Real> sd = schmidt_decompose(psi_t, t);
    RVector<Real> c2 = RVector<Real>::Zero(dims.dim_gamma);
    const Eigen::Index n = std::min(sd.gamma_max(), dims.dim_gamma);
    c2.head(n) = sd.coefficients.head(n).array().square().matrix();
    const Real dev_s = (c2 - rep.target).cwiseAbs().maxCoeff();
    const Real dev_p = (gamma_populations(psi_t, measured_basis) - p0).cwiseAbs().maxCoeff();
    rep.times.push_back(t);
    rep.schmidt_deviation.push_back(dev_s);
    rep.population_deviation.push_back(dev_p);
    rep.max_schmidt_deviation = std::max(rep.max_schmidt_deviation, dev_s);
    rep.max_population_deviation = std::max(rep.max_population_deviation, dev_p);
  }
  return rep;
}

}  // namespace apparatus
