#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>

#include "apparatus/states.hpp"

namespace apparatus {

/// Time-independent Hermitian generator (hbar = 1).
template <typename Real = double>
class Hamiltonian {
 public:
  using Matrix = CMatrix<Real>;

  explicit Hamiltonian(Matrix m, std::string label = {})
      : matrix_(std::move(m)), label_(std::move(label)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
      throw DimensionError("Hamiltonian: matrix must be square and non-empty");
    }
    const Real herm = hermiticity_defect(matrix_);
    if (!(herm <= Real(tolerances().algebraic))) {
      throw InvariantError("Hamiltonian '" + label_ + "': not Hermitian (defect " +
                           std::to_string(double(herm)) + ")");
    }
  }

  const Matrix& matrix() const { return matrix_; }
  const std::string& label() const { return label_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  Matrix matrix_;
  std::string label_;
};

/// Eigendecomposition H = V diag(E) V^dagger, eigenvalues ascending.
template <typename Real = double>
struct SpectralCache {
  RVector<Real> eigenvalues;
  CMatrix<Real> eigenvectors;

  Eigen::Index dim() const { return eigenvalues.size(); }
};

template <typename Real>
SpectralCache<Real> diagonalize(const Hamiltonian<Real>& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(h.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericalError("diagonalize: eigensolver did not converge for '" + h.label() + "'");
  }
  return SpectralCache<Real>{es.eigenvalues(), es.eigenvectors()};
}

/// V diag(exp(-i E t)) V^dagger psi. Dims metadata of psi is carried over.
template <typename Real>
PureState<Real> evolve(const SpectralCache<Real>& cache, const PureState<Real>& psi, Real t) {
  if (cache.dim() != psi.size()) {
    throw DimensionError("evolve: propagator dimension " + std::to_string(cache.dim()) +
                         " vs state " + std::to_string(psi.size()));
  }
  CVector<Real> coeffs = cache.eigenvectors.adjoint() * psi.amplitudes();
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    coeffs(k) *= std::polar(Real(1), -cache.eigenvalues(k) * t);
  }
  CVector<Real> out = cache.eigenvectors * coeffs;
  // The propagator is unitary to rounding; restore unit norm exactly.
  return PureState<Real>::normalized(out, psi.dims());
}

template <typename Real>
Real energy(const Hamiltonian<Real>& h, const PureState<Real>& psi) {
  return std::real(psi.amplitudes().dot(h.matrix() * psi.amplitudes()));
}

}  // namespace apparatus
