#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "apparatus/tolerances.hpp"

namespace apparatus {

template <typename Real>
using Complex = std::complex<Real>;
template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Dimensions of H_Gamma (x) H_Xi. Composite index is gamma * dim_xi + j.
struct HilbertDims {
  Eigen::Index dim_gamma = 0;
  Eigen::Index dim_xi = 0;

  HilbertDims() = default;
  HilbertDims(Eigen::Index g, Eigen::Index x) : dim_gamma(g), dim_xi(x) {
    if (g < 2 || x < 2) {
      throw DimensionError("HilbertDims: both factors need dimension >= 2, got " +
                           std::to_string(g) + "x" + std::to_string(x));
    }
  }

  Eigen::Index composite() const { return dim_gamma * dim_xi; }
  friend bool operator==(const HilbertDims&, const HilbertDims&) = default;
};

/// Largest elementwise deviation from hermiticity.
template <typename Derived>
auto hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Kronecker product, first factor major.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

template <typename Real = double>
class PureState {
 public:
  using Vector = CVector<Real>;

  explicit PureState(Vector amplitudes, std::optional<HilbertDims> dims = std::nullopt)
      : amplitudes_(std::move(amplitudes)), dims_(dims) {
    if (amplitudes_.size() == 0) throw DimensionError("PureState: empty amplitude vector");
    const Real defect = std::abs(amplitudes_.norm() - Real(1));
    if (!(defect <= Real(tolerances().algebraic))) {
      throw InvariantError("PureState: norm deviates from 1 by " + std::to_string(double(defect)));
    }
    if (dims_ && dims_->composite() != amplitudes_.size()) {
      throw DimensionError("PureState: dims " + std::to_string(dims_->dim_gamma) + "x" +
                           std::to_string(dims_->dim_xi) + " do not match length " +
                           std::to_string(amplitudes_.size()));
    }
  }

  /// Rescales `v` to unit norm before construction.
  static PureState normalized(const Vector& v, std::optional<HilbertDims> dims = std::nullopt) {
    const Real n = v.norm();
    if (!(n > Real(0))) throw InvariantError("PureState: cannot normalize a zero vector");
    return PureState(v / n, dims);
  }

  static PureState basis(Eigen::Index dim, Eigen::Index index) {
    if (index < 0 || index >= dim) throw DimensionError("PureState::basis: index out of range");
    Vector v = Vector::Zero(dim);
    v(index) = Real(1);
    return PureState(std::move(v));
  }

  const Vector& amplitudes() const { return amplitudes_; }
  const std::optional<HilbertDims>& dims() const { return dims_; }
  Eigen::Index size() const { return amplitudes_.size(); }

  /// Amplitudes reshaped as the dim_gamma x dim_xi coefficient matrix.
  CMatrix<Real> coefficient_matrix() const {
    const HilbertDims& d = require_dims();
    // Row-major reshape: row gamma holds the block gamma*dim_xi .. +dim_xi.
    return Eigen::Map<const Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(amplitudes_.data(), d.dim_gamma,
                                                            d.dim_xi);
  }

  const HilbertDims& require_dims() const {
    if (!dims_) throw DimensionError("PureState: bipartite operation on a state without dims");
    return *dims_;
  }

 private:
  Vector amplitudes_;
  std::optional<HilbertDims> dims_;
};

template <typename Real = double>
class DensityOperator {
 public:
  using Matrix = CMatrix<Real>;

  explicit DensityOperator(Matrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
      throw DimensionError("DensityOperator: matrix must be square and non-empty");
    }
    const Real herm = hermiticity_defect(matrix_);
    if (!(herm <= Real(tolerances().algebraic))) {
      throw InvariantError("DensityOperator: not Hermitian (defect " + std::to_string(double(herm)) +
                           ")");
    }
    const Real tr = std::abs(matrix_.trace() - Complex<Real>(1));
    if (!(tr <= Real(tolerances().algebraic))) {
      throw InvariantError("DensityOperator: trace deviates from 1 by " +
                           std::to_string(double(tr)));
    }
  }

  static DensityOperator projector(const CVector<Real>& v) {
    return DensityOperator(v * v.adjoint());
  }

  const Matrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  /// Ascending eigenvalues, unclipped.
  RVector<Real> spectrum() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  /// Throws if any eigenvalue is below the PSD floor.
  void check_positive() const {
    const Real lo = spectrum().minCoeff();
    if (lo < Real(tolerances().psd_floor)) {
      throw InvariantError("DensityOperator: negative eigenvalue " + std::to_string(double(lo)));
    }
  }

  /// Spectrum clipped at zero and renormalized, for reports only.
  RVector<Real> reported_spectrum() const {
    RVector<Real> ev = spectrum().cwiseMax(Real(0));
    const Real s = ev.sum();
    if (s > Real(0)) ev /= s;
    return ev;
  }

 private:
  Matrix matrix_;
};

template <typename Real>
PureState<Real> tensor(const PureState<Real>& a, const PureState<Real>& b) {
  const auto dim = static_cast<std::size_t>(a.size()) * static_cast<std::size_t>(b.size());
  if (dim > tolerances().max_composite_dim) {
    throw ResourceCapError("tensor: composite dimension " + std::to_string(dim) +
                           " exceeds cap " + std::to_string(tolerances().max_composite_dim));
  }
  CVector<Real> out(a.size() * b.size());
  for (Eigen::Index g = 0; g < a.size(); ++g) {
    out.segment(g * b.size(), b.size()) = a.amplitudes()(g) * b.amplitudes();
  }
  // Products of unit vectors drift by a few ulp; renormalize.
  return PureState<Real>::normalized(out, HilbertDims(a.size(), b.size()));
}

/// rho_Xi = Tr_Gamma |psi><psi|.
template <typename Real>
DensityOperator<Real> partial_trace_gamma(const PureState<Real>& psi) {
  const CMatrix<Real> a = psi.coefficient_matrix();
  CMatrix<Real> rho = a.transpose() * a.conjugate();
  rho = Real(0.5) * (rho + rho.adjoint()).eval();
  return DensityOperator<Real>(std::move(rho));
}

/// rho_Gamma = Tr_Xi |psi><psi|.
template <typename Real>
DensityOperator<Real> partial_trace_xi(const PureState<Real>& psi) {
  const CMatrix<Real> a = psi.coefficient_matrix();
  CMatrix<Real> rho = a * a.adjoint();
  rho = Real(0.5) * (rho + rho.adjoint()).eval();
  return DensityOperator<Real>(std::move(rho));
}

/// Half the trace norm of rho - sigma.
template <typename Real>
Real trace_distance(const DensityOperator<Real>& rho, const DensityOperator<Real>& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw DimensionError("trace_distance: dimension mismatch " + std::to_string(rho.dim()) +
                         " vs " + std::to_string(sigma.dim()));
  }
  const CMatrix<Real> diff = rho.matrix() - sigma.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(diff, Eigen::EigenvaluesOnly);
  return std::clamp(Real(0.5) * es.eigenvalues().cwiseAbs().sum(), Real(0), Real(1));
}

}  // namespace apparatus
