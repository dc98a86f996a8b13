#include <doctest.h>

#include "apparatus/dynamics.hpp"
#include "oracles.hpp"

using namespace apparatus;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

TEST_CASE("hamiltonian must be hermitian and square") {
  MatrixXcd m(2, 2);
  m << 0, 1, 0, 0;
  CHECK_THROWS_AS(Hamiltonian<double>{m}, InvariantError);
  CHECK_THROWS_AS(Hamiltonian<double>(MatrixXcd::Zero(2, 3)), DimensionError);
}

TEST_CASE("diagonalize small cases") {
  MatrixXcd d = MatrixXcd::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 2;
  const auto c = diagonalize(Hamiltonian<double>(d));
  CHECK(c.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(c.eigenvalues(1) == doctest::Approx(2.0));
  CHECK((c.eigenvectors.cwiseAbs() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  MatrixXcd sx(2, 2);
  sx << 0, 1, 1, 0;
  const auto cx = diagonalize(Hamiltonian<double>(sx));
  CHECK(cx.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(cx.eigenvalues(1) == doctest::Approx(1.0));
}

TEST_CASE("spectral cache reconstructs random hermitian matrices") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 20; ++k) {
    const MatrixXcd h = oracle::random_hermitian(8 + k, rng);
    const auto c = diagonalize(Hamiltonian<double>(h));
    const MatrixXcd back = c.eigenvectors * c.eigenvalues.cast<std::complex<double>>().asDiagonal() *
                           c.eigenvectors.adjoint();
    CHECK((back - h).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((c.eigenvectors.adjoint() * c.eigenvectors - MatrixXcd::Identity(h.rows(), h.rows()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    for (Eigen::Index i = 1; i < c.eigenvalues.size(); ++i) CHECK(c.eigenvalues(i - 1) <= c.eigenvalues(i));
  }
}

TEST_CASE("evolve trivial cases") {
  std::mt19937_64 rng(1);
  const MatrixXcd h = oracle::random_hermitian(6, rng);
  const auto c = diagonalize(Hamiltonian<double>(h));
  const PureState<double> psi(oracle::random_state(6, rng), HilbertDims(2, 3));
  const auto same = evolve(c, psi, 0.0);
  CHECK((same.amplitudes() - psi.amplitudes()).norm() < 1e-14);
  CHECK(same.dims() == psi.dims());

  MatrixXcd d = MatrixXcd::Zero(3, 3);
  d.diagonal() << 0.5, -1.0, 2.0;
  const auto cd = diagonalize(Hamiltonian<double>(d));
  const auto out = evolve(cd, PureState<double>::basis(3, 2), 1.3);
  CHECK(std::abs(out.amplitudes()(2) - std::polar(1.0, -2.0 * 1.3)) < 1e-14);
  CHECK(std::norm(out.amplitudes()(0)) + std::norm(out.amplitudes()(1)) < 1e-28);

  CHECK_THROWS_AS(evolve(cd, PureState<double>::basis(4, 0), 1.0), DimensionError);
}

TEST_CASE("rabi closed form") {
  const double g = 0.7;
  MatrixXcd sx(2, 2);
  sx << 0, g, g, 0;
  const auto c = diagonalize(Hamiltonian<double>(sx));
  for (double t = 0; t < 10 / g; t += 0.37) {
    const auto out = evolve(c, PureState<double>::basis(2, 0), t);
    CHECK(std::abs(out.amplitudes()(0) - std::cos(g * t)) < 1e-12);
    CHECK(std::abs(out.amplitudes()(1) - std::complex<double>(0, -std::sin(g * t))) < 1e-12);
  }
}

TEST_CASE("unitarity, group law, energy conservation and series oracle") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 10; ++k) {
    const MatrixXcd h = oracle::random_hermitian(10, rng);
    const Hamiltonian<double> H(h);
    const auto c = diagonalize(H);
    const PureState<double> psi(oracle::random_state(10, rng));
    const double e0 = energy(H, psi);
    for (double t = 0; t <= 10.0; t += 0.5) {
      const auto pt = evolve(c, psi, t);
      CHECK(std::abs(pt.amplitudes().norm() - 1.0) < 1e-12);
      CHECK(std::abs(energy(H, pt) - e0) < 1e-10);
    }
    const double t1 = 0.8, t2 = 2.3;
    const auto two = evolve(c, evolve(c, psi, t1), t2);
    CHECK((two.amplitudes() - evolve(c, psi, t1 + t2).amplitudes()).norm() < 1e-10);
    CHECK((evolve(c, psi, t1).amplitudes() - oracle::series_evolve(h, psi.amplitudes(), t1)).norm() < 1e-10);
  }
}

TEST_CASE("long double evolution agrees with double") {
  std::mt19937_64 rng(4);
  const MatrixXcd h = oracle::random_hermitian(5, rng);
  const VectorXcd v = oracle::random_state(5, rng);
  const auto cl = diagonalize(Hamiltonian<long double>(h.cast<std::complex<long double>>()));
  const auto outl = evolve(cl, PureState<long double>::normalized(v.cast<std::complex<long double>>()), 1.7L);
  const auto outd = evolve(diagonalize(Hamiltonian<double>(h)), PureState<double>(v), 1.7);
  CHECK((outl.amplitudes().cast<std::complex<double>>() - outd.amplitudes()).norm() < 1e-12);
}
