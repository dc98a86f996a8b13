#include <doctest.h>

#include "apparatus/states.hpp"
#include "oracles.hpp"

using namespace apparatus;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

PureState<double> pure(std::initializer_list<std::complex<double>> v) {
  VectorXcd x(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (auto z : v) x(i++) = z;
  return PureState<double>(x);
}

}  // namespace

TEST_CASE("dims below two are rejected") {
  CHECK_THROWS_AS(HilbertDims(1, 4), DimensionError);
  CHECK_THROWS_AS(HilbertDims(2, 1), DimensionError);
  CHECK(HilbertDims(3, 5).composite() == 15);
}

TEST_CASE("pure state norm is enforced") {
  VectorXcd v(2);
  v << 1.0, 1.0;
  CHECK_THROWS_AS(PureState<double>{v}, InvariantError);
  const auto p = PureState<double>::normalized(v);
  CHECK(std::abs(p.amplitudes().norm() - 1.0) < 1e-15);
  CHECK_THROWS_AS(PureState<double>::normalized(VectorXcd::Zero(3)), InvariantError);
  CHECK_THROWS_AS(PureState<double>(VectorXcd::Zero(0)), DimensionError);
  CHECK_THROWS_AS(PureState<double>(VectorXcd::Unit(4, 0), HilbertDims(2, 3)), DimensionError);
}

TEST_CASE("tensor composes gamma-major") {
  const auto a = tensor(pure({1, 0}), pure({1, 0}));
  CHECK(a.amplitudes().isApprox(VectorXcd::Unit(4, 0)));
  const auto b = tensor(pure({1, 0}), pure({0.6, 0.8}));
  VectorXcd expect(4);
  expect << 0.6, 0.8, 0, 0;
  CHECK((b.amplitudes() - expect).norm() < 1e-15);
  CHECK(b.dims()->dim_gamma == 2);
  CHECK(b.dims()->dim_xi == 2);

  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const auto g = PureState<double>(oracle::random_state(3, rng));
    const auto x = PureState<double>(oracle::random_state(7, rng));
    CHECK(std::abs(tensor(g, x).amplitudes().norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("tensor respects the composite cap") {
  const auto g = PureState<double>::basis(3, 0);
  const auto x = PureState<double>::basis(3000, 0);
  CHECK_THROWS_AS(tensor(g, x), ResourceCapError);
}

TEST_CASE("partial trace of product and Bell states") {
  const auto xi = pure({0.6, std::complex<double>(0, 0.8)});
  const auto rho = partial_trace_gamma(tensor(pure({1, 0}), xi));
  CHECK((rho.matrix() - xi.amplitudes() * xi.amplitudes().adjoint()).cwiseAbs().maxCoeff() < 1e-15);

  VectorXcd bell = VectorXcd::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const PureState<double> b(bell, HilbertDims(2, 2));
  CHECK((partial_trace_gamma(b).matrix() - 0.5 * MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((partial_trace_xi(b).matrix() - 0.5 * MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(partial_trace_gamma(PureState<double>::basis(4, 0)), DimensionError);
}

TEST_CASE("partial traces match the element-wise oracle") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index dg = 2 + k % 3, dx = 2 + k % 11;
    const VectorXcd v = oracle::random_state(dg * dx, rng);
    const PureState<double> psi(v, HilbertDims(dg, dx));
    const auto rx = partial_trace_gamma(psi);
    const auto rg = partial_trace_xi(psi);
    CHECK((rx.matrix() - oracle::partial_trace_gamma(v, dg, dx)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rg.matrix() - oracle::partial_trace_xi(v, dg, dx)).cwiseAbs().maxCoeff() < 1e-12);
    rx.check_positive();

    // nonzero spectra of the two reductions coincide
    const Eigen::VectorXd sx = rx.spectrum().reverse();
    const Eigen::VectorXd sg = rg.spectrum().reverse();
    const Eigen::Index r = std::min(dg, dx);
    CHECK((sx.head(r) - sg.head(r)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("tensor then trace recovers the factor") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 30; ++k) {
    const PureState<double> g(oracle::random_state(2 + k % 4, rng));
    const PureState<double> x(oracle::random_state(2 + k % 9, rng));
    const auto rho = partial_trace_gamma(tensor(g, x));
    CHECK(trace_distance(rho, DensityOperator<double>::projector(x.amplitudes())) < 1e-12);
  }
}

TEST_CASE("density operator invariants") {
  MatrixXcd m = MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(DensityOperator<double>{m}, InvariantError);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityOperator<double>{m}, InvariantError);
  CHECK_THROWS_AS(DensityOperator<double>(MatrixXcd::Identity(2, 3)), DimensionError);

  MatrixXcd neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  const DensityOperator<double> bad(neg);
  CHECK_THROWS_AS(bad.check_positive(), InvariantError);
  const Eigen::VectorXd rep = bad.reported_spectrum();
  CHECK(rep(0) == 0.0);
  CHECK(rep(1) == doctest::Approx(1.0));
  CHECK(bad.spectrum()(0) == doctest::Approx(-0.5));
}

TEST_CASE("trace distance") {
  const auto p0 = DensityOperator<double>::projector(VectorXcd::Unit(2, 0));
  const auto p1 = DensityOperator<double>::projector(VectorXcd::Unit(2, 1));
  CHECK(trace_distance(p0, p0) == 0.0);
  CHECK(trace_distance(p0, p1) == doctest::Approx(1.0).epsilon(1e-15));
  const auto p3 = DensityOperator<double>::projector(VectorXcd::Unit(3, 1));
  CHECK_THROWS_AS(trace_distance(p0, p3), DimensionError);

  std::mt19937_64 rng(5);
  for (int k = 0; k < 40; ++k) {
    const Eigen::Index d = 2 + k % 6;
    const DensityOperator<double> a(oracle::random_density(d, 1 + k % d, rng));
    const DensityOperator<double> b(oracle::random_density(d, 1 + (k + 1) % d, rng));
    const DensityOperator<double> c(oracle::random_density(d, d, rng));
    const double ab = trace_distance(a, b);
    CHECK(std::abs(ab - oracle::trace_distance(a.matrix(), b.matrix())) < 1e-12);
    CHECK(std::abs(ab - trace_distance(b, a)) < 1e-10);
    CHECK(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-10);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("long double instantiation") {
  using LD = long double;
  std::mt19937_64 rng(13);
  const VectorXcd v = oracle::random_state(12, rng);
  const CVector<LD> w = v.cast<std::complex<LD>>();
  const PureState<LD> psi = PureState<LD>::normalized(w, HilbertDims(3, 4));
  const auto rho = partial_trace_gamma(psi);
  const auto ref = partial_trace_gamma(PureState<double>::normalized(v, HilbertDims(3, 4)));
  CHECK((rho.matrix().cast<std::complex<double>>() - ref.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(rho.matrix().trace() - std::complex<LD>(1)) < 1e-17L);
  const auto rho2 = partial_trace_gamma(tensor(PureState<LD>::basis(2, 1), PureState<LD>::basis(4, 2)));
  CHECK(trace_distance(rho, rho) == 0.0L);
  CHECK(trace_distance(rho2, rho2) == 0.0L);
}
