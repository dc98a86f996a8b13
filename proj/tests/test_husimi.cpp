#include <doctest.h>

#include <numbers>

#include "apparatus/husimi.hpp"
#include "apparatus/parallel.hpp"
#include "oracles.hpp"

using namespace apparatus;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

GridPtr share(ManifoldGrid g) { return std::make_shared<const ManifoldGrid>(std::move(g)); }

GridPtr sphere(const CoherentFamily& fam, int nt, int np) {
  SphereGridSpec s;
  s.n_theta = nt;
  s.n_phi = np;
  return share(make_grid(fam, s));
}

VectorXcd fock(long m, long dim) {
  VectorXcd v = VectorXcd::Zero(dim);
  v(m) = 1.0;
  return v;
}

SchmidtDecomposition<double> random_sd(Eigen::Index dg, Eigen::Index dx, std::mt19937_64& rng) {
  return schmidt_decompose(PureState<double>(oracle::random_state(dg * dx, rng), HilbertDims(dg, dx)));
}

MeasureModel<double> random_model(Eigen::Index dg, Eigen::Index dx, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3), t(0.1, 2.5);
  VectorXd eps(dg), e(dx);
  for (Eigen::Index i = 0; i < dg; ++i) eps(i) = i + 1 + u(rng);
  for (Eigen::Index j = 0; j < dx; ++j) e(j) = j + 1 + u(rng);
  return MeasureModel<double>(eps, e, t(rng), t(rng));
}

}  // namespace

TEST_CASE("vacuum husimi is a gaussian") {
  const auto fam = CoherentFamily::field(1);
  const auto grid = share(make_grid(fam, PolarGridSpec{5.0, 50, 12}));
  const auto f = husimi_of_density(DensityOperator<double>::projector(fock(0, 4)), fam, grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double a2 = std::norm(std::get<FieldPoint>(grid->points[i]).alpha);
    CHECK(std::abs(f.values(Eigen::Index(i)) - std::exp(-a2)) < 1e-12);
  }
  CHECK(f.clipped == 0);
}

TEST_CASE("maximally mixed states") {
  const auto fam = CoherentFamily::field(2);
  const auto grid = share(make_grid(fam, PolarGridSpec{3.0, 20, 8}));
  const int d = 5;
  const auto f = husimi_of_density(DensityOperator<double>(MatrixXcd::Identity(d, d) / double(d)), fam, grid);
  VectorXd sum = VectorXd::Zero(Eigen::Index(grid->size()));
  for (int m = 0; m < d; ++m) sum += husimi_of_state(fock(m, d), fam, grid).values / double(d);
  CHECK((f.values - sum).cwiseAbs().maxCoeff() < 1e-12);

  const auto spin = CoherentFamily::spin(1);  // S = 1/2
  const auto sg = sphere(spin, 16, 8);
  const auto fs = husimi_of_density(DensityOperator<double>(MatrixXcd::Identity(2, 2) / 2.0), spin, sg);
  for (std::size_t i = 0; i < sg->size(); ++i) {
    const auto& p = std::get<SpinPoint>(sg->points[i]);
    const double ref = 0.5 * (std::norm(oracle::spin_amplitude(p.theta, p.phi, 0, 1)) +
                              std::norm(oracle::spin_amplitude(p.theta, p.phi, 1, 1)));
    CHECK(std::abs(fs.values(Eigen::Index(i)) - ref) < 1e-12);
  }
}

TEST_CASE("true-map husimi") {
  std::mt19937_64 rng(3);
  const auto fam = CoherentFamily::spin(8);
  const auto grid = sphere(fam, 24, 12);
  const auto sd = random_sd(2, 9, rng);

  SchmidtDecomposition<double> one = sd;
  one.coefficients = VectorXd::Ones(1);
  CHECK((husimi_true(one, fam, grid).values - husimi_of_state(sd.xi_basis.col(0), fam, grid).values)
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  SchmidtDecomposition<double> two = sd;
  two.coefficients = VectorXd::Constant(2, 1 / std::sqrt(2.0));
  const VectorXd avg = 0.5 * (husimi_of_state(sd.xi_basis.col(0), fam, grid).values +
                              husimi_of_state(sd.xi_basis.col(1), fam, grid).values);
  CHECK((husimi_true(two, fam, grid).values - avg).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two-route consistency on random instances") {
  std::mt19937_64 rng(99);
  double worst_true = 0.0, worst_meas = 0.0;
  for (int k = 0; k < 60; ++k) {
    const bool spin = k % 2 == 0;
    const auto fam = spin ? CoherentFamily::spin(4 + k % 7) : CoherentFamily::field(1 + k % 3);
    const Eigen::Index dx = spin ? fam.two_s() + 1 : 6 + k % 5;
    const Eigen::Index dg = 2 + k % 3;
    const GridPtr grid = spin ? sphere(fam, 12, 9) : share(make_grid(fam, PolarGridSpec{3.0, 12, 9}));
    const auto sd = random_sd(dg, dx, rng);
    const PureState<double> g(oracle::random_state(dg, rng));
    const auto in = input_state(sd, g);
    const auto mm = random_model(dg, dx, rng);

    const auto ft = husimi_true(sd, fam, grid);
    const auto fd = husimi_of_density(true_map_output(sd), fam, grid);
    worst_true = std::max(worst_true, (ft.values - fd.values).cwiseAbs().maxCoeff());

    const auto fm = husimi_measure(in, sd, mm, fam, grid);
    const VectorXd ref = oracle::triple_sum_husimi(in, sd, mm, fam, *grid);
    worst_meas = std::max(worst_meas, (fm.values - ref).cwiseAbs().maxCoeff());
  }
  CHECK(worst_true < 1e-12);
  CHECK(worst_meas < 1e-10);
}

TEST_CASE("measure husimi at special times") {
  std::mt19937_64 rng(5);
  const auto fam = CoherentFamily::spin(6);
  const auto grid = sphere(fam, 20, 10);
  const auto sd = random_sd(2, 7, rng);
  const PureState<double> g(oracle::random_state(2, rng));
  const auto in = input_state(sd, g);

  const VectorXcd xm = sd.xi_basis.leftCols(sd.gamma_max()) * sd.coefficients.cast<std::complex<double>>();
  const auto at0 = husimi_measure(in, sd, MeasureModel<double>::ladder(sd.dims, 0.0), fam, grid);
  CHECK((at0.values - husimi_of_state(xm, fam, grid).values).cwiseAbs().maxCoeff() < 1e-12);

  // integer ladders: every phase is a multiple of 2 pi at tau = 2 pi
  const auto full = husimi_measure(in, sd, MeasureModel<double>::ladder(sd.dims, 2 * std::numbers::pi), fam, grid);
  CHECK((full.values - at0.values).cwiseAbs().maxCoeff() < 1e-10);

  // input concentrated on gamma_1: output is the phase-rotated pure state
  const PureState<double> g1(sd.gamma_basis.col(0));
  const auto in1 = input_state(sd, g1);
  const auto mm = MeasureModel<double>::ladder(sd.dims, 0.9);
  VectorXcd rotated = VectorXcd::Zero(7);
  for (Eigen::Index j = 0; j < sd.gamma_max(); ++j)
    rotated += sd.coefficients(j) * std::polar(1.0, -mm.phases()(0, j)) * sd.xi_basis.col(j);
  CHECK((husimi_measure(in1, sd, mm, fam, grid).values - husimi_of_state(rotated, fam, grid).values)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("l1 distance and the contraction bound") {
  std::mt19937_64 rng(17);
  const auto fam = CoherentFamily::spin(6);
  const auto grid = sphere(fam, 96, 24);
  for (int k = 0; k < 25; ++k) {
    const DensityOperator<double> rho(oracle::random_density(7, 1 + k % 7, rng));
    const DensityOperator<double> sigma(oracle::random_density(7, 1 + (k + 3) % 7, rng));
    const auto fr = husimi_of_density(rho, fam, grid);
    const auto fs = husimi_of_density(sigma, fam, grid);
    CHECK(l1_distance(fr, fr) == 0.0);
    const double defect = std::abs(fr.integral() - 1.0) + std::abs(fs.integral() - 1.0);
    CHECK(l1_distance(fr, fs) <= 2 * trace_distance(rho, sigma) + 2 * defect + 1e-12);
    CHECK(l1_distance(fr, fs) <= 2.0 + 1e-3);
  }

  const auto f = CoherentFamily::field(1000);
  const auto g = share(make_grid(f, default_field_grid(4.0, 1000)));
  const auto a = husimi_of_state(fock(1000, 1001), f, g);
  const auto b = husimi_of_state(fock(4000, 4001), f, g);
  CHECK(std::abs(l1_distance(a, b) - 2.0) < 1e-3);

  const auto other = share(make_grid(f, PolarGridSpec{1.0, 10, 10}));
  CHECK_THROWS_AS(l1_distance(a, husimi_of_state(fock(0, 1), f, other)), DimensionError);
}

TEST_CASE("support sets") {
  const auto fam = CoherentFamily::field(1000);
  const auto grid = share(make_grid(fam, default_field_grid(1.0, 1000)));
  HusimiField zero;
  zero.grid = grid;
  zero.values = VectorXd::Zero(Eigen::Index(grid->size()));
  const auto empty = support_set(zero, 1e-6);
  CHECK(empty.count() == 0);
  CHECK(empty.measure == 0.0);
  CHECK_THROWS_AS(support_set(zero, 0.0), ConfigError);

  const auto f = husimi_of_state(fock(1000, 1001), fam, grid);
  const auto s = support_set(f, relative_threshold(f));
  CHECK(s.threshold == doctest::Approx(1e-3 * f.peak()));
  CHECK(s.count() > 0);
  CHECK(s.base_measure == doctest::Approx(s.measure / 1000.0));
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (s.mask[i]) CHECK(std::abs(std::norm(std::get<FieldPoint>(grid->points[i]).alpha) - 1.0) < 0.3);
  }
  double last = s.measure;
  for (double frac : {1e-2, 1e-1, 0.5}) {
    const double m = support_set(f, relative_threshold(f, frac)).measure;
    CHECK(m <= last);
    last = m;
  }
  CHECK(support_intersection(s, s) == s.measure);
  CHECK(support_intersection(s, empty) == 0.0);
}

TEST_CASE("fock supports separate as N grows") {
  std::vector<double> base;
  double fraction_at_max = 1.0;
  for (int N : {1, 10, 100, 1000}) {
    const auto fam = CoherentFamily::field(N);
    const auto grid = share(make_grid(fam, default_field_grid(4.0, N)));
    const auto a = husimi_of_state(fock(N, 4 * N + 1), fam, grid);
    const auto b = husimi_of_state(fock(4 * N, 4 * N + 1), fam, grid);
    const auto sa = support_set(a, relative_threshold(a));
    const auto sb = support_set(b, relative_threshold(b));
    const double inter = support_intersection(sa, sb);
    base.push_back(inter / grid->measure_constant);
    fraction_at_max = inter / std::min(sa.measure, sb.measure);
  }
  for (std::size_t i = 1; i < base.size(); ++i) CHECK((base[i] < base[i - 1] || base[i] == 0.0));
  CHECK(fraction_at_max < 0.01);
}

TEST_CASE("spin weight supports separate as N grows") {
  std::vector<double> base;
  double fraction_at_max = 1.0;
  for (int N : {10, 100, 1000}) {
    const auto fam = CoherentFamily::spin(N);
    const auto grid = sphere(fam, 1024, 8);
    const auto a = husimi_of_state(fock(fam.scaled_weight_index(0.8), fam.two_s() + 1), fam, grid);
    const auto b = husimi_of_state(fock(fam.scaled_weight_index(0.4), fam.two_s() + 1), fam, grid);
    const auto sa = support_set(a, relative_threshold(a));
    const auto sb = support_set(b, relative_threshold(b));
    const double inter = support_intersection(sa, sb);
    base.push_back(inter / grid->measure_constant);
    fraction_at_max = inter / std::min(sa.measure, sb.measure);
  }
  for (std::size_t i = 1; i < base.size(); ++i) CHECK((base[i] < base[i - 1] || base[i] == 0.0));
  CHECK(fraction_at_max < 0.01);
}

TEST_CASE("fixed superpositions shrink without separating") {
  // (|1> +- |2>)/sqrt(2) are N-independent vectors, so their fields are the
  // N = 1 fields rescaled by 1/sqrt(N) in alpha.
  std::vector<double> base, fraction;
  for (int N : {1, 10, 1000}) {
    const auto fam = CoherentFamily::field(N);
    const auto grid = share(make_grid(fam, default_field_grid(2.0 / N, N)));
    VectorXcd p = VectorXcd::Zero(3), m = VectorXcd::Zero(3);
    p(1) = m(1) = p(2) = 1 / std::sqrt(2.0);
    m(2) = -1 / std::sqrt(2.0);
    const auto fp = husimi_of_state(p, fam, grid), fm = husimi_of_state(m, fam, grid);
    const auto sp = support_set(fp, relative_threshold(fp)), sm = support_set(fm, relative_threshold(fm));
    base.push_back(sp.base_measure);
    fraction.push_back(support_intersection(sp, sm) / std::min(sp.measure, sm.measure));
  }
  CHECK(base[1] < base[0]);
  CHECK(base[2] < base[1]);
  CHECK(std::abs(fraction[2] - fraction[0]) < 1e-9);
  CHECK(fraction[0] > 0.5);
}

TEST_CASE("validation and embeddings") {
  const auto fam = CoherentFamily::field(1);
  const auto grid = share(make_grid(fam, PolarGridSpec{6.0, 300, 16}));
  const auto ok = husimi_of_state(fock(0, 3), fam, grid);
  CHECK_NOTHROW(ok.validate(1e-3));
  const auto small = share(make_grid(fam, PolarGridSpec{1.0, 50, 16}));
  CHECK_THROWS_AS(husimi_of_state(fock(0, 3), fam, small).validate(1e-3), InvariantError);

  HusimiField bad = ok;
  bad.clipped = bad.values.size() / 100;
  CHECK_THROWS_AS(bad.validate(1e-3), InvariantError);

  // isometric embedding of a 2-dim space onto Fock |1>, |3>
  MatrixXcd e = MatrixXcd::Zero(5, 2);
  e(1, 0) = 1.0;
  e(3, 1) = 1.0;
  VectorXcd x(2);
  x << 0.6, std::complex<double>(0, 0.8);
  const auto embedded = husimi_of_state(x, fam, grid, e);
  const auto direct = husimi_of_state(e * x, fam, grid);
  CHECK((embedded.values - direct.values).cwiseAbs().maxCoeff() < 1e-15);
  const auto via_rho = husimi_of_density(DensityOperator<double>::projector(x), fam, grid, e);
  CHECK((via_rho.values - direct.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(husimi_of_state(VectorXcd::Unit(3, 0), fam, grid, e), DimensionError);
  CHECK_THROWS_AS(husimi_of_density(DensityOperator<double>::projector(VectorXcd::Unit(3, 0)), fam, grid, e),
                  DimensionError);
}

TEST_CASE("field evaluation is independent of the thread count") {
  std::mt19937_64 rng(1);
  const auto fam = CoherentFamily::spin(40);
  const auto grid = sphere(fam, 200, 64);
  const DensityOperator<double> rho(oracle::random_density(41, 3, rng));
  set_thread_count(1);
  const auto one = husimi_of_density(rho, fam, grid);
  set_thread_count(4);
  const auto four = husimi_of_density(rho, fam, grid);
  set_thread_count(1);
  CHECK((one.values - four.values).cwiseAbs().maxCoeff() == 0.0);
}
