#include "apparatus/coherent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "apparatus/parallel.hpp"

namespace apparatus {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kChunk = 2048;

/// k * ln(x) with the convention 0 * ln(0) = 0.
double xlog(long k, double x) {
  if (k == 0) return 0.0;
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return double(k) * std::log(x);
}

/// ln(m!) for m = 0..max, filled once per kernel so worker threads only read.
std::vector<double> log_factorial_table(long max) {
  std::vector<double> t(static_cast<std::size_t>(std::max(0L, max)) + 1, 0.0);
  for (std::size_t m = 1; m < t.size(); ++m) t[m] = std::lgamma(double(m) + 1.0);
  return t;
}

/// Evaluates <omega|m> for one family with a shared factorial table.
class Kernel {
 public:
  Kernel(const CoherentFamily& fam, Eigen::Index dim) : fam_(fam), dim_(dim) {
    if (fam.kind() == FamilyKind::spin) {
      if (dim > fam.two_s() + 1) {
        throw DimensionError("spin kernel: requested " + std::to_string(dim) +
                             " weights but 2S+1 = " + std::to_string(fam.two_s() + 1));
      }
      lf_ = log_factorial_table(fam.two_s());
    } else {
      lf_ = log_factorial_table(dim - 1);
    }
  }

  std::complex<double> element(const ManifoldPoint& p, long m) const {
    if (fam_.kind() == FamilyKind::field) {
      const std::complex<double> beta = std::get<FieldPoint>(p).alpha * fam_.displacement_scale();
      const double r = std::abs(beta);
      if (r == 0.0) return m == 0 ? 1.0 : 0.0;
      const double logmag = -0.5 * r * r + double(m) * std::log(r) - 0.5 * lf_[std::size_t(m)];
      return std::polar(std::exp(logmag), double(m) * std::arg(beta));
    }
    const auto& sp = std::get<SpinPoint>(p);
    const long two_s = fam_.two_s();
    const double logmag = 0.5 * (lf_[std::size_t(two_s)] - lf_[std::size_t(m)] -
                                 lf_[std::size_t(two_s - m)]) +
                          xlog(two_s - m, std::cos(0.5 * sp.theta)) +
                          xlog(m, std::sin(0.5 * sp.theta));
    return std::polar(std::exp(logmag), -double(m) * sp.phi);
  }

  /// All dim amplitudes at one point: one exp per entry, phases by recurrence.
  void row(const ManifoldPoint& p, Eigen::Ref<Eigen::VectorXcd> out) const {
    double log_base, log_step;
    std::complex<double> step;
    if (fam_.kind() == FamilyKind::field) {
      const std::complex<double> beta = std::get<FieldPoint>(p).alpha * fam_.displacement_scale();
      const double r = std::abs(beta);
      if (r == 0.0) {
        out.setZero();
        if (dim_ > 0) out(0) = 1.0;
        return;
      }
      log_base = -0.5 * r * r;
      log_step = std::log(r);
      step = beta / r;
      std::complex<double> phase = 1.0;
      for (Eigen::Index m = 0; m < dim_; ++m) {
        out(m) = std::exp(log_base + double(m) * log_step - 0.5 * lf_[std::size_t(m)]) * phase;
        phase *= step;
      }
      return;
    }
    const auto& sp = std::get<SpinPoint>(p);
    const long two_s = fam_.two_s();
    const double c = std::cos(0.5 * sp.theta);
    const double s = std::sin(0.5 * sp.theta);
    const double lc = c > 0.0 ? std::log(c) : -std::numeric_limits<double>::infinity();
    const double ls = s > 0.0 ? std::log(s) : -std::numeric_limits<double>::infinity();
    step = std::polar(1.0, -sp.phi);
    std::complex<double> phase = 1.0;
    for (Eigen::Index m = 0; m < dim_; ++m) {
      const double logmag =
          0.5 * (lf_[std::size_t(two_s)] - lf_[std::size_t(m)] - lf_[std::size_t(two_s - m)]) +
          (two_s - m == 0 ? 0.0 : double(two_s - m) * lc) + (m == 0 ? 0.0 : double(m) * ls);
      out(m) = std::exp(logmag) * phase;
      phase *= step;
    }
  }

 private:
  CoherentFamily fam_;
  Eigen::Index dim_;
  std::vector<double> lf_;
};

void require_kind(const CoherentFamily& fam, const ManifoldGrid& grid) {
  if (fam.kind() != grid.kind) throw DimensionError("grid and family kinds differ");
}

}  // namespace

const char* to_string(FamilyKind kind) { return kind == FamilyKind::field ? "field" : "spin"; }

SpinPoint::SpinPoint(double theta_, double phi_) : theta(theta_), phi(phi_) {
  if (!(theta >= 0.0 && theta <= kPi) || !(phi >= 0.0 && phi < 2.0 * kPi)) {
    throw DimensionError("SpinPoint: (theta, phi) = (" + std::to_string(theta) + ", " +
                         std::to_string(phi) + ") outside [0, pi] x [0, 2pi)");
  }
}

CoherentFamily CoherentFamily::field(int n_components) {
  if (n_components < 1) throw ConfigError("CoherentFamily: N must be positive");
  return CoherentFamily(FamilyKind::field, n_components, 0.0, 0);
}

CoherentFamily CoherentFamily::spin(int n_components, double s0) {
  if (n_components < 1) throw ConfigError("CoherentFamily: N must be positive");
  if (!(s0 > 0.0)) throw ConfigError("CoherentFamily: s0 must be positive");
  const double two_s = 2.0 * s0 * n_components;
  const double rounded = std::round(two_s);
  if (std::abs(two_s - rounded) > 1e-9 || rounded < 1.0) {
    throw ConfigError("CoherentFamily: 2 s0 N = " + std::to_string(two_s) +
                      " is not a positive integer");
  }
  return CoherentFamily(FamilyKind::spin, n_components, s0, int(rounded));
}

double CoherentFamily::displacement_scale() const { return std::sqrt(double(n_)); }

long CoherentFamily::scaled_fock_index(double n) const {
  if (!(n >= 0.0)) throw DimensionError("scaled_fock_index: negative excitation");
  return std::lround(n * n_);
}

long CoherentFamily::scaled_weight_index(double ratio) const {
  const long m = std::lround(ratio * S());
  if (m < 0 || m > two_s_) throw DimensionError("scaled_weight_index: m/S outside [0, 2]");
  return m;
}

double log_factorial(long m) {
  if (m < 0) throw DimensionError("log_factorial: negative argument");
  return std::lgamma(double(m) + 1.0);
}

double log_binomial(long n, long m) {
  if (m < 0 || m > n) throw DimensionError("log_binomial: index out of range");
  return log_factorial(n) - log_factorial(m) - log_factorial(n - m);
}

double field_overlap_sq(std::complex<double> alpha, double n, const CoherentFamily& fam) {
  if (fam.kind() != FamilyKind::field) throw DimensionError("field_overlap_sq: spin family");
  if (!(n >= 0.0)) throw DimensionError("field_overlap_sq: negative excitation");
  const long m = fam.scaled_fock_index(n);
  const double b2 = std::norm(alpha) * fam.N();
  if (b2 == 0.0) return m == 0 ? 1.0 : 0.0;
  return std::exp(-b2 + double(m) * std::log(b2) - log_factorial(m));
}

std::complex<double> field_overlap(std::complex<double> alpha, long m, const CoherentFamily& fam) {
  if (fam.kind() != FamilyKind::field) throw DimensionError("field_overlap: spin family");
  if (m < 0) throw DimensionError("field_overlap: negative Fock index");
  return Kernel(fam, m + 1).element(FieldPoint{alpha}, m);
}

std::complex<double> spin_overlap(const SpinPoint& omega, long m, const CoherentFamily& fam) {
  if (fam.kind() != FamilyKind::spin) throw DimensionError("spin_overlap: field family");
  if (m < 0 || m > fam.two_s()) {
    throw DimensionError("spin_overlap: m = " + std::to_string(m) + " outside [0, " +
                         std::to_string(fam.two_s()) + "]");
  }
  return Kernel(fam, fam.two_s() + 1).element(omega, m);
}

namespace {

/// ln of the kernel <omega|omega'> as a complex number (real part = ln|.|).
std::complex<double> log_gcs_overlap(const CoherentFamily& fam, const ManifoldPoint& a,
                                     const ManifoldPoint& b) {
  if (fam.kind() == FamilyKind::field) {
    const double s = fam.displacement_scale();
    const std::complex<double> ba = std::get<FieldPoint>(a).alpha * s;
    const std::complex<double> bb = std::get<FieldPoint>(b).alpha * s;
    return -0.5 * (std::norm(ba) + std::norm(bb)) + ba * std::conj(bb);
  }
  const auto& pa = std::get<SpinPoint>(a);
  const auto& pb = std::get<SpinPoint>(b);
  const std::complex<double> base =
      std::cos(0.5 * pa.theta) * std::cos(0.5 * pb.theta) +
      std::sin(0.5 * pa.theta) * std::sin(0.5 * pb.theta) * std::polar(1.0, pb.phi - pa.phi);
  return double(fam.two_s()) * std::log(base);
}

}  // namespace

std::complex<double> gcs_overlap(const CoherentFamily& fam, const ManifoldPoint& a,
                                 const ManifoldPoint& b) {
  return std::exp(log_gcs_overlap(fam, a, b));
}

double gcs_log_abs_overlap(const CoherentFamily& fam, const ManifoldPoint& a,
                           const ManifoldPoint& b) {
  return log_gcs_overlap(fam, a, b).real();
}

Eigen::VectorXcd coherent_state(const CoherentFamily& fam, const ManifoldPoint& omega,
                                Eigen::Index dim) {
  Eigen::VectorXcd row(dim);
  Kernel(fam, dim).row(omega, row);
  return row.conjugate();
}

std::size_t ManifoldGrid::index(int outer, int azimuth) const {
  const int n_az = std::visit([](const auto& s) { return s.n_phi; }, spec);
  return std::size_t(outer) * std::size_t(n_az) + std::size_t(azimuth);
}

double ManifoldGrid::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

bool same_spec(const GridSpec& a, const GridSpec& b) {
  if (a.index() != b.index()) return false;
  if (const auto* pa = std::get_if<PolarGridSpec>(&a)) {
    const auto& pb = std::get<PolarGridSpec>(b);
    return pa->radius == pb.radius && pa->n_r == pb.n_r && pa->n_phi == pb.n_phi;
  }
  const auto& sa = std::get<SphereGridSpec>(a);
  const auto& sb = std::get<SphereGridSpec>(b);
  return sa.n_theta == sb.n_theta && sa.n_phi == sb.n_phi && sa.theta_min == sb.theta_min &&
         sa.theta_max == sb.theta_max;
}

}  // namespace

bool operator==(const ManifoldGrid& a, const ManifoldGrid& b) {
  return a.kind == b.kind && same_spec(a.spec, b.spec) &&
         a.measure_constant == b.measure_constant && a.weights == b.weights;
}

ManifoldGrid make_grid(const CoherentFamily& fam, const GridSpec& spec) {
  ManifoldGrid grid;
  grid.kind = fam.kind();
  grid.spec = spec;
  grid.measure_constant = fam.measure_constant();
  if (const auto* polar = std::get_if<PolarGridSpec>(&spec)) {
    if (fam.kind() != FamilyKind::field) throw ConfigError("make_grid: polar grid needs a field family");
    if (polar->n_r <= 0 || polar->n_phi <= 0 || !(polar->radius > 0.0)) {
      throw ConfigError("make_grid: polar grid needs positive radius and counts");
    }
    const double dr = polar->radius / polar->n_r;
    const double dphi = 2.0 * kPi / polar->n_phi;
    const double c = fam.measure_constant() / kPi;
    grid.points.reserve(std::size_t(polar->n_r) * std::size_t(polar->n_phi));
    grid.weights.reserve(grid.points.capacity());
    for (int i = 0; i < polar->n_r; ++i) {
      const double r = (i + 0.5) * dr;
      for (int j = 0; j < polar->n_phi; ++j) {
        grid.points.emplace_back(FieldPoint{std::polar(r, j * dphi)});
        grid.weights.push_back(c * r * dr * dphi);
      }
    }
    return grid;
  }
  const auto& sph = std::get<SphereGridSpec>(spec);
  if (fam.kind() != FamilyKind::spin) throw ConfigError("make_grid: sphere grid needs a spin family");
  if (sph.n_theta <= 0 || sph.n_phi <= 0) {
    throw ConfigError("make_grid: sphere grid needs positive counts");
  }
  if (!(sph.theta_min >= 0.0 && sph.theta_max <= kPi && sph.theta_min < sph.theta_max)) {
    throw ConfigError("make_grid: theta range must lie in [0, pi]");
  }
  const double dtheta = (sph.theta_max - sph.theta_min) / sph.n_theta;
  const double dphi = 2.0 * kPi / sph.n_phi;
  const double c = (fam.two_s() + 1.0) / (4.0 * kPi);
  grid.points.reserve(std::size_t(sph.n_theta) * std::size_t(sph.n_phi));
  grid.weights.reserve(grid.points.capacity());
  for (int i = 0; i < sph.n_theta; ++i) {
    const double lo = sph.theta_min + i * dtheta;
    const double theta = lo + 0.5 * dtheta;
    // Exact band area cos(lo) - cos(lo + dtheta) = 2 sin(theta) sin(dtheta/2).
    const double band = 2.0 * std::sin(theta) * std::sin(0.5 * dtheta);
    for (int j = 0; j < sph.n_phi; ++j) {
      grid.points.emplace_back(SpinPoint(theta, j * dphi));
      grid.weights.push_back(c * band * dphi);
    }
  }
  return grid;
}

PolarGridSpec default_field_grid(double n_max, int n_components, double safety, int n_phi) {
  PolarGridSpec spec;
  const double root_n = std::sqrt(double(n_components));
  spec.radius = std::sqrt(std::max(0.0, n_max)) + 6.0 * safety / root_n;
  // Radial widths scale as 1/sqrt(N); resolve them with >= 20 points.
  spec.n_r = std::max(200, int(std::ceil(spec.radius * root_n / 0.05)));
  spec.n_phi = n_phi;
  return spec;
}

SphereGridSpec default_sphere_grid(const CoherentFamily& fam) {
  SphereGridSpec spec;
  spec.n_theta = std::max(96, int(std::ceil(12.0 * kPi * std::sqrt(std::max(1.0, fam.S())))));
  spec.n_phi = 2 * spec.n_theta;
  return spec;
}

Eigen::VectorXcd overlaps(const CoherentFamily& fam, const ManifoldGrid& grid,
                          const Eigen::VectorXcd& xi) {
  require_kind(fam, grid);
  std::vector<Eigen::Index> support;
  for (Eigen::Index m = 0; m < xi.size(); ++m) {
    if (xi(m) != std::complex<double>(0.0)) support.push_back(m);
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(Eigen::Index(grid.size()));
  if (support.empty()) return out;
  const Eigen::Index dim = support.back() + 1;
  const Kernel kernel(fam, dim);
  if (4 * support.size() < std::size_t(dim)) {
    parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index m : support) acc += kernel.element(grid.points[p], long(m)) * xi(m);
        out(Eigen::Index(p)) = acc;
      }
    });
    return out;
  }
  const Eigen::VectorXcd head = xi.head(dim);
  parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXcd row(dim);
    for (std::size_t p = begin; p < end; ++p) {
      kernel.row(grid.points[p], row);
      out(Eigen::Index(p)) = row.transpose() * head;
    }
  });
  return out;
}

Eigen::MatrixXcd overlap_matrix(const CoherentFamily& fam, const ManifoldGrid& grid,
                                std::size_t begin, std::size_t end, Eigen::Index dim) {
  require_kind(fam, grid);
  end = std::min(end, grid.size());
  Eigen::MatrixXcd k(Eigen::Index(end - begin), dim);
  const Kernel kernel(fam, dim);
  Eigen::VectorXcd row(dim);
  for (std::size_t p = begin; p < end; ++p) {
    kernel.row(grid.points[p], row);
    k.row(Eigen::Index(p - begin)) = row.transpose();
  }
  return k;
}

IdentityResolutionReport resolution_of_identity_check(const CoherentFamily& fam,
                                                      const ManifoldGrid& grid,
                                                      const Eigen::MatrixXcd& basis) {
  require_kind(fam, grid);
  const std::size_t n_chunks = (grid.size() + kChunk - 1) / kChunk;
  std::vector<Eigen::MatrixXcd> partial(n_chunks);
  parallel_for(n_chunks, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(grid.size(), begin + kChunk);
      const Eigen::MatrixXcd b = overlap_matrix(fam, grid, begin, end, basis.rows()) * basis;
      const Eigen::Map<const Eigen::VectorXd> w(grid.weights.data() + begin,
                                                Eigen::Index(end - begin));
      partial[c] = b.adjoint() * w.asDiagonal() * b;
    }
  });
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(basis.cols(), basis.cols());
  for (const auto& p : partial) gram += p;

  IdentityResolutionReport rep;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      const double d = std::abs(gram(i, j) - (i == j ? 1.0 : 0.0));
      rep.max_defect = std::max(rep.max_defect, d);
      if (i == j) {
        rep.max_diagonal_defect = std::max(rep.max_diagonal_defect, d);
      } else {
        rep.max_offdiagonal_defect = std::max(rep.max_offdiagonal_defect, d);
      }
    }
  }
  return rep;
}

std::vector<DecayRow> gcs_overlap_decay_check(FamilyKind kind, const ManifoldPoint& a,
                                              const ManifoldPoint& b, const std::vector<int>& ns,
                                              double s0) {
  std::vector<DecayRow> rows;
  rows.reserve(ns.size());
  for (int n : ns) {
    const CoherentFamily fam =
        kind == FamilyKind::field ? CoherentFamily::field(n) : CoherentFamily::spin(n, s0);
    rows.push_back({n, gcs_log_abs_overlap(fam, a, b) / n});
  }
  return rows;
}

std::vector<OrthonormalityRow> orthonormality_limit_check(FamilyKind kind,
                                                          const StatePairForN& states,
                                                          const std::vector<int>& ns,
                                                          const GridForFamily& grid_for,
                                                          double s0) {
  std::vector<OrthonormalityRow> rows;
  for (int n : ns) {
    const CoherentFamily fam =
        kind == FamilyKind::field ? CoherentFamily::field(n) : CoherentFamily::spin(n, s0);
    const auto [s1, s2] = states(n);
    const Eigen::Index dim = std::max(s1.size(), s2.size());
    Eigen::VectorXcd x1 = Eigen::VectorXcd::Zero(dim);
    Eigen::VectorXcd x2 = Eigen::VectorXcd::Zero(dim);
    x1.head(s1.size()) = s1;
    x2.head(s2.size()) = s2;
    const double tol = tolerances().physics;
    if (std::abs(x1.squaredNorm() - 1.0) > tol || std::abs(x2.squaredNorm() - 1.0) > tol ||
        std::abs(x1.dot(x2)) > tol) {
      throw InvariantError("orthonormality_limit_check: input pair is not orthonormal at N = " +
                           std::to_string(n));
    }
    const ManifoldGrid grid = grid_for(fam);
    const Eigen::VectorXcd o1 = overlaps(fam, grid, x1);
    const Eigen::VectorXcd o2 = overlaps(fam, grid, x2);
    std::complex<double> i11 = 0.0, i22 = 0.0, i12 = 0.0;
    double mass = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const double w = grid.weights[p];
      const auto a = o1(Eigen::Index(p));
      const auto b = o2(Eigen::Index(p));
      i11 += w * std::norm(a);
      i22 += w * std::norm(b);
      i12 += w * std::conj(a) * b;
      mass += w * std::abs(a) * std::abs(b);
    }
    rows.push_back({n, std::abs(i11 - 1.0), std::abs(i22 - 1.0), std::abs(i12), mass});
  }
  return rows;
}

}  // namespace apparatus
