#include "apparatus/husimi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apparatus/parallel.hpp"

namespace apparatus {

namespace {

constexpr std::size_t kChunk = 2048;

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what) {
  if (!a || !b) throw DimensionError(std::string(what) + ": missing grid");
  if (a != b && !(*a == *b)) throw DimensionError(std::string(what) + ": grid mismatch");
}

Eigen::MatrixXcd embed(const Eigen::MatrixXcd& m, const Embedding& e) {
  if (!e) return m;
  if (e->cols() != m.rows()) {
    throw DimensionError("Husimi embedding has " + std::to_string(e->cols()) +
                         " columns, state space has dimension " + std::to_string(m.rows()));
  }
  return *e * m * e->adjoint();
}

Eigen::VectorXcd embed_vector(const Eigen::VectorXcd& v, const Embedding& e) {
  if (!e) return v;
  if (e->cols() != v.size()) {
    throw DimensionError("Husimi embedding has " + std::to_string(e->cols()) +
                         " columns, state has dimension " + std::to_string(v.size()));
  }
  return *e * v;
}

void clip(HusimiField& f) {
  const double floor = -tolerances().algebraic;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    if (f.values(i) < 0.0) {
      if (f.values(i) < floor) ++f.clipped;
      f.values(i) = 0.0;
    }
  }
}

}  // namespace

double HusimiField::integral() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) s += grid->weights[std::size_t(i)] * values(i);
  return s;
}

double HusimiField::peak() const { return values.size() ? values.maxCoeff() : 0.0; }

void HusimiField::validate(double quadrature) const {
  if (double(clipped) > 1e-3 * double(values.size())) {
    throw InvariantError("HusimiField: " + std::to_string(clipped) +
                         " negative values clipped; embedding is likely broken");
  }
  const double norm = integral();
  if (std::abs(norm - 1.0) > quadrature) {
    throw InvariantError("HusimiField: integrates to " + std::to_string(norm) +
                         "; grid does not cover the support");
  }
}

std::size_t SupportRegion::count() const {
  return std::size_t(std::count(mask.begin(), mask.end(), char(1)));
}

HusimiField husimi_of_density(const DensityOperator<double>& rho, const CoherentFamily& fam,
                              GridPtr grid, const Embedding& embedding) {
  const Eigen::MatrixXcd canonical = embed(rho.matrix(), embedding);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(canonical);
  if (es.info() != Eigen::Success) throw NumericalError("husimi_of_density: eigensolver failed");
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::abs(es.eigenvalues()(k)) > 1e-14 * scale) kept.push_back(k);
  }
  Eigen::MatrixXcd w(canonical.rows(), Eigen::Index(kept.size()));
  Eigen::VectorXd lambda(Eigen::Index(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    w.col(Eigen::Index(i)) = es.eigenvectors().col(kept[i]);
    lambda(Eigen::Index(i)) = es.eigenvalues()(kept[i]);
  }

  HusimiField f;
  f.grid = grid;
  f.values.resize(Eigen::Index(grid->size()));
  const std::size_t n_chunks = (grid->size() + kChunk - 1) / kChunk;
  parallel_for(n_chunks, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(grid->size(), begin + kChunk);
      const Eigen::MatrixXcd kw = overlap_matrix(fam, *grid, begin, end, canonical.rows()) * w;
      f.values.segment(Eigen::Index(begin), Eigen::Index(end - begin)) =
          kw.cwiseAbs2() * lambda;
    }
  });
  clip(f);
  return f;
}

HusimiField husimi_of_state(const Eigen::VectorXcd& xi, const CoherentFamily& fam, GridPtr grid,
                            const Embedding& embedding) {
  HusimiField f;
  f.grid = grid;
  f.values = overlaps(fam, *grid, embed_vector(xi, embedding)).cwiseAbs2();
  return f;
}

HusimiField husimi_true(const SchmidtDecomposition<double>& sd, const CoherentFamily& fam,
                        GridPtr grid, const Embedding& embedding) {
  HusimiField f;
  f.grid = grid;
  f.values = Eigen::VectorXd::Zero(Eigen::Index(grid->size()));
  for (Eigen::Index g = 0; g < sd.gamma_max(); ++g) {
    const double c2 = sd.coefficients(g) * sd.coefficients(g);
    f.values += c2 * overlaps(fam, *grid, embed_vector(sd.xi_basis.col(g), embedding)).cwiseAbs2();
  }
  return f;
}

HusimiField husimi_measure(const InputState<double>& in, const SchmidtDecomposition<double>& sd,
                           const MeasureModel<double>& mm, const CoherentFamily& fam,
                           GridPtr grid, const Embedding& embedding) {
  return husimi_of_density(measure_map_output(in, sd, mm), fam, std::move(grid), embedding);
}

double l1_distance(const HusimiField& f, const HusimiField& g) {
  require_same_grid(f.grid, g.grid, "l1_distance");
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    s += f.grid->weights[std::size_t(i)] * std::abs(f.values(i) - g.values(i));
  }
  return s;
}

SupportRegion support_set(const HusimiField& field, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("support_set: threshold must be positive");
  SupportRegion r;
  r.grid = field.grid;
  r.threshold = threshold;
  r.mask.resize(std::size_t(field.values.size()), 0);
  for (Eigen::Index i = 0; i < field.values.size(); ++i) {
    if (field.values(i) > threshold) {
      r.mask[std::size_t(i)] = 1;
      r.measure += field.grid->weights[std::size_t(i)];
    }
  }
  r.base_measure = r.measure / field.grid->measure_constant;
  return r;
}

double relative_threshold(const HusimiField& field, double fraction) {
  return fraction * field.peak();
}

double support_intersection(const SupportRegion& a, const SupportRegion& b) {
  require_same_grid(a.grid, b.grid, "support_intersection");
  double s = 0.0;
  for (std::size_t i = 0; i < a.mask.size(); ++i) {
    if (a.mask[i] && b.mask[i]) s += a.grid->weights[i];
  }
  return s;
}

}  // namespace apparatus
