#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "apparatus/coherent.hpp"
#include "apparatus/schmidt_maps.hpp"
#include "apparatus/states.hpp"

namespace apparatus {

using GridPtr = std::shared_ptr<const ManifoldGrid>;

/// Maps the simulation's Xi basis into the family's canonical basis
/// (canonical_dim x dim_xi). nullopt means identity.
using Embedding = std::optional<Eigen::MatrixXcd>;

/// Sampled chi^2(omega) = <omega|rho|omega> on a manifold grid.
struct HusimiField {
  GridPtr grid;
  Eigen::VectorXd values;
  std::size_t clipped = 0;  // entries below -tolerances().algebraic set to zero

  double integral() const;
  double peak() const;
  /// Throws if the field fails normalization within `quadrature` or more
  /// than 0.1% of the points had to be clipped.
  void validate(double quadrature) const;
};

struct SupportRegion {
  GridPtr grid;
  std::vector<char> mask;
  double measure = 0;       // sum of weights (invariant measure dmu = c_k dm)
  double base_measure = 0;  // measure / c_k, the k-independent area dm
  double threshold = 0;

  std::size_t count() const;
};

HusimiField husimi_of_density(const DensityOperator<double>& rho, const CoherentFamily& fam,
                              GridPtr grid, const Embedding& embedding = std::nullopt);

/// |<omega|xi>|^2 for a pure state given in the Xi basis.
HusimiField husimi_of_state(const Eigen::VectorXcd& xi, const CoherentFamily& fam, GridPtr grid,
                            const Embedding& embedding = std::nullopt);

/// sum_g c_g^2 |<omega|xi_g>|^2, evaluated term by term.
HusimiField husimi_true(const SchmidtDecomposition<double>& sd, const CoherentFamily& fam,
                        GridPtr grid, const Embedding& embedding = std::nullopt);

/// Husimi function of the measure-and-prepare output, via the assembled density.
HusimiField husimi_measure(const InputState<double>& in, const SchmidtDecomposition<double>& sd,
                           const MeasureModel<double>& mm, const CoherentFamily& fam,
                           GridPtr grid, const Embedding& embedding = std::nullopt);

/// sum_p w_p |f_p - g_p|.
double l1_distance(const HusimiField& f, const HusimiField& g);

SupportRegion support_set(const HusimiField& field, double threshold);

/// fraction * peak of the field; the default support threshold.
double relative_threshold(const HusimiField& field, double fraction = 1e-3);

double support_intersection(const SupportRegion& a, const SupportRegion& b);

}  // namespace apparatus
