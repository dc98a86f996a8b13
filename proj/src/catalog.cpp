#include <cmath>
#include <string>

#include "apparatus/convergence.hpp"

namespace apparatus {

const char* to_string(ModelKind kind) {
  return kind == ModelKind::qubit_spin ? "qubit_spin" : "qubit_boson";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "qubit_spin") return ModelKind::qubit_spin;
  if (s == "qubit_boson") return ModelKind::qubit_boson;
  throw ConfigError("unknown model kind '" + s + "' (expected qubit_spin or qubit_boson)");
}

Eigen::VectorXcd ModelConfig::input_gamma() const {
  if (gamma_state.size() == 0) {
    Eigen::VectorXcd v(2);
    v << 1.0, 1.0;
    return v / std::sqrt(2.0);
  }
  return gamma_state;
}

int ModelConfig::effective_truncation() const {
  if (truncation > 0) return truncation;
  const double drive = couplings.g1 * tau;
  return std::max(24, int(std::ceil(8.0 * drive * drive)) + 24);
}

SpinOperators spin_operators(int two_s) {
  const int dim = two_s + 1;
  const double s = 0.5 * two_s;
  Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) {
    const double mz = m - s;
    sz(m, m) = mz;
    if (m + 1 < dim) sp(m + 1, m) = std::sqrt(s * (s + 1.0) - mz * (mz + 1.0));
  }
  const Eigen::MatrixXcd sm = sp.adjoint();
  const std::complex<double> i(0.0, 1.0);
  return {0.5 * (sp + sm), -0.5 * i * (sp - sm), sz};
}

Eigen::MatrixXcd annihilation(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

CatalogModel catalog(const ModelConfig& cfg) {
  if (cfg.N < 1) throw ConfigError("catalog: N must be positive");
  Eigen::Matrix2cd sx, sz;
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  const Couplings& c = cfg.couplings;

  if (cfg.kind == ModelKind::qubit_spin) {
    const CoherentFamily fam = CoherentFamily::spin(cfg.N, cfg.s0);
    const std::size_t dim = 2 * std::size_t(fam.two_s() + 1);
    if (dim > tolerances().max_composite_dim) {
      throw ResourceCapError("catalog: composite dimension " + std::to_string(dim) +
                             " exceeds cap " + std::to_string(tolerances().max_composite_dim));
    }
    const SpinOperators ops = spin_operators(fam.two_s());
    const double inv_s = 1.0 / fam.S();
    Eigen::MatrixXcd h = c.g1 * inv_s * kron(sz, ops.sx) + c.eta * inv_s * kron(sx, ops.sz) +
                         c.omega * inv_s * kron(id, ops.sz);
    h = 0.5 * (h + h.adjoint()).eval();
    const Eigen::VectorXcd xi0 =
        coherent_state(fam, SpinPoint(cfg.theta0, cfg.phi0), fam.two_s() + 1);
    return {Hamiltonian<double>(std::move(h), "qubit_spin"), PureState<double>::normalized(xi0),
            fam};
  }

  const CoherentFamily fam = CoherentFamily::field(cfg.N);
  const int trunc = cfg.effective_truncation();
  if (trunc < 6) throw ConfigError("catalog: boson truncation must be at least 6");
  const std::size_t dim = 2 * std::size_t(trunc);
  if (dim > tolerances().max_composite_dim) {
    throw ResourceCapError("catalog: composite dimension " + std::to_string(dim) +
                           " exceeds cap " + std::to_string(tolerances().max_composite_dim));
  }
  const Eigen::MatrixXcd a = annihilation(trunc);
  const Eigen::MatrixXcd n = a.adjoint() * a;
  const double inv_n = 1.0 / cfg.N;
  Eigen::MatrixXcd h = c.g1 * std::sqrt(inv_n) * kron(sz, Eigen::MatrixXcd(a + a.adjoint())) +
                       c.eta * inv_n * kron(sx, n) + c.omega * inv_n * kron(id, n);
  h = 0.5 * (h + h.adjoint()).eval();
  return {Hamiltonian<double>(std::move(h), "qubit_boson"), PureState<double>::basis(trunc, 0), fam};
}

}  // namespace apparatus
