#pragma once

// Single-particle evolution matrix Delta(t) = exp(-i Omega t) by spectral
// decomposition of the coupling matrix.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qst/chain.hpp"
#include "qst/tridiagonal_eigen.hpp"

namespace qst {

using complex = std::complex<double>;

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
  CouplingMatrix source;
};

/// Throws InvalidArgument unless the matrix is finite, symmetric and
/// tridiagonal; ConvergenceError if the QL iteration cap is hit.
inline SpectralDecomposition eigendecompose(const CouplingMatrix& omega) {
  const auto& a = omega.entries;
  if (a.rows() != a.cols()) throw InvalidArgument("coupling matrix must be square");
  if (!a.allFinite()) throw InvalidArgument("coupling matrix has non-finite entries");
  const Eigen::Index order = a.rows();
  for (Eigen::Index i = 0; i < order; ++i)
    for (Eigen::Index j = 0; j < order; ++j) {
      if (a(i, j) != a(j, i)) throw InvalidArgument("coupling matrix must be symmetric");
      if (std::abs(i - j) > 1 && a(i, j) != 0.0) throw InvalidArgument("coupling matrix must be tridiagonal");
    }

  std::vector<double> diag(static_cast<std::size_t>(order));
  std::vector<double> off(static_cast<std::size_t>(std::max<Eigen::Index>(order - 1, 0)));
  for (Eigen::Index i = 0; i < order; ++i) diag[static_cast<std::size_t>(i)] = a(i, i);
  for (Eigen::Index i = 0; i + 1 < order; ++i) off[static_cast<std::size_t>(i)] = a(i, i + 1);

  auto sys = tridiagonal_eigensystem(diag, off);
  return {std::move(sys.values), std::move(sys.vectors), omega};
}

struct Propagator {
  double t = 0.0;
  Eigen::MatrixXcd entries;
  CouplingMatrix source;

  [[nodiscard]] complex operator()(Eigen::Index i, Eigen::Index j) const { return entries(i, j); }
  [[nodiscard]] Eigen::Index order() const { return entries.rows(); }
};

/// Delta = V exp(-i lambda t) V^T.
inline Propagator propagator_at(const SpectralDecomposition& decomp, double t) {
  if (!std::isfinite(t)) throw InvalidArgument("evolution time must be finite");
  const auto& v = decomp.eigenvectors;
  Eigen::VectorXcd phase(decomp.eigenvalues.size());
  for (Eigen::Index k = 0; k < phase.size(); ++k) phase[k] = std::polar(1.0, -decomp.eigenvalues[k] * t);
  const Eigen::MatrixXcd vc = v.cast<complex>();
  Eigen::MatrixXcd delta = vc * phase.asDiagonal() * vc.transpose();
  return {t, std::move(delta), decomp.source};
}

inline Propagator propagator_at(const CouplingMatrix& omega, double t) {
  return propagator_at(eigendecompose(omega), t);
}

/// Weak-coupling closed forms for the n = 2 effective model.
struct ClosedFormElements {
  complex r1l1;
  complex r2l2;
  complex r1l2;
};

inline ClosedFormElements closed_form_effective_elements(double g0, double t) {
  const double x = g0 * t;
  return {
      complex{(3.0 - 4.0 * std::cos(x) + std::cos(2.0 * x)) / 8.0, 0.0},
      complex{(-std::cos(x) + std::cos(2.0 * x)) / 2.0, 0.0},
      complex{0.0, (2.0 * std::sin(x) - std::sin(2.0 * x)) / 4.0},
  };
}

struct MirrorReport {
  double max_error = 0.0;
  bool pass = false;
};

/// Compares Delta_eff(tau) with (-1)^n times the antidiagonal exchange matrix.
inline MirrorReport mirror_inversion_report(const ChainSpec& spec, double tol) {
  const auto delta = propagator_at(build_effective_coupling_matrix(spec), spec.tau);
  const Eigen::Index order = delta.order();
  const double sign = spec.n % 2 == 0 ? 1.0 : -1.0;
  double err = 0.0;
  for (Eigen::Index i = 0; i < order; ++i)
    for (Eigen::Index j = 0; j < order; ++j) {
      const double expected = (i + j == order - 1) ? sign : 0.0;
      err = std::max(err, std::abs(delta(i, j) - expected));
    }
  return {err, err <= tol};
}

/// Register-site indices of a model of the given order: L1..Ln then Rn..R1.
inline std::vector<Eigen::Index> register_sites(int n, Eigen::Index order) {
  std::vector<Eigen::Index> sites;
  for (int u = 0; u < n; ++u) sites.push_back(u);
  for (int u = n; u >= 1; --u) sites.push_back(order - u);
  return sites;
}

/// Max deviation between the register block of the full Delta(t) and the
/// effective-model Delta(t), after restoring the (-1)^(kappa-1) sign that the
/// effective model absorbs into the right register.
inline double effective_model_deviation(const ChainSpec& spec, double t) {
  const auto full = propagator_at(build_full_coupling_matrix(spec), t);
  const auto eff = propagator_at(build_effective_coupling_matrix(spec), t);
  const auto fs = register_sites(spec.n, full.order());
  const auto es = register_sites(spec.n, eff.order());
  const auto side_sign = [&](std::size_t k) { return k < static_cast<std::size_t>(spec.n) ? 1 : spec.kappa_sign(); };
  double err = 0.0;
  for (std::size_t a = 0; a < fs.size(); ++a)
    for (std::size_t b = 0; b < fs.size(); ++b) {
      const double sign = side_sign(a) * side_sign(b);
      err = std::max(err, std::abs(sign * full(fs[a], fs[b]) - eff(es[a], es[b])));
    }
  return err;
}

}  // namespace qst
