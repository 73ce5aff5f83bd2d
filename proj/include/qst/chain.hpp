#pragma once

// Chain geometry, derived couplings and single-particle coupling matrices.
//
// Site ordering used everywhere in this library:
//
//   [L1 .. Ln, c1 .. cN, Rn .. R1]   full model,     order N + 2n
//   [L1 .. Ln, kappa,   Rn .. R1]    effective model, order 2n + 1
//
// so L_u sits at index u-1 and R_u at index order-u.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qst {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ChainSpec {
  int n = 0;          // register qubits per side
  int N = 0;          // channel length (odd)
  double g_c = 0.0;   // intrachannel coupling
  double g_i = 0.0;   // register-channel coupling

  int kappa = 0;           // zero-mode index (N+1)/2
  double t_kappa = 0.0;    // register coupling to the zero mode
  double g0 = 0.0;         // base register coupling
  std::vector<double> g_u; // g_1 .. g_n, g_n == t_kappa
  double tau = 0.0;        // transfer time, g0 * tau == pi

  /// (-1)^(kappa-1): the sign the effective model absorbs into a_Rn.
  [[nodiscard]] int kappa_sign() const { return (kappa - 1) % 2 == 0 ? 1 : -1; }

  [[nodiscard]] double coupling(int u) const { return g_u.at(static_cast<std::size_t>(u - 1)); }

  friend bool operator==(const ChainSpec&, const ChainSpec&) = default;
};

/// Derives every coupling from the free inputs (n, N, g_C, g_I) under the
/// tuning condition g_n = t_kappa.
inline ChainSpec derive_parameters(int n, int N, double g_c, double g_i) {
  if (n < 1) throw InvalidArgument("register size n must be >= 1");
  if (N < 1 || N % 2 == 0)
    throw InvalidArgument("channel length must be odd and >= 1 (got " + std::to_string(N) + ")");
  if (!(g_c > 0.0) || !std::isfinite(g_c)) throw InvalidArgument("g_C must be positive and finite");
  if (!(g_i > 0.0) || !std::isfinite(g_i)) throw InvalidArgument("g_I must be positive and finite");

  ChainSpec s;
  s.n = n;
  s.N = N;
  s.g_c = g_c;
  s.g_i = g_i;
  s.kappa = (N + 1) / 2;
  // sin(kappa*pi/(N+1)) == 1 for odd N
  s.t_kappa = g_i * std::sqrt(2.0 / (N + 1));
  s.g0 = 2.0 * s.t_kappa / std::sqrt(static_cast<double>(n) * (n + 1));
  s.g_u.resize(static_cast<std::size_t>(n));
  for (int u = 1; u < n; ++u)
    s.g_u[static_cast<std::size_t>(u - 1)] = 0.5 * s.g0 * std::sqrt(static_cast<double>(u) * (2 * n - u + 1));
  s.g_u.back() = s.t_kappa;
  s.tau = std::numbers::pi / s.g0;
  return s;
}

enum class MatrixKind { full, effective };

inline const char* to_string(MatrixKind k) { return k == MatrixKind::full ? "full" : "effective"; }

struct CouplingMatrix {
  MatrixKind kind = MatrixKind::full;
  Eigen::MatrixXd entries;
  std::vector<std::string> site_labels;

  [[nodiscard]] Eigen::Index order() const { return entries.rows(); }

  [[nodiscard]] std::vector<double> superdiagonal() const {
    std::vector<double> out;
    for (Eigen::Index i = 0; i + 1 < order(); ++i) out.push_back(entries(i, i + 1));
    return out;
  }
};

namespace detail {

inline std::vector<std::string> site_labels(int n, int channel_sites, MatrixKind kind) {
  std::vector<std::string> labels;
  for (int u = 1; u <= n; ++u) labels.push_back("L" + std::to_string(u));
  if (kind == MatrixKind::effective) {
    labels.emplace_back("kappa");
  } else {
    for (int i = 1; i <= channel_sites; ++i) labels.push_back("c" + std::to_string(i));
  }
  for (int u = n; u >= 1; --u) labels.push_back("R" + std::to_string(u));
  return labels;
}

}  // namespace detail

/// Zero-diagonal symmetric tridiagonal matrix from its bond list.
inline Eigen::MatrixXd tridiagonal_from_bonds(std::span<const double> bonds) {
  const auto order = static_cast<Eigen::Index>(bonds.size()) + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(order, order);
  for (Eigen::Index i = 0; i + 1 < order; ++i) {
    m(i, i + 1) = bonds[static_cast<std::size_t>(i)];
    m(i + 1, i) = bonds[static_cast<std::size_t>(i)];
  }
  return m;
}

/// Bond list [g1..g_{n-1}, g_I, g_C x (N-1), g_I, g_{n-1}..g1].
inline std::vector<double> full_bonds(const ChainSpec& s) {
  std::vector<double> b;
  for (int u = 1; u < s.n; ++u) b.push_back(s.coupling(u));
  b.push_back(s.g_i);
  for (int i = 1; i < s.N; ++i) b.push_back(s.g_c);
  b.push_back(s.g_i);
  for (int u = s.n - 1; u >= 1; --u) b.push_back(s.coupling(u));
  return b;
}

/// Bond list [g1..g_{n-1}, t_kappa, t_kappa, g_{n-1}..g1].
inline std::vector<double> effective_bonds(const ChainSpec& s) {
  std::vector<double> b;
  for (int u = 1; u < s.n; ++u) b.push_back(s.coupling(u));
  b.push_back(s.t_kappa);
  b.push_back(s.t_kappa);
  for (int u = s.n - 1; u >= 1; --u) b.push_back(s.coupling(u));
  return b;
}

inline CouplingMatrix coupling_matrix_from_bonds(std::span<const double> bonds, int n, MatrixKind kind) {
  const int middle = static_cast<int>(bonds.size()) + 1 - 2 * n;
  if (middle < 1) throw InvalidArgument("bond list too short for register size");
  return {kind, tridiagonal_from_bonds(bonds), detail::site_labels(n, middle, kind)};
}

inline CouplingMatrix build_full_coupling_matrix(const ChainSpec& s) {
  const auto bonds = full_bonds(s);
  return coupling_matrix_from_bonds(bonds, s.n, MatrixKind::full);
}

/// Registers plus the resonant zero mode; equals g0 * J_x for J = n.
inline CouplingMatrix build_effective_coupling_matrix(const ChainSpec& s) {
  const auto bonds = effective_bonds(s);
  return coupling_matrix_from_bonds(bonds, s.n, MatrixKind::effective);
}

/// epsilon_k = 2 g_C cos(k pi/(N+1)), k = 1..N. The upper half is filled by
/// mirror symmetry so epsilon_k == -epsilon_{N+1-k} and epsilon_kappa == 0 hold exactly.
inline std::vector<double> channel_spectrum(const ChainSpec& s) {
  std::vector<double> eps(static_cast<std::size_t>(s.N));
  for (int k = 1; k < s.kappa; ++k)
    eps[static_cast<std::size_t>(k - 1)] = 2.0 * s.g_c * std::cos(k * std::numbers::pi / (s.N + 1));
  eps[static_cast<std::size_t>(s.kappa - 1)] = 0.0;
  for (int k = s.kappa + 1; k <= s.N; ++k)
    eps[static_cast<std::size_t>(k - 1)] = -eps[static_cast<std::size_t>(s.N - k)];
  return eps;
}

/// t_k = g_I sqrt(2/(N+1)) sin(k pi/(N+1)), k = 1..N, mirror-symmetric by construction.
inline std::vector<double> mode_couplings(const ChainSpec& s) {
  std::vector<double> t(static_cast<std::size_t>(s.N));
  const double scale = s.g_i * std::sqrt(2.0 / (s.N + 1));
  for (int k = 1; k < s.kappa; ++k)
    t[static_cast<std::size_t>(k - 1)] = scale * std::sin(k * std::numbers::pi / (s.N + 1));
  t[static_cast<std::size_t>(s.kappa - 1)] = s.t_kappa;
  for (int k = s.kappa + 1; k <= s.N; ++k) t[static_cast<std::size_t>(k - 1)] = t[static_cast<std::size_t>(s.N - k)];
  return t;
}

}  // namespace qst
