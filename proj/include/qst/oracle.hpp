#pragma once

// Exact many-body state-vector simulation of the XX chain at small size.
//
// Basis states are bit strings over the sites in the library's site order;
// bit i set means site i is spin up (occupied after Jordan-Wigner). The
// Hamiltonian conserves the number of up spins, so it is diagonalized one
// s_z sector at a time.

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qst/chain.hpp"
#include "qst/fidelity.hpp"
#include "qst/parallel.hpp"
#include "qst/tridiagonal_eigen.hpp"

namespace qst {

inline constexpr int kMaxOracleSites = 12;

using BasisState = std::uint32_t;

inline int site_bit(BasisState s, int site) { return static_cast<int>((s >> site) & 1u); }

/// Total spin-z projection: (#up) - (#down).
inline int total_sz(BasisState s, int sites) { return 2 * std::popcount(s) - sites; }

inline void check_oracle_size(int sites) {
  if (sites < 1 || sites > kMaxOracleSites)
    throw InvalidArgument("oracle supports 1.." + std::to_string(kMaxOracleSites) + " sites (got " +
                          std::to_string(sites) + ")");
}

struct ManyBodyState {
  int sites = 0;
  Eigen::VectorXcd amplitudes;

  static ManyBodyState basis(int sites, BasisState bits) {
    check_oracle_size(sites);
    ManyBodyState s{sites, Eigen::VectorXcd::Zero(Eigen::Index{1} << sites)};
    s.amplitudes[static_cast<Eigen::Index>(bits)] = 1.0;
    return s;
  }

  [[nodiscard]] double norm() const { return amplitudes.norm(); }
  [[nodiscard]] Eigen::Index dimension() const { return amplitudes.size(); }
};

/// XX chain H = sum_b g_b (s+_b s-_{b+1} + h.c.) on bonds (b, b+1).
struct SpinHamiltonian {
  int sites = 0;
  std::vector<double> bonds;

  [[nodiscard]] Eigen::Index dimension() const { return Eigen::Index{1} << sites; }

  [[nodiscard]] Eigen::MatrixXd dense() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dimension(), dimension());
    for (BasisState s = 0; s < static_cast<BasisState>(dimension()); ++s)
      for (int b = 0; b + 1 < sites; ++b)
        if (site_bit(s, b) != site_bit(s, b + 1)) h(s ^ (3u << b), s) += bonds[static_cast<std::size_t>(b)];
    return h;
  }

  [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    for (BasisState s = 0; s < static_cast<BasisState>(dimension()); ++s)
      for (int b = 0; b + 1 < sites; ++b)
        if (site_bit(s, b) != site_bit(s, b + 1)) out[s ^ (3u << b)] += bonds[static_cast<std::size_t>(b)] * psi[s];
    return out;
  }
};

inline SpinHamiltonian spin_hamiltonian_from_bonds(std::vector<double> bonds) {
  const int sites = static_cast<int>(bonds.size()) + 1;
  check_oracle_size(sites);
  return {sites, std::move(bonds)};
}

inline SpinHamiltonian build_spin_hamiltonian(const ChainSpec& spec, MatrixKind which) {
  return spin_hamiltonian_from_bonds(which == MatrixKind::full ? full_bonds(spec) : effective_bonds(spec));
}

/// Block of H on states with exactly one up spin, indexed by site.
inline Eigen::MatrixXd single_excitation_block(const SpinHamiltonian& h) {
  const Eigen::MatrixXd dense = h.dense();
  Eigen::MatrixXd block(h.sites, h.sites);
  for (int i = 0; i < h.sites; ++i)
    for (int j = 0; j < h.sites; ++j) block(i, j) = dense(Eigen::Index{1} << i, Eigen::Index{1} << j);
  return block;
}

/// exp(-iHt) applied sector by sector from cached eigensystems.
class Evolver {
 public:
  explicit Evolver(const SpinHamiltonian& h) : sites_(h.sites), position_(static_cast<std::size_t>(h.dimension())) {
    check_oracle_size(sites_);
    sectors_.resize(static_cast<std::size_t>(sites_ + 1));
    for (BasisState s = 0; s < static_cast<BasisState>(h.dimension()); ++s) {
      auto& sector = sectors_[static_cast<std::size_t>(std::popcount(s))];
      position_[s] = static_cast<int>(sector.states.size());
      sector.states.push_back(s);
    }
    for (auto& sector : sectors_) {
      const auto dim = static_cast<Eigen::Index>(sector.states.size());
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(dim, dim);
      for (Eigen::Index a = 0; a < dim; ++a) {
        const BasisState s = sector.states[static_cast<std::size_t>(a)];
        for (int b = 0; b + 1 < sites_; ++b)
          if (site_bit(s, b) != site_bit(s, b + 1))
            block(position_[s ^ (3u << b)], a) += h.bonds[static_cast<std::size_t>(b)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
      if (solver.info() != Eigen::Success) throw ConvergenceError("many-body sector eigensolver failed");
      sector.values = solver.eigenvalues();
      sector.vectors = solver.eigenvectors();
    }
  }

  [[nodiscard]] int sites() const { return sites_; }

  [[nodiscard]] Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi, double t) const {
    Eigen::VectorXcd out(psi.size());
    for (const auto& sector : sectors_) {
      const auto dim = static_cast<Eigen::Index>(sector.states.size());
      Eigen::VectorXcd local(dim);
      for (Eigen::Index a = 0; a < dim; ++a) local[a] = psi[sector.states[static_cast<std::size_t>(a)]];
      Eigen::VectorXcd modes = sector.vectors.transpose().cast<complex>() * local;
      for (Eigen::Index k = 0; k < dim; ++k) modes[k] *= std::polar(1.0, -sector.values[k] * t);
      local = sector.vectors.cast<complex>() * modes;
      for (Eigen::Index a = 0; a < dim; ++a) out[sector.states[static_cast<std::size_t>(a)]] = local[a];
    }
    return out;
  }

  [[nodiscard]] ManyBodyState evolve(const ManyBodyState& psi, double t) const {
    if (psi.sites != sites_) throw InvalidArgument("state and Hamiltonian sizes differ");
    return {sites_, evolve(psi.amplitudes, t)};
  }

 private:
  struct Sector {
    std::vector<BasisState> states;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
  };
  int sites_;
  std::vector<int> position_;
  std::vector<Sector> sectors_;
};

inline ManyBodyState evolve_state(const SpinHamiltonian& h, const ManyBodyState& psi, double t) {
  return Evolver(h).evolve(psi, t);
}

// ---------------------------------------------------------------------------
// Jordan-Wigner phase factors of the effective swap

/// Occupations in the effective model [L1..Ln, kappa, Rn..R1];
/// left[u-1] = n_{L_u}, right[u-1] = n_{R_u}.
struct OccupationPattern {
  std::vector<int> left;
  int kappa = 0;
  std::vector<int> right;
};

inline OccupationPattern pattern_from_basis(BasisState s, int n) {
  const int sites = 2 * n + 1;
  OccupationPattern p{std::vector<int>(static_cast<std::size_t>(n)), site_bit(s, n),
                      std::vector<int>(static_cast<std::size_t>(n))};
  for (int u = 1; u <= n; ++u) {
    p.left[static_cast<std::size_t>(u - 1)] = site_bit(s, u - 1);
    p.right[static_cast<std::size_t>(u - 1)] = site_bit(s, sites - u);
  }
  return p;
}

/// Swaps L_u <-> R_u for every u in the effective ordering.
inline BasisState swap_registers(BasisState s, int n) {
  const int sites = 2 * n + 1;
  BasisState out = s;
  for (int u = 1; u <= n; ++u) {
    const int l = u - 1, r = sites - u;
    const BasisState bl = (s >> l) & 1u, br = (s >> r) & 1u;
    out = (out & ~((1u << l) | (1u << r))) | (br << l) | (bl << r);
  }
  return out;
}

/// Gamma0 * Gamma1 * Gamma2 for an initial occupation pattern.
inline int jw_phase_prediction(const OccupationPattern& p, int n) {
  if (static_cast<int>(p.left.size()) != n || static_cast<int>(p.right.size()) != n)
    throw InvalidArgument("occupation pattern does not match register size");
  const auto L = [&](int u) { return p.left[static_cast<std::size_t>(u - 1)]; };
  const auto R = [&](int u) { return p.right[static_cast<std::size_t>(u - 1)]; };

  int exponent = n * p.kappa;
  for (int v = 1; v <= n; ++v) exponent += n * (L(v) + R(v));

  int right_total = 0;
  for (int v = 1; v <= n; ++v) right_total += R(v);

  for (int x = 2; x <= n + 1; ++x) {
    const int lx = L(x - 1);
    const int rx = R(x - 1);
    for (int v = x; v <= n; ++v) exponent += lx * L(v) + rx * R(v);
    exponent += lx * right_total + lx * p.kappa + rx * p.kappa;
  }
  return exponent % 2 == 0 ? 1 : -1;
}

struct SwapCheckRow {
  BasisState state = 0;
  OccupationPattern pattern;
  int predicted = 1;
  int measured = 1;
  double error = 0.0;  // max |psi(tau) - predicted * |swapped>|
  bool match = false;
};

struct SwapCheckReport {
  std::vector<SwapCheckRow> rows;
  double max_amplitude_error = 0.0;
  bool pass = false;
};

/// Evolves every occupation basis state of the effective model for tau and
/// compares with Gamma0 Gamma1 Gamma2 (SWAP_LR x I_kappa).
inline SwapCheckReport effective_swap_check(const ChainSpec& spec, double tol = 1e-8) {
  const int n = spec.n;
  if (n > 3) throw InvalidArgument("effective swap check supports n <= 3");
  const auto h = build_spin_hamiltonian(spec, MatrixKind::effective);
  const Evolver evolver(h);

  SwapCheckReport report;
  report.pass = true;
  for (BasisState s = 0; s < static_cast<BasisState>(h.dimension()); ++s) {
    const auto out = evolver.evolve(ManyBodyState::basis(h.sites, s), spec.tau);
    const BasisState target = swap_registers(s, n);
    SwapCheckRow row;
    row.state = s;
    row.pattern = pattern_from_basis(s, n);
    row.predicted = jw_phase_prediction(row.pattern, n);
    row.measured = out.amplitudes[target].real() >= 0.0 ? 1 : -1;
    Eigen::VectorXcd expected = Eigen::VectorXcd::Zero(h.dimension());
    expected[target] = static_cast<double>(row.predicted);
    row.error = (out.amplitudes - expected).cwiseAbs().maxCoeff();
    row.match = row.error <= tol && row.measured == row.predicted;
    report.max_amplitude_error = std::max(report.max_amplitude_error, row.error);
    report.pass = report.pass && row.match;
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline SwapCheckReport effective_swap_check(int n, double tol = 1e-8) {
  return effective_swap_check(derive_parameters(n, 3, 1.0, 0.1), tol);
}

// ---------------------------------------------------------------------------
// Gates and dephasing

/// Flips `target` wherever `control` is up.
inline ManyBodyState encode_cnot(const ManyBodyState& psi, int control, int target) {
  if (control == target || control < 0 || target < 0 || control >= psi.sites || target >= psi.sites)
    throw InvalidArgument("CNOT needs two distinct valid sites");
  ManyBodyState out{psi.sites, Eigen::VectorXcd(psi.dimension())};
  for (BasisState s = 0; s < static_cast<BasisState>(psi.dimension()); ++s)
    out.amplitudes[site_bit(s, control) ? s ^ (1u << target) : s] = psi.amplitudes[s];
  return out;
}

/// Two-qubit basis permutation on sites (q1, q2): code = b(q1) | b(q2) << 1
/// is mapped to perm[code].
using PairPermutation = std::array<int, 4>;

inline Eigen::VectorXcd apply_pair_permutation(const Eigen::VectorXcd& psi, const PairPermutation& perm, int q1,
                                               int q2) {
  Eigen::VectorXcd out(psi.size());
  const BasisState mask = ~((1u << q1) | (1u << q2));
  for (BasisState s = 0; s < static_cast<BasisState>(psi.size()); ++s) {
    const int code = site_bit(s, q1) | (site_bit(s, q2) << 1);
    const auto mapped = static_cast<BasisState>(perm[static_cast<std::size_t>(code)]);
    out[(s & mask) | ((mapped & 1u) << q1) | (((mapped >> 1) & 1u) << q2)] = psi[s];
  }
  return out;
}

inline PairPermutation inverse(const PairPermutation& p) {
  PairPermutation inv{};
  for (int c = 0; c < 4; ++c) inv[static_cast<std::size_t>(p[static_cast<std::size_t>(c)])] = c;
  return inv;
}

/// Phase exp(-i lambda s_z t) on every basis state.
inline void apply_collective_dephasing(Eigen::VectorXcd& psi, int sites, double lambda, double t) {
  if (lambda == 0.0 || t == 0.0) return;
  for (BasisState s = 0; s < static_cast<BasisState>(psi.size()); ++s)
    psi[s] *= std::polar(1.0, -lambda * total_sz(s, sites) * t);
}

inline ManyBodyState apply_collective_dephasing(const ManyBodyState& psi, double lambda, double t) {
  ManyBodyState out = psi;
  apply_collective_dephasing(out.amplitudes, out.sites, lambda, t);
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end logical-qubit transfer

/// One logical qubit in two physical register qubits. The input qubit sits on
/// L1 with L2 prepared in `ancilla`; `permutation` encodes on (L1, L2) and its
/// inverse decodes on (R1, R2). The decoded R1 state is scored against
/// diag(1, target_sign) applied to the input.
struct LogicalEncoding {
  PairPermutation permutation{0, 1, 2, 3};
  int ancilla = 0;
  int target_sign = 1;

  static constexpr PairPermutation kCnot{0, 3, 2, 1};  // control L1, target L2

  /// span{|du>, |ud>} via CNOT from L2 = up.
  static LogicalEncoding dfs() { return {kCnot, 1, 1}; }
  /// span{|dd>, |uu>} via CNOT from L2 = down; the swap leaves a logical sigma_z.
  static LogicalEncoding ndfs() { return {kCnot, 0, -1}; }
  /// CNOT pipeline from an arbitrary L2 preparation.
  static LogicalEncoding cnot(int ancilla, int target_sign = 1) { return {kCnot, ancilla, target_sign}; }

  /// |0>_logic = a, |1>_logic = b, with codes b(L1) | b(L2) << 1.
  static LogicalEncoding subspace(int a, int b) {
    if (a == b || a < 0 || a > 3 || b < 0 || b > 3) throw InvalidArgument("subspace needs two distinct codes 0..3");
    PairPermutation p{a, b, 0, 0};
    int slot = 2;
    for (int c = 0; c < 4; ++c)
      if (c != a && c != b) p[static_cast<std::size_t>(slot++)] = c;
    return {p, 0, 1};
  }
};

inline LogicalEncoding logical_encoding(Encoding e) {
  return e == Encoding::dfs ? LogicalEncoding::dfs() : LogicalEncoding::ndfs();
}

struct ChannelInit {
  bool maximally_mixed = true;
  BasisState bits = 0;  // used when !maximally_mixed; L1/L2 bits ignored

  static ChannelInit mixed() { return {true, 0}; }
  static ChannelInit basis(BasisState b) { return {false, b}; }
};

struct DephasingModel {
  double sigma_lambda = 0.0;
  int samples = 1;
  std::uint64_t seed = 42;
};

/// Field values lambda_s ~ Normal(0, sigma_lambda), one independent stream per shot.
inline std::vector<double> dephasing_samples(const DephasingModel& d) {
  if (d.samples < 1) throw InvalidArgument("dephasing needs at least one sample");
  if (!(d.sigma_lambda >= 0.0)) throw InvalidArgument("sigma_lambda must be >= 0");
  if (d.sigma_lambda == 0.0) return {0.0};
  std::vector<double> out(static_cast<std::size_t>(d.samples));
  for (int s = 0; s < d.samples; ++s) {
    std::mt19937_64 rng(detail::mix_seed(d.seed, 0x6465706855ull, static_cast<std::uint64_t>(s)));
    out[static_cast<std::size_t>(s)] = std::normal_distribution<double>(0.0, d.sigma_lambda)(rng);
  }
  return out;
}

namespace detail {

inline const std::array<std::array<complex, 2>, 6>& pauli_axis_states() {
  static const double h = 1.0 / std::sqrt(2.0);
  static const std::array<std::array<complex, 2>, 6> states{{
      {complex{1, 0}, complex{0, 0}},
      {complex{0, 0}, complex{1, 0}},
      {complex{h, 0}, complex{h, 0}},
      {complex{h, 0}, complex{-h, 0}},
      {complex{h, 0}, complex{0, h}},
      {complex{h, 0}, complex{0, -h}},
  }};
  return states;
}

/// Reduced density matrix of one site.
inline Eigen::Matrix2cd reduce_to_site(const Eigen::VectorXcd& psi, int site) {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  for (BasisState s = 0; s < static_cast<BasisState>(psi.size()); ++s) {
    if (site_bit(s, site)) continue;
    const BasisState up = s | (1u << site);
    rho(0, 0) += std::norm(psi[s]);
    rho(1, 1) += std::norm(psi[up]);
    rho(0, 1) += psi[s] * std::conj(psi[up]);
  }
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

struct PipelineSites {
  int l1, l2, r1, r2;
};

inline std::vector<BasisState> channel_configurations(int sites, const ChannelInit& init) {
  const BasisState register_mask = 0b11u;
  if (!init.maximally_mixed) return {init.bits & ~register_mask};
  std::vector<BasisState> out;
  for (BasisState c = 0; c < (1u << (sites - 2)); ++c) out.push_back(c << 2);
  return out;
}

/// Runs encode -> evolve -> dephase -> decode and hands each decoded R1 state
/// to `sink(config index, input index, lambda index, rho, ideal input)`.
template <typename Sink>
void run_pipeline(const Evolver& evolver, const LogicalEncoding& enc, const ChannelInit& init,
                  const std::vector<double>& lambdas, double t, Sink&& sink) {
  const int sites = evolver.sites();
  const PipelineSites at{0, 1, sites - 1, sites - 2};
  const auto decode = inverse(enc.permutation);
  const auto configs = channel_configurations(sites, init);
  const auto& inputs = pauli_axis_states();
  const Eigen::Index dim = Eigen::Index{1} << sites;

  for (std::size_t c = 0; c < configs.size(); ++c) {
    const BasisState base = configs[c] | (static_cast<BasisState>(enc.ancilla) << at.l2);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
      psi[base] += inputs[k][0];
      psi[base | (1u << at.l1)] += inputs[k][1];
      psi = apply_pair_permutation(psi, enc.permutation, at.l1, at.l2);
      psi = evolver.evolve(psi, t);
      for (std::size_t l = 0; l < lambdas.size(); ++l) {
        Eigen::VectorXcd shot = psi;
        apply_collective_dephasing(shot, sites, lambdas[l], t);
        shot = apply_pair_permutation(shot, decode, at.r1, at.r2);
        sink(c, k, l, reduce_to_site(shot, at.r1), inputs[k]);
      }
    }
  }
}

}  // namespace detail

/// Average fidelity for each dephasing shot (lambda value), averaged over the
/// six Pauli-axis inputs and every channel configuration.
inline std::vector<double> fidelity_per_shot(const Evolver& evolver, const LogicalEncoding& enc,
                                             const ChannelInit& init, const std::vector<double>& lambdas, double t) {
  if (evolver.sites() < 4) throw InvalidArgument("logical pipeline needs at least four sites");
  std::vector<CompensatedSum> acc(lambdas.size());
  std::size_t terms = 0;
  detail::run_pipeline(evolver, enc, init, lambdas, t,
                       [&](std::size_t, std::size_t, std::size_t l, const Eigen::Matrix2cd& rho,
                           const std::array<complex, 2>& in) {
                         const Eigen::Vector2cd ideal(in[0], static_cast<double>(enc.target_sign) * in[1]);
                         acc[l].add((ideal.adjoint() * rho * ideal)(0, 0).real());
                         if (l == 0) ++terms;
                       });
  std::vector<double> out(lambdas.size());
  for (std::size_t l = 0; l < lambdas.size(); ++l) out[l] = acc[l].value() / static_cast<double>(terms);
  return out;
}

inline double average_fidelity_bruteforce(const ChainSpec& spec, MatrixKind which, const LogicalEncoding& enc,
                                          const ChannelInit& init, const DephasingModel& deph, double t) {
  if (spec.n != 2) throw InvalidArgument("logical pipeline is defined for two-qubit registers (n = 2)");
  const Evolver evolver(build_spin_hamiltonian(spec, which));
  const auto per_shot = fidelity_per_shot(evolver, enc, init, dephasing_samples(deph), t);
  CompensatedSum sum;
  for (double f : per_shot) sum.add(f);
  return sum.value() / static_cast<double>(per_shot.size());
}

struct DephasingReport {
  double dfs_reference = 0.0;       // DFS fidelity at lambda = 0
  double dfs_max_deviation = 0.0;   // max over shots |F(lambda) - F(0)|
  double ndfs_suppression = 1.0;    // mean Re(c(lambda)/c(0)) of the decoded coherence
  double ndfs_standard_error = 0.0;
  double ndfs_expected = 1.0;       // exp(-8 sigma^2 t^2)
  int shots = 0;
};

/// DFS: per-shot fidelity deviation from the noiseless value. NDFS: decoded
/// R1 coherence for a |+> input relative to its noiseless value, compared
/// with the Gaussian characteristic function at Delta s_z = 4.
inline DephasingReport dephasing_protection_report(const ChainSpec& spec, MatrixKind which,
                                                   const DephasingModel& deph, double t) {
  if (spec.n != 2) throw InvalidArgument("logical pipeline is defined for two-qubit registers (n = 2)");
  const Evolver evolver(build_spin_hamiltonian(spec, which));
  const auto lambdas = dephasing_samples(deph);
  const auto init = ChannelInit::mixed();

  DephasingReport r;
  r.shots = static_cast<int>(lambdas.size());
  r.dfs_reference = fidelity_per_shot(evolver, LogicalEncoding::dfs(), init, {0.0}, t).front();
  for (double f : fidelity_per_shot(evolver, LogicalEncoding::dfs(), init, lambdas, t))
    r.dfs_max_deviation = std::max(r.dfs_max_deviation, std::abs(f - r.dfs_reference));

  std::vector<double> with_zero = lambdas;
  with_zero.push_back(0.0);
  std::vector<complex> coherence(with_zero.size(), complex{0.0, 0.0});
  constexpr std::size_t kPlus = 2;
  detail::run_pipeline(evolver, LogicalEncoding::ndfs(), init, with_zero, t,
                       [&](std::size_t, std::size_t k, std::size_t l, const Eigen::Matrix2cd& rho,
                           const std::array<complex, 2>&) {
                         if (k == kPlus) coherence[l] += rho(0, 1);
                       });
  const complex reference = coherence.back();
  if (std::abs(reference) < 1e-12) throw InvalidArgument("NDFS coherence vanishes at this time; pick another t");

  CompensatedSum sum, sum_sq;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double x = (coherence[l] / reference).real();
    sum.add(x);
    sum_sq.add(x * x);
  }
  const double m = static_cast<double>(lambdas.size());
  r.ndfs_suppression = sum.value() / m;
  if (lambdas.size() > 1) {
    const double var = std::max(0.0, (sum_sq.value() - m * r.ndfs_suppression * r.ndfs_suppression) / (m - 1.0));
    r.ndfs_standard_error = std::sqrt(var / m);
  }
  r.ndfs_expected = std::exp(-8.0 * deph.sigma_lambda * deph.sigma_lambda * t * t);
  return r;
}

}  // namespace qst
