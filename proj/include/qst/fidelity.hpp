#pragma once

// Average transfer fidelity of one logical qubit (two-qubit registers) from
// propagator matrix elements, and parameter sweeps over (N, g_I/g_C).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "qst/chain.hpp"
#include "qst/parallel.hpp"
#include "qst/propagator.hpp"

namespace qst {

enum class Encoding { dfs, ndfs };

inline std::string_view to_string(Encoding e) { return e == Encoding::dfs ? "dfs" : "ndfs"; }

/// Delta elements between the first two left sites and the last two right
/// sites: R1 = last index, R2 = second-to-last, L1 = 0, L2 = 1.
struct RegisterElements {
  complex r1l1;
  complex r2l2;
  complex r1l2;
  complex r2l1;
};

inline RegisterElements extract_register_elements(const Propagator& p) {
  const Eigen::Index last = p.order() - 1;
  if (last < 3) throw InvalidArgument("register elements need at least four sites");
  return {p(last, 0), p(last - 1, 1), p(last, 1), p(last - 1, 0)};
}

inline RegisterElements from_closed_form(const ClosedFormElements& c) {
  return {c.r1l1, c.r2l2, c.r1l2, c.r1l2};
}

struct PauliTransferTerms {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline PauliTransferTerms pauli_transfer_terms(const RegisterElements& e) {
  const complex diag = e.r1l1 * std::conj(e.r2l2);
  const complex cross = e.r1l2 * std::conj(e.r2l1);
  return {2.0 * (diag + cross).real(), 2.0 * (diag - cross).real(),
          2.0 * (std::norm(e.r1l1) - std::norm(e.r1l2))};
}

/// Logical qubit in span{|du>, |ud>}.
inline double f_dfs(const RegisterElements& e) {
  return 0.5 + (2.0 * (std::conj(e.r1l1) * e.r2l2).real() + std::norm(e.r1l1) - std::norm(e.r1l2)) / 6.0;
}

/// Logical qubit in span{|dd>, |uu>}, scored against the logical sigma_z the
/// ideal swap imprints on that pair.
inline double f_ndfs(const RegisterElements& e) {
  return 0.5 +
         (2.0 * (e.r1l1 * e.r2l2 - e.r1l2 * e.r2l1).real() + std::norm(e.r1l1) + std::norm(e.r1l2)) / 6.0;
}

inline double fidelity(const RegisterElements& e, Encoding enc) { return enc == Encoding::dfs ? f_dfs(e) : f_ndfs(e); }

inline std::vector<double> log_spaced(double lo, double hi, int steps) {
  if (steps < 1) throw InvalidArgument("grid needs at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("log grid needs 0 < min <= max");
  if (steps == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(steps));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (steps - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline std::vector<double> linear_spaced(double lo, double hi, int steps) {
  if (steps < 1) throw InvalidArgument("grid needs at least one point");
  if (steps == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
  out.back() = hi;
  return out;
}

struct Disorder {
  double sigma_rel = 0.0;
  std::uint64_t seed = 42;
  int samples = 1;
};

struct SweepOptions {
  int n = 2;
  std::vector<int> channel_lengths{101, 151, 201};
  std::vector<double> ratios = log_spaced(1e-3, 1.0, 40);
  std::optional<double> time;  // unset: tau of each spec
  std::vector<Encoding> encodings{Encoding::dfs, Encoding::ndfs};
  std::optional<Disorder> disorder;
  unsigned threads = worker_count();
};

struct SweepRow {
  int N = 0;
  int n = 0;
  double ratio = 0.0;
  double time = 0.0;
  Encoding encoding = Encoding::dfs;
  double fidelity = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

namespace detail {

/// Multiplies every intraregister bond by (1 + eps), eps ~ Normal(0, sigma_rel).
inline std::vector<double> perturb_register_bonds(std::vector<double> bonds, int n, double sigma_rel,
                                                  std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma_rel);
  const std::size_t last = bonds.size() - 1;
  for (std::size_t u = 0; u + 1 < static_cast<std::size_t>(n); ++u) {
    bonds[u] *= 1.0 + noise(rng);
    bonds[last - u] *= 1.0 + noise(rng);
  }
  return bonds;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace detail

/// Full-model fidelity sweep. Rows come out N-outer, ratio ascending, then
/// encodings in the order given.
inline SweepResult sweep_fidelity(const SweepOptions& opt) {
  if (opt.channel_lengths.empty() || opt.ratios.empty() || opt.encodings.empty())
    throw InvalidArgument("sweep grids must be non-empty");
  if (opt.n != 2) throw InvalidArgument("fidelity formulas are defined for two-qubit registers (n = 2)");
  for (int N : opt.channel_lengths)
    if (N < 1 || N % 2 == 0) throw InvalidArgument("channel length must be odd (got " + std::to_string(N) + ")");
  for (double r : opt.ratios)
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("ratios must be positive");
  if (opt.disorder && (opt.disorder->samples < 1 || opt.disorder->sigma_rel < 0.0))
    throw InvalidArgument("disorder needs samples >= 1 and sigma_rel >= 0");

  std::vector<double> ratios = opt.ratios;
  std::sort(ratios.begin(), ratios.end());

  struct Point {
    double time;
    std::vector<double> fidelity;  // per encoding
  };
  const std::size_t per_n = ratios.size();
  const std::size_t points = opt.channel_lengths.size() * per_n;

  auto evaluate = [&](std::size_t idx) {
    const int N = opt.channel_lengths[idx / per_n];
    const double ratio = ratios[idx % per_n];
    const auto spec = derive_parameters(opt.n, N, 1.0, ratio);
    const double t = opt.time.value_or(spec.tau);
    Point p{t, std::vector<double>(opt.encodings.size(), 0.0)};

    if (!opt.disorder || opt.disorder->sigma_rel == 0.0) {
      const auto e = extract_register_elements(propagator_at(build_full_coupling_matrix(spec), t));
      for (std::size_t k = 0; k < opt.encodings.size(); ++k) p.fidelity[k] = fidelity(e, opt.encodings[k]);
      return p;
    }

    const auto& dis = *opt.disorder;
    std::vector<CompensatedSum> acc(opt.encodings.size());
    for (int s = 0; s < dis.samples; ++s) {
      std::mt19937_64 rng(detail::mix_seed(dis.seed, idx, static_cast<std::uint64_t>(s)));
      const auto bonds = detail::perturb_register_bonds(full_bonds(spec), opt.n, dis.sigma_rel, rng);
      const auto omega = coupling_matrix_from_bonds(bonds, opt.n, MatrixKind::full);
      const auto e = extract_register_elements(propagator_at(omega, t));
      for (std::size_t k = 0; k < opt.encodings.size(); ++k) acc[k].add(fidelity(e, opt.encodings[k]));
    }
    for (std::size_t k = 0; k < opt.encodings.size(); ++k) p.fidelity[k] = acc[k].value() / dis.samples;
    return p;
  };

  const auto results = parallel_map(points, evaluate, opt.threads);

  SweepResult out;
  out.rows.reserve(points * opt.encodings.size());
  for (std::size_t idx = 0; idx < points; ++idx)
    for (std::size_t k = 0; k < opt.encodings.size(); ++k)
      out.rows.push_back({opt.channel_lengths[idx / per_n], opt.n, ratios[idx % per_n], results[idx].time,
                          opt.encodings[k], results[idx].fidelity[k]});
  return out;
}

}  // namespace qst
