#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qst/propagator.hpp"

namespace qst {
namespace {

constexpr complex I{0.0, 1.0};

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

CouplingMatrix two_site(double g) {
  const std::vector<double> bonds{g};
  return {MatrixKind::full, tridiagonal_from_bonds(bonds), {"a", "b"}};
}

TEST(Eigendecompose, TwoSiteAnalytic) {
  const auto d = eigendecompose(two_site(0.3));
  EXPECT_NEAR(d.eigenvalues[0], -0.3, 1e-15);
  EXPECT_NEAR(d.eigenvalues[1], 0.3, 1e-15);
}

TEST(Eigendecompose, EffectiveTwoQubitSpectrum) {
  const auto s = derive_parameters(2, 3, 1.0, 0.1);
  const auto d = eigendecompose(build_effective_coupling_matrix(s));
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(d.eigenvalues[k], s.g0 * (k - 2), 1e-14);
}

TEST(Eigendecompose, DecoupledRegistersGiveUnionOfSpectra) {
  const auto s = derive_parameters(3, 7, 1.0, 0.1);
  auto bonds = full_bonds(s);
  bonds[2] = 0.0;  // L3 - c1
  bonds[bonds.size() - 3] = 0.0;  // c7 - R3
  const auto d = eigendecompose(coupling_matrix_from_bonds(bonds, 3, MatrixKind::full));

  std::vector<double> expected = channel_spectrum(s);
  const std::vector<double> reg_bonds{s.coupling(1), s.coupling(2)};
  const auto reg = tridiagonal_eigensystem({0.0, 0.0, 0.0}, reg_bonds);
  for (int k = 0; k < 3; ++k) {
    expected.push_back(reg.values[k]);
    expected.push_back(reg.values[k]);
  }
  std::sort(expected.begin(), expected.end());
  ASSERT_EQ(static_cast<std::size_t>(d.eigenvalues.size()), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(d.eigenvalues[k], expected[k], 1e-13);
}

TEST(Eigendecompose, SatisfiesReconstructionAndOrthonormality) {
  for (int N : {1, 11, 101, 201}) {
    const auto s = derive_parameters(2, N, 1.0, 0.2);
    const auto omega = build_full_coupling_matrix(s);
    const auto d = eigendecompose(omega);
    const auto& v = d.eigenvectors;
    EXPECT_LE((v * d.eigenvalues.asDiagonal() * v.transpose() - omega.entries).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((v.transpose() * v - Eigen::MatrixXd::Identity(v.rows(), v.cols())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Eigendecompose, RejectsMalformedMatrices) {
  auto m = two_site(1.0);
  m.entries(0, 1) = 2.0;
  EXPECT_THROW(eigendecompose(m), InvalidArgument);

  CouplingMatrix dense{MatrixKind::full, Eigen::MatrixXd::Ones(3, 3), {"a", "b", "c"}};
  EXPECT_THROW(eigendecompose(dense), InvalidArgument);

  auto inf = two_site(1.0);
  inf.entries(0, 1) = inf.entries(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(eigendecompose(inf), InvalidArgument);
}

TEST(PropagatorAt, IdentityAtTimeZero) {
  const auto p = propagator_at(build_full_coupling_matrix(derive_parameters(2, 21, 1.0, 0.1)), 0.0);
  EXPECT_LE(max_abs(p.entries - Eigen::MatrixXcd::Identity(p.order(), p.order())), 1e-14);
}

TEST(PropagatorAt, TwoSiteRabiFormula) {
  const double g = 0.8;
  const auto d = eigendecompose(two_site(g));
  for (double t : {0.1, 0.5, 1.7, 10.0}) {
    const auto p = propagator_at(d, t);
    EXPECT_LE(std::abs(p(0, 1) - (-I * std::sin(g * t))), 1e-14);
    EXPECT_LE(std::abs(p(0, 0) - std::cos(g * t)), 1e-14);
  }
}

TEST(PropagatorAt, DoubleMirrorIsIdentity) {
  for (int n = 1; n <= 4; ++n) {
    const auto s = derive_parameters(n, 3, 1.0, 0.1);
    const auto p = propagator_at(build_effective_coupling_matrix(s), s.tau);
    const auto order = p.order();
    EXPECT_LE(max_abs(p.entries * p.entries - Eigen::MatrixXcd::Identity(order, order)), 1e-10);
  }
}

TEST(PropagatorAt, RejectsNonFiniteTime) {
  const auto d = eigendecompose(two_site(1.0));
  EXPECT_THROW(propagator_at(d, std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
}

TEST(PropagatorAt, UnitarySymmetricComposableOverRandomSpecs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const int n = 1 + k % 4;
    const int N = 1 + 2 * (k * 7 % 40);
    const auto s = derive_parameters(n, N, 1.0, 0.005 + unit(rng));
    const auto d = eigendecompose(build_full_coupling_matrix(s));
    const double t1 = unit(rng) * s.tau, t2 = unit(rng) * s.tau;
    const auto p1 = propagator_at(d, t1);
    const auto p2 = propagator_at(d, t2);
    const auto p12 = propagator_at(d, t1 + t2);
    const auto id = Eigen::MatrixXcd::Identity(p1.order(), p1.order());
    EXPECT_LE(max_abs(p1.entries.adjoint() * p1.entries - id), 1e-10);
    EXPECT_LE(max_abs(p1.entries - p1.entries.transpose()), 1e-12);
    EXPECT_LE(max_abs(p1.entries * p2.entries - p12.entries), 1e-10);
  }
}

TEST(PropagatorAt, MatchesTaylorSeriesReference) {
  for (int N : {3, 9, 31}) {
    const auto s = derive_parameters(2, N, 1.0, 0.25);
    const auto omega = build_full_coupling_matrix(s);
    for (double t : {0.3, 7.0, s.tau}) {
      const auto p = propagator_at(omega, t);
      EXPECT_LE(max_abs(p.entries - testing::taylor_exponential(omega.entries, t)), 1e-9) << "N=" << N << " t=" << t;
    }
  }
}

TEST(ClosedForm, SpecialTimes) {
  const double g0 = 0.37;
  const auto at_tau = closed_form_effective_elements(g0, std::numbers::pi / g0);
  EXPECT_NEAR(std::abs(at_tau.r1l1 - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at_tau.r2l2 - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at_tau.r1l2), 0.0, 1e-15);

  const auto at_zero = closed_form_effective_elements(g0, 0.0);
  EXPECT_EQ(at_zero.r1l1, 0.0);
  EXPECT_EQ(at_zero.r2l2, 0.0);
  EXPECT_EQ(at_zero.r1l2, 0.0);

  const auto quarter = closed_form_effective_elements(g0, std::numbers::pi / (2.0 * g0));
  EXPECT_LE(std::abs(quarter.r1l1 - 0.25), 1e-15);
  EXPECT_LE(std::abs(quarter.r2l2 + 0.5), 1e-15);
  EXPECT_LE(std::abs(quarter.r1l2 - 0.5 * I), 1e-15);
}

TEST(ClosedForm, MatchesEffectivePropagatorOnDenseGrid) {
  const auto s = derive_parameters(2, 101, 1.0, 0.02);
  const auto d = eigendecompose(build_effective_coupling_matrix(s));
  double err = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = 2.0 * s.tau * k / 999.0;
    const auto p = propagator_at(d, t);
    const auto c = closed_form_effective_elements(s.g0, t);
    err = std::max({err, std::abs(p(4, 0) - c.r1l1), std::abs(p(3, 1) - c.r2l2), std::abs(p(4, 1) - c.r1l2),
                    std::abs(p(3, 0) - c.r1l2)});
  }
  EXPECT_LE(err, 1e-10);
}

TEST(MirrorInversion, SignAlternatesWithRegisterSize) {
  for (int n = 1; n <= 6; ++n) {
    const auto s = derive_parameters(n, 3, 1.0, 0.1);
    const auto r = mirror_inversion_report(s, 1e-10);
    EXPECT_TRUE(r.pass) << "n = " << n << " error " << r.max_error;
    const auto p = propagator_at(build_effective_coupling_matrix(s), s.tau);
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    EXPECT_LE(std::abs(p(n, n) - sign), 1e-10);            // zero mode maps to itself
    EXPECT_LE(std::abs(p(2 * n, 0) - sign), 1e-10);         // L1 -> R1
  }
}

TEST(MirrorInversion, FailsAwayFromTau) {
  auto s = derive_parameters(2, 3, 1.0, 0.1);
  s.tau *= 0.9;
  EXPECT_FALSE(mirror_inversion_report(s, 1e-6).pass);
}

TEST(EffectiveModel, FullModelApproachesEffectiveAsCouplingWeakens) {
  for (int N : {3, 101}) {
    std::vector<double> deviation;
    for (double ratio : {0.3, 0.1, 0.03, 0.01}) {
      const auto s = derive_parameters(2, N, 1.0, ratio);
      deviation.push_back(effective_model_deviation(s, s.tau));
    }
    for (std::size_t k = 1; k < deviation.size(); ++k)
      EXPECT_LE(deviation[k], 2.0 * deviation[k - 1]) << "N = " << N << " step " << k;
    EXPECT_LT(deviation.back(), deviation.front());
    EXPECT_LT(deviation.back(), 0.05);
  }
}

}  // namespace
}  // namespace qst
