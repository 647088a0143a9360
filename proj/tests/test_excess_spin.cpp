#include <gtest/gtest.h>

#include <random>

#include "edgerep/excess_spin.hpp"
#include "support/oracles.hpp"

using namespace edgerep;

namespace {

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

FCSTriple product_triple() {
  Su2Triple phys = direct_sum(spin_matrices(TwiceSpin(0)).ops, spin_matrices(TwiceSpin(2)).ops);
  Mat v = Mat::Zero(4, 1);
  v(0, 0) = 1.0;
  return build_custom_triple(v, phys, spin_matrices(TwiceSpin(0)).ops);
}

FCSTriple spin_two_triple() {
  return build_custom_triple(cg_isometry(TwiceSpin(4), TwiceSpin(2)), spin_matrices(2.0).ops, spin_matrices(1.0).ops);
}

std::vector<double> grid21() {
  std::vector<double> g;
  for (int i = -10; i <= 10; ++i) g.push_back(i * kPi / 20.0);
  return g;
}

const WindowOp kOne{Mat::Identity(1, 1), 1};

}  // namespace

TEST(Ramp, Values) {
  EXPECT_EQ(ramp(4, 0), 1.0);
  EXPECT_EQ(ramp(4, 16), 0.0);
  EXPECT_EQ(ramp(4, 4), 0.75);
  EXPECT_EQ(ramp(4, 7), 0.75);
  EXPECT_EQ(ramp(4, 15), 0.25);
  EXPECT_THROW(ramp(0, 1), InvalidArgument);
  EXPECT_THROW(ramp(3, -1), InvalidArgument);
}

TEST(Ramp, ProfileInvariants) {
  for (int L : {1, 3, 7, 12}) {
    const RampProfile r = make_ramp(L);
    ASSERT_EQ(r.values.size(), static_cast<std::size_t>(L * L + 1));
    EXPECT_EQ(r.values.front(), 1.0);
    EXPECT_EQ(r.values.back(), 0.0);
    for (std::size_t x = 1; x < r.values.size(); ++x) {
      EXPECT_LE(r.values[x], r.values[x - 1]);
      if (x % L != 0) EXPECT_EQ(r.values[x], r.values[x - 1]);
    }
  }
}

TEST(CompositeTransfer, ZeroAngleIsUnital) {
  const FCSTriple t = build_aklt_triple();
  const Mat id = Mat::Identity(2, 2);
  for (int L : {1, 3, 6}) EXPECT_LT(max_abs(apply_map(composite_transfer(t, Axis::x, 0.0, L), id) - id), 1e-13);
}

TEST(CompositeTransfer, SingleFactor) {
  const FCSTriple t = build_aklt_triple();
  EXPECT_LT(max_abs(composite_transfer(t, Axis::y, 0.8, 1) - rotation_transfer(t, Axis::y, 0.8)), 1e-15);
}

TEST(CompositeTransfer, BelowFittedEnvelope) {
  const FCSTriple t = build_aklt_triple();
  const double g = kPi / 2;
  const ConvergenceScan scan = convergence_scan(t, Axis::z, g, {4, 16, 32, 64});
  const double d8 = linalg::spectral_norm(composite_transfer(t, Axis::z, g, 8) - q_map(t, Axis::z, g));
  EXPECT_LE(d8, scan.c1_hat / 8.0);
}

TEST(RankOneMaps, Identities) {
  const FCSTriple t = build_aklt_triple();
  const Mat id = Mat::Identity(2, 2);
  for (double g : {0.3, -1.2}) {
    const Mat ug = t.aux_rotation(Axis::x, g);
    EXPECT_LT(max_abs(apply_map(q_map(t, Axis::x, g), id) - ug), 1e-14);
    const Mat p = p_map(t, Axis::x, g);
    EXPECT_LT(max_abs(apply_map(p, ug) - ug), 1e-14);
    EXPECT_LT(max_abs(p * p - p), 1e-14);
    // P_g is the peripheral projection: E_{U_g}^n -> P_g
    const Mat en = linalg::matrix_power(rotation_transfer(t, Axis::x, g), 60);
    EXPECT_LT(max_abs(en - p), 1e-12);
  }
  EXPECT_LT(max_abs(p_map(t, Axis::z, 0.0) - q_map(t, Axis::z, 0.0)), 1e-15);
}

TEST(ConvergenceScan, AkltSlope) {
  const FCSTriple t = build_aklt_triple();
  const ConvergenceScan s = convergence_scan(t, Axis::z, 1.0, {4, 8, 16, 32});
  ASSERT_TRUE(s.fitted);
  EXPECT_NEAR(s.fit.slope, -1.0, 0.15);
  EXPECT_TRUE(s.slope_ok);
  EXPECT_TRUE(s.residual_ok);
  for (std::size_t i = 0; i < s.L.size(); ++i) EXPECT_LE(s.distance[i], s.c1_hat / s.L[i] * (1 + 1e-12));
}

TEST(ConvergenceScan, ProductStateIsExact) {
  const FCSTriple t = product_triple();
  const ConvergenceScan s = convergence_scan(t, Axis::y, 0.9, {1, 2, 3, 4, 5});
  for (double d : s.distance) EXPECT_LT(d, 1e-15);
  EXPECT_FALSE(s.fitted);
}

TEST(ConvergenceScan, ZeroAngleDecaysFast) {
  const FCSTriple t = build_aklt_triple();
  const ConvergenceScan s = convergence_scan(t, Axis::z, 0.0, {1, 2, 3, 4});
  EXPECT_FALSE(s.fitted);
  for (std::size_t i = 0; i < s.L.size(); ++i) {
    const double lam = std::pow(t.lambda_e, s.L[i] * s.L[i]);
    EXPECT_LE(s.distance[i], 3.0 * lam + 1e-15);  // spectral gap of E_1
  }
}

TEST(ConvergenceScan, RejectsBadGrid) {
  const FCSTriple t = build_aklt_triple();
  EXPECT_THROW(convergence_scan(t, Axis::z, 1.0, {4, 8, 16}), InvalidArgument);
  EXPECT_THROW(convergence_scan(t, Axis::z, 1.0, {4, 8, 8, 16}), InvalidArgument);
}

TEST(ConvergenceScan, ThreadedMatchesSerial) {
  const FCSTriple t = build_aklt_triple();
  ScanOptions o;
  o.threads = 3;
  const auto a = convergence_scan(t, Axis::x, 0.7, {4, 8, 16, 32});
  const auto b = convergence_scan(t, Axis::x, 0.7, {4, 8, 16, 32}, o);
  EXPECT_EQ(a.distance, b.distance);
}

TEST(EdgeElement, IdentityAtZeroAngle) {
  const FCSTriple t = build_aklt_triple();
  for (int L : {2, 5, 9}) {
    const EdgeElement e = edge_matrix_element(t, Axis::z, kOne, kOne, 0.0, L);
    EXPECT_NEAR(std::abs(e.finite - 1.0), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(e.limit - 1.0), 0.0, 1e-13);
  }
}

TEST(EdgeElement, IdentityLimitIsHalfAngleCosine) {
  const FCSTriple t = build_aklt_triple();
  const double g = 1.1;
  const ConvergenceScan s = convergence_scan(t, Axis::z, g, {4, 8, 16, 32});
  for (int L : {8, 16, 32, 64}) {
    const EdgeElement e = edge_matrix_element(t, Axis::z, kOne, kOne, g, L, s.c1_hat);
    EXPECT_NEAR(e.limit.real(), std::cos(g / 2), 1e-14);
    EXPECT_LE(std::abs(e.finite - e.limit), e.bound);
  }
}

TEST(EdgeElement, SzCauchyAtRateOneOverL) {
  const FCSTriple t = build_aklt_triple();
  const double g = 0.9;
  const ConvergenceScan s = convergence_scan(t, Axis::z, g, {4, 8, 16, 32});
  const WindowOp sz{t.phys_gen.z, 0};
  std::vector<int> Ls{4, 8, 16, 32, 64};
  std::vector<cplx> vals;
  for (int L : Ls) vals.push_back(edge_matrix_element(t, Axis::z, sz, sz, g, L).finite);
  const double norm = linalg::spectral_norm(t.phys_gen.z);
  const int l = 1;  // site 0 lies in [-l^2+1, l^2]
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    for (std::size_t j = i + 1; j < Ls.size(); ++j) {
      EXPECT_LE(std::abs(vals[i] - vals[j]), 2 * s.c1_hat * norm * norm / std::min(Ls[i] - l, Ls[j] - l));
    }
  }
  // successive differences halve with L
  for (std::size_t i = 0; i + 2 < Ls.size(); ++i) {
    const double r = std::abs(vals[i + 1] - vals[i + 2]) / std::abs(vals[i] - vals[i + 1]);
    EXPECT_NEAR(r, 0.5, 0.1);
  }
}

TEST(EdgeElement, WindowStraddlingTheCut) {
  const FCSTriple t = build_aklt_triple();
  std::mt19937_64 rng(17);
  const WindowOp a{oracle::random_local(3, 3, rng), -1}, b{oracle::random_local(3, 3, rng), -1};
  const double g = 0.6;
  const ConvergenceScan s = convergence_scan(t, Axis::x, g, {4, 8, 16, 32});
  for (int L : {8, 16, 32}) {
    const EdgeElement e = edge_matrix_element(t, Axis::x, a, b, g, L, s.c1_hat);
    EXPECT_EQ(e.l, 2);
    EXPECT_LE(std::abs(e.finite - e.limit), e.bound);
  }
}

TEST(EdgeElement, SupportBeyondRamp) {
  const FCSTriple t = build_aklt_triple();
  const WindowOp far{Mat::Identity(3, 3), 5};
  EXPECT_THROW(edge_matrix_element(t, Axis::z, far, far, 0.3, 2), InvalidArgument);
  const WindowOp left{Mat::Identity(3, 3), -4};
  EXPECT_THROW(edge_matrix_element(t, Axis::z, left, left, 0.3, 2), InvalidArgument);
}

TEST(EdgeRepresentation, Aklt) {
  const FCSTriple t = build_aklt_triple();
  const EdgeRepReport rep = edge_representation(t, grid21());
  EXPECT_EQ(rep.content, IrrepContent::single(TwiceSpin(1)));
  EXPECT_TRUE(rep.content_matches);
  EXPECT_LE(rep.group_law_defect, 1e-8);
  for (const auto& ax : rep.axes) EXPECT_LT(ax.max_deviation, 1e-10);
}

TEST(EdgeRepresentation, ProductStateIsTrivial) {
  const EdgeRepReport rep = edge_representation(product_triple(), grid21());
  EXPECT_EQ(rep.content, IrrepContent::single(TwiceSpin(0)));
  EXPECT_TRUE(rep.content_matches);
}

TEST(EdgeRepresentation, SpinTwoOverSpinOne) {
  const FCSTriple t = spin_two_triple();
  const EdgeRepReport rep = edge_representation(t, grid21());
  EXPECT_EQ(rep.content, IrrepContent::single(TwiceSpin(2)));
  EXPECT_EQ(rep.content, decompose_into_irreps(t.aux_gen));
  EXPECT_LE(rep.group_law_defect, 1e-8);
}

TEST(EdgeRepresentation, TooFewSitesIsRankDeficient) {
  EdgeRepOptions o;
  o.span_sites = 0;
  EXPECT_THROW(edge_representation(build_aklt_triple(), grid21(), o), NumericalError);
}

TEST(EdgeRepresentation, LimitValuesContinuousInG) {
  const FCSTriple t = build_aklt_triple();
  // Tr(rho u_g^*) - 1 is quadratic near 0
  for (double g : {1e-2, 5e-3, 2.5e-3}) {
    const double dev = std::abs((t.rho * t.aux_rotation(Axis::y, g).adjoint()).trace() - 1.0);
    EXPECT_NEAR(dev / (g * g), 0.125, 1e-4);  // Tr(rho S^2)/2 with S^2 = 1/4
  }
}

TEST(ThetaAction, BasicProperties) {
  const FCSTriple t = build_aklt_triple();
  std::mt19937_64 rng(2);
  const Mat sigma = linalg::random_density_matrix(2, rng);
  EXPECT_LT(max_abs(theta_action(t, sigma, Axis::z, 0.0) - sigma), 1e-15);
  const Mat s2 = theta_action(t, sigma, Axis::x, 1.3);
  EXPECT_NEAR(s2.trace().real(), 1.0, 1e-14);
  Eigen::SelfAdjointEigenSolver<Mat> e1(sigma), e2(s2);
  EXPECT_LT((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff(), 1e-14);
  const Mat half = 0.5 * Mat::Identity(2, 2);
  for (double g : {0.1, 1.0, 3.0}) EXPECT_LT(max_abs(theta_action(t, half, Axis::y, g) - half), 1e-15);
}

TEST(ThetaAction, ConsistencyWithTransfer) {
  const FCSTriple t = build_aklt_triple();
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    const Mat sigma = linalg::random_density_matrix(2, rng);
    const Mat a = oracle::random_local(3, 1 + i % 3, rng);
    EXPECT_LT(theta_consistency_defect(t, sigma, a, static_cast<Axis>(i % 3), 0.37 * i), 1e-10);
  }
}

TEST(ThetaAction, RejectsInvalidDensity) {
  const FCSTriple t = build_aklt_triple();
  Mat bad = Mat::Identity(2, 2);
  EXPECT_THROW(theta_action(t, bad, Axis::z, 0.1), InvalidArgument);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(theta_action(t, bad, Axis::z, 0.1), InvalidArgument);
  EXPECT_THROW(theta_action(t, Mat::Identity(3, 3) / 3.0, Axis::z, 0.1), InvalidArgument);
}
