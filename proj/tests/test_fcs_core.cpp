#include <gtest/gtest.h>

#include <random>

#include "edgerep/fcs_core.hpp"
#include "edgerep/io.hpp"
#include "support/oracles.hpp"

using namespace edgerep;

namespace {

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<double> sorted_real(const Vec& v) {
  std::vector<double> out;
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i).real());
  std::sort(out.begin(), out.end());
  return out;
}

FCSTriple product_triple() {
  // spin-1 physical, trivial auxiliary; the m=0 state of spin 1 is not invariant,
  // so use the spin-0 component of spin 0 (+) spin 1
  Su2Triple phys = direct_sum(spin_matrices(TwiceSpin(0)).ops, spin_matrices(TwiceSpin(2)).ops);
  Mat v = Mat::Zero(4, 1);
  v(0, 0) = 1.0;
  return build_custom_triple(v, phys, spin_matrices(TwiceSpin(0)).ops);
}

}  // namespace

TEST(AkltTriple, IsometryAndSpectrum) {
  const FCSTriple t = build_aklt_triple();
  EXPECT_EQ(t.d, 3);
  EXPECT_EQ(t.k, 2);
  EXPECT_LT(linalg::unitarity_defect(t.V), 1e-14);
  EXPECT_NEAR(t.lambda_e, 1.0 / 3.0, 1e-10);
  EXPECT_LT(max_abs(t.rho - 0.5 * Mat::Identity(2, 2)), 1e-12);

  const Mat brute = oracle::brute_transfer(t.V, Mat::Identity(3, 3), 2);
  EXPECT_LT(max_abs(transfer_map(t, Mat::Identity(3, 3)) - brute), 1e-14);
  Eigen::ComplexEigenSolver<Mat> es(brute);
  const auto ev = sorted_real(es.eigenvalues());
  EXPECT_NEAR(ev[0], -1.0 / 3.0, 1e-10);
  EXPECT_NEAR(ev[2], -1.0 / 3.0, 1e-10);
  EXPECT_NEAR(ev[3], 1.0, 1e-10);
}

TEST(TransferMap, UnitalAndIntertwining) {
  const FCSTriple t = build_aklt_triple();
  const Mat id2 = Mat::Identity(2, 2);
  EXPECT_LT(max_abs(apply_map(transfer_map(t, Mat::Identity(3, 3)), id2) - id2), 1e-14);
  for (double g : {0.4, -1.3, 2.9}) {
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
      const Mat ug = t.aux_rotation(a, g);
      EXPECT_LT(max_abs(apply_map(transfer_map(t, t.phys_rotation(a, g)), ug) - ug), 1e-12);
    }
  }
}

TEST(TransferMap, SzHasZeroExpectation) {
  const FCSTriple t = build_aklt_triple();
  const Mat esz = transfer_map(t, t.phys_gen.z);
  EXPECT_LT(max_abs(esz - oracle::brute_transfer(t.V, t.phys_gen.z, 2)), 1e-14);
  EXPECT_LT(std::abs((t.rho * apply_map(esz, Mat::Identity(2, 2))).trace()), 1e-14);
}

TEST(TransferMap, DimensionMismatch) {
  const FCSTriple t = build_aklt_triple();
  EXPECT_THROW(transfer_map(t, Mat::Identity(2, 2)), InvalidArgument);
  EXPECT_THROW(transfer_map(t, Mat::Identity(3, 2)), InvalidArgument);
}

TEST(TransferMap, CompositionMatchesTwoSiteMap) {
  const FCSTriple t = build_aklt_triple();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 5; ++i) {
    const Mat a = linalg::random_matrix(3, 3, rng), b = linalg::random_matrix(3, 3, rng);
    EXPECT_LT(max_abs(transfer_map(t, a) * transfer_map(t, b) - transfer_map(t, linalg::kron(a, b))), 1e-12);
  }
}

TEST(TransferMap, CompletelyPositive) {
  const FCSTriple t = oracle::mixed_symmetric_triple({0, 2}, TwiceSpin(1), {0.6, 0.8});
  std::mt19937_64 rng(5);
  const Mat a = linalg::random_psd(t.d, rng);
  const Mat ea = transfer_map(t, a);
  for (int i = 0; i < 50; ++i) {
    const Mat img = apply_map(ea, linalg::random_psd(t.k, rng));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (img + img.adjoint()), Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues()(0), -1e-10);
  }
}

TEST(FixedPoint, ProductState) {
  const FCSTriple t = product_triple();
  EXPECT_EQ(t.k, 1);
  EXPECT_NEAR(t.rho(0, 0).real(), 1.0, 1e-15);
  EXPECT_EQ(t.lambda_e, 0.0);
}

TEST(FixedPoint, RandomSymmetricTripleResidual) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> w(0.2, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    const FCSTriple t = oracle::mixed_symmetric_triple({0, 2, 4}, TwiceSpin(2), {w(rng), w(rng), w(rng)});
    const Mat e1 = transfer_map(t, Mat::Identity(t.d, t.d));
    const Eigen::RowVectorXcd f = trace_functional(t.rho);
    EXPECT_LT((f * e1 - f).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(t.rho.trace().real(), 1.0, 1e-12);
    EXPECT_LT(t.lambda_e, 1.0);
  }
}

TEST(FixedPoint, RejectsDegeneratePeripheralSpectrum) {
  // two decoupled blocks: identity channel on C^2 has a twofold eigenvalue 1 on diagonals
  Mat e1 = Mat::Identity(4, 4);
  EXPECT_THROW(fixed_point_state(e1), NonUniqueFixedPoint);
}

TEST(CustomTriple, AkltAgreesWithBuilder) {
  const FCSTriple a = build_aklt_triple();
  const FCSTriple b = build_custom_triple(cg_isometry(TwiceSpin(2), TwiceSpin(1)), spin_matrices(1.0).ops,
                                          spin_matrices(0.5).ops);
  EXPECT_LT(max_abs(a.V - b.V), 1e-15);
  EXPECT_LT(max_abs(a.rho - b.rho), 1e-15);
  EXPECT_DOUBLE_EQ(a.lambda_e, b.lambda_e);
}

TEST(CustomTriple, SpinTwoOverSpinOne) {
  const FCSTriple t = build_custom_triple(cg_isometry(TwiceSpin(4), TwiceSpin(2)), spin_matrices(2.0).ops,
                                          spin_matrices(1.0).ops);
  Eigen::ComplexEigenSolver<Mat> es(oracle::brute_transfer(t.V, Mat::Identity(5, 5), 3));
  const auto ev = sorted_real(es.eigenvalues());
  double second = 0.0;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) second = std::max(second, std::abs(ev[i]));
  EXPECT_NEAR(t.lambda_e, second, 1e-10);
  EXPECT_NEAR(t.lambda_e, 0.5, 1e-10);  // brute-force value
  EXPECT_LT(max_abs(t.rho - Mat::Identity(3, 3) / 3.0), 1e-12);
}

TEST(CustomTriple, ErrorPaths) {
  const auto p = spin_matrices(1.0).ops, a = spin_matrices(0.5).ops;
  Mat v = cg_isometry(TwiceSpin(2), TwiceSpin(1));
  EXPECT_THROW(build_custom_triple(2.0 * v, p, a), InvalidArgument);
  Mat bad = Mat::Zero(6, 2);
  bad(0, 0) = 1.0;
  bad(1, 1) = 1.0;
  EXPECT_THROW(build_custom_triple(bad, p, a), InvalidArgument);
  EXPECT_THROW(build_custom_triple(Mat::Zero(5, 2), p, a), InvalidArgument);
}

TEST(Expectation, TrivialCases) {
  const FCSTriple t = build_aklt_triple();
  const Mat id = Mat::Identity(3, 3);
  EXPECT_NEAR(std::abs(expectation(t, {id, id, id}) - 1.0), 0.0, 1e-14);
  EXPECT_LT(std::abs(expectation(t, {t.phys_gen.z})), 1e-14);
  EXPECT_THROW(expectation(t, {Mat::Identity(2, 2)}), InvalidArgument);
}

TEST(Expectation, AkltSzSzAlternatesAndDecays) {
  const FCSTriple t = build_aklt_triple();
  const Mat& sz = t.phys_gen.z;
  const Mat id = Mat::Identity(3, 3);
  std::vector<Mat> ops{sz};
  for (int r = 1; r <= 8; ++r) {
    std::vector<Mat> chain = ops;
    chain.push_back(sz);
    const cplx v = expectation(t, std::span<const Mat>(chain));
    EXPECT_NEAR(v.real(), (4.0 / 3.0) * std::pow(-1.0 / 3.0, r), 1e-13);  // closed form, ED check in acceptance
    EXPECT_NEAR(v.real(), two_point(t, sz, sz, r).real(), 1e-13);
    ops.push_back(id);
  }
}

TEST(Expectation, ClusteringRate) {
  const FCSTriple t = oracle::mixed_symmetric_triple({0, 2}, TwiceSpin(1), {0.2, 1.0});
  std::mt19937_64 rng(8);
  const Mat a = linalg::random_hermitian(t.d, rng), b = linalg::random_hermitian(t.d, rng);
  const cplx ea = expectation(t, {a}), eb = expectation(t, {b});
  std::vector<double> lx, ly;
  for (int r = 2; r <= 12; ++r) {
    lx.push_back(r);
    ly.push_back(std::log(std::abs(two_point(t, a, b, r) - ea * eb)));
  }
  const auto fit = linalg::fit_line(lx, ly);
  EXPECT_NEAR(fit.slope / std::log(t.lambda_e), 1.0, 0.02);
}

TEST(Expectation, GaugeInvariance) {
  const FCSTriple t = build_aklt_triple();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const Mat a = oracle::random_local(3, 2, rng);
    const Mat u = linalg::kron(t.phys_rotation(Axis::y, 0.7 * i), t.phys_rotation(Axis::y, 0.7 * i));
    const Mat id = Mat::Identity(2, 2);
    const cplx w1 = (t.rho * apply_map(transfer_map(t, a), id)).trace();
    const cplx w2 = (t.rho * apply_map(transfer_map(t, u * a * u.adjoint()), id)).trace();
    EXPECT_LT(std::abs(w1 - w2), 1e-10);
  }
}

TEST(StringOrder, AkltLimit) {
  const FCSTriple t = build_aklt_triple();
  EXPECT_NEAR(string_order(t, 0, 40), -4.0 / 9.0, 1e-8);
  EXPECT_NEAR(string_order(t, 3, 43), -4.0 / 9.0, 1e-8);
  EXPECT_NEAR(string_correlator(t, 0, 40), -4.0 / 9.0, 1e-8);
}

TEST(StringOrder, NearestNeighbourReducesToTwoPoint) {
  const FCSTriple t = build_aklt_triple();
  EXPECT_NEAR(string_order(t, 0, 1), -expectation(t, {t.phys_gen.z, t.phys_gen.z}).real(), 1e-14);
}

TEST(StringOrder, ProductStateVanishes) {
  const FCSTriple t = product_triple();
  for (int r = 2; r < 6; ++r) EXPECT_LT(std::abs(string_order(t, 0, r)), 1e-15);
}

TEST(StringOrder, RequiresOrderedSites) {
  const FCSTriple t = build_aklt_triple();
  EXPECT_THROW(string_order(t, 3, 3), InvalidArgument);
  EXPECT_THROW(string_order(t, 4, 2), InvalidArgument);
}

TEST(Serialization, RoundTripIsBitExact) {
  const FCSTriple t = oracle::mixed_symmetric_triple({0, 2, 4}, TwiceSpin(2), {0.31, 0.77, 0.55});
  const std::string text = io::fcs_to_json(t).dump();
  const FCSTriple back = io::fcs_from_json(nlohmann::json::parse(text));
  EXPECT_TRUE((back.V.array() == t.V.array()).all());
  EXPECT_TRUE((back.rho.array() == t.rho.array()).all());
  EXPECT_TRUE((back.phys_gen.y.array() == t.phys_gen.y.array()).all());
  EXPECT_EQ(back.lambda_e, t.lambda_e);
  const FCSTriple rebuilt = io::fcs_from_json(nlohmann::json::parse(text), true);
  EXPECT_NEAR(rebuilt.lambda_e, t.lambda_e, 1e-12);
}
