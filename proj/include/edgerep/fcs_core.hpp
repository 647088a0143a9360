#pragma once

// Finitely correlated (matrix product) states built from an isometric
// intertwiner V : C^k -> C^d (x) C^k.
//
// Index conventions
//   * row (i, a) of V is i * k + a, physical index first.
//   * V_i := V.middleRows(i * k, k), so E_A(b) = V^*(A (x) b)V = sum_ij A_ij V_i^* b V_j.
//   * transfer operators act on column-stacked k x k matrices (see linalg.hpp).
//   * an n-site operator acts on (C^d)^{(x)n} with the leftmost site most significant.

#include <array>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "edgerep/common.hpp"
#include "edgerep/group_rep.hpp"
#include "edgerep/linalg.hpp"

namespace edgerep {

struct FCSTriple {
  Index d = 0;
  Index k = 0;
  Mat V;
  Su2Triple phys_gen;
  Su2Triple aux_gen;
  Mat rho;
  double lambda_e = 0.0;

  Mat site_block(Index i) const { return V.middleRows(i * k, k); }

  Mat phys_rotation(Axis a, double g) const { return exp_generator(component(phys_gen, a), g); }
  Mat aux_rotation(Axis a, double g) const { return exp_generator(component(aux_gen, a), g); }
};

struct TripleChecks {
  double isometry_tol = 1e-10;
  double intertwine_tol = 1e-8;
  int intertwine_samples = 20;
  double peripheral_tol = 1e-9;  // separation of the eigenvalue 1 from the rest of the spectrum
  double positivity_tol = 1e-10;
  std::uint64_t seed = 0x5eed'fc5ULL;
};

/// Isometry C^k -> (C^d)^{(x)n} (x) C^k; block (i_1..i_n) equals V_{i_n} ... V_{i_1}.
inline Mat multi_site_isometry(const FCSTriple& t, int n) {
  if (n < 0) throw InvalidArgument("multi_site_isometry: negative length");
  Mat w = Mat::Identity(t.k, t.k);
  Index blocks = 1;
  for (int s = 0; s < n; ++s) {
    Mat next(blocks * t.d * t.k, t.k);
    for (Index b = 0; b < blocks; ++b) {
      const Mat wb = w.middleRows(b * t.k, t.k);
      for (Index i = 0; i < t.d; ++i) next.middleRows((b * t.d + i) * t.k, t.k) = t.site_block(i) * wb;
    }
    w = std::move(next);
    blocks *= t.d;
  }
  return w;
}

namespace detail {
inline int site_count(Index dim, Index d) {
  int n = 0;
  Index p = 1;
  while (p < dim) {
    p *= d;
    ++n;
  }
  if (p != dim) throw InvalidArgument("operator dimension " + std::to_string(dim) + " is not a power of d");
  return n;
}
}  // namespace detail

/// Matrix of b -> V^(n)*(X (x) b)V^(n) for an operator X on n consecutive sites.
inline Mat transfer_map(const FCSTriple& t, const Mat& x) {
  if (x.rows() != x.cols()) throw InvalidArgument("transfer_map: observable is not square");
  const Index k = t.k;
  if (x.rows() == 1) return x(0, 0) * Mat::Identity(k * k, k * k);
  const int n = detail::site_count(x.rows(), t.d);
  const Mat w = multi_site_isometry(t, n);
  const Index m = x.rows();
  Mat out = Mat::Zero(k * k, k * k);
  // E(b) = sum_IJ X_IJ W_I^* b W_J  ->  sum_IJ X_IJ (W_J^T (x) W_I^*)
  for (Index j = 0; j < m; ++j) {
    Mat wi_mix = Mat::Zero(k, k);  // sum_I X_IJ W_I^*
    bool any = false;
    for (Index i = 0; i < m; ++i) {
      if (x(i, j) == cplx(0.0)) continue;
      wi_mix += x(i, j) * w.middleRows(i * k, k).adjoint();
      any = true;
    }
    if (any) out += linalg::kron(Mat(w.middleRows(j * k, k).transpose()), wi_mix);
  }
  return out;
}

inline Mat apply_map(const Mat& op, const Mat& b) {
  if (op.cols() != b.size()) throw InvalidArgument("apply_map: dimension mismatch");
  return linalg::unvec(op * linalg::vec(b), b.rows());
}

/// Row functional b -> Tr(rho b) as a row vector acting on vec(b).
inline Eigen::RowVectorXcd trace_functional(const Mat& rho) {
  return linalg::vec(rho.transpose()).transpose();
}

struct FixedPoint {
  Mat rho;
  double lambda_e = 0.0;
  Vec spectrum;
};

/// Unique invariant density matrix of a unital transfer operator, with the
/// second-largest eigenvalue modulus.
inline FixedPoint fixed_point_state(const Mat& e1, const TripleChecks& checks = {}) {
  const Index kk = e1.rows();
  const Index k = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(kk))));
  if (e1.cols() != kk || k * k != kk || k == 0) throw InvalidArgument("fixed_point_state: not a k^2 x k^2 matrix");
  Eigen::ComplexEigenSolver<Mat> es(e1.transpose());
  if (es.info() != Eigen::Success) throw NumericalError("fixed_point_state: eigensolver failed");
  const Vec& ev = es.eigenvalues();
  Index top = 0;
  for (Index i = 1; i < kk; ++i)
    if (std::abs(ev(i) - 1.0) < std::abs(ev(top) - 1.0)) top = i;
  if (std::abs(ev(top) - 1.0) > checks.peripheral_tol) {
    throw NumericalError("fixed_point_state: map has no eigenvalue 1 (not unital)");
  }
  FixedPoint fp;
  fp.spectrum = ev;
  for (Index i = 0; i < kk; ++i) {
    if (i == top) continue;
    const double a = std::abs(ev(i));
    if (a > 1.0 - checks.peripheral_tol) {
      throw NonUniqueFixedPoint("fixed_point_state: peripheral eigenvalue " + std::to_string(ev(i).real()) + "+" +
                                std::to_string(ev(i).imag()) + "i besides 1");
    }
    fp.lambda_e = std::max(fp.lambda_e, a);
  }
  Mat rho = linalg::unvec(es.eigenvectors().col(top), k).transpose();
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-12) throw NumericalError("fixed_point_state: invariant functional has zero trace");
  rho /= tr;
  if (linalg::hermiticity_defect(rho) > 1e-8) throw NumericalError("fixed_point_state: fixed point not Hermitian");
  rho = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> pos(rho, Eigen::EigenvaluesOnly);
  if (pos.eigenvalues()(0) < -checks.positivity_tol) {
    throw NumericalError("fixed_point_state: fixed point has negative eigenvalue " +
                         std::to_string(pos.eigenvalues()(0)));
  }
  fp.rho = rho;
  return fp;
}

namespace detail {
inline std::array<double, 3> random_axis(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  std::array<double, 3> n{};
  double norm = 0.0;
  while (norm < 1e-6) {
    for (auto& c : n) c = n01(rng);
    norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  }
  for (auto& c : n) c /= norm;
  return n;
}
}  // namespace detail

/// Largest ||(U (x) u)V - V u|| over random rotations exp(i g n.S).
inline double intertwining_defect(const Mat& v, const Su2Triple& phys, const Su2Triple& aux, int samples,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto n = detail::random_axis(rng);
    const double g = angle(rng);
    const Mat big_u = exp_generator(phys.along(n), g);
    const Mat small_u = exp_generator(aux.along(n), g);
    worst = std::max(worst, (linalg::kron(big_u, small_u) * v - v * small_u).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Validates V against the symmetry and computes rho and lambda_e.
inline FCSTriple build_custom_triple(const Mat& v, const Su2Triple& phys_gen, const Su2Triple& aux_gen,
                                     const TripleChecks& checks = {}) {
  FCSTriple t;
  t.k = aux_gen.dim();
  t.d = phys_gen.dim();
  if (t.k < 1 || t.d < 1) throw InvalidArgument("build_custom_triple: empty generator");
  if (v.rows() != t.d * t.k || v.cols() != t.k) {
    throw InvalidArgument("build_custom_triple: V must be (d*k) x k");
  }
  if (const double e = linalg::unitarity_defect(v); e > checks.isometry_tol) {
    throw InvalidArgument("build_custom_triple: V is not an isometry (defect " + std::to_string(e) + ")");
  }
  if (const double e = intertwining_defect(v, phys_gen, aux_gen, checks.intertwine_samples, checks.seed);
      e > checks.intertwine_tol) {
    throw InvalidArgument("build_custom_triple: intertwining relation violated (defect " + std::to_string(e) + ")");
  }
  t.V = v;
  t.phys_gen = phys_gen;
  t.aux_gen = aux_gen;
  const Mat e1 = transfer_map(t, Mat::Identity(t.d, t.d));
  FixedPoint fp = fixed_point_state(e1, checks);
  t.rho = fp.rho;
  t.lambda_e = fp.lambda_e;

  // rho u_g^* is the left eigenvector of E_{U_g}; rho is orthogonal to the auxiliary generators.
  for (int a = 0; a < 3; ++a) {
    if (std::abs((t.rho * aux_gen[a]).trace()) > 1e-9) {
      throw NumericalError("build_custom_triple: Tr(rho s) does not vanish");
    }
    for (double g : {0.3, -0.7, 1.1}) {
      const Mat ug = exp_generator(aux_gen[a], g);
      const Mat eu = transfer_map(t, exp_generator(phys_gen[a], g));
      const Mat left = t.rho * ug.adjoint();
      const Eigen::RowVectorXcd f = trace_functional(left);
      if ((f * eu - f).cwiseAbs().maxCoeff() > 1e-9) {
        throw NumericalError("build_custom_triple: rho u_g^* is not a left eigenvector of E_{U_g}");
      }
    }
  }
  return t;
}

inline FCSTriple build_aklt_triple() {
  const TwiceSpin phys(2), aux(1);
  return build_custom_triple(cg_isometry(phys, aux), spin_matrices(phys).ops, spin_matrices(aux).ops);
}

/// Tr(rho E_{A_1} o ... o E_{A_n}(1)) for single-site observables on consecutive sites.
inline cplx expectation(const FCSTriple& t, std::span<const Mat> observables) {
  Mat b = Mat::Identity(t.k, t.k);
  for (auto it = observables.rbegin(); it != observables.rend(); ++it) {
    if (it->rows() != t.d || it->cols() != t.d) throw InvalidArgument("expectation: observable is not d x d");
    Mat next = Mat::Zero(t.k, t.k);
    for (Index i = 0; i < t.d; ++i)
      for (Index j = 0; j < t.d; ++j)
        if ((*it)(i, j) != cplx(0.0)) next += (*it)(i, j) * t.site_block(i).adjoint() * b * t.site_block(j);
    b = std::move(next);
  }
  return (t.rho * b).trace();
}

inline cplx expectation(const FCSTriple& t, std::initializer_list<Mat> observables) {
  const std::vector<Mat> v(observables);
  return expectation(t, std::span<const Mat>(v));
}

/// Two-point function <A_0 B_r> with identities in between.
inline cplx two_point(const FCSTriple& t, const Mat& a, const Mat& b, int r) {
  if (r < 1) throw InvalidArgument("two_point: separation must be positive");
  const Mat e1 = transfer_map(t, Mat::Identity(t.d, t.d));
  const Mat eb = apply_map(transfer_map(t, b), Mat::Identity(t.k, t.k));
  const Mat gap = linalg::matrix_power(e1, r - 1);
  return (t.rho * apply_map(transfer_map(t, a), apply_map(gap, eb))).trace();
}

/// <S^z_x exp(i pi sum_{x<j<y} S^z_j) S^z_y> without sign prefactor.
inline double string_correlator(const FCSTriple& t, int x, int y) {
  if (x >= y) throw InvalidArgument("string_order: need x < y");
  const Mat& sz = t.phys_gen.z;
  const Mat es = transfer_map(t, sz);
  const Mat estring = transfer_map(t, exp_generator(sz, kPi));
  const Mat chain = es * linalg::matrix_power(estring, y - x - 1) * es;
  const cplx v = trace_functional(t.rho) * chain * linalg::vec(Mat::Identity(t.k, t.k));
  return v.real();
}

/// (-1)^{y-x} <S^z_x exp(i pi sum_{x<j<y} S^z_j) S^z_y>.
inline double string_order(const FCSTriple& t, int x, int y) {
  const double sign = ((y - x) % 2 == 0) ? 1.0 : -1.0;
  return sign * string_correlator(t, x, y);
}

}  // namespace edgerep
