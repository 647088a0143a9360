#pragma once

// Small dense linear-algebra helpers shared by all modules.
//
// Vectorization convention: column stacking. vec(B)[i + k*j] = B(i, j), so that
// vec(X B Y) = (Y^T (x) X) vec(B).

#include <algorithm>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "edgerep/common.hpp"

namespace edgerep::linalg {

template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Tensor product of a list of operators, first factor most significant.
inline Mat kron_all(std::span<const Mat> factors) {
  Mat out = Mat::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline Vec vec(const Mat& b) { return Eigen::Map<const Vec>(b.data(), b.size()); }

inline Mat unvec(const Vec& v, Index k) {
  if (v.size() != k * k) throw InvalidArgument("unvec: length is not k^2");
  return Eigen::Map<const Mat>(v.data(), k, k);
}

inline double hermiticity_defect(const Mat& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Mat& a, double tol) {
  return a.rows() == a.cols() && (a.size() == 0 || hermiticity_defect(a) <= tol);
}

inline double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

inline double unitarity_defect(const Mat& u) {
  return (u.adjoint() * u - Mat::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

/// Commutator [a, b].
inline Mat comm(const Mat& a, const Mat& b) { return a * b - b * a; }

/// Principal logarithm of a unitary matrix via the complex Schur form (works for
/// degenerate spectra, where an eigenvector basis may be ill-conditioned).
inline Mat unitary_log(const Mat& u) {
  Eigen::ComplexSchur<Mat> schur(u);
  const Mat& t = schur.matrixT();
  Mat log_t = Mat::Zero(t.rows(), t.cols());
  for (Index i = 0; i < t.rows(); ++i) log_t(i, i) = std::log(t(i, i));
  return schur.matrixU() * log_t * schur.matrixU().adjoint();
}

/// Numerical rank from singular values relative to the largest one.
inline Index numerical_rank(const Mat& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  return static_cast<Index>((s.array() > rel_tol * s(0)).count());
}

inline Mat random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = cplx(n01(rng), n01(rng));
  return m;
}

inline Mat random_hermitian(Index dim, std::mt19937_64& rng) {
  Mat m = random_matrix(dim, dim, rng);
  return 0.5 * (m + m.adjoint());
}

inline Mat random_density_matrix(Index dim, std::mt19937_64& rng) {
  Mat m = random_matrix(dim, dim, rng);
  Mat rho = m * m.adjoint();
  return rho / rho.trace().real();
}

inline Mat random_psd(Index dim, std::mt19937_64& rng) {
  Mat m = random_matrix(dim, dim, rng);
  return m * m.adjoint();
}

/// Matrix power by repeated squaring.
inline Mat matrix_power(Mat base, long long n) {
  Mat out = Mat::Identity(base.rows(), base.cols());
  while (n > 0) {
    if (n & 1LL) out = out * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return out;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual of y
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_line needs >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace edgerep::linalg
