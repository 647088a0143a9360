#pragma once

// Thick-restart Lanczos for the lowest eigenpairs of a Hermitian operator given
// as a matrix-vector product. Converged pairs are locked and the search space is
// refreshed with a random vector after every lock, so that exactly degenerate
// eigenvalues (invisible to a single Krylov sequence) are still found.

#include <functional>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "edgerep/common.hpp"

namespace edgerep {

struct LanczosOptions {
  int krylov_dim = 30;
  int max_restarts = 400;
  double tol = 1e-10;  // residual ||Ax - lambda x|| / max(1, |lambda|)
  std::uint64_t seed = 12345;
};

template <typename Scalar>
struct Eigenpairs {
  using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<double> values;
  MatT vectors;
  std::vector<double> residuals;
};

namespace detail {
template <typename VecT>
void random_fill(VecT& v, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  for (Index i = 0; i < v.size(); ++i) {
    if constexpr (std::is_same_v<typename VecT::Scalar, double>) {
      v(i) = n01(rng);
    } else {
      v(i) = typename VecT::Scalar(n01(rng), n01(rng));
    }
  }
}

// two passes of classical Gram-Schmidt against both blocks
template <typename VecT, typename Basis>
void orthogonalize(VecT& v, const Basis& a, Index na, const Basis& b, Index nb) {
  for (int pass = 0; pass < 2; ++pass) {
    if (na > 0) v -= a.leftCols(na) * (a.leftCols(na).adjoint() * v);
    if (nb > 0) v -= b.leftCols(nb) * (b.leftCols(nb).adjoint() * v);
  }
}
}  // namespace detail

/// Lowest `nev` eigenpairs of the Hermitian operator `apply` on C^n (or R^n).
/// `project`, if given, maps vectors into an invariant subspace (e.g. a symmetry
/// sector) and is applied to every new direction.
template <typename Scalar>
Eigenpairs<Scalar> lanczos_lowest(
    const std::function<void(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&)>&
        apply,
    Index n, int nev, const LanczosOptions& opts = {},
    const std::function<void(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&)>& project = nullptr) {
  using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (nev < 1 || nev > n) throw InvalidArgument("lanczos_lowest: bad number of eigenpairs");
  std::mt19937_64 rng(opts.seed);
  const Index m = std::min<Index>(std::max(opts.krylov_dim, 2 * nev + 10), n);

  MatT locked(n, nev);
  Index nlocked = 0;

  MatT v(n, m), w(n, m);  // basis and its image
  MatT t = MatT::Zero(m, m);
  Index j = 0;

  // appends x (after orthogonalization) to the basis; false if x lies in the span
  auto push = [&](VecT x) {
    if (project) project(x);
    detail::orthogonalize(x, locked, nlocked, v, j);
    const double nrm = x.norm();
    if (nrm < 1e-10) return false;
    v.col(j) = x / nrm;
    VecT hx(n);
    apply(v.col(j), hx);
    if (project) project(hx);
    w.col(j) = hx;
    for (Index i = 0; i <= j; ++i) {
      t(i, j) = v.col(i).dot(w.col(j));
      t(j, i) = Eigen::numext::conj(t(i, j));
    }
    ++j;
    return true;
  };
  auto push_random = [&] {
    VecT r(n);
    for (int tries = 0; tries < 10; ++tries) {
      detail::random_fill(r, rng);
      if (push(r)) return true;
    }
    return false;
  };

  if (!push_random()) throw NumericalError("lanczos_lowest: cannot build a starting vector");
  int restarts = 0;
  while (nlocked < nev) {
    // expand the Krylov space
    while (j < m) {
      if (!push(w.col(j - 1)) && !push_random()) break;
    }
    Eigen::SelfAdjointEigenSolver<MatT> es(t.topLeftCorner(j, j));
    const MatT s = es.eigenvectors();
    const Eigen::VectorXd theta = es.eigenvalues();
    const MatT y = v.leftCols(j) * s;
    const MatT hy = w.leftCols(j) * s;
    // lock every leading Ritz pair that has converged
    Index first = 0;
    double res0 = 0.0;
    while (first < j && nlocked < nev) {
      res0 = (hy.col(first) - theta(first) * y.col(first)).norm();
      if (res0 > opts.tol * std::max(1.0, std::abs(theta(first)))) break;
      locked.col(nlocked++) = y.col(first);
      ++first;
    }
    if (nlocked == nev) break;
    if (first == 0 && ++restarts > opts.max_restarts) {
      throw NumericalError("lanczos_lowest: no convergence for eigenpair " + std::to_string(nlocked) +
                           " (residual " + std::to_string(res0) + ")");
    }
    // thick restart with the lowest remaining Ritz vectors
    const Index keep = std::min<Index>(j - first, std::max<Index>(nev - nlocked + 4, m / 3));
    v.leftCols(keep) = y.middleCols(first, keep);
    w.leftCols(keep) = hy.middleCols(first, keep);
    if (first > 0) {
      // exact only up to round-off; the images stay valid to the same order
      for (int pass = 0; pass < 2; ++pass)
        v.leftCols(keep) -= locked.leftCols(nlocked) * (locked.leftCols(nlocked).adjoint() * v.leftCols(keep));
    }
    t.setZero();
    for (Index i = 0; i < keep; ++i) t(i, i) = theta(first + i);
    j = keep;
    if (keep > 0) push(w.col(0) - theta(first) * v.col(0));  // Krylov continuation
    if (first > 0) push_random();                            // room for degenerate partners
    if (j == 0 && !push_random()) throw NumericalError("lanczos_lowest: search space collapsed");
  }

  Eigenpairs<Scalar> out;
  // Rayleigh-Ritz on the locked block to sort and clean the vectors
  MatT hl(n, nev);
  for (int i = 0; i < nev; ++i) {
    VecT img(n);
    apply(locked.col(i), img);
    hl.col(i) = img;
  }
  const MatT small = locked.adjoint() * hl;
  Eigen::SelfAdjointEigenSolver<MatT> es(0.5 * (small + small.adjoint()));
  out.vectors = locked * es.eigenvectors();
  const MatT hv = hl * es.eigenvectors();
  for (int i = 0; i < nev; ++i) {
    out.values.push_back(es.eigenvalues()(i));
    out.residuals.push_back((hv.col(i) - es.eigenvalues()(i) * out.vectors.col(i)).norm());
  }
  return out;
}

}  // namespace edgerep
