#pragma once

// SU(2) representation toolkit: spin matrices, one-parameter subgroups,
// Clebsch-Gordan isometries and Casimir-based decomposition into irreps.

#include <array>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "edgerep/common.hpp"
#include "edgerep/linalg.hpp"

namespace edgerep {

/// A triple of Hermitian operators on C^n, meant to satisfy the su(2) relations.
struct Su2Triple {
  Mat x, y, z;

  Index dim() const { return z.rows(); }
  const Mat& operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  Mat casimir() const { return x * x + y * y + z * z; }

  /// n.S for a direction n (not necessarily normalized).
  Mat along(const std::array<double, 3>& n) const { return n[0] * x + n[1] * y + n[2] * z; }

  /// Largest deviation from [x,y] = i z and its cyclic permutations.
  double commutation_defect() const {
    const double a = (linalg::comm(x, y) - kI * z).cwiseAbs().maxCoeff();
    const double b = (linalg::comm(y, z) - kI * x).cwiseAbs().maxCoeff();
    const double c = (linalg::comm(z, x) - kI * y).cwiseAbs().maxCoeff();
    return std::max({a, b, c});
  }
};

struct SpinGenerators {
  TwiceSpin j;
  Su2Triple ops;
};

/// Rotation axis of a one-parameter subgroup g -> exp(i g S^axis).
enum class Axis { x = 0, y = 1, z = 2 };

inline Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  if (s == "z") return Axis::z;
  throw InvalidArgument("unknown axis '" + s + "'");
}

inline const char* to_string(Axis a) { return a == Axis::x ? "x" : (a == Axis::y ? "y" : "z"); }

inline const Mat& component(const Su2Triple& t, Axis a) { return t[static_cast<int>(a)]; }

/// Standard spin-j matrices in the basis m = j, j-1, ..., -j.
inline SpinGenerators spin_matrices(TwiceSpin j) {
  if (j.twice < 0) throw InvalidArgument("spin_matrices: negative spin");
  const Index d = j.dim();
  const double jj = j.value();
  Mat sz = Mat::Zero(d, d);
  Mat splus = Mat::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    const double m = jj - static_cast<double>(i);
    sz(i, i) = m;
    if (i > 0) splus(i - 1, i) = std::sqrt(jj * (jj + 1.0) - m * (m + 1.0));
  }
  const Mat sminus = splus.adjoint();
  SpinGenerators out{j, {}};
  out.ops.x = 0.5 * (splus + sminus);
  out.ops.y = (splus - sminus) / (2.0 * kI);
  out.ops.z = sz;
  return out;
}

inline SpinGenerators spin_matrices(double j) { return spin_matrices(TwiceSpin::from_double(j)); }

/// exp(i g S) for Hermitian S, computed from the spectral decomposition.
inline Mat exp_generator(const Mat& s, double g, double hermitian_tol = 1e-10) {
  if (!linalg::is_hermitian(s, hermitian_tol)) {
    throw InvalidArgument("exp_generator: generator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.adjoint()));
  const Vec phases = (kI * g * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline Su2Triple tensor_product(const Su2Triple& a, const Su2Triple& b) {
  const Mat ia = Mat::Identity(a.dim(), a.dim());
  const Mat ib = Mat::Identity(b.dim(), b.dim());
  return {linalg::kron(a.x, ib) + linalg::kron(ia, b.x), linalg::kron(a.y, ib) + linalg::kron(ia, b.y),
          linalg::kron(a.z, ib) + linalg::kron(ia, b.z)};
}

inline Su2Triple direct_sum(const Su2Triple& a, const Su2Triple& b) {
  auto sum = [](const Mat& p, const Mat& q) {
    Mat out = Mat::Zero(p.rows() + q.rows(), p.cols() + q.cols());
    out.topLeftCorner(p.rows(), p.cols()) = p;
    out.bottomRightCorner(q.rows(), q.cols()) = q;
    return out;
  };
  return {sum(a.x, b.x), sum(a.y, b.y), sum(a.z, b.z)};
}

/// Generators of the adjoint action b -> u b u^* on vectorized k x k matrices.
inline Su2Triple adjoint_action(const Su2Triple& t) {
  const Mat id = Mat::Identity(t.dim(), t.dim());
  auto ad = [&](const Mat& s) -> Mat { return linalg::kron(id, s) - linalg::kron(s.transpose(), id); };
  return {ad(t.x), ad(t.y), ad(t.z)};
}

/// Total spin sum_x S_x on a chain of `length` sites.
inline Su2Triple chain_total(const Su2Triple& site, int length) {
  const Index d = site.dim();
  auto total = [&](const Mat& s) {
    Index dim = 1;
    for (int i = 0; i < length; ++i) dim *= d;
    Mat out = Mat::Zero(dim, dim);
    for (int x = 0; x < length; ++x) {
      std::vector<Mat> f(length, Mat::Identity(d, d));
      f[x] = s;
      out += linalg::kron_all(f);
    }
    return out;
  };
  return {total(site.x), total(site.y), total(site.z)};
}

/// Multiset of irreducible representations, keyed by 2j.
struct IrrepContent {
  std::map<int, int> multiplicity;

  Index dimension() const {
    Index n = 0;
    for (const auto& [two_j, mult] : multiplicity) n += static_cast<Index>(mult) * (two_j + 1);
    return n;
  }

  friend bool operator==(const IrrepContent&, const IrrepContent&) = default;

  static IrrepContent single(TwiceSpin j, int mult = 1) {
    IrrepContent c;
    c.multiplicity[j.twice] = mult;
    return c;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [two_j, mult] : multiplicity) {
      if (!first) os << ",";
      first = false;
      os << "(" << edgerep::to_string(TwiceSpin(two_j)) << "," << mult << ")";
    }
    os << "}";
    return os.str();
  }
};

struct DecomposeOptions {
  double commutation_tol = 1e-8;
  double casimir_tol = 1e-6;
};

/// Diagonalizes the Casimir and groups its eigenvalues j(j+1) into irreps.
inline IrrepContent decompose_into_irreps(const Su2Triple& t, const DecomposeOptions& opts = {}) {
  const Index n = t.dim();
  if (t.x.rows() != n || t.y.rows() != n || t.x.cols() != n || t.y.cols() != n || t.z.cols() != n) {
    throw InvalidArgument("decompose_into_irreps: generator shapes differ");
  }
  IrrepContent content;
  if (n == 0) return content;
  if (const double defect = t.commutation_defect(); defect > opts.commutation_tol) {
    throw MalformedRepresentation("decompose_into_irreps: su(2) commutation defect " + std::to_string(defect));
  }
  const Mat c = t.casimir();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
  std::map<int, int> counts;
  for (Index i = 0; i < n; ++i) {
    const double ev = es.eigenvalues()(i);
    const double j = 0.5 * (-1.0 + std::sqrt(std::max(0.0, 1.0 + 4.0 * ev)));
    const int two_j = static_cast<int>(std::lround(2.0 * j));
    const double jr = 0.5 * two_j;
    if (std::abs(ev - jr * (jr + 1.0)) > opts.casimir_tol) {
      throw MalformedRepresentation("decompose_into_irreps: Casimir eigenvalue " + std::to_string(ev) +
                                    " is not of the form j(j+1)");
    }
    ++counts[two_j];
  }
  for (const auto& [two_j, count] : counts) {
    if (count % (two_j + 1) != 0) {
      throw MalformedRepresentation("decompose_into_irreps: eigenvalue count " + std::to_string(count) +
                                    " is not a multiple of 2j+1 for 2j=" + std::to_string(two_j));
    }
    content.multiplicity[two_j] = count / (two_j + 1);
  }
  return content;
}

namespace detail {
inline double factorial(int n) {
  if (n < 0) throw InvalidArgument("factorial of negative argument");
  double out = 1.0;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}
}  // namespace detail

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley phase),
/// all arguments given as twice their value.
inline double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  if (tm1 + tm2 != tM) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ) return 0.0;
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tJ + tM) % 2) return 0.0;
  if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2 || (tj1 + tj2 + tJ) % 2) return 0.0;
  using detail::factorial;
  const int a = (tJ + tj1 - tj2) / 2, b = (tJ - tj1 + tj2) / 2, c = (tj1 + tj2 - tJ) / 2;
  const int s = (tj1 + tj2 + tJ) / 2 + 1;
  const double pre = std::sqrt((tJ + 1) * factorial(a) * factorial(b) * factorial(c) / factorial(s)) *
                     std::sqrt(factorial((tJ + tM) / 2) * factorial((tJ - tM) / 2) * factorial((tj1 - tm1) / 2) *
                               factorial((tj1 + tm1) / 2) * factorial((tj2 - tm2) / 2) * factorial((tj2 + tm2) / 2));
  double sum = 0.0;
  for (int k = 0; k <= c; ++k) {
    const int d1 = c - k, d2 = (tj1 - tm1) / 2 - k, d3 = (tj2 + tm2) / 2 - k;
    const int d4 = (tJ - tj2 + tm1) / 2 + k, d5 = (tJ - tj1 - tm2) / 2 + k;
    if (d1 < 0 || d2 < 0 || d3 < 0 || d4 < 0 || d5 < 0) continue;
    const double term = 1.0 / (factorial(k) * factorial(d1) * factorial(d2) * factorial(d3) * factorial(d4) *
                               factorial(d5));
    sum += (k % 2 ? -term : term);
  }
  return pre * sum;
}

/// Isometry C^{2a+1} -> C^{2p+1} (x) C^{2a+1} embedding spin a into spin p (x) spin a.
/// Row index is (physical index) * k + (auxiliary index), bases ordered m = j..-j.
inline Mat cg_isometry(TwiceSpin phys, TwiceSpin aux) {
  if (phys.twice > 2 * aux.twice || phys.twice % 2 != 0) {
    throw InvalidArgument("cg_isometry: spin " + to_string(aux) + " does not occur in " + to_string(phys) +
                          " (x) " + to_string(aux) + " with integer physical spin");
  }
  const Index d = phys.dim();
  const Index k = aux.dim();
  Mat v = Mat::Zero(d * k, k);
  for (Index col = 0; col < k; ++col) {
    const int tM = aux.twice - 2 * static_cast<int>(col);
    for (Index i = 0; i < d; ++i) {
      const int tm1 = phys.twice - 2 * static_cast<int>(i);
      for (Index a = 0; a < k; ++a) {
        const int tm2 = aux.twice - 2 * static_cast<int>(a);
        v(i * k + a, col) = clebsch_gordan(phys.twice, tm1, aux.twice, tm2, aux.twice, tM);
      }
    }
  }
  return v;
}

/// Unit rotation axis for Axis.
inline std::array<double, 3> axis_vector(Axis a) {
  std::array<double, 3> n{0.0, 0.0, 0.0};
  n[static_cast<int>(a)] = 1.0;
  return n;
}

}  // namespace edgerep
