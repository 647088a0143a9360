#pragma once

// Ramped rotations of a half chain, their transfer-operator products and the
// edge representation extracted from bulk matrix elements.
//
// Sites are labelled by integers; the half-chain rotation acts on sites
// 1..L^2 with angle g * f_L(x - 1) on site x.

#include <algorithm>
#include <map>
#include <vector>

#include "edgerep/common.hpp"
#include "edgerep/fcs_core.hpp"
#include "edgerep/group_rep.hpp"
#include "edgerep/linalg.hpp"

namespace edgerep {

/// Staircase f_L(mL + n) = 1 - m/L, zero from L^2 on.
inline double ramp(int L, long long x) {
  if (L < 1) throw InvalidArgument("ramp: L must be positive");
  if (x < 0) throw InvalidArgument("ramp: x must be non-negative");
  const long long ll = L;
  if (x >= ll * ll) return 0.0;
  return 1.0 - static_cast<double>(x / ll) / static_cast<double>(ll);
}

struct RampProfile {
  int L = 1;
  std::vector<double> values;  // f_L(0..L^2)
};

inline RampProfile make_ramp(int L) {
  RampProfile r;
  r.L = L;
  const long long n = static_cast<long long>(L) * L;
  r.values.reserve(n + 1);
  for (long long x = 0; x <= n; ++x) r.values.push_back(ramp(L, x));
  return r;
}

/// E_{U_g} for the one-parameter subgroup about `axis`.
inline Mat rotation_transfer(const FCSTriple& t, Axis axis, double g) {
  return transfer_map(t, t.phys_rotation(axis, g));
}

/// prod_{x=0}^{L^2-1} E_{U_{g f_L(x)}}, ordered left to right.
inline Mat composite_transfer(const FCSTriple& t, Axis axis, double g, int L) {
  if (L < 1) throw InvalidArgument("composite_transfer: L must be positive");
  Mat out = Mat::Identity(t.k * t.k, t.k * t.k);
  for (int m = 0; m < L; ++m) {
    const double angle = g * (1.0 - static_cast<double>(m) / L);
    out = out * linalg::matrix_power(rotation_transfer(t, axis, angle), L);
  }
  return out;
}

struct PeripheralCheck {
  bool simple = false;
  double second_modulus = 0.0;
};

/// Checks that E_{U_g} has a simple eigenvalue of modulus 1 and nothing else on the unit circle.
inline PeripheralCheck peripheral_check(const FCSTriple& t, Axis axis, double g, double tol = 1e-9) {
  const Mat e = rotation_transfer(t, axis, g);
  Eigen::ComplexEigenSolver<Mat> es(e, false);
  std::vector<double> mods;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mods.rbegin(), mods.rend());
  PeripheralCheck pc;
  pc.second_modulus = mods.size() > 1 ? mods[1] : 0.0;
  pc.simple = std::abs(mods[0] - 1.0) < tol && pc.second_modulus < 1.0 - tol;
  return pc;
}

/// Q_g(b) = Tr(rho b) u_g as a k^2 x k^2 matrix.
inline Mat q_map(const FCSTriple& t, Axis axis, double g) {
  return linalg::vec(t.aux_rotation(axis, g)) * trace_functional(t.rho);
}

/// P_g(b) = Tr(rho u_g^* b) u_g, the peripheral spectral projection of E_{U_g}.
inline Mat p_map(const FCSTriple& t, Axis axis, double g) {
  if (!peripheral_check(t, axis, g).simple) {
    throw NumericalError("p_map: peripheral eigenvalue of E_{U_g} is not simple at g=" + std::to_string(g));
  }
  const Mat ug = t.aux_rotation(axis, g);
  const Mat left = t.rho * ug.adjoint();
  // norm as a map on (B, operator norm) is the trace norm of rho u_g^*
  Eigen::JacobiSVD<Mat> svd(left);
  if (std::abs(svd.singularValues().sum() - 1.0) > 1e-10) throw NumericalError("p_map: ||P_g|| != 1");
  return linalg::vec(ug) * trace_functional(left);
}

struct ScanOptions {
  double slope_min = -1.2;
  double slope_max = -0.8;
  double residual_max = 0.05;
  int threads = 1;
};

struct ConvergenceScan {
  Axis axis = Axis::z;
  double g = 0.0;
  std::vector<int> L;
  std::vector<double> distance;  // spectral norm of composite_transfer - Q_g
  linalg::LineFit fit;           // log(distance) against log(L)
  bool fitted = false;           // false for g = 0 or exactly vanishing distances
  bool slope_ok = true;
  bool residual_ok = true;
  double c1_hat = 0.0;  // max_L L * distance
};

inline ConvergenceScan convergence_scan(const FCSTriple& t, Axis axis, double g, const std::vector<int>& Ls,
                                        const ScanOptions& opts = {}) {
  if (Ls.size() < 4) throw InvalidArgument("convergence_scan: need at least 4 values of L");
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    if (Ls[i] < 1 || (i > 0 && Ls[i] <= Ls[i - 1])) {
      throw InvalidArgument("convergence_scan: L list must be positive and strictly increasing");
    }
  }
  ConvergenceScan scan;
  scan.axis = axis;
  scan.g = g;
  scan.L = Ls;
  scan.distance.assign(Ls.size(), 0.0);
  const Mat q = q_map(t, axis, g);
  detail::parallel_for(Ls.size(), opts.threads, [&](std::size_t i) {
    scan.distance[i] = linalg::spectral_norm(composite_transfer(t, axis, g, Ls[i]) - q);
  });
  for (std::size_t i = 0; i < Ls.size(); ++i) scan.c1_hat = std::max(scan.c1_hat, Ls[i] * scan.distance[i]);

  const bool degenerate = std::any_of(scan.distance.begin(), scan.distance.end(), [](double d) { return d < 1e-14; });
  if (g == 0.0 || degenerate) return scan;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(Ls[i])));
    ly.push_back(std::log(scan.distance[i]));
  }
  scan.fit = linalg::fit_line(lx, ly);
  scan.fitted = true;
  scan.slope_ok = scan.fit.slope >= opts.slope_min && scan.fit.slope <= opts.slope_max;
  scan.residual_ok = scan.fit.residual <= opts.residual_max;
  return scan;
}

/// Operator on the consecutive sites first_site .. first_site + n - 1.
struct WindowOp {
  Mat op;
  int first_site = 1;
};

struct EdgeElement {
  cplx finite;         // omega(A^* U_g^+(L) B)
  cplx limit;          // L -> infinity value
  int l = 0;           // smallest l with the window inside [-l^2+1, l^2]
  double bound = -1;   // 2 C1 ||A|| ||B|| / (L - l), negative when not available
};

namespace detail {
inline int window_sites(const FCSTriple& t, const Mat& op) { return op.rows() == 1 ? 0 : site_count(op.rows(), t.d); }

/// X on the window with the rotation U_{g r(x)} inserted on each site x >= 1.
template <typename Angle>
Mat rotated_window(const FCSTriple& t, Axis axis, int first_site, int n, Angle angle) {
  std::vector<Mat> f;
  for (int s = 0; s < n; ++s) {
    const int x = first_site + s;
    f.push_back(x >= 1 ? t.phys_rotation(axis, angle(x)) : Mat::Identity(t.d, t.d));
  }
  return linalg::kron_all(f);
}

/// prod_{x = from}^{L^2-1} E_{U_{g f_L(x)}} applied to the identity.
inline Mat ramp_tail(const FCSTriple& t, Axis axis, double g, int L, long long from) {
  const long long n = static_cast<long long>(L) * L;
  Vec b = linalg::vec(Mat::Identity(t.k, t.k));
  std::map<long long, Mat> cache;
  for (long long x = n - 1; x >= std::max(from, 0LL); --x) {
    const long long block = x / L;
    auto it = cache.find(block);
    if (it == cache.end()) it = cache.emplace(block, rotation_transfer(t, axis, g * ramp(L, x))).first;
    b = it->second * b;
  }
  return linalg::unvec(b, t.k);
}
}  // namespace detail

/// omega(A^* U_g^+(L) B) for A, B on a common window, and its L -> infinity value
/// Tr(rho E_{A^* U_g B}(u_g)), where U_g acts on the window sites >= 1.
inline EdgeElement edge_matrix_element(const FCSTriple& t, Axis axis, const WindowOp& a, const WindowOp& b, double g,
                                       int L, double c1 = -1.0) {
  if (L < 1) throw InvalidArgument("edge_matrix_element: L must be positive");
  if (a.op.rows() != b.op.rows() || a.op.rows() != a.op.cols() || b.op.rows() != b.op.cols()) {
    throw InvalidArgument("edge_matrix_element: A and B must act on the same window");
  }
  if (a.op.rows() > 1 && a.first_site != b.first_site) {
    throw InvalidArgument("edge_matrix_element: A and B must start at the same site");
  }
  const int n = detail::window_sites(t, a.op);
  const int first = n == 0 ? 1 : a.first_site;
  const int last = first + n - 1;
  const long long l2max = static_cast<long long>(L) * L;
  if (n > 0 && (last > l2max || first < -l2max + 1)) {
    throw InvalidArgument("edge_matrix_element: support exceeds [-L^2+1, L^2]");
  }
  EdgeElement out;
  while (n > 0 && (static_cast<long long>(out.l) * out.l < last || -static_cast<long long>(out.l) * out.l + 1 > first))
    ++out.l;

  const Mat e1 = transfer_map(t, Mat::Identity(t.d, t.d));
  const int gap = last < 0 ? -last : 0;  // identity sites between the window and site 1
  const Mat gap_map = linalg::matrix_power(e1, gap);
  const Mat adj = a.op.adjoint();

  // finite L
  const Mat x_fin = adj * detail::rotated_window(t, axis, first, n, [&](int x) { return g * ramp(L, x - 1); }) * b.op;
  const Mat tail = detail::ramp_tail(t, axis, g, L, std::max(last, 0));
  out.finite = (t.rho * apply_map(transfer_map(t, x_fin), apply_map(gap_map, tail))).trace();

  // limit
  const Mat x_lim = adj * detail::rotated_window(t, axis, first, n, [&](int) { return g; }) * b.op;
  out.limit = (t.rho * apply_map(transfer_map(t, x_lim), apply_map(gap_map, t.aux_rotation(axis, g)))).trace();

  if (c1 >= 0.0 && L > out.l) {
    out.bound = 2.0 * c1 * linalg::spectral_norm(a.op) * linalg::spectral_norm(b.op) / (L - out.l);
  }
  return out;
}

struct EdgeRepOptions {
  int L = 48;                      // ramp length for the finite-L matrix elements
  double rank_tol = 1e-8;          // relative singular-value cutoff for the reconstruction
  double group_tol = 1e-8;
  double simplicity_tol = 1e-9;
  int span_sites = 2;              // observables are all matrix units on sites -span_sites+1..0
  std::vector<int> scan_L{4, 8, 16, 32};
  double scan_g = 1.0;
  int threads = 1;
};

struct AxisReconstruction {
  Axis axis = Axis::z;
  std::vector<Mat> u;          // one per grid value
  double group_law_defect = 0.0;
  double max_deviation = 0.0;  // max ||u_g - exp(i g s)|| against the stored auxiliary generator
};

struct EdgeRepReport {
  std::vector<double> g;
  std::array<AxisReconstruction, 3> axes;
  Su2Triple generators;  // -i log(u_g)/g at the smallest positive grid value
  IrrepContent content;
  IrrepContent expected;  // decomposition of the stored auxiliary generators
  bool content_matches = false;
  double group_law_defect = 0.0;
  ConvergenceScan scan;
};

namespace detail {
/// Least-squares recovery of Y from m(X) = Tr(rho E_X(Y)) over all matrix units X on
/// the sites -n+1..0.
inline Mat reconstruct_from_elements(const FCSTriple& t, const Mat& tail, int n, double rank_tol) {
  Index d2 = 1;
  for (int s = 0; s < n; ++s) d2 *= t.d;
  const Index kk = t.k * t.k;
  const Eigen::RowVectorXcd phi = trace_functional(t.rho);
  Mat f(d2 * d2, kk);
  Vec m(d2 * d2);
  Index row = 0;
  for (Index i = 0; i < d2; ++i) {
    for (Index j = 0; j < d2; ++j, ++row) {
      Mat unit = Mat::Zero(d2, d2);
      unit(i, j) = 1.0;
      const Mat e = transfer_map(t, unit);
      f.row(row) = phi * e;
      m(row) = (t.rho * apply_map(e, tail)).trace();  // edge matrix element of this unit
    }
  }
  if (linalg::numerical_rank(f, rank_tol) < kk) {
    throw NumericalError("edge_representation: reconstruction is rank deficient (non-minimal triple)");
  }
  return linalg::unvec(f.colPivHouseholderQr().solve(m), t.k);
}
}  // namespace detail

inline EdgeRepReport edge_representation(const FCSTriple& t, const std::vector<double>& g_grid,
                                         const EdgeRepOptions& opts = {}) {
  if (g_grid.empty()) throw InvalidArgument("edge_representation: empty g grid");
  EdgeRepReport rep;
  rep.g = g_grid;
  const Index k = t.k;
  const std::size_t ng = g_grid.size();
  // order of traversal: outward from the grid point closest to 0
  std::size_t origin = 0;
  for (std::size_t i = 1; i < ng; ++i)
    if (std::abs(g_grid[i]) < std::abs(g_grid[origin])) origin = i;
  if (std::abs(g_grid[origin]) > 0.5) throw InvalidArgument("edge_representation: grid must contain values near 0");

  for (int ai = 0; ai < 3; ++ai) {
    const Axis axis = static_cast<Axis>(ai);
    AxisReconstruction& ar = rep.axes[ai];
    ar.axis = axis;
    std::vector<Mat> raw(ng);
    detail::parallel_for(ng, opts.threads, [&](std::size_t i) {
      const double g = g_grid[i];
      if (!peripheral_check(t, axis, g, opts.simplicity_tol).simple) {
        throw NumericalError("edge_representation: E_{U_g} peripheral spectrum not simple at g=" + std::to_string(g));
      }
      // sites -n+1..0 carry the observables; sites 1..L^2 the ramped rotation
      raw[i] = detail::reconstruct_from_elements(t, detail::ramp_tail(t, axis, g, opts.L, 0), opts.span_sites,
                                                 opts.rank_tol);
    });

    ar.u.assign(ng, Mat());
    auto normalize = [&](const Mat& y, const Mat* prev) {
      const double mag = std::sqrt((y.adjoint() * y).trace().real() / static_cast<double>(k));
      if (mag < 1e-12) throw NumericalError("edge_representation: vanishing reconstruction");
      const Mat w = y / mag;
      const cplx det = w.determinant();
      const double base = std::arg(det) / static_cast<double>(k);
      Mat best;
      double best_score = 1e300;
      for (Index r = 0; r < k; ++r) {
        const cplx phase = std::polar(1.0, base + 2.0 * kPi * static_cast<double>(r) / static_cast<double>(k));
        const Mat cand = w / phase;
        const double score =
            prev ? (cand - *prev).norm() : -(cand.trace().real());  // continuity, or closest to identity
        if (score < best_score) {
          best_score = score;
          best = cand;
        }
      }
      return best;
    };
    ar.u[origin] = normalize(raw[origin], nullptr);
    for (std::size_t i = origin + 1; i < ng; ++i) ar.u[i] = normalize(raw[i], &ar.u[i - 1]);
    for (std::size_t i = origin; i-- > 0;) ar.u[i] = normalize(raw[i], &ar.u[i + 1]);

    for (std::size_t i = 0; i < ng; ++i) {
      ar.max_deviation = std::max(ar.max_deviation, (ar.u[i] - t.aux_rotation(axis, g_grid[i])).cwiseAbs().maxCoeff());
      for (std::size_t j = 0; j < ng; ++j) {
        for (std::size_t s = 0; s < ng; ++s) {
          if (std::abs(g_grid[i] + g_grid[j] - g_grid[s]) > 1e-12) continue;
          ar.group_law_defect = std::max(ar.group_law_defect, (ar.u[i] * ar.u[j] - ar.u[s]).cwiseAbs().maxCoeff());
        }
      }
    }
    rep.group_law_defect = std::max(rep.group_law_defect, ar.group_law_defect);
  }

  std::size_t gstar = ng;
  for (std::size_t i = 0; i < ng; ++i)
    if (g_grid[i] > 1e-12 && (gstar == ng || g_grid[i] < g_grid[gstar])) gstar = i;
  if (gstar == ng) throw InvalidArgument("edge_representation: grid needs a positive value");
  const double gs = g_grid[gstar];
  auto gen = [&](int ai) {
    Mat s = -kI * linalg::unitary_log(rep.axes[ai].u[gstar]) / gs;
    return Mat(0.5 * (s + s.adjoint()));
  };
  rep.generators = {gen(0), gen(1), gen(2)};
  rep.content = decompose_into_irreps(rep.generators);
  rep.expected = decompose_into_irreps(t.aux_gen);
  rep.content_matches = rep.content == rep.expected;

  ScanOptions so;
  so.threads = opts.threads;
  rep.scan = convergence_scan(t, Axis::z, opts.scan_g, opts.scan_L, so);
  return rep;
}

/// Ad_{u_g^*} on an auxiliary density matrix.
inline Mat theta_action(const FCSTriple& t, const Mat& sigma, Axis axis, double g) {
  if (sigma.rows() != t.k || sigma.cols() != t.k) throw InvalidArgument("theta_action: sigma must be k x k");
  if (!linalg::is_hermitian(sigma, 1e-10)) throw InvalidArgument("theta_action: sigma is not Hermitian");
  if (std::abs(sigma.trace() - 1.0) > 1e-10) throw InvalidArgument("theta_action: sigma must have unit trace");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sigma + sigma.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -1e-10) throw InvalidArgument("theta_action: sigma is not positive");
  const Mat u = t.aux_rotation(axis, g);
  return u.adjoint() * sigma * u;
}

/// |Tr(theta(sigma) E_A(1)) - Tr(sigma E_{theta_g(A)}(1))| for an n-site observable A.
inline double theta_consistency_defect(const FCSTriple& t, const Mat& sigma, const Mat& a, Axis axis, double g) {
  const int n = detail::window_sites(t, a);
  const Mat u1 = t.phys_rotation(axis, g);
  const Mat un = linalg::kron_all(std::vector<Mat>(n, u1));
  const Mat id = Mat::Identity(t.k, t.k);
  const cplx lhs = (theta_action(t, sigma, axis, g) * apply_map(transfer_map(t, a), id)).trace();
  const cplx rhs = (sigma * apply_map(transfer_map(t, un * a * un.adjoint()), id)).trace();
  return std::abs(lhs - rhs);
}

}  // namespace edgerep
