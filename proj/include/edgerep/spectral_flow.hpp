#pragma once

// Quasi-adiabatic evolution along a path of SU(2)-invariant chain Hamiltonians.
//
// The filter w is a probability density whose Fourier transform
//   w_hat(E) = (phi * phi)(E) / int phi^2
// is the normalized autocorrelation of the bump phi(x) = exp(-1 / (1 - (2x/gamma)^2)),
// so w_hat is smooth, even, supported in [-gamma, gamma], and w = |phi_check|^2 / const >= 0.
// The generator in the eigenbasis of H(s) is D_mn = W(E_m - E_n) H'_mn with
//   W(E) = int dxi w(xi) int_0^xi e^{-i zeta E} dzeta = (1 - w_hat(E)) / (iE),
// and states are transported by dU/ds = -i D(s) U.

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "edgerep/common.hpp"
#include "edgerep/exact_diag.hpp"
#include "edgerep/group_rep.hpp"
#include "edgerep/linalg.hpp"

namespace edgerep {

class BumpFilter {
 public:
  explicit BumpFilter(double gamma, int table_size = 4096) : gamma_(gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("filter: gamma must be positive");
    if (table_size < 16) throw InvalidArgument("filter: table too small");
    norm_ = integrate([this](double x) { return phi(x) * phi(x); }, -0.5 * gamma_, 0.5 * gamma_);
    // tabulate q(E) = (1 - w_hat(E)) / E^2, smooth and even, so W(E) = -i E q(E) keeps relative accuracy near 0
    const double dphi2 = integrate(
        [this](double x) {
          const double u = 2.0 * x / gamma_;
          if (std::abs(u) >= 1.0) return 0.0;
          const double d = phi(x) * (-2.0 * u / ((1.0 - u * u) * (1.0 - u * u))) * (2.0 / gamma_);
          return d * d;
        },
        -0.5 * gamma_, 0.5 * gamma_);
    std::vector<double> y(table_size + 1);
    const double h = gamma_ / table_size;
    y[0] = 0.5 * dphi2 / norm_;
    for (int i = 1; i <= table_size; ++i) y[i] = one_minus_w_hat(i * h) / ((i * h) * (i * h));
    table_ = std::make_shared<Spline>(y.begin(), y.end(), 0.0, h, 0.0, -2.0 / (gamma_ * gamma_ * gamma_));
  }

  double gamma() const { return gamma_; }

  /// The bump phi, supported in (-gamma/2, gamma/2).
  double phi(double x) const {
    const double u = 2.0 * x / gamma_;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
  }

  /// 1 - w_hat(E) = int (phi(x) - phi(E - x))^2 dx / (2 int phi^2); no cancellation near E = 0.
  double one_minus_w_hat(double e) const {
    if (std::abs(e) >= gamma_) return 1.0;
    if (e == 0.0) return 0.0;
    std::array<double, 4> cuts{-0.5 * gamma_, 0.5 * gamma_, e - 0.5 * gamma_, e + 0.5 * gamma_};
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (cuts[i + 1] <= cuts[i]) continue;
      acc += integrate(
          [&](double x) {
            const double d = phi(x) - phi(e - x);
            return d * d;
          },
          cuts[i], cuts[i + 1]);
    }
    return acc / (2.0 * norm_);
  }

  double w_hat(double e) const { return 1.0 - one_minus_w_hat(e); }

  /// Spline through a table of one_minus_w_hat.
  double one_minus_w_hat_fast(double e) const {
    const double a = std::abs(e);
    if (a >= gamma_) return 1.0;
    return a * a * (*table_)(a);
  }

  /// W(E) = (1 - w_hat(E)) / (iE); W(0) = 0 and W(E) = 1/(iE) for |E| >= gamma.
  cplx kernel(double e) const {
    if (e == 0.0) return 0.0;
    if (std::abs(e) >= gamma_) return cplx(0.0, -1.0 / e);
    return cplx(0.0, -e * (*table_)(std::abs(e)));
  }

 private:
  template <typename F>
  static double integrate(F&& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-13);
  }

  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
  double gamma_;
  double norm_ = 1.0;
  std::shared_ptr<const Spline> table_;
};

inline cplx spectral_kernel(const BumpFilter& f, double e) { return f.kernel(e); }

/// D(s) for dense Hermitian H and H'.
inline Mat quasi_adiabatic_generator(const Mat& h, const Mat& hp, const BumpFilter& f, double hermitian_tol = 1e-10) {
  if (h.rows() != h.cols() || hp.rows() != h.rows() || hp.cols() != h.cols()) {
    throw InvalidArgument("quasi_adiabatic_generator: dimension mismatch");
  }
  if (!linalg::is_hermitian(h, hermitian_tol) || !linalg::is_hermitian(hp, hermitian_tol)) {
    throw InvalidArgument("quasi_adiabatic_generator: H and H' must be Hermitian");
  }
  if (hp.cwiseAbs().maxCoeff() == 0.0) return Mat::Zero(h.rows(), h.cols());
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("quasi_adiabatic_generator: eigensolver failed");
  const Mat& v = es.eigenvectors();
  const RVec& e = es.eigenvalues();
  Mat d = v.adjoint() * hp * v;
  for (Index m = 0; m < d.rows(); ++m)
    for (Index n = 0; n < d.cols(); ++n) d(m, n) *= f.kernel(e(m) - e(n));
  Mat out = v * d * v.adjoint();
  if (linalg::hermiticity_defect(out) > hermitian_tol * std::max(1.0, out.norm())) {
    throw NumericalError("quasi_adiabatic_generator: result not Hermitian");
  }
  return 0.5 * (out + out.adjoint());
}

struct PathKnot {
  double s = 0.0;
  HamiltonianSpec spec;
};

/// Piecewise-linear path H(s) through the knots.
struct FlowPath {
  std::vector<PathKnot> knots;

  void validate() const {
    if (knots.size() < 2) throw InvalidArgument("flow path: need at least two knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      knots[i].spec.validate();
      if (i == 0) continue;
      if (!(knots[i].s > knots[i - 1].s)) throw InvalidArgument("flow path: knot positions must increase");
      const auto& a = knots[0].spec;
      const auto& b = knots[i].spec;
      if (a.spin.twice != b.spin.twice || a.length != b.length || a.boundary != b.boundary) {
        throw InvalidArgument("flow path: knots must share spin, length and boundary");
      }
    }
  }
  double begin() const { return knots.front().s; }
  double end() const { return knots.back().s; }
  TwiceSpin spin() const { return knots.front().spec.spin; }
  int length() const { return knots.front().spec.length; }
};

/// Block-diagonal operator in the S^z_total sectors of the full product basis.
struct SectorOp {
  std::vector<Mat> blocks;
};

struct SectorLayout {
  std::vector<int> twice_m;
  std::vector<std::vector<Index>> full_index;  // basis codes, which are also full-space indices
  Index dim = 0;

  explicit SectorLayout(TwiceSpin s = TwiceSpin(1), int length = 2) {
    for (int tm = -s.twice * length; tm <= s.twice * length; tm += 2) {
      const ChainBasis b = make_basis(s, length, tm);
      if (b.size() == 0) continue;
      twice_m.push_back(tm);
      full_index.emplace_back(b.codes.begin(), b.codes.end());
      dim += b.size();
    }
  }
  std::size_t size() const { return twice_m.size(); }

  Mat to_full(const SectorOp& op) const {
    Mat out = Mat::Zero(dim, dim);
    for (std::size_t k = 0; k < size(); ++k) {
      const auto& idx = full_index[k];
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) out(idx[i], idx[j]) = op.blocks[k](i, j);
    }
    return out;
  }
  SectorOp identity() const {
    SectorOp op;
    for (const auto& idx : full_index) op.blocks.push_back(Mat::Identity(idx.size(), idx.size()));
    return op;
  }
};

inline SectorOp operator*(const SectorOp& a, const SectorOp& b) {
  SectorOp c;
  for (std::size_t k = 0; k < a.blocks.size(); ++k) c.blocks.push_back(a.blocks[k] * b.blocks[k]);
  return c;
}

inline SectorOp adjoint(const SectorOp& a) {
  SectorOp c;
  for (const auto& b : a.blocks) c.blocks.push_back(b.adjoint());
  return c;
}

inline double frobenius(const SectorOp& a) {
  double acc = 0.0;
  for (const auto& b : a.blocks) acc += b.squaredNorm();
  return std::sqrt(acc);
}

inline SectorOp operator-(const SectorOp& a, const SectorOp& b) {
  SectorOp c;
  for (std::size_t k = 0; k < a.blocks.size(); ++k) c.blocks.push_back(a.blocks[k] - b.blocks[k]);
  return c;
}

inline double trace_product(const SectorOp& a, const SectorOp& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.blocks.size(); ++k) acc += (a.blocks[k] * b.blocks[k]).trace().real();
  return acc;
}

struct FlowOptions {
  int n_steps = 100;
  std::optional<double> gamma;  // filter support; default gamma_fraction * smallest gap on the grid
  double gamma_fraction = 0.9;
  std::optional<int> band_size;  // default: cluster of the lowest level at the start
  double cluster_tol = 1e-2;
  double gap_tol = 1e-2;  // abort when the band separation falls below this
  bool halving_check = true;
  std::vector<double> g_grid{0.7, 2.1};             // covariance check angles
  std::array<double, 3> axis{0.267261241912424, 0.534522483824849, 0.801783725737273};  // (1,2,3)/sqrt(14)
  std::vector<double> character_grid{0.3, 1.1, 1.9, 2.6, kPi};
  int norm_observables = 3;
  std::uint64_t seed = 17;
  double symmetry_tol = 1e-10;
};

struct BandData {
  double gap = 0.0;        // E_band - E_{band-1}
  double splitting = 0.0;  // spread of the band
  std::vector<double> lowest;
  SectorOp projector;
};

struct FlowResult {
  std::vector<double> s;
  std::vector<double> fidelity;              // Tr(P_transported P(s)) / band
  std::vector<double> covariance_defect;     // per step, max over the g grid (Frobenius bound)
  std::vector<double> unitarity_defect;      // per step
  std::vector<double> gap;                   // per grid point
  std::vector<std::vector<cplx>> characters;            // transported band, per grid point
  std::vector<std::vector<cplx>> instantaneous_characters;
  std::vector<double> character_grid;
  int band_size = 0;
  int degeneracy_start = 0, degeneracy_end = 0;
  double gamma = 0.0;
  double final_fidelity = 0.0;
  double max_character_drift = 0.0;
  double halving_defect = 0.0;  // ||P(n steps) - P(2n steps)||_F at the end
  double cocycle_defect = 0.0;  // ||U_back U_fwd - 1||_F
  double norm_defect = 0.0;     // max | ||U* A U|| - ||A|| | over test observables
  SectorOp propagator;          // composed, block form
  SectorOp initial_projector, final_projector;
};

namespace detail {
using RBlocks = std::vector<RMat>;

struct PathSectors {
  SectorLayout layout;
  std::vector<RBlocks> knot_blocks;  // [knot][sector]
  std::vector<SpMat> knot_full;

  explicit PathSectors(const FlowPath& p) : layout(p.spin(), p.length()) {
    for (const auto& k : p.knots) {
      knot_full.push_back(build_hamiltonian(k.spec));
      RBlocks blocks;
      for (int tm : layout.twice_m) blocks.push_back(RMat(build_sector_hamiltonian(k.spec, tm).H));
      knot_blocks.push_back(std::move(blocks));
    }
  }

  std::size_t segment(const FlowPath& p, double s) const {
    std::size_t i = 0;
    while (i + 2 < p.knots.size() && s >= p.knots[i + 1].s) ++i;
    return i;
  }
  double tau(const FlowPath& p, std::size_t i, double s) const {
    return (s - p.knots[i].s) / (p.knots[i + 1].s - p.knots[i].s);
  }
  RBlocks h(const FlowPath& p, double s) const {
    const std::size_t i = segment(p, s);
    const double t = tau(p, i, s);
    RBlocks out;
    for (std::size_t k = 0; k < layout.size(); ++k) out.push_back((1.0 - t) * knot_blocks[i][k] + t * knot_blocks[i + 1][k]);
    return out;
  }
  RBlocks dh(const FlowPath& p, double s) const {
    const std::size_t i = segment(p, s);
    const double len = p.knots[i + 1].s - p.knots[i].s;
    RBlocks out;
    for (std::size_t k = 0; k < layout.size(); ++k) out.push_back((knot_blocks[i + 1][k] - knot_blocks[i][k]) / len);
    return out;
  }
  SpMat h_full(const FlowPath& p, double s) const {
    const std::size_t i = segment(p, s);
    const double t = tau(p, i, s);
    return (1.0 - t) * knot_full[i] + t * knot_full[i + 1];
  }
};

inline BandData band(const SectorLayout& layout, const RBlocks& h, int band_size) {
  struct Level {
    double e;
    std::size_t sector;
    Index col;
  };
  std::vector<Level> levels;
  std::vector<Eigen::SelfAdjointEigenSolver<RMat>> es;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    es.emplace_back(h[k]);
    if (es.back().info() != Eigen::Success) throw NumericalError("flow: eigensolver failed");
    for (Index c = 0; c < h[k].rows(); ++c) levels.push_back({es.back().eigenvalues()(c), k, c});
  }
  std::sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) { return a.e < b.e; });
  if (band_size < 1 || band_size >= static_cast<int>(levels.size())) throw InvalidArgument("flow: bad band size");
  BandData out;
  for (int i = 0; i <= band_size; ++i) out.lowest.push_back(levels[i].e);
  out.gap = levels[band_size].e - levels[band_size - 1].e;
  out.splitting = levels[band_size - 1].e - levels[0].e;
  for (std::size_t k = 0; k < layout.size(); ++k) out.projector.blocks.push_back(Mat::Zero(h[k].rows(), h[k].cols()));
  for (int i = 0; i < band_size; ++i) {
    const auto& l = levels[i];
    const RVec v = es[l.sector].eigenvectors().col(l.col);
    out.projector.blocks[l.sector] += (v * v.transpose()).cast<cplx>();
  }
  return out;
}

// Real sector blocks: D = i A with A real antisymmetric, so exp(-i ds D) = exp(ds A) is orthogonal.
inline RMat real_generator(const RMat& h, const RMat& hp, const BumpFilter& f) {
  Eigen::SelfAdjointEigenSolver<RMat> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("quasi_adiabatic_generator: eigensolver failed");
  const RMat& v = es.eigenvectors();
  const RVec& e = es.eigenvalues();
  RMat d = v.transpose() * hp * v;
  for (Index m = 0; m < d.rows(); ++m)
    for (Index n = 0; n < d.cols(); ++n) d(m, n) *= f.kernel(e(m) - e(n)).imag();
  RMat a = v * d * v.transpose();
  return 0.5 * (a - a.transpose());
}

inline SectorOp step_propagator(const RBlocks& h, const RBlocks& dh, const BumpFilter& f, double ds) {
  SectorOp u;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const RMat a = ds * real_generator(h[k], dh[k], f);
    u.blocks.push_back(Mat(a.exp().cast<cplx>()));
  }
  return u;
}

inline std::vector<cplx> characters(const SectorLayout& layout, const SectorOp& p, const std::vector<double>& grid) {
  std::vector<cplx> out;
  for (double g : grid) {
    cplx chi = 0.0;
    for (std::size_t k = 0; k < layout.size(); ++k) chi += std::exp(kI * (0.5 * g * layout.twice_m[k])) * p.blocks[k].trace();
    out.push_back(chi);
  }
  return out;
}

inline void check_symmetric(const SpMat& h, const std::array<SpMat, 3>& gens, double tol, int step) {
  for (int a = 0; a < 3; ++a) {
    const SpMat c = h * gens[a] - gens[a] * h;
    double worst = 0.0;
    for (Index k = 0; k < c.outerSize(); ++k)
      for (SpMat::InnerIterator it(c, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    if (worst > tol) {
      throw SymmetryViolation("flow: path Hamiltonian breaks the symmetry at step " + std::to_string(step), step);
    }
  }
}

// || U_g A - A U_g ||_F for U_g the product rotation, without forming U_g
inline double rotation_commutator(const Mat& a, const Mat& u_site, int length) {
  Mat ua(a.rows(), a.cols()), au_adj(a.rows(), a.cols());
  const Mat a_adj = a.adjoint();
  const Mat u_adj = u_site.adjoint();
  for (Index c = 0; c < a.cols(); ++c) {
    ua.col(c) = apply_product(u_site, a.col(c), length);
    au_adj.col(c) = apply_product(u_adj, a_adj.col(c), length);  // (A U)^* = U^* A^*
  }
  return (ua - au_adj.adjoint()).norm();
}
}  // namespace detail

/// Integrates the flow along the path; aborts with InconclusiveGap where the band separation closes.
inline FlowResult flow_integrate(const FlowPath& path, const FlowOptions& o = {}) {
  path.validate();
  if (o.n_steps < 1) throw InvalidArgument("flow: n_steps must be positive");
  const detail::PathSectors ps(path);
  const auto& layout = ps.layout;
  const int n = o.n_steps;
  const double ds = (path.end() - path.begin()) / n;
  const int length = path.length();
  const auto gens = total_spin(path.spin(), length);
  const Su2Triple site = spin_matrices(path.spin()).ops;

  FlowResult r;
  r.character_grid = o.character_grid;
  for (int i = 0; i <= n; ++i) r.s.push_back(path.begin() + i * ds);

  // band size from the start, then gaps along the grid
  const detail::RBlocks h0 = ps.h(path, path.begin());
  {
    std::vector<double> all;
    for (const auto& b : h0) {
      Eigen::SelfAdjointEigenSolver<RMat> es(b, Eigen::EigenvaluesOnly);
      for (Index i = 0; i < es.eigenvalues().size(); ++i) all.push_back(es.eigenvalues()(i));
    }
    std::sort(all.begin(), all.end());
    int deg = 0;
    while (deg < static_cast<int>(all.size()) && all[deg] <= all.front() + o.cluster_tol) ++deg;
    r.degeneracy_start = deg;
  }
  r.band_size = o.band_size.value_or(r.degeneracy_start);

  std::vector<BandData> bands;
  std::vector<cplx> chi0;
  for (int i = 0; i <= n; ++i) {
    detail::check_symmetric(ps.h_full(path, r.s[i]), gens, o.symmetry_tol, i);
    bands.push_back(detail::band(layout, ps.h(path, r.s[i]), r.band_size));
    const auto& b = bands.back();
    r.gap.push_back(b.gap);
    r.instantaneous_characters.push_back(detail::characters(layout, b.projector, o.character_grid));
    if (b.gap < o.gap_tol) throw InconclusiveGap("flow: ground band separation closes", r.s[i]);
    if (i > 0) {
      double jump = 0.0;
      for (std::size_t g = 0; g < o.character_grid.size(); ++g)
        jump = std::max(jump, std::abs(r.instantaneous_characters[i][g] - r.instantaneous_characters[i - 1][g]));
      if (jump > 1e-6) throw InconclusiveGap("flow: ground band changed symmetry content (level crossing)", r.s[i]);
    }
  }
  // degeneracy at the end by the same clustering rule
  {
    const auto& lo = bands.back().lowest;
    int deg = 0;
    while (deg < static_cast<int>(lo.size()) && lo[deg] <= lo.front() + o.cluster_tol) ++deg;
    r.degeneracy_end = deg;
  }
  const double min_gap = *std::min_element(r.gap.begin(), r.gap.end());
  r.gamma = o.gamma.value_or(o.gamma_fraction * min_gap);
  const BumpFilter filter(r.gamma);

  // forward integration with midpoint steps
  std::vector<Mat> rot;
  for (double g : o.g_grid) rot.push_back(exp_generator(site.along(o.axis), g));
  SectorOp u = layout.identity();
  r.initial_projector = bands.front().projector;
  r.fidelity.push_back(trace_product(r.initial_projector, bands.front().projector) / r.band_size);
  r.characters.push_back(detail::characters(layout, r.initial_projector, o.character_grid));
  std::vector<SectorOp> steps;
  for (int i = 0; i < n; ++i) {
    const double mid = r.s[i] + 0.5 * ds;
    const SectorOp a = detail::step_propagator(ps.h(path, mid), ps.dh(path, mid), filter, ds);
    double unit = 0.0;
    for (const auto& b : a.blocks) unit = std::max(unit, linalg::unitarity_defect(b));
    r.unitarity_defect.push_back(unit);
    double cov = 0.0;
    if (!rot.empty()) {
      const Mat full = layout.to_full(a);
      for (const auto& ug : rot) cov = std::max(cov, detail::rotation_commutator(full, ug, length));
    }
    r.covariance_defect.push_back(cov);
    u = a * u;
    steps.push_back(a);
    const SectorOp pt = u * r.initial_projector * adjoint(u);
    r.fidelity.push_back(trace_product(pt, bands[i + 1].projector) / r.band_size);
    r.characters.push_back(detail::characters(layout, pt, o.character_grid));
  }
  r.propagator = u;
  r.final_projector = u * r.initial_projector * adjoint(u);
  r.final_fidelity = r.fidelity.back();
  for (const auto& row : r.characters)
    for (std::size_t g = 0; g < row.size(); ++g) r.max_character_drift = std::max(r.max_character_drift, std::abs(row[g] - r.characters.front()[g]));

  // backward pass over the same steps
  SectorOp back = layout.identity();
  for (int i = n - 1; i >= 0; --i) {
    const double mid = r.s[i] + 0.5 * ds;
    back = detail::step_propagator(ps.h(path, mid), ps.dh(path, mid), filter, -ds) * back;
  }
  r.cocycle_defect = frobenius(back * u - layout.identity());

  if (o.halving_check) {
    SectorOp fine = layout.identity();
    const double h2 = 0.5 * ds;
    for (int i = 0; i < 2 * n; ++i) {
      const double mid = path.begin() + (i + 0.5) * h2;
      fine = detail::step_propagator(ps.h(path, mid), ps.dh(path, mid), filter, h2) * fine;
    }
    r.halving_defect = frobenius(fine * r.initial_projector * adjoint(fine) - r.final_projector);
  }

  // conjugation preserves operator norms of random Hermitian observables
  std::mt19937_64 rng(o.seed);
  const Mat uf = layout.to_full(u);
  for (int k = 0; k < o.norm_observables; ++k) {
    const Mat a = linalg::random_hermitian(layout.dim, rng);
    const Mat b = uf.adjoint() * a * uf;
    Eigen::SelfAdjointEigenSolver<Mat> ea(a, Eigen::EigenvaluesOnly), eb(0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly);
    const double na = ea.eigenvalues().cwiseAbs().maxCoeff(), nb = eb.eigenvalues().cwiseAbs().maxCoeff();
    r.norm_defect = std::max(r.norm_defect, std::abs(na - nb));
  }
  return r;
}

/// Max over steps and the g grid of ||U_g alpha - alpha U_g||_F for given step propagators.
inline double covariance_check(const FlowResult& r, double tol = 1e-8) {
  double worst = 0.0;
  for (double d : r.covariance_defect) worst = std::max(worst, d);
  if (worst > tol) throw SymmetryViolation("covariance_check: defect " + std::to_string(worst) + " exceeds tolerance");
  return worst;
}

struct EquivalenceVerdict {
  bool equivalent = false;
  int degeneracy_0 = 0, degeneracy_1 = 0;
  IrrepContent content_0, content_1;
  double character_mismatch = 0.0;  // transported vs. instantaneous band at the end
  double final_fidelity = 0.0;
  FlowResult flow;
};

/// Degeneracy, irrep content and transported characters compared at both ends of the path.
inline EquivalenceVerdict edge_rep_equivalence(const FlowPath& path, const FlowOptions& o = {}, double character_tol = 1e-6) {
  EquivalenceVerdict v;
  v.flow = flow_integrate(path, o);
  const auto gens = total_spin(path.spin(), path.length());
  GroundSpaceOptions go;
  go.cluster_tol = o.cluster_tol;
  go.band_size = v.flow.band_size;
  go.dense_cap = std::max<Index>(go.dense_cap, 1024);
  for (int end = 0; end < 2; ++end) {
    const SpMat h = build_hamiltonian((end == 0 ? path.knots.front() : path.knots.back()).spec);
    const SpectralData sd = ground_space(h, go);
    if (sd.inconclusive) throw InconclusiveGap("edge_rep_equivalence: endpoint band not resolved", end == 0 ? path.begin() : path.end());
    const IrrepContent c = ground_rep_decomposition(h, gens, sd);
    (end == 0 ? v.content_0 : v.content_1) = c;
  }
  v.degeneracy_0 = v.flow.degeneracy_start;
  v.degeneracy_1 = v.flow.degeneracy_end;
  for (std::size_t g = 0; g < v.flow.character_grid.size(); ++g) {
    v.character_mismatch =
        std::max(v.character_mismatch, std::abs(v.flow.characters.back()[g] - v.flow.instantaneous_characters.back()[g]));
  }
  v.final_fidelity = v.flow.final_fidelity;
  v.equivalent = v.degeneracy_0 == v.degeneracy_1 && v.content_0 == v.content_1 && v.character_mismatch <= character_tol;
  return v;
}

}  // namespace edgerep
