#pragma once

// Exact diagonalization of SU(2)-invariant nearest-neighbour spin chains.
//
// Basis states are labelled by codes sum_x s_x d^{L-1-x} (site 0 most
// significant), with local index s = 0 for m = S down to s = 2S for m = -S.
// The two-site term acts on C^d (x) C^d with the same ordering.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "edgerep/common.hpp"
#include "edgerep/group_rep.hpp"
#include "edgerep/lanczos.hpp"
#include "edgerep/linalg.hpp"

namespace edgerep {

using SpMat = Eigen::SparseMatrix<cplx>;
using RSpMat = Eigen::SparseMatrix<double>;

enum class ModelKind { af_h, aklt, custom };
enum class Boundary { open, periodic };

inline ModelKind parse_model(const std::string& s) {
  if (s == "af_h" || s == "AF_H") return ModelKind::af_h;
  if (s == "aklt" || s == "AKLT") return ModelKind::aklt;
  if (s == "custom") return ModelKind::custom;
  throw InvalidArgument("unknown model '" + s + "'");
}

inline const char* to_string(ModelKind m) {
  return m == ModelKind::af_h ? "af_h" : (m == ModelKind::aklt ? "aklt" : "custom");
}

inline Boundary parse_boundary(const std::string& s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw InvalidArgument("unknown boundary '" + s + "'");
}

inline const char* to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

struct HamiltonianSpec {
  TwiceSpin spin{2};
  ModelKind model = ModelKind::aklt;
  std::vector<double> J;                 // af_h: J_0..J_{2S} >= 0
  std::vector<double> bond_polynomial;   // custom: h = sum_n c_n (S.S)^n
  std::optional<Mat> bond_matrix;        // custom: explicit d^2 x d^2 two-site term
  int length = 4;
  Boundary boundary = Boundary::open;
  std::vector<double> bond_weights;      // optional multiplier per bond
  Index dim_cap = 531441;                // 3^12

  int local_dim() const { return spin.dim(); }
  int bond_count() const { return boundary == Boundary::open ? length - 1 : length; }

  Index dimension() const {
    Index n = 1;
    for (int i = 0; i < length; ++i) {
      n *= local_dim();
      if (n > (Index(1) << 40)) break;
    }
    return n;
  }

  void validate() const {
    if (spin.twice < 1) throw InvalidArgument("spec: spin must be at least 1/2");
    if (length < 2) throw InvalidArgument("spec: length must be at least 2");
    if (boundary == Boundary::periodic && length < 3) throw InvalidArgument("spec: periodic chain needs length >= 3");
    if (model == ModelKind::af_h) {
      if (J.size() != static_cast<std::size_t>(spin.twice + 1)) {
        throw InvalidArgument("spec: af_h needs J_0..J_2S (" + std::to_string(spin.twice + 1) + " values)");
      }
      for (double j : J)
        if (!(j >= 0.0)) throw InvalidArgument("spec: couplings J_k must be non-negative");
    }
    if (model == ModelKind::aklt && spin.twice != 2) throw InvalidArgument("spec: aklt model is defined for S = 1");
    if (model == ModelKind::custom) {
      if (bond_polynomial.empty() == !bond_matrix.has_value()) {
        throw InvalidArgument("spec: custom model needs exactly one of bond_polynomial or bond_matrix");
      }
      if (bond_matrix) {
        const Index d2 = static_cast<Index>(local_dim()) * local_dim();
        if (bond_matrix->rows() != d2 || bond_matrix->cols() != d2) {
          throw InvalidArgument("spec: bond_matrix must be d^2 x d^2");
        }
        if (!linalg::is_hermitian(*bond_matrix, 1e-12)) throw InvalidArgument("spec: bond_matrix is not Hermitian");
      }
    }
    if (!bond_weights.empty()) {
      if (bond_weights.size() != static_cast<std::size_t>(bond_count())) {
        throw InvalidArgument("spec: bond_weights must have one entry per bond");
      }
      for (double w : bond_weights)
        if (!std::isfinite(w)) throw InvalidArgument("spec: bond weight not finite");
    }
    if (dimension() > dim_cap) {
      throw InvalidArgument("spec: Hilbert dimension " + std::to_string(dimension()) + " exceeds cap " +
                            std::to_string(dim_cap));
    }
  }

  double weight(int bond) const { return bond_weights.empty() ? 1.0 : bond_weights[bond]; }
};

/// Coefficients (ascending powers of z) of
/// Q_k(z) = 2^k [(2S-k)!/(2S)!]^2 prod_{l=2S-k+1}^{2S} (z_l - z),  z_l = l(l+1)/2 - S(S+1).
inline std::vector<double> q_polynomial(TwiceSpin s, int k) {
  const int two_s = s.twice;
  if (k < 0 || k > two_s) throw InvalidArgument("q_polynomial: k must lie in [0, 2S]");
  double pref = std::pow(2.0, k);
  double ratio = 1.0;  // (2S-k)!/(2S)!
  for (int i = two_s - k + 1; i <= two_s; ++i) ratio /= i;
  pref *= ratio * ratio;
  std::vector<double> poly{pref};
  for (int l = two_s - k + 1; l <= two_s; ++l) {
    const double zl = 0.5 * l * (l + 1) - s.casimir();
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += zl * poly[i];
      next[i + 1] -= poly[i];
    }
    poly = std::move(next);
  }
  return poly;
}

/// z_l = l(l+1)/2 - S(S+1): value of S_x.S_y on total two-site spin l.
inline double z_value(TwiceSpin s, int l) { return 0.5 * l * (l + 1) - s.casimir(); }

/// S_1 . S_2 on C^d (x) C^d.
inline Mat spin_dot(TwiceSpin s) {
  const auto g = spin_matrices(s).ops;
  Mat out = Mat::Zero(g.dim() * g.dim(), g.dim() * g.dim());
  for (int a = 0; a < 3; ++a) out += linalg::kron(g[a], g[a]);
  return out;
}

inline Mat polynomial_of(const Mat& x, const std::vector<double>& coeffs) {
  Mat out = Mat::Zero(x.rows(), x.cols());
  Mat p = Mat::Identity(x.rows(), x.cols());
  for (double c : coeffs) {
    out += c * p;
    p = p * x;
  }
  return out;
}

/// The two-site interaction of a spec.
inline Mat bond_term(const HamiltonianSpec& spec) {
  const Mat sd = spin_dot(spec.spin);
  switch (spec.model) {
    case ModelKind::af_h: {
      Mat h = Mat::Zero(sd.rows(), sd.cols());
      for (int k = 0; k <= spec.spin.twice; ++k)
        if (spec.J[k] != 0.0) h -= spec.J[k] * polynomial_of(sd, q_polynomial(spec.spin, k));
      return h;
    }
    case ModelKind::aklt:
      return polynomial_of(sd, {1.0 / 3.0, 0.5, 1.0 / 6.0});
    case ModelKind::custom:
      return spec.bond_matrix ? *spec.bond_matrix : polynomial_of(sd, spec.bond_polynomial);
  }
  throw InvalidArgument("bond_term: unknown model");
}

inline std::vector<std::pair<int, int>> bonds(const HamiltonianSpec& spec) {
  std::vector<std::pair<int, int>> out;
  for (int x = 0; x + 1 < spec.length; ++x) out.emplace_back(x, x + 1);
  if (spec.boundary == Boundary::periodic) out.emplace_back(spec.length - 1, 0);
  return out;
}

/// Basis of the sector with total 2 S^z = twice_m (or the full space if nullopt).
struct ChainBasis {
  int length = 0;
  int d = 0;
  std::vector<long long> codes;  // sorted
  std::vector<long long> pow;    // d^{L-1-x}

  Index size() const { return static_cast<Index>(codes.size()); }
  int local(long long code, int x) const { return static_cast<int>((code / pow[x]) % d); }
  Index index_of(long long code) const {
    const auto it = std::lower_bound(codes.begin(), codes.end(), code);
    if (it == codes.end() || *it != code) return -1;
    return static_cast<Index>(it - codes.begin());
  }
};

inline ChainBasis make_basis(TwiceSpin s, int length, std::optional<int> twice_m = std::nullopt) {
  ChainBasis b;
  b.length = length;
  b.d = s.dim();
  b.pow.assign(length, 1);
  for (int x = length - 2; x >= 0; --x) b.pow[x] = b.pow[x + 1] * b.d;
  const long long total = b.pow[0] * b.d;
  for (long long c = 0; c < total; ++c) {
    if (twice_m) {
      int tm = 0;
      long long r = c;
      for (int x = length - 1; x >= 0; --x) {
        tm += s.twice - 2 * static_cast<int>(r % b.d);
        r /= b.d;
      }
      if (tm != *twice_m) continue;
    }
    b.codes.push_back(c);
  }
  return b;
}

namespace detail {
template <typename Scalar>
Eigen::SparseMatrix<Scalar> assemble(const HamiltonianSpec& spec, const ChainBasis& basis, const Mat& h) {
  const int d = basis.d;
  std::vector<Eigen::Triplet<Scalar>> trip;
  const auto bl = bonds(spec);
  for (std::size_t bi = 0; bi < bl.size(); ++bi) {
    const auto [x, y] = bl[bi];
    const double w = spec.weight(static_cast<int>(bi));
    if (w == 0.0) continue;
    for (Index col = 0; col < basis.size(); ++col) {
      const long long code = basis.codes[col];
      const int sx = basis.local(code, x), sy = basis.local(code, y);
      const Index pair = static_cast<Index>(sx) * d + sy;
      for (Index row2 = 0; row2 < h.rows(); ++row2) {
        const cplx v = h(row2, pair);
        if (std::abs(v) < 1e-15) continue;
        const int tx = static_cast<int>(row2 / d), ty = static_cast<int>(row2 % d);
        const long long nc = code + (tx - sx) * basis.pow[x] + (ty - sy) * basis.pow[y];
        const Index row = basis.index_of(nc);
        if (row < 0) throw InvalidArgument("build_hamiltonian: bond term does not conserve S^z");
        if constexpr (std::is_same_v<Scalar, double>) {
          trip.emplace_back(row, col, w * v.real());
        } else {
          trip.emplace_back(row, col, w * v);
        }
      }
    }
  }
  Eigen::SparseMatrix<Scalar> m(basis.size(), basis.size());
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}
}  // namespace detail

/// Full-space Hamiltonian sum_bonds w_b h_b.
inline SpMat build_hamiltonian(const HamiltonianSpec& spec) {
  spec.validate();
  const ChainBasis basis = make_basis(spec.spin, spec.length);
  return detail::assemble<cplx>(spec, basis, bond_term(spec));
}

struct SectorHamiltonian {
  ChainBasis basis;
  RSpMat H;
};

/// Real Hamiltonian restricted to the sector 2 S^z_total = twice_m.
inline SectorHamiltonian build_sector_hamiltonian(const HamiltonianSpec& spec, int twice_m) {
  spec.validate();
  const Mat h = bond_term(spec);
  if (h.imag().cwiseAbs().maxCoeff() > 1e-14) throw InvalidArgument("build_sector_hamiltonian: bond term not real");
  SectorHamiltonian out;
  out.basis = make_basis(spec.spin, spec.length, twice_m);
  if (out.basis.size() == 0) throw InvalidArgument("build_sector_hamiltonian: empty sector");
  out.H = detail::assemble<double>(spec, out.basis, h);
  return out;
}

/// Sparse total-spin generators sum_x S^a_x on the full chain.
inline std::array<SpMat, 3> total_spin(TwiceSpin s, int length) {
  const auto g = spin_matrices(s).ops;
  const ChainBasis basis = make_basis(s, length);
  std::array<SpMat, 3> out;
  for (int a = 0; a < 3; ++a) {
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Index col = 0; col < basis.size(); ++col) {
      const long long code = basis.codes[col];
      for (int x = 0; x < length; ++x) {
        const int sx = basis.local(code, x);
        for (int t = 0; t < basis.d; ++t) {
          const cplx v = g[a](t, sx);
          if (v == cplx(0.0)) continue;
          trip.emplace_back(static_cast<Index>(code + (t - sx) * basis.pow[x]), col, v);
        }
      }
    }
    out[a].resize(basis.size(), basis.size());
    out[a].setFromTriplets(trip.begin(), trip.end());
  }
  return out;
}

/// Product operator u^{(x)L} applied to a state vector without forming the matrix.
inline Vec apply_product(const Mat& u, const Vec& psi, int length) {
  const Index d = u.rows();
  Vec cur = psi;
  Index stride = 1;
  for (int x = length - 1; x >= 0; --x) {
    Vec next = Vec::Zero(cur.size());
    const Index block = stride * d;
    for (Index base = 0; base < cur.size(); base += block) {
      for (Index r = 0; r < stride; ++r) {
        for (Index t = 0; t < d; ++t) {
          cplx acc = 0.0;
          for (Index s = 0; s < d; ++s) acc += u(t, s) * cur(base + s * stride + r);
          next(base + t * stride + r) = acc;
        }
      }
    }
    cur = std::move(next);
    stride *= d;
  }
  return cur;
}

struct GroundSpaceOptions {
  double cluster_tol = 1e-8;
  int band_size = 0;          // > 0 forces the number of states in the ground band
  int max_eigs = 24;          // iterative path: give up looking for the band edge beyond this
  Index dense_cap = 1024;
  LanczosOptions lanczos;
};

struct SpectralData {
  std::vector<double> eigenvalues;  // lowest computed part of the spectrum
  int degeneracy = 0;
  double ground_energy = 0.0;
  std::optional<double> gap;        // to the next cluster; empty if not resolved
  double splitting = 0.0;           // spread of the ground band
  Mat ground_vectors;               // orthonormal columns spanning the band
  bool inconclusive = false;

  Mat projector() const { return ground_vectors * ground_vectors.adjoint(); }
};

namespace detail {
inline SpectralData cluster(std::vector<double> ev, Mat vecs, const GroundSpaceOptions& o, bool complete) {
  SpectralData sd;
  sd.eigenvalues = ev;
  sd.ground_energy = ev.front();
  int band = 0;
  if (o.band_size > 0) {
    band = std::min<int>(o.band_size, static_cast<int>(ev.size()));
  } else {
    while (band < static_cast<int>(ev.size()) && ev[band] <= ev.front() + o.cluster_tol) ++band;
  }
  sd.degeneracy = band;
  sd.splitting = ev[band - 1] - ev.front();
  sd.ground_vectors = vecs.leftCols(band);
  if (band < static_cast<int>(ev.size())) {
    const double sep = ev[band] - ev[band - 1];
    sd.gap = ev[band] - ev.front();
    if (sep < 10.0 * o.cluster_tol) sd.inconclusive = true;
  } else if (!complete) {
    sd.inconclusive = true;  // band edge not reached
  }
  return sd;
}
}  // namespace detail

/// Lowest cluster of a Hermitian matrix, its spread and the gap above it.
inline SpectralData ground_space(const SpMat& h, const GroundSpaceOptions& o = {}) {
  const Index n = h.rows();
  if (n == 0 || h.cols() != n) throw InvalidArgument("ground_space: matrix must be square and non-empty");
  const Mat dense_check = n <= o.dense_cap ? Mat(h) : Mat();
  if (n <= o.dense_cap) {
    if (linalg::hermiticity_defect(dense_check) > 1e-10) throw InvalidArgument("ground_space: matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (dense_check + dense_check.adjoint()));
    if (es.info() != Eigen::Success) throw NumericalError("ground_space: eigensolver failed");
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return detail::cluster(ev, es.eigenvectors(), o, true);
  }
  std::function<void(const Vec&, Vec&)> apply = [&](const Vec& x, Vec& y) { y = h * x; };
  int want = o.band_size > 0 ? o.band_size + 1 : 2;
  while (true) {
    want = std::min<int>(want, static_cast<int>(n));
    const auto ep = lanczos_lowest<cplx>(apply, n, want, o.lanczos);
    SpectralData sd = detail::cluster(ep.values, ep.vectors, o, want == n);
    if (sd.gap || want >= o.max_eigs || want == n) return sd;
    want = std::min(2 * want, o.max_eigs);
  }
}

/// Minimum eigenvalue of the two-site term.
inline double bond_minimum(const HamiltonianSpec& spec) {
  const Mat h = bond_term(spec);
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct FrustrationFreeResult {
  bool frustration_free = true;
  int failing_length = -1;
  Vec witness;                // ground state of H violating some local minimum, or a kernel vector above E_0
  std::vector<double> ground_energy;
  std::vector<double> bond_sum;  // sum of per-bond minima
  std::vector<int> degeneracy;
};

/// Checks, for each open chain length, that the ground space of H is the
/// intersection of the ground spaces of the individual bond terms.
inline FrustrationFreeResult frustration_free_check(HamiltonianSpec spec, const std::vector<int>& lengths,
                                                    double tol = 1e-8) {
  FrustrationFreeResult res;
  spec.boundary = Boundary::open;
  const Mat h = bond_term(spec);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const double emin = es.eigenvalues()(0);
  Index kdim = 0;
  while (kdim < h.rows() && es.eigenvalues()(kdim) <= emin + 1e-10) ++kdim;
  const Mat ploc = es.eigenvectors().leftCols(kdim) * es.eigenvectors().leftCols(kdim).adjoint();

  for (int L : lengths) {
    spec.length = L;
    spec.bond_weights.clear();
    const SpMat H = build_hamiltonian(spec);
    HamiltonianSpec kspec = spec;
    kspec.model = ModelKind::custom;
    kspec.bond_polynomial.clear();
    kspec.bond_matrix = Mat(Mat::Identity(h.rows(), h.cols()) - ploc);
    const SpMat K = build_hamiltonian(kspec);

    GroundSpaceOptions go;
    go.cluster_tol = tol;
    const SpectralData gh = ground_space(H, go);
    const SpectralData gk = ground_space(K, go);
    const double sum_min = (L - 1) * emin;
    res.ground_energy.push_back(gh.ground_energy);
    res.bond_sum.push_back(sum_min);
    res.degeneracy.push_back(gh.degeneracy);

    const bool energy_ok = std::abs(gh.ground_energy - sum_min) <= 1e-10 * std::max(1.0, std::abs(sum_min));
    const bool kernel_nonempty = std::abs(gk.ground_energy) <= 1e-10;
    bool same = energy_ok && kernel_nonempty && gh.degeneracy == gk.degeneracy;
    if (same) {
      const Eigen::JacobiSVD<Mat> svd(gh.ground_vectors.adjoint() * gk.ground_vectors);
      same = svd.singularValues().minCoeff() > 1.0 - 1e-8;
    }
    if (!same) {
      res.frustration_free = false;
      res.failing_length = L;
      // a ground state of H with positive weight outside the local ground spaces
      res.witness = gh.ground_vectors.col(0);
      return res;
    }
  }
  return res;
}

/// Representation content of the total-spin action on the ground band.
inline IrrepContent ground_rep_decomposition(const SpMat& h, const std::array<SpMat, 3>& generators,
                                             const SpectralData& sd, double commute_tol = 1e-10) {
  for (const auto& g : generators) {
    if (g.rows() != h.rows()) throw InvalidArgument("ground_rep_decomposition: dimension mismatch");
    const SpMat c = h * g - g * h;
    double worst = 0.0;
    for (Index k = 0; k < c.outerSize(); ++k)
      for (SpMat::InnerIterator it(c, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    if (worst > commute_tol) throw InvalidArgument("ground_rep_decomposition: generators do not commute with H");
  }
  const Mat& v = sd.ground_vectors;
  Su2Triple r;
  r.x = v.adjoint() * (generators[0] * v);
  r.y = v.adjoint() * (generators[1] * v);
  r.z = v.adjoint() * (generators[2] * v);
  return decompose_into_irreps(r);
}

}  // namespace edgerep
