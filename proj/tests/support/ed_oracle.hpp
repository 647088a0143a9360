#pragma once

// Exact-diagonalization reference values used by the tests.

#include <map>

#include <Eigen/Dense>

#include "edgerep/exact_diag.hpp"

namespace oracle {

using namespace edgerep;

/// Thermal <S^3_x S^3_y> matrix at inverse temperature beta, by full dense diagonalization.
inline RMat thermal_szsz(const HamiltonianSpec& spec, double beta) {
  const Mat h = Mat(build_hamiltonian(spec));
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const RVec e = es.eigenvalues();
  const RVec w = (-(beta) * (e.array() - e.minCoeff())).exp();
  const double z = w.sum();
  const auto basis = make_basis(spec.spin, spec.length);
  const int n = spec.length;
  // S^3 is diagonal in the product basis
  RMat mz(basis.codes.size(), n);
  for (Index i = 0; i < static_cast<Index>(basis.codes.size()); ++i)
    for (int x = 0; x < n; ++x) mz(i, x) = 0.5 * spec.spin.twice - basis.local(basis.codes[i], x);
  const RMat prob = es.eigenvectors().cwiseAbs2();  // |<code|k>|^2
  const RVec diag = prob * w / z;                   // thermal weight of each basis state
  RMat c(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) c(x, y) = (diag.array() * mz.col(x).array() * mz.col(y).array()).sum();
  return c;
}

/// Spin-1/2 (or spin-S) single-line Hamiltonian -(2S+1) sum P0 as an af_h spec.
inline HamiltonianSpec single_line(TwiceSpin s, int length) {
  HamiltonianSpec spec;
  spec.spin = s;
  spec.model = ModelKind::af_h;
  spec.J.assign(s.twice + 1, 0.0);
  spec.J.back() = 1.0;
  spec.length = length;
  return spec;
}

/// Low-lying band from sector Lanczos runs, embedded into the full product basis.
struct BandVectors {
  Mat vectors;  // orthonormal columns
  std::vector<double> energies;
  double next_level = 0.0;  // lowest level above the band over the sectors searched
};

/// counts: number of band states wanted in each sector 2 S^z_total = key.
inline BandVectors band_vectors(const HamiltonianSpec& spec, const std::map<int, int>& counts) {
  BandVectors out;
  const Index full = spec.dimension();
  int total = 0;
  for (const auto& [tm, c] : counts) total += c;
  out.vectors = Mat::Zero(full, total);
  out.next_level = std::numeric_limits<double>::infinity();
  int col = 0;
  for (const auto& [tm, c] : counts) {
    const SectorHamiltonian sh = build_sector_hamiltonian(spec, tm);
    const RSpMat& h = sh.H;
    auto apply = [&](const RVec& x, RVec& y) { y = h * x; };
    const auto ep = lanczos_lowest<double>(apply, sh.basis.size(), c + 1);
    for (int i = 0; i < c; ++i) {
      out.energies.push_back(ep.values[i]);
      for (Index r = 0; r < sh.basis.size(); ++r) out.vectors(sh.basis.codes[r], col) = ep.vectors(r, i);
      ++col;
    }
    out.next_level = std::min(out.next_level, ep.values[c]);
  }
  return out;
}

/// op acting on site x of a full-basis vector, site 0 most significant.
inline Vec apply_site(const Mat& op, const Vec& psi, int x, int length) {
  const Index d = op.rows();
  Index stride = 1;
  for (int y = length - 1; y > x; --y) stride *= d;
  Vec out = Vec::Zero(psi.size());
  for (Index base = 0; base < psi.size(); base += stride * d)
    for (Index r = 0; r < stride; ++r)
      for (Index t = 0; t < d; ++t) {
        cplx acc = 0.0;
        for (Index s = 0; s < d; ++s) acc += op(t, s) * psi(base + s * stride + r);
        out(base + t * stride + r) = acc;
      }
  return out;
}

/// Tr(P A_x B_y) / Tr(P) for the band projector P.
inline cplx band_two_point(const BandVectors& b, const Mat& a, int x, const Mat& bop, int y, int length) {
  cplx acc = 0.0;
  for (Index c = 0; c < b.vectors.cols(); ++c) {
    const Vec v = b.vectors.col(c);
    acc += v.dot(apply_site(a, apply_site(bop, v, y, length), x, length));
  }
  return acc / static_cast<double>(b.vectors.cols());
}

/// Tr(P O) / Tr(P) for the string operator S^z_x exp(i pi sum_{x<z<y} S^z_z) S^z_y, diagonal in the product basis.
inline double band_string(const BandVectors& b, TwiceSpin s, int x, int y, int length) {
  const ChainBasis basis = make_basis(s, length);
  double acc = 0.0;
  for (Index code = 0; code < static_cast<Index>(basis.codes.size()); ++code) {
    const double w = b.vectors.row(code).squaredNorm();
    if (w == 0.0) continue;
    auto mz = [&](int site) { return 0.5 * s.twice - basis.local(basis.codes[code], site); };
    double phase_m = 0.0;
    for (int z = x + 1; z < y; ++z) phase_m += mz(z);
    acc += w * mz(x) * mz(y) * std::cos(kPi * phase_m);
  }
  return acc / static_cast<double>(b.vectors.cols());
}

}  // namespace oracle
