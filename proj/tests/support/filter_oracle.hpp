#pragma once

// Filter reference values from the defining integrals: w(xi) = |Phi(xi)|^2 / (2 pi int phi^2)
// with Phi the cosine transform of the bump, then the double integral for W(E).

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

class FilterQuadrature {
 public:
  /// Outer integrals run over |xi| < cutoff / gamma; w is below 1e-16 beyond 400 / gamma.
  explicit FilterQuadrature(double gamma, double cutoff = 400.0) : gamma_(gamma) {
    nrm_ = piecewise([&](double x) { return phi(x) * phi(x); }, -0.5 * gamma_, 0.5 * gamma_, 64);
    using G = boost::math::quadrature::gauss<double, 30>;
    const int n = static_cast<int>(cutoff) + 16;
    const double h = cutoff / gamma_ / n;
    const auto& xs = G::abscissa();
    const auto& ws = G::weights();
    for (int i = 0; i < n; ++i) {
      const double mid = (i + 0.5) * h;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        for (int sgn : {-1, 1}) {
          if (xs[k] == 0.0 && sgn < 0) continue;
          const double xi = mid + sgn * 0.5 * h * xs[k];
          xi_.push_back(xi);
          wt_.push_back(0.5 * h * ws[k]);
          w_.push_back(w(xi));
        }
      }
    }
  }

  double phi(double x) const {
    const double u = 2.0 * x / gamma_;
    return std::abs(u) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - u * u));
  }

  // phi is even, so its transform is 2 int_0^{gamma/2} phi cos
  double big_phi(double xi) const {
    const int n = 64 + static_cast<int>(std::abs(xi) * gamma_);
    return 2.0 * piecewise([&](double x) { return phi(x) * std::cos(xi * x); }, 0.0, 0.5 * gamma_, n);
  }

  double w(double xi) const {
    const double p = big_phi(xi);
    return p * p / (2.0 * M_PI * nrm_);
  }

  /// int w(xi) e^{i xi E} dxi; w is even so only the cosine part survives.
  double w_hat(double e) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < xi_.size(); ++i) acc += wt_[i] * w_[i] * std::cos(xi_[i] * e);
    return 2.0 * acc;
  }

  /// Im W(E) = - int dxi w(xi) int_0^xi sin(zeta E) dzeta; the real part vanishes for even w.
  double kernel_imag(double e) const {
    using G = boost::math::quadrature::gauss<double, 30>;
    double acc = 0.0;
    for (std::size_t i = 0; i < xi_.size(); ++i) {
      const double inner = G::integrate([&](double z) { return std::sin(z * e); }, 0.0, xi_[i]);
      acc += wt_[i] * w_[i] * inner;
    }
    return -2.0 * acc;  // odd inner integral times even w: the negative half doubles it
  }

 private:
  template <typename F>
  static double piecewise(F&& f, double a, double b, int n) {
    double acc = 0.0;
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) acc += boost::math::quadrature::gauss<double, 30>::integrate(f, a + i * h, a + (i + 1) * h);
    return acc;
  }

  double gamma_;
  double nrm_ = 1.0;
  std::vector<double> xi_, wt_, w_;
};

}  // namespace oracle
