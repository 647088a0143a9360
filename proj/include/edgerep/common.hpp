#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace edgerep {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr const char* kVersion = "0.1.0";

// Exception hierarchy. The CLI maps these onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class MalformedRepresentation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonUniqueFixedPoint : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InconclusiveGap : public NumericalError {
 public:
  explicit InconclusiveGap(const std::string& what, double where = std::nan(""))
      : NumericalError(what), s_(where) {}
  double where() const { return s_; }

 private:
  double s_;
};

class SymmetryViolation : public NumericalError {
 public:
  explicit SymmetryViolation(const std::string& what, int step = -1)
      : NumericalError(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Half-integer spin label stored as the integer 2j.
struct TwiceSpin {
  int twice = 0;

  constexpr TwiceSpin() = default;
  constexpr explicit TwiceSpin(int two_j) : twice(two_j) {}

  /// Parses a floating-point spin value; rejects negative or non-half-integer input.
  static TwiceSpin from_double(double j) {
    const double two_j = 2.0 * j;
    const double rounded = std::round(two_j);
    if (!(j >= 0.0) || std::abs(two_j - rounded) > 1e-12) {
      throw InvalidArgument("spin must be a non-negative half-integer, got " + std::to_string(j));
    }
    return TwiceSpin(static_cast<int>(rounded));
  }

  constexpr double value() const { return 0.5 * twice; }
  constexpr int dim() const { return twice + 1; }
  constexpr double casimir() const { return value() * (value() + 1.0); }
  constexpr bool is_integer() const { return twice % 2 == 0; }

  friend constexpr auto operator<=>(const TwiceSpin&, const TwiceSpin&) = default;
};

inline std::string to_string(TwiceSpin j) {
  return j.is_integer() ? std::to_string(j.twice / 2) : std::to_string(j.twice) + "/2";
}

namespace detail {
// strided work split; rethrows the first exception from any worker
template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
  const std::size_t nt = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(n, 1));
  if (nt == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nt);
  for (std::size_t w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += nt) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}
}  // namespace detail

}  // namespace edgerep
