// qubit.hpp
// Single-qubit state representations: Bloch vectors, 2x2 density matrices,
// Pauli projections and the two distance measures (fidelity and
// Hilbert-Schmidt distance), each with a matrix route and a Bloch route.

#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace qtomo {

using complex = std::complex<double>;

/// Tolerance on |s| used by the physicality and purity predicates.
inline constexpr double kBallTolerance = 1e-12;

/// Tolerance on the density-matrix invariants (Hermiticity, trace, spectrum).
inline constexpr double kMatrixTolerance = 1e-12;

class InvalidState : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidAxis : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Measurement direction; the values match the Pauli index (sigma_1..sigma_3).
enum class Axis : int { X = 1, Y = 2, Z = 3 };

inline constexpr std::array<Axis, 3> kAxes{Axis::X, Axis::Y, Axis::Z};

/// Outcome of a single Pauli measurement, i.e. the eigenvalue +1 or -1.
enum class Outcome : int { Minus = -1, Plus = +1 };

inline Axis axis_from_int(int i) {
  if (i < 1 || i > 3) throw InvalidAxis("axis must be 1, 2 or 3, got " + std::to_string(i));
  return static_cast<Axis>(i);
}

inline std::size_t axis_index(Axis a) {
  const int i = static_cast<int>(a);
  if (i < 1 || i > 3) throw InvalidAxis("axis must be 1, 2 or 3, got " + std::to_string(i));
  return static_cast<std::size_t>(i - 1);
}

// ---------------------------------------------------------------------------
// Bloch vectors
// ---------------------------------------------------------------------------

/// Real 3-vector parameterizing a qubit state. Any vector can be stored (the
/// unconditioned Bayesian estimator produces vectors outside the unit ball);
/// use is_physical() to check membership in the Bloch ball.
struct BlochVector {
  std::array<double, 3> s{0.0, 0.0, 0.0};

  constexpr BlochVector() = default;
  constexpr BlochVector(double s1, double s2, double s3) : s{s1, s2, s3} {}
  explicit constexpr BlochVector(const std::array<double, 3>& v) : s(v) {}

  constexpr double operator[](std::size_t i) const { return s[i]; }
  constexpr double& operator[](std::size_t i) { return s[i]; }
  double operator[](Axis a) const { return s[axis_index(a)]; }

  double norm_squared() const { return s[0] * s[0] + s[1] * s[1] + s[2] * s[2]; }
  double norm() const { return std::sqrt(norm_squared()); }

  double dot(const BlochVector& o) const { return s[0] * o.s[0] + s[1] * o.s[1] + s[2] * o.s[2]; }

  bool is_physical() const { return norm_squared() <= 1.0 + kBallTolerance; }
  bool is_pure() const { return std::abs(norm() - 1.0) <= kBallTolerance; }

  friend BlochVector operator+(const BlochVector& a, const BlochVector& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  }
  friend BlochVector operator-(const BlochVector& a, const BlochVector& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
  }
  friend BlochVector operator*(double k, const BlochVector& a) { return {k * a[0], k * a[1], k * a[2]}; }
  friend bool operator==(const BlochVector&, const BlochVector&) = default;
};

/// The pure state along (1,1,1)/sqrt(3) used by the reference experiments.
inline BlochVector pure_reference_state() {
  const double c = 1.0 / std::sqrt(3.0);
  return {c, c, c};
}

/// The mixed state [0.3, -0.4, 0.3] used by the reference experiments.
inline constexpr BlochVector mixed_reference_state() { return {0.3, -0.4, 0.3}; }

// ---------------------------------------------------------------------------
// 2x2 complex matrices
// ---------------------------------------------------------------------------

/// Plain 2x2 complex matrix, row-major.
struct Matrix2 {
  std::array<complex, 4> a{};

  constexpr complex& operator()(std::size_t r, std::size_t c) { return a[2 * r + c]; }
  constexpr const complex& operator()(std::size_t r, std::size_t c) const { return a[2 * r + c]; }

  static constexpr Matrix2 identity() { return Matrix2{{complex{1, 0}, {0, 0}, {0, 0}, {1, 0}}}; }

  complex trace() const { return a[0] + a[3]; }
  complex det() const { return a[0] * a[3] - a[1] * a[2]; }

  Matrix2 adjoint() const { return Matrix2{{std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])}}; }

  friend Matrix2 operator+(const Matrix2& x, const Matrix2& y) {
    Matrix2 r;
    for (std::size_t i = 0; i < 4; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
  }
  friend Matrix2 operator-(const Matrix2& x, const Matrix2& y) {
    Matrix2 r;
    for (std::size_t i = 0; i < 4; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
  }
  friend Matrix2 operator*(complex k, const Matrix2& x) {
    Matrix2 r;
    for (std::size_t i = 0; i < 4; ++i) r.a[i] = k * x.a[i];
    return r;
  }
  friend Matrix2 operator*(const Matrix2& x, const Matrix2& y) {
    Matrix2 r;
    r(0, 0) = x(0, 0) * y(0, 0) + x(0, 1) * y(1, 0);
    r(0, 1) = x(0, 0) * y(0, 1) + x(0, 1) * y(1, 1);
    r(1, 0) = x(1, 0) * y(0, 0) + x(1, 1) * y(1, 0);
    r(1, 1) = x(1, 0) * y(0, 1) + x(1, 1) * y(1, 1);
    return r;
  }

  /// Largest absolute entrywise difference.
  double max_abs_diff(const Matrix2& o) const {
    double m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - o.a[i]));
    return m;
  }
};

inline constexpr Matrix2 kIdentity = Matrix2::identity();
inline constexpr Matrix2 kSigma1{{complex{0, 0}, {1, 0}, {1, 0}, {0, 0}}};
inline constexpr Matrix2 kSigma2{{complex{0, 0}, {0, -1}, {0, 1}, {0, 0}}};
inline constexpr Matrix2 kSigma3{{complex{1, 0}, {0, 0}, {0, 0}, {-1, 0}}};

inline const Matrix2& pauli(Axis axis) {
  static constexpr std::array<Matrix2, 3> sigmas{kSigma1, kSigma2, kSigma3};
  return sigmas[axis_index(axis)];
}

/// Relative size below which a 2x2 eigenvalue (or 1 - |s|^2) is
/// indistinguishable from zero after rounding of the entries.
inline constexpr double kRoundingZero = 8.0 * std::numeric_limits<double>::epsilon();

/// Eigenvalues (descending) of the Hermitian part of m. The smaller one is
/// obtained as det/larger, which keeps it accurate when it is tiny compared
/// to the larger one; it is set to exactly 0 when below rounding level.
inline std::array<double, 2> hermitian_eigenvalues(const Matrix2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  const double mean = 0.5 * (a + d);
  const double q = std::hypot(0.5 * (a - d), std::abs(b));
  const double hi = mean + q;
  double lo = mean - q;
  if (hi > 0.0) {
    lo = (a * d - std::norm(b)) / hi;
    if (std::abs(lo) <= kRoundingZero * hi) lo = 0.0;
  }
  return {hi, lo};
}

namespace detail {

// Principal square root of a Hermitian matrix built from its spectral
// decomposition; negative eigenvalues are clamped to zero.
inline Matrix2 hermitian_sqrt(const Matrix2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  const double mean = 0.5 * (a + d);
  const double q = std::hypot(0.5 * (a - d), std::abs(b));
  if (q == 0.0) return complex{std::sqrt(std::max(mean, 0.0)), 0.0} * kIdentity;
  const auto [hi, lo] = hermitian_eigenvalues(m);
  Matrix2 herm;
  herm(0, 0) = a;
  herm(1, 1) = d;
  herm(0, 1) = b;
  herm(1, 0) = std::conj(b);
  // Projector onto the larger eigenvalue: (M - lambda_min I)/(lambda_max - lambda_min).
  const Matrix2 p_hi = complex{1.0 / (2.0 * q), 0.0} * (herm - complex{mean - q, 0.0} * kIdentity);
  const Matrix2 p_lo = kIdentity - p_hi;
  return complex{std::sqrt(std::max(hi, 0.0)), 0.0} * p_hi + complex{std::sqrt(std::max(lo, 0.0)), 0.0} * p_lo;
}

// Tr sqrt(sqrt(rho) omega sqrt(rho)) for Hermitian rho, omega. Eigenvalues of
// the inner operator are clamped to [0, inf) before the square roots; the
// result is clamped to [0, 1].
inline double fidelity_hermitian(const Matrix2& rho, const Matrix2& omega) {
  const Matrix2 root = hermitian_sqrt(rho);
  const Matrix2 inner = root * omega * root;
  const auto [hi, lo] = hermitian_eigenvalues(inner);
  const double f = std::sqrt(std::max(hi, 0.0)) + std::sqrt(std::max(lo, 0.0));
  return std::clamp(f, 0.0, 1.0);
}

inline Matrix2 bloch_matrix(const BlochVector& s) {
  Matrix2 m;
  m(0, 0) = {0.5 * (1.0 + s[2]), 0.0};
  m(0, 1) = {0.5 * s[0], -0.5 * s[1]};
  m(1, 0) = {0.5 * s[0], 0.5 * s[1]};
  m(1, 1) = {0.5 * (1.0 - s[2]), 0.0};
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// 2x2 Hermitian, positive-semidefinite, trace-one matrix. Construction
/// validates the invariants, so a DensityMatrix value is always a state.
class DensityMatrix {
 public:
  /// Maximally mixed state I/2.
  DensityMatrix() : m_(complex{0.5, 0.0} * kIdentity) {}

  /// Throws InvalidState if m is not Hermitian, trace one and PSD within
  /// kMatrixTolerance.
  explicit DensityMatrix(const Matrix2& m) : m_(m) {
    if (std::abs(m(1, 0) - std::conj(m(0, 1))) > kMatrixTolerance || std::abs(m(0, 0).imag()) > kMatrixTolerance ||
        std::abs(m(1, 1).imag()) > kMatrixTolerance) {
      throw InvalidState("density matrix is not Hermitian");
    }
    if (std::abs(m.trace() - complex{1.0, 0.0}) > kMatrixTolerance) {
      throw InvalidState("density matrix trace is not 1");
    }
    if (hermitian_eigenvalues(m)[1] < -kMatrixTolerance) {
      throw InvalidState("density matrix has a negative eigenvalue");
    }
  }

  const Matrix2& matrix() const { return m_; }
  const complex& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  /// Expectation value Tr(rho A).
  complex expectation(const Matrix2& observable) const { return (m_ * observable).trace(); }

 private:
  Matrix2 m_;
};

/// rho = (I + s1 sigma1 + s2 sigma2 + s3 sigma3)/2. Throws InvalidState if
/// |s| > 1 + kBallTolerance.
inline DensityMatrix bloch_to_density(const BlochVector& s) {
  if (!s.is_physical()) {
    throw InvalidState("Bloch vector of length " + std::to_string(s.norm()) + " lies outside the unit ball");
  }
  return DensityMatrix(detail::bloch_matrix(s));
}

/// Inverse of bloch_to_density: s_i = Tr(rho sigma_i).
inline BlochVector density_to_bloch(const DensityMatrix& rho) {
  return {rho.expectation(kSigma1).real(), rho.expectation(kSigma2).real(), rho.expectation(kSigma3).real()};
}

/// Spectral projection (I + sign * sigma_axis)/2 onto the eigenspace of the
/// outcome `sign`.
inline Matrix2 spectral_projection(Axis axis, Outcome sign) {
  const int v = static_cast<int>(sign);
  if (v != 1 && v != -1) throw std::invalid_argument("outcome must be +1 or -1");
  return complex{0.5, 0.0} * (kIdentity + complex{static_cast<double>(v), 0.0} * pauli(axis));
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

/// Fidelity Tr sqrt(rho^1/2 omega rho^1/2) computed from the two eigenvalues of
/// the inner operator.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& omega) {
  return detail::fidelity_hermitian(rho.matrix(), omega.matrix());
}

/// Closed-form fidelity in Bloch coordinates,
///   F = (sqrt(1 + r.s + T) + sqrt(1 + r.s - T)) / 2,
///   T = sqrt(|r + s|^2 + (r.s)^2 - |r|^2 |s|^2).
/// The second root uses (1+r.s)^2 - T^2 = (1-|r|^2)(1-|s|^2) so it stays
/// accurate when it is close to zero.
inline double fidelity_bloch(const BlochVector& s, const BlochVector& r) {
  const double rs = r.dot(s);
  const double rr = r.norm_squared();
  const double ss = s.norm_squared();
  const double t = std::sqrt(std::max(0.0, (r + s).norm_squared() + rs * rs - rr * ss));
  const double big = 1.0 + rs + t;
  if (big <= 0.0) return 0.0;
  auto deficit = [](double nn) { return std::abs(1.0 - nn) <= kRoundingZero ? 0.0 : 1.0 - nn; };
  const double small = std::max(0.0, deficit(rr) * deficit(ss)) / big;
  return std::clamp(0.5 * (std::sqrt(big) + std::sqrt(small)), 0.0, 1.0);
}

/// Hilbert-Schmidt distance sqrt(Tr (rho - omega)^2).
inline double hs_distance(const DensityMatrix& rho, const DensityMatrix& omega) {
  const Matrix2 d = rho.matrix() - omega.matrix();
  return std::sqrt(std::norm(d(0, 0)) + std::norm(d(1, 1)) + std::norm(d(0, 1)) + std::norm(d(1, 0)));
}

/// Hilbert-Schmidt distance in Bloch coordinates, |s - r| / sqrt(2).
inline double hs_distance_bloch(const BlochVector& s, const BlochVector& r) {
  return (s - r).norm() / std::sqrt(2.0);
}

/// Euclidean Bloch distance |s - r|, i.e. sqrt(2) * hs_distance. Some
/// plots of HS distance use this unscaled form.
inline double bloch_hs_unscaled(const BlochVector& s, const BlochVector& r) { return (s - r).norm(); }

/// Fidelity and Hilbert-Schmidt distance between two states.
struct MetricsPair {
  double fidelity = 1.0;
  double hs_distance = 0.0;
};

inline MetricsPair compare_states(const DensityMatrix& rho, const DensityMatrix& omega) {
  return {fidelity(rho, omega), hs_distance(rho, omega)};
}

/// Scores an estimate against a physical truth. The estimate may lie outside
/// the Bloch ball; its matrix is then not PSD and the negative eigenvalue of
/// the inner fidelity operator is clamped to zero (fidelity stays in [0,1]).
inline MetricsPair score_estimate(const BlochVector& truth, const BlochVector& estimate) {
  if (!truth.is_physical()) throw InvalidState("true state must lie in the Bloch ball");
  const Matrix2 rho = bloch_to_density(truth).matrix();
  const Matrix2 omega = detail::bloch_matrix(estimate);
  const Matrix2 d = rho - omega;
  const double hs = std::sqrt(std::norm(d(0, 0)) + std::norm(d(1, 1)) + std::norm(d(0, 1)) + std::norm(d(1, 0)));
  return {detail::fidelity_hermitian(rho, omega), hs};
}

}  // namespace qtomo
