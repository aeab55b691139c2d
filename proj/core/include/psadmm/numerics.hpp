#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace psadmm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Throws InvalidInput if any entry is NaN or infinite, or the object is empty.
void require_finite(const ComplexMatrix& m, const char* what);
void require_finite(const ComplexVector& v, const char* what);

/// H^H H with exact Hermitian symmetry (the lower triangle is the conjugate
/// mirror of the computed upper triangle, the diagonal is real).
ComplexMatrix gram(const ComplexMatrix& h);

/// Cholesky factorization of G + shift*I, built once and reused for every
/// solve against the same regularized Gram matrix.
class HermitianFactorization {
 public:
  HermitianFactorization(const ComplexMatrix& g, double shift);

  Index dimension() const noexcept { return dimension_; }
  double shift() const noexcept { return shift_; }

  /// Solves (G + shift*I) v = b. Throws DimensionMismatch.
  ComplexVector solve(const ComplexVector& b) const;

 private:
  Index dimension_;
  double shift_;
  Eigen::LLT<ComplexMatrix> llt_;
};

/// Factorization of G + rho*I for rho > 0. Throws InvalidInput for rho <= 0 and
/// FactorizationFailure when G + rho*I is not positive definite.
HermitianFactorization factor_regularized(const ComplexMatrix& g, double rho);

ComplexVector solve(const HermitianFactorization& fact, const ComplexVector& b);

struct SpectrumBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double rel_tolerance = 0.0;
  /// False when either power iteration hit its cap; the estimates are then
  /// the last iterates and the caller decides whether to use them.
  bool converged = true;
  int iterations = 0;

  /// Upper estimate of lambda_max padded by the tolerance.
  double lambda_max_upper() const noexcept {
    return lambda_max * (1.0 + rel_tolerance);
  }
  /// Lower estimate of lambda_min padded by the tolerance, clamped at zero.
  double lambda_min_lower() const noexcept {
    const double v = lambda_min - rel_tolerance * lambda_max;
    return v > 0.0 ? v : 0.0;
  }
};

inline constexpr double kDefaultEigenTolerance = 1e-6;
inline constexpr int kDefaultEigenIterationCap = 500;

/// Extreme eigenvalues of a Hermitian PSD matrix. lambda_max comes from power
/// iteration on G, lambda_min from power iteration on lambda_max*I - G with
/// the shift undone. The start vector is a fixed-seed pseudo-random unit
/// vector, so results are reproducible. rel_tolerance must lie in (0, 1e-3].
SpectrumBounds spectrum_bounds(const ComplexMatrix& g,
                               double rel_tolerance = kDefaultEigenTolerance,
                               int max_iterations = kDefaultEigenIterationCap);

/// Re<a, b> = Re(a^H b).
inline double real_inner(const ComplexVector& a, const ComplexVector& b) {
  return a.dot(b).real();
}

}  // namespace psadmm
