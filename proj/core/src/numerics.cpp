#include "psadmm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "psadmm/errors.hpp"

namespace psadmm {
namespace {

constexpr std::uint64_t kPowerIterationSeed = 0x9e3779b97f4a7c15ULL;

// Relative pivot floor below which G + shift*I is treated as singular.
constexpr double kPivotFloor = 1e-12;

template <typename Derived>
void check_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.size() == 0) {
    throw InvalidInput(std::string(what) + ": empty");
  }
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      const Complex z = m(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw InvalidInput(std::string(what) + ": non-finite entry at (" +
                           std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

ComplexVector start_vector(Index n) {
  std::mt19937_64 rng(kPowerIterationSeed);
  std::normal_distribution<double> normal;
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

struct DominantEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Power iteration with Rayleigh-quotient estimates. The Rayleigh quotient
// converges geometrically, so the remaining error is extrapolated from the
// ratio of successive changes; iteration stops once that tail is below
// tolerance * scale(estimate).
template <typename Scale>
DominantEstimate dominant_eigenvalue(const ComplexMatrix& a, double tolerance,
                                     int cap, Scale scale) {
  DominantEstimate out;
  ComplexVector v = start_vector(a.rows());
  double previous = 0.0;
  double previous_change = 0.0;
  for (int it = 1; it <= cap; ++it) {
    ComplexVector w = a * v;
    const double rq = real_inner(v, w);
    const double norm = w.norm();
    out.iterations = it;
    out.value = rq;
    if (norm == 0.0) {
      // v lies in the null space; for a PSD operator that means everything
      // it could still reach is zero.
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    if (it > 1) {
      const double change = std::abs(rq - previous);
      const double target = tolerance * scale(rq);
      if (change == 0.0) {
        out.converged = true;
        return out;
      }
      if (it > 2 && previous_change > 0.0) {
        const double ratio = change / previous_change;
        if (ratio < 1.0 && change * ratio / (1.0 - ratio) <= 0.5 * target &&
            change <= target) {
          out.converged = true;
          return out;
        }
      }
      previous_change = change;
    }
    previous = rq;
    v = w / norm;
  }
  return out;
}

}  // namespace

void require_finite(const ComplexMatrix& m, const char* what) {
  check_finite(m, what);
}

void require_finite(const ComplexVector& v, const char* what) {
  check_finite(v, what);
}

ComplexMatrix gram(const ComplexMatrix& h) {
  require_finite(h, "gram: H");
  ComplexMatrix g = h.adjoint() * h;
  const Index n = g.rows();
  for (Index i = 0; i < n; ++i) {
    g(i, i) = Complex(g(i, i).real(), 0.0);
    for (Index j = i + 1; j < n; ++j) g(j, i) = std::conj(g(i, j));
  }
  return g;
}

HermitianFactorization::HermitianFactorization(const ComplexMatrix& g,
                                               double shift)
    : dimension_(g.rows()), shift_(shift) {
  if (g.rows() != g.cols()) {
    throw DimensionMismatch("factorization: matrix is " +
                            std::to_string(g.rows()) + "x" +
                            std::to_string(g.cols()));
  }
  if (!(shift >= 0.0) || !std::isfinite(shift)) {
    throw InvalidInput("factorization: shift must be finite and >= 0");
  }
  require_finite(g, "factorization: G");

  ComplexMatrix a = g;
  a.diagonal().array() += shift;
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    throw FactorizationFailure("factorization: non-positive pivot");
  }
  const double scale = a.diagonal().real().cwiseAbs().maxCoeff();
  const ComplexMatrix l = llt_.matrixL();
  for (Index i = 0; i < dimension_; ++i) {
    const double pivot = l(i, i).real();
    if (!(pivot * pivot > kPivotFloor * scale)) {
      throw FactorizationFailure("factorization: pivot " + std::to_string(i) +
                                 " is numerically zero (rank deficient)");
    }
  }
}

ComplexVector HermitianFactorization::solve(const ComplexVector& b) const {
  if (b.size() != dimension_) {
    throw DimensionMismatch("solve: right-hand side has length " +
                            std::to_string(b.size()) + ", expected " +
                            std::to_string(dimension_));
  }
  return llt_.solve(b);
}

HermitianFactorization factor_regularized(const ComplexMatrix& g, double rho) {
  if (!(rho > 0.0)) {
    throw InvalidInput("factor_regularized: rho must be positive");
  }
  return HermitianFactorization(g, rho);
}

ComplexVector solve(const HermitianFactorization& fact, const ComplexVector& b) {
  return fact.solve(b);
}

SpectrumBounds spectrum_bounds(const ComplexMatrix& g, double rel_tolerance,
                               int max_iterations) {
  if (g.rows() != g.cols()) {
    throw DimensionMismatch("spectrum_bounds: matrix is not square");
  }
  if (!(rel_tolerance > 0.0 && rel_tolerance <= 1e-3)) {
    throw InvalidInput("spectrum_bounds: rel_tolerance must lie in (0, 1e-3]");
  }
  if (max_iterations < 1) {
    throw InvalidInput("spectrum_bounds: iteration cap must be positive");
  }
  require_finite(g, "spectrum_bounds: G");

  SpectrumBounds out;
  out.rel_tolerance = rel_tolerance;
  const Index n = g.rows();
  if (n == 1) {
    out.lambda_min = out.lambda_max = std::max(0.0, g(0, 0).real());
    out.iterations = 1;
    return out;
  }

  const double stop = rel_tolerance;
  const auto top = dominant_eigenvalue(g, stop, max_iterations,
                                       [](double v) { return std::abs(v); });
  const double lambda_max = std::max(0.0, top.value);

  ComplexMatrix shifted = -g;
  shifted.diagonal().array() += lambda_max;
  // lambda_min = lambda_max - mu; measure mu's error against lambda_min with a
  // floor near machine precision of the spectrum scale.
  const double floor = 1e-13 * lambda_max;
  const auto bottom = dominant_eigenvalue(
      shifted, stop, max_iterations, [&](double mu) {
        return std::max(lambda_max - mu, floor);
      });

  out.lambda_max = lambda_max;
  out.lambda_min = std::clamp(lambda_max - bottom.value, 0.0, lambda_max);
  out.converged = top.converged && bottom.converged;
  out.iterations = top.iterations + bottom.iterations;
  return out;
}

}  // namespace psadmm
