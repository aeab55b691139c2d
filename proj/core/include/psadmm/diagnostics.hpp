#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "psadmm/detector.hpp"

namespace psadmm {

/// L_rho = 1/2|r - H x0|^2 - sum_q alpha_q/2 |x_q|^2 + Re<x0 - s, y>
///         + rho/2 |x0 - s|^2, with s = sum_q 2^{q-1} x_q.
double augmented_lagrangian(const DetectorState& state, const ComplexMatrix& h,
                            const ComplexVector& r, const DetectorParams& params);

/// 1/2|r - H s|^2 - sum_q alpha_q/2 |x_q|^2.
double penalized_objective(const std::vector<ComplexVector>& layers,
                           const ComplexMatrix& h, const ComplexVector& r,
                           const std::vector<double>& alphas);

/// Relative slack absorbed by every certificate inequality.
inline constexpr double kCertificateTolerance = 1e-9;

/// Per-iteration outcome of one inequality, aligned with the trace.
struct LemmaCheck {
  std::vector<bool> ok;
  /// False where the inequality's hypotheses do not hold for that iteration
  /// (ok is then true by convention).
  std::vector<bool> applicable;
  /// lhs - rhs - tolerance per iteration (0 where inapplicable).
  std::vector<double> excess;
  /// Largest lhs - rhs - tolerance seen (negative when every check passed).
  double worst_violation = -std::numeric_limits<double>::infinity();
  int worst_iteration = -1;

  bool passed() const;
  std::size_t failures() const;
};

struct CertificateReport {
  LemmaCheck lemma1;  ///< |dy|^2 <= lambda_max^2 |dx0|^2
  LemmaCheck lemma2;  ///< sufficient decrease of L_rho
  LemmaCheck lemma3;  ///< L_rho >= penalized objective of the layers
  /// L^1 - L^final >= C * sum of residuals (std::nullopt when C <= 0).
  std::optional<bool> telescoping;
  /// Both convergence conditions hold for these parameters and channel.
  bool applicable = false;

  bool passed() const;
};

/// |y^{k+1} - y^k|^2 <= lambda_max^2 |x0^{k+1} - x0^k|^2 for every iteration
/// whose starting iterate satisfies the dual identity y = -grad l(x0), i.e.
/// every iteration but the first.
LemmaCheck check_lemma1(const IterationTrace& trace, const SpectrumBounds& bounds);

/// L^{k+1} - L^k <= -sum_q gamma_q/2 |dx_q|^2 - (gamma_0/2 - lambda_max^2/rho)
/// |dx0|^2. Same applicability rule as lemma 1; every entry is inapplicable
/// when some gamma_q <= 0.
LemmaCheck check_lemma2(const IterationTrace& trace, const ValidationReport& report);

/// L_rho(state) >= penalized objective of its layers, evaluated independently
/// from the recorded states. The initial state is excluded; entry i checks
/// the iterate produced by iteration i. Inapplicable when the spectral
/// condition fails. Throws InvalidInput if the trace has no states.
LemmaCheck check_lemma3(const IterationTrace& trace, const ComplexMatrix& h,
                        const ComplexVector& r, const DetectorParams& params,
                        const ValidationReport& report);

/// Summed sufficient decrease from the iterate after iteration 1 onwards.
std::optional<bool> check_telescoping(const IterationTrace& trace,
                                      const ValidationReport& report);

/// All certificate checks for one detection run. Requires record_states.
CertificateReport certify(const DetectionResult& result,
                          const ChannelInstance& instance,
                          const DetectorParams& params,
                          const ValidationReport& report);

/// One line per failed check: "<label> iteration <k>: violation <v>".
std::vector<std::string> describe_failures(const CertificateReport& report);

/// Complex multiplications for K iterations:
/// U^3/3 + B U^2/2 + B U + K (U^2 + Q U), rounded to nearest.
std::uint64_t flop_estimate(std::uint64_t antennas, std::uint64_t users,
                            std::uint64_t layers, std::uint64_t iterations);

}  // namespace psadmm
