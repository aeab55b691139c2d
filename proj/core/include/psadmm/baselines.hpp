#pragma once

#include "psadmm/detector.hpp"
#include "psadmm/signal.hpp"

namespace psadmm {

/// hard_decision((H^H H)^{-1} H^H r). Throws FactorizationFailure when H does
/// not have full column rank.
ComplexVector zf_detect(const ChannelInstance& instance, const ModulationSpec& mod);

/// hard_decision((H^H H + sigma2/E_s I)^{-1} H^H r). Falls back to the ZF
/// solve when sigma2 = 0.
ComplexVector mmse_detect(const ChannelInstance& instance, const ModulationSpec& mod);

/// The sharing ADMM with every alpha_q forced to 0: box-relaxed least squares.
/// Shares the psadmm_detect code path.
DetectionResult box_admm_detect(const ChannelInstance& instance,
                                const DetectorParams& params,
                                const ModulationSpec& mod);

/// Largest search space the exhaustive oracle accepts.
inline constexpr double kMlCandidateCap = 1e6;

/// Exhaustive argmin over X^U of |r - H x|^2. Candidates are enumerated with
/// user 0 as the most significant digit; per user the real level ascends
/// first, then the imaginary level. Ties keep the first candidate.
/// Throws TooLarge when 4^{QU} exceeds kMlCandidateCap.
ComplexVector ml_bruteforce(const ChannelInstance& instance, const ModulationSpec& mod);

}  // namespace psadmm
