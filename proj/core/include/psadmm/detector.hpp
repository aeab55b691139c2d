#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "psadmm/numerics.hpp"
#include "psadmm/signal.hpp"

namespace psadmm {

enum class InitMode { zeros, ones, minus_ones, random };

/// Starting point of the iteration. zeros/ones/minus_ones set every real and
/// imaginary part of every layer, x0 and y to 0/1/-1. random draws each part
/// uniformly from [-1, 1] with the given seed.
struct Initialization {
  InitMode mode = InitMode::zeros;
  std::uint64_t seed = 0;

  friend bool operator==(const Initialization&, const Initialization&) = default;
};

/// How the continuous iterate is mapped to symbols.
enum class OutputMode {
  quantize_x0,  ///< hard decision on the final aggregate x0 (default)
  layer_signs,  ///< sign of each layer, then recompose
};

struct DetectorParams {
  double rho = 1.0;
  /// One penalty weight per layer; alphas[q] pairs with layer weight 2^q.
  std::vector<double> alphas;
  int max_iters = 30;
  double residual_tol = 1e-5;
  Initialization init;
  OutputMode output = OutputMode::quantize_x0;
  /// Keep a copy of every iterate (needed by the Lagrangian lower-bound
  /// certificate).
  bool record_states = false;
};

/// Iterate of the sharing ADMM: binary-relaxed layers, aggregate x0, dual y.
struct DetectorState {
  std::vector<ComplexVector> layers;
  ComplexVector x0;
  ComplexVector y;
  int k = 0;

  /// sum_q 2^{q-1} x_q.
  ComplexVector aggregate() const;
};

/// Quantities produced by one iteration k -> k+1.
struct IterationRecord {
  double lagrangian = 0.0;   ///< L_rho at the new iterate
  double residual = 0.0;     ///< sum_q |dx_q|^2 + |dx0|^2
  std::vector<double> layer_steps;  ///< |x_q^{k+1} - x_q^k|^2 per layer
  double x0_step = 0.0;      ///< |x0^{k+1} - x0^k|^2
  double dual_step = 0.0;    ///< |y^{k+1} - y^k|^2
  double primal_gap = 0.0;   ///< |x0^{k+1} - sum_q 2^{q-1} x_q^{k+1}|^2
};

struct IterationTrace {
  double initial_lagrangian = 0.0;
  std::vector<IterationRecord> iterations;
  /// states[0] is the initial state, states[i+1] follows iterations[i].
  /// Empty unless DetectorParams::record_states is set.
  std::vector<DetectorState> states;

  std::size_t size() const noexcept { return iterations.size(); }
};

/// Parameter diagnostics for a given channel. The strict-convexity condition
/// on every layer is 4^{q-1} rho > alpha_q (the layer update's denominator);
/// the spectral condition rho > sqrt(2) lambda_max(H^H H) is sufficient for
/// convergence but not necessary, so failing it only produces a warning.
struct ValidationReport {
  std::vector<bool> layer_conditions;
  bool spectral_condition = false;
  std::vector<double> gamma_layers;  ///< 4^{q-1} rho - alpha_q
  double gamma_0 = 0.0;              ///< rho + lambda_min
  /// min{ gamma_q / 2, gamma_0 / 2 - lambda_max^2 / rho }; may be <= 0.
  double c_constant = 0.0;
  double rho = 0.0;
  SpectrumBounds bounds;

  bool layers_ok() const noexcept;
  bool convergence_conditions() const noexcept {
    return layers_ok() && spectral_condition;
  }
};

/// Evaluates the convergence conditions. Throws ParameterError when some
/// 4^{q-1} rho - alpha_q <= 0 or the parameters are malformed.
ValidationReport validate_params(const DetectorParams& params,
                                 const SpectrumBounds& bounds);

/// Throws ParameterError unless rho > 0, every alpha_q >= 0 and finite,
/// 4^{q-1} rho > alpha_q for every layer, and the iteration settings are sane.
void require_valid_params(const DetectorParams& params, const ModulationSpec& mod);

DetectorState initial_state(Index users, const ModulationSpec& mod,
                            const Initialization& init);

/// Projected closed-form minimizer of L_rho over layer `layer` (0-based),
/// reading the other layers from `state` as they currently stand: the caller
/// sweeps layers in order so lower layers are already fresh.
ComplexVector update_layer(std::size_t layer, const DetectorState& state,
                           const DetectorParams& params);

/// x0 = (H^H H + rho I)^{-1} (H^H r + rho sum_q 2^{q-1} x_q - y).
ComplexVector update_x0(const DetectorState& state,
                        const HermitianFactorization& fact,
                        const ComplexVector& hr, const DetectorParams& params);

/// y + rho (x0 - sum_q 2^{q-1} x_q).
ComplexVector update_dual(const DetectorState& state, const DetectorParams& params);

/// sum_q |x_q' - x_q|^2 + |x0' - x0|^2.
double residual(const DetectorState& prev, const DetectorState& next);

struct DetectionResult {
  ComplexVector x_hat;
  IterationTrace trace;
  DetectorState final_state;
  int iterations = 0;
  /// True when the residual dropped below the tolerance before the cap.
  bool converged = false;
};

/// Runs the layer sweep / aggregate / dual iteration until the residual drops
/// below residual_tol or max_iters iterations have run. Throws ParameterError
/// for invalid parameters and NumericalBlowup if an iterate becomes non-finite.
DetectionResult psadmm_detect(const ChannelInstance& instance,
                              const DetectorParams& params,
                              const ModulationSpec& mod);

/// Worst-case iteration count before the residual drops below eps:
/// (L1 - Lstar) / (C eps). std::nullopt when C <= 0.
std::optional<double> iteration_bound(const ValidationReport& report, double l1,
                                      double lstar, double eps);

/// First 1-based iteration whose residual is below eps.
std::optional<int> first_crossing(const IterationTrace& trace, double eps);

/// Max box-KKT violation of the penalized objective at the state's layers.
/// Interior coordinates contribute |g|; at +1 a positive gradient, at -1 a
/// negative gradient is a violation.
double stationarity_residual(const DetectorState& state, const ComplexMatrix& h,
                             const ComplexVector& r, const DetectorParams& params);

/// 2^q as a double.
inline double layer_weight(std::size_t layer) {
  return static_cast<double>(std::uint64_t{1} << layer);
}

}  // namespace psadmm
