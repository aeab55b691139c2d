#include "psadmm/detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psadmm/diagnostics.hpp"
#include "psadmm/errors.hpp"

namespace psadmm {
namespace {

double box(double t) { return std::clamp(t, -1.0, 1.0); }

bool all_finite(const ComplexVector& v) { return v.allFinite(); }

bool state_finite(const DetectorState& s) {
  return std::all_of(s.layers.begin(), s.layers.end(), all_finite) &&
         all_finite(s.x0) && all_finite(s.y);
}

double layer_curvature(std::size_t layer, const DetectorParams& params) {
  const double w = layer_weight(layer);
  return w * w * params.rho - params.alphas[layer];
}

}  // namespace

ComplexVector DetectorState::aggregate() const {
  if (layers.empty()) return ComplexVector::Zero(x0.size());
  ComplexVector s = ComplexVector::Zero(layers.front().size());
  for (std::size_t q = 0; q < layers.size(); ++q) s += layer_weight(q) * layers[q];
  return s;
}

bool ValidationReport::layers_ok() const noexcept {
  return std::all_of(layer_conditions.begin(), layer_conditions.end(),
                     [](bool b) { return b; });
}

void require_valid_params(const DetectorParams& params, const ModulationSpec& mod) {
  if (!(params.rho > 0.0) || !std::isfinite(params.rho)) {
    throw ParameterError("rho must be positive and finite");
  }
  if (params.alphas.size() != static_cast<std::size_t>(mod.layers())) {
    throw ParameterError("expected " + std::to_string(mod.layers()) +
                         " alpha values, got " +
                         std::to_string(params.alphas.size()));
  }
  for (std::size_t q = 0; q < params.alphas.size(); ++q) {
    const double a = params.alphas[q];
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ParameterError("alpha_" + std::to_string(q + 1) +
                           " must be finite and >= 0");
    }
    if (!(layer_curvature(q, params) > 0.0)) {
      throw ParameterError("layer " + std::to_string(q + 1) +
                           ": 4^{q-1} rho - alpha_q = " +
                           std::to_string(layer_curvature(q, params)) +
                           " is not positive; the layer subproblem is not "
                           "strictly convex");
    }
  }
  if (params.max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (!(params.residual_tol > 0.0)) {
    throw ParameterError("residual_tol must be positive");
  }
}

ValidationReport validate_params(const DetectorParams& params,
                                 const SpectrumBounds& bounds) {
  if (!(params.rho > 0.0) || !std::isfinite(params.rho)) {
    throw ParameterError("rho must be positive and finite");
  }
  if (params.alphas.empty()) throw ParameterError("alphas must not be empty");

  ValidationReport report;
  report.rho = params.rho;
  report.bounds = bounds;
  for (std::size_t q = 0; q < params.alphas.size(); ++q) {
    const double gamma = layer_curvature(q, params);
    if (!(gamma > 0.0)) {
      throw ParameterError("layer " + std::to_string(q + 1) +
                           ": 4^{q-1} rho - alpha_q = " + std::to_string(gamma) +
                           " is not positive");
    }
    report.gamma_layers.push_back(gamma);
    report.layer_conditions.push_back(true);
  }
  report.spectral_condition = params.rho > std::sqrt(2.0) * bounds.lambda_max;
  report.gamma_0 = params.rho + bounds.lambda_min;

  double c = report.gamma_0 / 2.0 -
             bounds.lambda_max * bounds.lambda_max / params.rho;
  for (double g : report.gamma_layers) c = std::min(c, g / 2.0);
  report.c_constant = c;
  return report;
}

DetectorState initial_state(Index users, const ModulationSpec& mod,
                            const Initialization& init) {
  DetectorState s;
  s.k = 0;
  if (init.mode == InitMode::random) {
    Rng rng(init.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto draw = [&] {
      ComplexVector v(users);
      for (Index i = 0; i < users; ++i) {
        const double re = unif(rng);
        const double im = unif(rng);
        v(i) = Complex(re, im);
      }
      return v;
    };
    for (int q = 0; q < mod.layers(); ++q) s.layers.push_back(draw());
    s.x0 = draw();
    s.y = draw();
    return s;
  }
  double value = 0.0;
  if (init.mode == InitMode::ones) value = 1.0;
  if (init.mode == InitMode::minus_ones) value = -1.0;
  const ComplexVector v = ComplexVector::Constant(users, Complex(value, value));
  s.layers.assign(mod.layers(), v);
  s.x0 = v;
  s.y = v;
  return s;
}

ComplexVector update_layer(std::size_t layer, const DetectorState& state,
                           const DetectorParams& params) {
  ComplexVector others = ComplexVector::Zero(state.x0.size());
  for (std::size_t i = 0; i < state.layers.size(); ++i) {
    if (i != layer) others += layer_weight(i) * state.layers[i];
  }
  const double scale = layer_weight(layer) / layer_curvature(layer, params);
  ComplexVector out(state.x0.size());
  for (Index u = 0; u < out.size(); ++u) {
    const Complex raw =
        scale * (params.rho * (state.x0(u) - others(u)) + state.y(u));
    out(u) = Complex(box(raw.real()), box(raw.imag()));
  }
  return out;
}

ComplexVector update_x0(const DetectorState& state,
                        const HermitianFactorization& fact,
                        const ComplexVector& hr, const DetectorParams& params) {
  return fact.solve(hr + params.rho * state.aggregate() - state.y);
}

ComplexVector update_dual(const DetectorState& state, const DetectorParams& params) {
  return state.y + params.rho * (state.x0 - state.aggregate());
}

double residual(const DetectorState& prev, const DetectorState& next) {
  if (prev.layers.size() != next.layers.size()) {
    throw DimensionMismatch("residual: layer counts differ");
  }
  double sum = (next.x0 - prev.x0).squaredNorm();
  for (std::size_t q = 0; q < prev.layers.size(); ++q) {
    sum += (next.layers[q] - prev.layers[q]).squaredNorm();
  }
  return sum;
}

DetectionResult psadmm_detect(const ChannelInstance& instance,
                              const DetectorParams& params,
                              const ModulationSpec& mod) {
  require_valid_params(params, mod);
  const ComplexMatrix& h = instance.h;
  const ComplexVector& r = instance.r;
  if (h.rows() != r.size()) {
    throw DimensionMismatch("psadmm_detect: H has " + std::to_string(h.rows()) +
                            " rows but r has length " + std::to_string(r.size()));
  }
  require_finite(r, "psadmm_detect: r");

  // Per-detection precomputation, reused by every iteration.
  const ComplexMatrix g = gram(h);
  const HermitianFactorization fact = factor_regularized(g, params.rho);
  const ComplexVector hr = h.adjoint() * r;

  DetectionResult result;
  IterationTrace& trace = result.trace;
  DetectorState state = initial_state(h.cols(), mod, params.init);
  trace.initial_lagrangian = augmented_lagrangian(state, h, r, params);
  if (params.record_states) trace.states.push_back(state);
  trace.iterations.reserve(static_cast<std::size_t>(params.max_iters));

  for (int k = 1; k <= params.max_iters; ++k) {
    const DetectorState prev = state;
    for (std::size_t q = 0; q < state.layers.size(); ++q) {
      state.layers[q] = update_layer(q, state, params);
    }
    state.x0 = update_x0(state, fact, hr, params);
    state.y = update_dual(state, params);
    state.k = k;

    if (!state_finite(state)) {
      throw NumericalBlowup("psadmm_detect: non-finite iterate at iteration " +
                            std::to_string(k));
    }

    IterationRecord rec;
    rec.x0_step = (state.x0 - prev.x0).squaredNorm();
    rec.residual = rec.x0_step;
    for (std::size_t q = 0; q < state.layers.size(); ++q) {
      const double step = (state.layers[q] - prev.layers[q]).squaredNorm();
      rec.layer_steps.push_back(step);
      rec.residual += step;
    }
    rec.dual_step = (state.y - prev.y).squaredNorm();
    rec.primal_gap = (state.x0 - state.aggregate()).squaredNorm();
    rec.lagrangian = augmented_lagrangian(state, h, r, params);
    trace.iterations.push_back(std::move(rec));
    if (params.record_states) trace.states.push_back(state);

    result.iterations = k;
    if (trace.iterations.back().residual < params.residual_tol) {
      result.converged = true;
      break;
    }
  }

  if (params.output == OutputMode::layer_signs) {
    LayerStack signs;
    for (const auto& layer : state.layers) {
      ComplexVector s(layer.size());
      for (Index u = 0; u < s.size(); ++u) {
        s(u) = Complex(layer(u).real() >= 0 ? 1.0 : -1.0,
                       layer(u).imag() >= 0 ? 1.0 : -1.0);
      }
      signs.layers.push_back(std::move(s));
    }
    result.x_hat = recompose(signs);
  } else {
    result.x_hat = hard_decision(state.x0, mod);
  }
  result.final_state = std::move(state);
  return result;
}

std::optional<double> iteration_bound(const ValidationReport& report, double l1,
                                      double lstar, double eps) {
  if (!(report.c_constant > 0.0)) return std::nullopt;
  return (l1 - lstar) / (report.c_constant * eps);
}

std::optional<int> first_crossing(const IterationTrace& trace, double eps) {
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    if (trace.iterations[i].residual < eps) return static_cast<int>(i + 1);
  }
  return std::nullopt;
}

double stationarity_residual(const DetectorState& state, const ComplexMatrix& h,
                             const ComplexVector& r, const DetectorParams& params) {
  if (params.alphas.size() != state.layers.size()) {
    throw DimensionMismatch("stationarity_residual: alphas/layers mismatch");
  }
  // d/dx_q of 1/2|r - H s|^2 - sum alpha/2 |x_q|^2, as Re + j Im partials.
  const ComplexVector data_grad = h.adjoint() * (h * state.aggregate() - r);
  constexpr double kActive = 1e-12;
  auto violation = [](double t, double g) {
    if (t >= 1.0 - kActive) return std::max(0.0, g);
    if (t <= -1.0 + kActive) return std::max(0.0, -g);
    return std::abs(g);
  };
  double worst = 0.0;
  for (std::size_t q = 0; q < state.layers.size(); ++q) {
    const ComplexVector& x = state.layers[q];
    const ComplexVector grad =
        layer_weight(q) * data_grad - params.alphas[q] * x;
    for (Index u = 0; u < x.size(); ++u) {
      worst = std::max(worst, violation(x(u).real(), grad(u).real()));
      worst = std::max(worst, violation(x(u).imag(), grad(u).imag()));
    }
  }
  return worst;
}

}  // namespace psadmm
