#include <doctest.h>

#include <cmath>

#include "psadmm/baselines.hpp"
#include "psadmm/detector.hpp"
#include "psadmm/diagnostics.hpp"
#include "psadmm/errors.hpp"
#include "test_support.hpp"

using namespace psadmm;
using psadmm::testing::random_box_vector;
using psadmm::testing::random_matrix;
using psadmm::testing::random_symbols;
using psadmm::testing::random_vector;

namespace {

ComplexVector scalar(Complex z) {
  ComplexVector v(1);
  v(0) = z;
  return v;
}

DetectorParams make_params(double rho, std::vector<double> alphas) {
  DetectorParams p;
  p.rho = rho;
  p.alphas = std::move(alphas);
  return p;
}

// Terms of L_rho that depend on the real part t of a single-user,
// single-layer x_1, written out directly.
double scalar_lagrangian_re(double t, double x0_re, double y_re, double rho,
                            double alpha) {
  return -0.5 * alpha * t * t + (x0_re - t) * y_re + 0.5 * rho * (x0_re - t) * (x0_re - t);
}

double grid_argmin(double x0_re, double y_re, double rho, double alpha) {
  double best_t = -1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200000; ++i) {
    const double t = -1.0 + i * 1e-5;
    const double v = scalar_lagrangian_re(t, x0_re, y_re, rho, alpha);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

// rho = 1.5 sqrt(2) lambda_max, alpha_q = 0.5 4^{q-1} rho.
DetectorParams conforming_params(const ComplexMatrix& h, int layers) {
  const auto b = spectrum_bounds(gram(h), 1e-10, 20000);
  DetectorParams p;
  p.rho = 1.5 * std::sqrt(2.0) * b.lambda_max;
  for (int q = 0; q < layers; ++q) p.alphas.push_back(0.5 * std::pow(4.0, q) * p.rho);
  return p;
}

ChannelInstance random_instance(Index b, Index u, const ModulationSpec& mod,
                                double snr_db, Rng& rng) {
  const ComplexMatrix h = rayleigh_channel(b, u, rng);
  const ComplexVector x = random_symbols(u, mod, rng);
  return transmit(h, x, noise_sigma(snr_db, u, mod), rng);
}

}  // namespace

TEST_CASE("validate_params: worked examples") {
  SpectrumBounds bounds;
  bounds.lambda_min = 1.0;
  bounds.lambda_max = 4.0;
  const auto r1 = validate_params(make_params(120, {80}), bounds);
  CHECK(r1.layer_conditions[0]);
  CHECK(r1.spectral_condition);
  CHECK(r1.gamma_layers[0] == doctest::Approx(40.0));

  CHECK_THROWS_AS(validate_params(make_params(1, {1}), bounds), ParameterError);

  SpectrumBounds b2;
  b2.lambda_min = 0.5;
  b2.lambda_max = 3.0;
  const auto r2 = validate_params(make_params(16, {8, 30}), b2);
  CHECK(r2.gamma_layers[0] == doctest::Approx(8.0));
  CHECK(r2.gamma_layers[1] == doctest::Approx(34.0));
  CHECK(r2.gamma_0 == doctest::Approx(16.5));
  CHECK(r2.c_constant == doctest::Approx(std::min({4.0, 17.0, 8.25 - 9.0 / 16.0})));
  CHECK(r2.spectral_condition);
}

TEST_CASE("validate_params: spectral condition only warns") {
  SpectrumBounds bounds;
  bounds.lambda_min = 100.0;
  bounds.lambda_max = 512.0;
  const auto r = validate_params(make_params(120, {80}), bounds);
  CHECK(r.layers_ok());
  CHECK_FALSE(r.spectral_condition);
  CHECK_FALSE(r.convergence_conditions());
  CHECK(r.c_constant < 0.0);
}

TEST_CASE("update_layer: matches a fine-grid minimization") {
  DetectorState s;
  s.layers = {scalar(0.0)};
  s.x0 = scalar(0.5);
  s.y = scalar(0.1);
  const auto params = make_params(2.0, {0.5});
  const Complex got = update_layer(0, s, params)(0);
  CHECK(got.real() == doctest::Approx(1.1 / 1.5).epsilon(1e-12));
  CHECK(std::abs(got.real() - grid_argmin(0.5, 0.1, 2.0, 0.5)) <= 1e-5);

  s.x0 = scalar(5.0);
  CHECK(update_layer(0, s, params)(0).real() == 1.0);
  CHECK(grid_argmin(5.0, 0.1, 2.0, 0.5) == doctest::Approx(1.0));

  s.x0 = scalar(Complex(1.7, -2.3));
  s.y = scalar(0.0);
  CHECK(update_layer(0, s, make_params(1.0, {0.0}))(0) == Complex(1, -1));
}

TEST_CASE("update_layer: Gauss-Seidel order uses fresh lower layers") {
  Rng rng(2);
  const ModulationSpec mod(2);
  const ChannelInstance inst = random_instance(6, 3, mod, 15, rng);
  DetectorParams params = make_params(20.0, {5.0, 20.0});
  params.init = {InitMode::random, 77};
  params.max_iters = 1;

  const DetectorState start = initial_state(3, mod, params.init);
  DetectorState fresh = start;
  fresh.layers[0] = update_layer(0, start, params);
  const ComplexVector expected_top = update_layer(1, fresh, params);
  const ComplexVector stale_top = update_layer(1, start, params);
  REQUIRE((expected_top - stale_top).norm() > 1e-6);

  const DetectionResult one = psadmm_detect(inst, params, mod);
  CHECK((one.final_state.layers[0] - fresh.layers[0]).norm() == 0.0);
  CHECK((one.final_state.layers[1] - expected_top).norm() == 0.0);
}

TEST_CASE("update_x0: scalar, zero and random instances") {
  DetectorState s;
  s.layers = {scalar(0.5)};
  s.y = scalar(0.0);
  s.x0 = scalar(0.0);
  const ComplexMatrix h = ComplexMatrix::Identity(1, 1);
  const auto fact = factor_regularized(gram(h), 1.0);
  const ComplexVector hr = h.adjoint() * scalar(2.0);
  CHECK(std::abs(update_x0(s, fact, hr, make_params(1.0, {0.0}))(0) - 1.25) < 1e-14);

  s.layers = {scalar(0.0)};
  CHECK(update_x0(s, fact, scalar(0.0), make_params(1.0, {0.0})).norm() == 0.0);

  Rng rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const ComplexMatrix hh = random_matrix(4, 2, rng);
    const ComplexVector r = random_vector(4, rng);
    const auto p = make_params(0.5 + rep, {0.1, 0.2});
    DetectorState st;
    st.layers = {random_box_vector(2, rng), random_box_vector(2, rng)};
    st.x0 = random_vector(2, rng);
    st.y = random_vector(2, rng);
    const ComplexMatrix g = gram(hh);
    const ComplexVector b = hh.adjoint() * r + p.rho * st.aggregate() - st.y;
    const ComplexVector x0 = update_x0(st, factor_regularized(g, p.rho), hh.adjoint() * r, p);
    const ComplexMatrix a = g + p.rho * ComplexMatrix::Identity(2, 2);
    CHECK((a * x0 - b).norm() / b.norm() <= 1e-10);
    // Gradient of L_rho in x0 vanishes.
    const ComplexVector grad = hh.adjoint() * (hh * x0 - r) + st.y + p.rho * (x0 - st.aggregate());
    CHECK(grad.norm() <= 1e-8 * (1.0 + x0.norm()));
  }
}

TEST_CASE("update_dual and residual") {
  DetectorState s;
  s.layers = {scalar(0.5)};
  s.x0 = scalar(0.5);
  s.y = scalar(Complex(0.3, -0.2));
  CHECK(update_dual(s, make_params(2.0, {0.0}))(0) == Complex(0.3, -0.2));

  s.layers = {scalar(0.0)};
  s.y = scalar(0.0);
  CHECK(update_dual(s, make_params(2.0, {0.0}))(0) == Complex(1.0, 0.0));

  Rng rng(6);
  DetectorState a;
  a.layers = {random_box_vector(3, rng), random_box_vector(3, rng)};
  a.x0 = random_vector(3, rng);
  a.y = random_vector(3, rng);
  const ComplexVector y = update_dual(a, make_params(3.0, {0, 0}));
  for (Index i = 0; i < 3; ++i) {
    const Complex s_i = a.layers[0](i) + 2.0 * a.layers[1](i);
    CHECK(std::abs(y(i) - (a.y(i) + 3.0 * (a.x0(i) - s_i))) < 1e-14);
  }

  CHECK(residual(a, a) == 0.0);
  DetectorState p;
  p.layers = {scalar(0.0)};
  p.x0 = scalar(0.0);
  DetectorState n = p;
  n.layers = {scalar(Complex(1, 1))};
  CHECK(residual(p, n) == doctest::Approx(2.0));

  DetectorState b = a;
  b.layers[0] = random_box_vector(3, rng);
  b.layers[1] = random_box_vector(3, rng);
  b.x0 = random_vector(3, rng);
  double oracle = 0.0;
  for (Index i = 0; i < 3; ++i) {
    oracle += std::norm(b.layers[0](i) - a.layers[0](i));
    oracle += std::norm(b.layers[1](i) - a.layers[1](i));
    oracle += std::norm(b.x0(i) - a.x0(i));
  }
  CHECK(residual(a, b) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("psadmm_detect: noiseless identity channel recovers the symbols") {
  const ModulationSpec mod(1);
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const ComplexVector x = random_symbols(2, mod, rng);
    const ChannelInstance inst = transmit(ComplexMatrix::Identity(2, 2), x, 0.0, rng);
    const auto res = psadmm_detect(inst, make_params(120, {80}), mod);
    CHECK(res.x_hat == x);
    CHECK(res.x_hat == zf_detect(inst, mod));
    CHECK(res.converged);
    CHECK(res.iterations < 30);
  }
}

TEST_CASE("psadmm_detect: boundary 16-QAM symbols on a tall noiseless channel") {
  const ModulationSpec mod(2);
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const ComplexMatrix h = rayleigh_channel(8, 2, rng);
    const ComplexVector x = ComplexVector::Constant(2, Complex(3, 3));
    const ChannelInstance inst = transmit(h, x, 0.0, rng);
    const auto res = psadmm_detect(inst, make_params(16, {8, 30}), mod);
    CHECK(res.x_hat == ml_bruteforce(inst, mod));
    CHECK(res.x_hat == x);
  }
}

TEST_CASE("psadmm_detect: zero and random starts reach stationary points") {
  const ModulationSpec mod(2);
  Rng rng(12);
  const ChannelInstance inst = random_instance(8, 4, mod, 20, rng);
  DetectorParams params = conforming_params(inst.h, 2);
  params.max_iters = 5000;
  params.residual_tol = 1e-20;
  const auto a = psadmm_detect(inst, params, mod);
  params.init = {InitMode::random, 4};
  const auto b = psadmm_detect(inst, params, mod);
  const double fa = penalized_objective(a.final_state.layers, inst.h, inst.r, params.alphas);
  const double fb = penalized_objective(b.final_state.layers, inst.h, inst.r, params.alphas);
  MESSAGE("zero start objective " << fa << ", random start objective " << fb);
  CHECK(stationarity_residual(a.final_state, inst.h, inst.r, params) <= 1e-4);
  CHECK(stationarity_residual(b.final_state, inst.h, inst.r, params) <= 1e-4);
}

TEST_CASE("psadmm_detect: iterate invariants") {
  Rng rng(44);
  for (int rep = 0; rep < 30; ++rep) {
    const ModulationSpec mod(1 + rep % 2);
    const ChannelInstance inst = random_instance(10, 4, mod, 12, rng);
    DetectorParams params = conforming_params(inst.h, mod.layers());
    params.record_states = true;
    params.max_iters = 60;
    const auto res = psadmm_detect(inst, params, mod);
    const auto& states = res.trace.states;
    REQUIRE(states.size() == res.trace.size() + 1);
    for (std::size_t i = 1; i < states.size(); ++i) {
      for (const auto& layer : states[i].layers) {
        CHECK(layer.real().cwiseAbs().maxCoeff() <= 1.0);
        CHECK(layer.imag().cwiseAbs().maxCoeff() <= 1.0);
      }
      // Dual identity y = -grad l(x0) after every iteration.
      const ComplexVector identity =
          states[i].y + inst.h.adjoint() * (inst.h * states[i].x0 - inst.r);
      CHECK(identity.norm() <= 1e-8 * (1.0 + states[i].y.norm()));
    }
    // Lagrangian non-increasing from the first post-iteration iterate on.
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
      const double prev = res.trace.iterations[i - 1].lagrangian;
      const double cur = res.trace.iterations[i].lagrangian;
      CHECK(cur <= prev + 1e-9 * (1.0 + std::abs(prev)));
    }
  }
}

TEST_CASE("psadmm_detect: deterministic traces") {
  Rng rng(5);
  const ModulationSpec mod(2);
  const ChannelInstance inst = random_instance(8, 4, mod, 10, rng);
  DetectorParams params = make_params(16, {8, 30});
  params.init = {InitMode::random, 9};
  const auto a = psadmm_detect(inst, params, mod);
  const auto b = psadmm_detect(inst, params, mod);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace.iterations[i].lagrangian == b.trace.iterations[i].lagrangian);
    CHECK(a.trace.iterations[i].residual == b.trace.iterations[i].residual);
  }
  CHECK(a.x_hat == b.x_hat);
}

TEST_CASE("psadmm_detect: errors") {
  Rng rng(3);
  const ModulationSpec mod(1);
  const ChannelInstance inst = random_instance(4, 2, mod, 10, rng);
  CHECK_THROWS_AS(psadmm_detect(inst, make_params(1, {1}), mod), ParameterError);
  CHECK_THROWS_AS(psadmm_detect(inst, make_params(1, {0.5, 0.5}), mod), ParameterError);
  CHECK_THROWS_AS(psadmm_detect(inst, make_params(-1, {0}), mod), ParameterError);

  ChannelInstance bad = inst;
  bad.r(0) = Complex(std::numeric_limits<double>::infinity(), 0);
  CHECK_THROWS_AS(psadmm_detect(bad, make_params(10, {1}), mod), InvalidInput);

  // Finite inputs large enough to overflow H^H r and every iterate after it.
  ChannelInstance huge = inst;
  huge.r.setConstant(Complex(1.5e308, -1.5e308));
  CHECK_THROWS_AS(psadmm_detect(huge, make_params(10, {1}), mod), NumericalBlowup);
}

TEST_CASE("psadmm_detect: initialization modes") {
  const ModulationSpec mod(2);
  const auto ones = initial_state(3, mod, {InitMode::ones, 0});
  CHECK(ones.layers.size() == 2);
  CHECK(ones.x0(1) == Complex(1, 1));
  CHECK(initial_state(3, mod, {InitMode::minus_ones, 0}).y(2) == Complex(-1, -1));
  const auto r1 = initial_state(3, mod, {InitMode::random, 5});
  const auto r2 = initial_state(3, mod, {InitMode::random, 5});
  CHECK(r1.layers[1] == r2.layers[1]);
  CHECK(r1.layers[0].real().cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("psadmm_detect: layer-sign output mode") {
  const ModulationSpec mod(2);
  Rng rng(10);
  const ChannelInstance inst = random_instance(16, 4, mod, 30, rng);
  DetectorParams params = conforming_params(inst.h, 2);
  params.output = OutputMode::layer_signs;
  const auto res = psadmm_detect(inst, params, mod);
  for (Index u = 0; u < 4; ++u) CHECK(mod.contains(res.x_hat(u)));
}

TEST_CASE("iteration_bound and first_crossing") {
  ValidationReport report;
  report.c_constant = 0.5;
  CHECK(*iteration_bound(report, 10.0, 0.0, 1e-2) == doctest::Approx(2000.0));
  report.c_constant = 0.0;
  CHECK_FALSE(iteration_bound(report, 10.0, 0.0, 1e-2).has_value());

  IterationTrace trace;
  for (double r : {1.0, 0.1, 1e-6, 1e-9}) {
    IterationRecord rec;
    rec.residual = r;
    trace.iterations.push_back(rec);
  }
  CHECK(*first_crossing(trace, 1e-5) == 3);
  CHECK_FALSE(first_crossing(trace, 1e-12).has_value());
}

TEST_CASE("iteration_bound holds on conforming random instances") {
  Rng rng(77);
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const ModulationSpec mod(1 + rep % 2);
    const ChannelInstance inst = random_instance(8, 3, mod, 10, rng);
    DetectorParams params = conforming_params(inst.h, mod.layers());
    params.max_iters = 3000;
    const auto res = psadmm_detect(inst, params, mod);
    const auto bounds = spectrum_bounds(gram(inst.h), 1e-10, 20000);
    const auto report = validate_params(params, bounds);
    const auto t_obs = first_crossing(res.trace, params.residual_tol);
    REQUIRE(t_obs.has_value());
    const auto bound = iteration_bound(report, res.trace.iterations.front().lagrangian,
                                       res.trace.iterations.back().lagrangian,
                                       params.residual_tol);
    REQUIRE(bound.has_value());
    CHECK(*t_obs <= *bound);
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("stationarity_residual") {
  // f(t) = 1/2 (0.5 - t)^2 - 0.1 t^2 per part: stationary at t = 0.625.
  const ComplexMatrix h = ComplexMatrix::Identity(1, 1);
  const ComplexVector r = scalar(Complex(0.5, 0.5));
  DetectorState s;
  s.layers = {scalar(Complex(0.625, 0.625))};
  s.x0 = s.layers[0];
  s.y = scalar(0.0);
  CHECK(stationarity_residual(s, h, r, make_params(2.0, {0.2})) <= 1e-12);

  // Moving off the stationary point leaves a gradient of 0.8 * 0.1.
  s.layers = {scalar(Complex(0.725, 0.625))};
  CHECK(stationarity_residual(s, h, r, make_params(2.0, {0.2})) == doctest::Approx(0.08));

  // At +1 with a negative gradient the bound is active and satisfied.
  s.layers = {scalar(Complex(1, 1))};
  CHECK(stationarity_residual(s, h, scalar(Complex(5, 5)), make_params(2.0, {0.0})) == 0.0);
  // At +1 with a positive gradient it is violated.
  CHECK(stationarity_residual(s, h, scalar(Complex(0, 0)), make_params(2.0, {0.0})) ==
        doctest::Approx(1.0));

  // The detector converges to the interior point.
  ChannelInstance inst;
  inst.h = h;
  inst.r = r;
  inst.x_true = scalar(Complex(1, 1));
  DetectorParams p = make_params(2.0, {0.2});
  p.max_iters = 2000;
  p.residual_tol = 1e-24;
  const auto res = psadmm_detect(inst, p, ModulationSpec(1));
  CHECK(std::abs(res.final_state.layers[0](0) - Complex(0.625, 0.625)) < 1e-6);
  CHECK(stationarity_residual(res.final_state, h, r, p) <= 1e-6);
}

TEST_CASE("stationarity_residual after converged conforming runs") {
  Rng rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const ModulationSpec mod(1 + rep % 2);
    const ChannelInstance inst = random_instance(4 + rep % 12, 2 + rep % 3, mod, 10, rng);
    DetectorParams params = conforming_params(inst.h, mod.layers());
    params.max_iters = 20000;
    params.residual_tol = 1e-16;
    const auto res = psadmm_detect(inst, params, mod);
    worst = std::max(worst, stationarity_residual(res.final_state, inst.h, inst.r, params));
  }
  MESSAGE("worst stationarity violation " << worst);
  CHECK(worst <= 1e-4);
}
