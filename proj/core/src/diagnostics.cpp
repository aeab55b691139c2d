#include "psadmm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psadmm/errors.hpp"

namespace psadmm {
namespace {

void record(LemmaCheck& check, std::size_t i, double lhs, double rhs,
            double magnitude) {
  const double tol = kCertificateTolerance * (1.0 + magnitude);
  const double excess = lhs - rhs - tol;
  check.applicable[i] = true;
  check.excess[i] = excess;
  check.ok[i] = excess <= 0.0;
  if (excess > check.worst_violation) {
    check.worst_violation = excess;
    check.worst_iteration = static_cast<int>(i) + 1;
  }
}

LemmaCheck sized(std::size_t n) {
  LemmaCheck c;
  c.ok.assign(n, true);
  c.applicable.assign(n, false);
  c.excess.assign(n, 0.0);
  return c;
}

}  // namespace

double augmented_lagrangian(const DetectorState& state, const ComplexMatrix& h,
                            const ComplexVector& r, const DetectorParams& params) {
  if (params.alphas.size() != state.layers.size()) {
    throw DimensionMismatch("augmented_lagrangian: alphas/layers mismatch");
  }
  const ComplexVector gap = state.x0 - state.aggregate();
  double value = 0.5 * (r - h * state.x0).squaredNorm();
  for (std::size_t q = 0; q < state.layers.size(); ++q) {
    value -= 0.5 * params.alphas[q] * state.layers[q].squaredNorm();
  }
  value += real_inner(gap, state.y);
  value += 0.5 * params.rho * gap.squaredNorm();
  return value;
}

double penalized_objective(const std::vector<ComplexVector>& layers,
                           const ComplexMatrix& h, const ComplexVector& r,
                           const std::vector<double>& alphas) {
  if (alphas.size() != layers.size() || layers.empty()) {
    throw DimensionMismatch("penalized_objective: alphas/layers mismatch");
  }
  ComplexVector s = ComplexVector::Zero(layers.front().size());
  double penalty = 0.0;
  for (std::size_t q = 0; q < layers.size(); ++q) {
    s += layer_weight(q) * layers[q];
    penalty += 0.5 * alphas[q] * layers[q].squaredNorm();
  }
  return 0.5 * (r - h * s).squaredNorm() - penalty;
}

bool LemmaCheck::passed() const {
  return std::all_of(ok.begin(), ok.end(), [](bool b) { return b; });
}

std::size_t LemmaCheck::failures() const {
  return static_cast<std::size_t>(std::count(ok.begin(), ok.end(), false));
}

bool CertificateReport::passed() const {
  return lemma1.passed() && lemma2.passed() && lemma3.passed() &&
         telescoping.value_or(true);
}

LemmaCheck check_lemma1(const IterationTrace& trace, const SpectrumBounds& bounds) {
  LemmaCheck check = sized(trace.size());
  const double lmax = bounds.lambda_max_upper();
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const auto& it = trace.iterations[i];
    const double rhs = lmax * lmax * it.x0_step;
    record(check, i, it.dual_step, rhs, it.dual_step + rhs);
  }
  return check;
}

LemmaCheck check_lemma2(const IterationTrace& trace, const ValidationReport& report) {
  LemmaCheck check = sized(trace.size());
  if (!report.layers_ok()) return check;
  const double lmax = report.bounds.lambda_max_upper();
  const double gamma_0 = report.rho + report.bounds.lambda_min_lower();
  const double x0_coeff = gamma_0 / 2.0 - lmax * lmax / report.rho;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const auto& it = trace.iterations[i];
    const double before = trace.iterations[i - 1].lagrangian;
    double rhs = -x0_coeff * it.x0_step;
    for (std::size_t q = 0; q < it.layer_steps.size(); ++q) {
      rhs -= 0.5 * report.gamma_layers[q] * it.layer_steps[q];
    }
    const double lhs = it.lagrangian - before;
    record(check, i, lhs, rhs,
           std::abs(it.lagrangian) + std::abs(before) + std::abs(rhs));
  }
  return check;
}

LemmaCheck check_lemma3(const IterationTrace& trace, const ComplexMatrix& h,
                        const ComplexVector& r, const DetectorParams& params,
                        const ValidationReport& report) {
  if (trace.states.size() != trace.size() + 1) {
    throw InvalidInput("check_lemma3: trace was recorded without states");
  }
  LemmaCheck check = sized(trace.size());
  if (!report.convergence_conditions()) return check;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const DetectorState& s = trace.states[i + 1];
    const double lagrangian = augmented_lagrangian(s, h, r, params);
    const double bound = penalized_objective(s.layers, h, r, params.alphas);
    // lagrangian >= bound  <=>  bound - lagrangian <= 0
    record(check, i, bound, lagrangian, std::abs(lagrangian) + std::abs(bound));
  }
  return check;
}

std::optional<bool> check_telescoping(const IterationTrace& trace,
                                      const ValidationReport& report) {
  if (!(report.c_constant > 0.0) || trace.size() < 2) return std::nullopt;
  // Recompute C with tolerance-padded eigenvalues so the check does not
  // depend on the last digits of the estimates.
  const double lmax = report.bounds.lambda_max_upper();
  double c = (report.rho + report.bounds.lambda_min_lower()) / 2.0 -
             lmax * lmax / report.rho;
  for (double g : report.gamma_layers) c = std::min(c, g / 2.0);
  if (!(c > 0.0)) return std::nullopt;

  double summed = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) summed += trace.iterations[i].residual;
  const double first = trace.iterations.front().lagrangian;
  const double last = trace.iterations.back().lagrangian;
  const double tol =
      kCertificateTolerance * (1.0 + std::abs(first) + std::abs(last) + c * summed);
  return first - last >= c * summed - tol;
}

CertificateReport certify(const DetectionResult& result,
                          const ChannelInstance& instance,
                          const DetectorParams& params,
                          const ValidationReport& report) {
  CertificateReport out;
  out.applicable = report.convergence_conditions();
  out.lemma1 = check_lemma1(result.trace, report.bounds);
  out.lemma2 = check_lemma2(result.trace, report);
  out.lemma3 = check_lemma3(result.trace, instance.h, instance.r, params, report);
  out.telescoping = check_telescoping(result.trace, report);
  return out;
}

std::vector<std::string> describe_failures(const CertificateReport& report) {
  std::vector<std::string> lines;
  auto add = [&](const char* label, const LemmaCheck& check) {
    for (std::size_t i = 0; i < check.ok.size(); ++i) {
      if (check.ok[i]) continue;
      std::ostringstream os;
      os.precision(6);
      os << label << " iteration " << i + 1 << ": violation " << check.excess[i];
      lines.push_back(os.str());
    }
  };
  add("lemma1", report.lemma1);
  add("lemma2", report.lemma2);
  add("lemma3", report.lemma3);
  if (report.telescoping && !*report.telescoping) {
    lines.emplace_back("telescoping sum: violated");
  }
  return lines;
}

std::uint64_t flop_estimate(std::uint64_t antennas, std::uint64_t users,
                            std::uint64_t layers, std::uint64_t iterations) {
  const std::uint64_t u = users;
  const std::uint64_t b = antennas;
  // (2U^3 + 3BU^2 + 6BU) / 6, rounded half up, in exact integer arithmetic.
  const std::uint64_t sixths = 2 * u * u * u + 3 * b * u * u + 6 * b * u;
  const std::uint64_t fixed = (sixths + 3) / 6;
  return fixed + iterations * (u * u + layers * u);
}

}  // namespace psadmm
