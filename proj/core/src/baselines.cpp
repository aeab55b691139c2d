#include "psadmm/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "psadmm/errors.hpp"

namespace psadmm {
namespace {

ComplexVector regularized_estimate(const ChannelInstance& instance, double shift) {
  const ComplexMatrix g = gram(instance.h);
  const HermitianFactorization fact(g, shift);
  return fact.solve(instance.h.adjoint() * instance.r);
}

}  // namespace

ComplexVector zf_detect(const ChannelInstance& instance, const ModulationSpec& mod) {
  return hard_decision(regularized_estimate(instance, 0.0), mod);
}

ComplexVector mmse_detect(const ChannelInstance& instance, const ModulationSpec& mod) {
  const double shift = instance.sigma2 / mod.symbol_energy();
  return hard_decision(regularized_estimate(instance, shift), mod);
}

DetectionResult box_admm_detect(const ChannelInstance& instance,
                                const DetectorParams& params,
                                const ModulationSpec& mod) {
  DetectorParams box = params;
  box.alphas.assign(static_cast<std::size_t>(mod.layers()), 0.0);
  return psadmm_detect(instance, box, mod);
}

ComplexVector ml_bruteforce(const ChannelInstance& instance, const ModulationSpec& mod) {
  const Index users = instance.users();
  const double candidates =
      std::pow(static_cast<double>(mod.constellation_size()),
               static_cast<double>(users));
  if (candidates > kMlCandidateCap) {
    throw TooLarge("ml_bruteforce: " + std::to_string(candidates) +
                   " candidates exceed the cap of " +
                   std::to_string(kMlCandidateCap));
  }
  const std::vector<Complex> points = mod.constellation();
  const auto m = points.size();
  const auto total = static_cast<std::size_t>(candidates);

  // Columns of H scaled by each point, so a candidate's H x is a sum of
  // precomputed vectors.
  std::vector<std::vector<ComplexVector>> contrib(static_cast<std::size_t>(users));
  for (Index u = 0; u < users; ++u) {
    for (const Complex& p : points) contrib[u].push_back(instance.h.col(u) * p);
  }

  std::vector<std::size_t> digits(static_cast<std::size_t>(users), 0);
  ComplexVector best(users);
  double best_cost = std::numeric_limits<double>::infinity();
  ComplexVector hx(instance.antennas());
  for (std::size_t c = 0; c < total; ++c) {
    // Decode c with user 0 as the most significant digit.
    std::size_t rest = c;
    for (Index u = users - 1; u >= 0; --u) {
      digits[u] = rest % m;
      rest /= m;
    }
    hx.setZero();
    for (Index u = 0; u < users; ++u) hx += contrib[u][digits[u]];
    const double cost = (instance.r - hx).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      for (Index u = 0; u < users; ++u) best(u) = points[digits[u]];
    }
  }
  return best;
}

}  // namespace psadmm
