#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "psadmm/numerics.hpp"

namespace psadmm {

/// Random engine used for every stochastic draw. Each concurrent trial owns
/// its own instance.
using Rng = std::mt19937_64;

using Bits = std::vector<std::uint8_t>;

/// Square 4^Q-QAM constellation with real and imaginary levels in
/// {±1, ±3, ..., ±(2^Q - 1)}.
class ModulationSpec {
 public:
  /// Throws InvalidInput unless 1 <= layers <= 15.
  explicit ModulationSpec(int layers);

  int layers() const noexcept { return layers_; }
  int bits_per_symbol() const noexcept { return 2 * layers_; }
  /// Largest level 2^Q - 1.
  int max_level() const noexcept { return (1 << layers_) - 1; }
  std::size_t constellation_size() const noexcept {
    return std::size_t{1} << (2 * layers_);
  }
  /// Average symbol energy 2(4^Q - 1)/3.
  double symbol_energy() const noexcept;

  /// True when both parts are odd integers within the level range.
  bool contains(Complex s) const noexcept;

  /// All points, real level ascending then imaginary level ascending.
  std::vector<Complex> constellation() const;
  /// The odd levels -(2^Q-1), ..., 2^Q-1 in ascending order.
  std::vector<int> levels() const;

  friend bool operator==(const ModulationSpec&, const ModulationSpec&) = default;

 private:
  int layers_;
};

/// Binary layers x_1..x_Q with every real and imaginary part in {-1, +1}.
/// layers[0] is the least significant layer (weight 1), layers[q] carries
/// weight 2^q.
struct LayerStack {
  std::vector<ComplexVector> layers;

  int depth() const noexcept { return static_cast<int>(layers.size()); }
  Index users() const noexcept { return layers.empty() ? 0 : layers.front().size(); }
};

/// One realization of r = H x + n for a B x U system.
struct ChannelInstance {
  ComplexMatrix h;
  ComplexVector x_true;
  double sigma2 = 0.0;
  ComplexVector r;

  Index antennas() const noexcept { return h.rows(); }
  Index users() const noexcept { return h.cols(); }
};

/// Bit b maps to the sign 2b - 1. Bits are consumed user by user; within a
/// user, layer 1..Q, real part before imaginary part, so bit index
/// u*2Q + 2(q-1) + {0: real, 1: imag}. Throws LengthMismatch.
LayerStack bits_to_layers(std::span<const std::uint8_t> bits,
                          const ModulationSpec& mod, Index users);

/// x = sum_q 2^{q-1} x_q.
ComplexVector recompose(const LayerStack& stack);

/// Unique layer stack whose recomposition is x. Throws NotInConstellation.
LayerStack decompose(const ComplexVector& x, const ModulationSpec& mod);

/// Entries i.i.d. CN(0, 1). Throws InvalidInput unless antennas >= users >= 1.
ComplexMatrix rayleigh_channel(Index antennas, Index users, Rng& rng);

/// Total complex noise variance per receive antenna that yields the requested
/// average per-antenna SNR, U * E_s / 10^(snr_db/10). +inf dB maps to 0.
double noise_sigma(double snr_db, Index users, const ModulationSpec& mod);

/// r = H x + n with n i.i.d. CN(0, sigma2). sigma2 = 0 gives r = H x exactly
/// and consumes no randomness.
ChannelInstance transmit(const ComplexMatrix& h, const ComplexVector& x_true,
                         double sigma2, Rng& rng);

/// Per part: clamp(2*floor(t/2) + 1, -(2^Q-1), 2^Q-1). Nearest odd level,
/// ties at even integers go up.
ComplexVector hard_decision(const ComplexVector& v, const ModulationSpec& mod);

/// Inverse of recompose(bits_to_layers(.)). Throws NotInConstellation.
Bits bits_from_symbols(const ComplexVector& symbols, const ModulationSpec& mod);

/// Uniform random bit block.
Bits random_bits(std::size_t count, Rng& rng);

}  // namespace psadmm
