#include "psadmm/signal.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "psadmm/errors.hpp"

namespace psadmm {
namespace {

// Maps an odd level v in [-(2^Q-1), 2^Q-1] to the per-layer signs of
// v = sum_q 2^{q-1} s_q. With m = (v + 2^Q - 1)/2, s_q = 2*bit_{q-1}(m) - 1.
bool level_to_code(double v, const ModulationSpec& mod, unsigned& code) {
  if (!std::isfinite(v) || v != std::floor(v)) return false;
  const auto level = static_cast<long long>(v);
  const long long top = mod.max_level();
  if (level < -top || level > top || (level + top) % 2 != 0) return false;
  code = static_cast<unsigned>((level + top) / 2);
  return true;
}

double quantize_level(double t, int max_level) {
  const double q = 2.0 * std::floor(t / 2.0) + 1.0;
  const auto top = static_cast<double>(max_level);
  if (q > top) return top;
  if (q < -top) return -top;
  return q;
}

}  // namespace

ModulationSpec::ModulationSpec(int layers) : layers_(layers) {
  if (layers < 1 || layers > 15) {
    throw InvalidInput("ModulationSpec: layer count must be in [1, 15], got " +
                       std::to_string(layers));
  }
}

double ModulationSpec::symbol_energy() const noexcept {
  return 2.0 * (std::ldexp(1.0, 2 * layers_) - 1.0) / 3.0;
}

bool ModulationSpec::contains(Complex s) const noexcept {
  unsigned code = 0;
  return level_to_code(s.real(), *this, code) &&
         level_to_code(s.imag(), *this, code);
}

std::vector<int> ModulationSpec::levels() const {
  std::vector<int> out;
  for (int v = -max_level(); v <= max_level(); v += 2) out.push_back(v);
  return out;
}

std::vector<Complex> ModulationSpec::constellation() const {
  const auto lv = levels();
  std::vector<Complex> out;
  out.reserve(constellation_size());
  for (int re : lv) {
    for (int im : lv) out.emplace_back(re, im);
  }
  return out;
}

LayerStack bits_to_layers(std::span<const std::uint8_t> bits,
                          const ModulationSpec& mod, Index users) {
  const int q_count = mod.layers();
  const auto expected = static_cast<std::size_t>(2 * q_count * users);
  if (users < 1 || bits.size() != expected) {
    throw LengthMismatch("bits_to_layers: got " + std::to_string(bits.size()) +
                         " bits, expected " + std::to_string(expected));
  }
  LayerStack stack;
  stack.layers.assign(q_count, ComplexVector(users));
  std::size_t pos = 0;
  for (Index u = 0; u < users; ++u) {
    for (int q = 0; q < q_count; ++q) {
      const double re = bits[pos++] ? 1.0 : -1.0;
      const double im = bits[pos++] ? 1.0 : -1.0;
      stack.layers[q](u) = Complex(re, im);
    }
  }
  return stack;
}

ComplexVector recompose(const LayerStack& stack) {
  if (stack.layers.empty()) {
    throw InvalidInput("recompose: empty layer stack");
  }
  ComplexVector x = ComplexVector::Zero(stack.users());
  double weight = 1.0;
  for (const auto& layer : stack.layers) {
    if (layer.size() != x.size()) {
      throw DimensionMismatch("recompose: layers differ in length");
    }
    x += weight * layer;
    weight *= 2.0;
  }
  return x;
}

LayerStack decompose(const ComplexVector& x, const ModulationSpec& mod) {
  const int q_count = mod.layers();
  LayerStack stack;
  stack.layers.assign(q_count, ComplexVector(x.size()));
  for (Index u = 0; u < x.size(); ++u) {
    unsigned re_code = 0;
    unsigned im_code = 0;
    if (!level_to_code(x(u).real(), mod, re_code) ||
        !level_to_code(x(u).imag(), mod, im_code)) {
      throw NotInConstellation("decompose: entry " + std::to_string(u) +
                               " is not a " +
                               std::to_string(mod.constellation_size()) +
                               "-QAM point");
    }
    for (int q = 0; q < q_count; ++q) {
      const double re = ((re_code >> q) & 1U) ? 1.0 : -1.0;
      const double im = ((im_code >> q) & 1U) ? 1.0 : -1.0;
      stack.layers[q](u) = Complex(re, im);
    }
  }
  return stack;
}

ComplexMatrix rayleigh_channel(Index antennas, Index users, Rng& rng) {
  if (users < 1 || antennas < users) {
    throw InvalidInput("rayleigh_channel: need antennas >= users >= 1");
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix h(antennas, users);
  // Row-major draw order so the sequence does not depend on storage order.
  for (Index i = 0; i < antennas; ++i) {
    for (Index j = 0; j < users; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      h(i, j) = Complex(re, im);
    }
  }
  return h;
}

double noise_sigma(double snr_db, Index users, const ModulationSpec& mod) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return static_cast<double>(users) * mod.symbol_energy() /
         std::pow(10.0, snr_db / 10.0);
}

ChannelInstance transmit(const ComplexMatrix& h, const ComplexVector& x_true,
                         double sigma2, Rng& rng) {
  if (h.cols() != x_true.size()) {
    throw DimensionMismatch("transmit: H has " + std::to_string(h.cols()) +
                            " columns but x has length " +
                            std::to_string(x_true.size()));
  }
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw InvalidInput("transmit: sigma2 must be finite and >= 0");
  }
  ChannelInstance inst;
  inst.h = h;
  inst.x_true = x_true;
  inst.sigma2 = sigma2;
  inst.r = h * x_true;
  if (sigma2 > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * sigma2));
    for (Index i = 0; i < inst.r.size(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      inst.r(i) += Complex(re, im);
    }
  }
  return inst;
}

ComplexVector hard_decision(const ComplexVector& v, const ModulationSpec& mod) {
  ComplexVector out(v.size());
  const int top = mod.max_level();
  for (Index i = 0; i < v.size(); ++i) {
    out(i) = Complex(quantize_level(v(i).real(), top),
                     quantize_level(v(i).imag(), top));
  }
  return out;
}

Bits bits_from_symbols(const ComplexVector& symbols, const ModulationSpec& mod) {
  const LayerStack stack = decompose(symbols, mod);
  Bits bits;
  bits.reserve(static_cast<std::size_t>(2 * mod.layers() * symbols.size()));
  for (Index u = 0; u < symbols.size(); ++u) {
    for (const auto& layer : stack.layers) {
      bits.push_back(layer(u).real() > 0 ? 1 : 0);
      bits.push_back(layer(u).imag() > 0 ? 1 : 0);
    }
  }
  return bits;
}

Bits random_bits(std::size_t count, Rng& rng) {
  Bits bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  return bits;
}

}  // namespace psadmm
