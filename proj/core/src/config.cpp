#include "psadmm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "psadmm/baselines.hpp"
#include "psadmm/errors.hpp"

namespace psadmm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

std::string scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ParseError("expected a scalar", line_of(node), key);
  return node.Scalar();
}

double to_double(const YAML::Node& node, const std::string& key) {
  std::string text = scalar(node, key);
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "inf" || lower == "+inf" || lower == ".inf" || lower == "+.inf") {
    return kInf;
  }
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || std::isnan(value)) {
    throw ParseError("'" + text + "' is not a number", line_of(node), key);
  }
  return value;
}

std::uint64_t to_unsigned(const YAML::Node& node, const std::string& key) {
  const std::string text = scalar(node, key);
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("'" + text + "' is not a non-negative integer",
                     line_of(node), key);
  }
  return value;
}

bool to_bool(const YAML::Node& node, const std::string& key) {
  const std::string text = scalar(node, key);
  if (text == "true" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "no" || text == "off") return false;
  throw ParseError("'" + text + "' is not a boolean", line_of(node), key);
}

std::vector<double> to_doubles(const YAML::Node& node, const std::string& key) {
  std::vector<double> out;
  if (node.IsScalar()) {
    out.push_back(to_double(node, key));
    return out;
  }
  if (!node.IsSequence()) throw ParseError("expected a list", line_of(node), key);
  for (const auto& item : node) out.push_back(to_double(item, key));
  return out;
}

InitMode to_init_mode(const YAML::Node& node, const std::string& key) {
  const std::string text = scalar(node, key);
  if (text == "zeros") return InitMode::zeros;
  if (text == "ones") return InitMode::ones;
  if (text == "minus_ones") return InitMode::minus_ones;
  if (text == "random") return InitMode::random;
  throw ParseError("unknown init mode '" + text +
                       "' (expected zeros, ones, minus_ones or random)",
                   line_of(node), key);
}

std::string_view init_name(InitMode mode) {
  switch (mode) {
    case InitMode::zeros: return "zeros";
    case InitMode::ones: return "ones";
    case InitMode::minus_ones: return "minus_ones";
    case InitMode::random: return "random";
  }
  return "zeros";
}

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string list(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += number(values[i]);
  }
  return out + "]";
}

ExperimentConfig defaults() {
  ExperimentConfig c;
  c.psadmm.max_iters = 30;
  c.psadmm.residual_tol = 1e-5;
  c.psadmm.init = {InitMode::zeros, 0};
  c.box_admm = c.psadmm;
  return c;
}

void apply(ExperimentConfig& c, const YAML::Node& root, bool& box_rho_set) {
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "preset") {
      continue;
    } else if (key == "name") {
      c.name = scalar(v, key);
    } else if (key == "B") {
      c.antennas = static_cast<Index>(to_unsigned(v, key));
    } else if (key == "U") {
      c.users = static_cast<Index>(to_unsigned(v, key));
    } else if (key == "Q") {
      c.layers = static_cast<int>(to_unsigned(v, key));
    } else if (key == "snr_db") {
      c.snr_grid_db = to_doubles(v, key);
    } else if (key == "trials") {
      c.trials = static_cast<std::size_t>(to_unsigned(v, key));
    } else if (key == "detectors") {
      c.detectors.clear();
      if (!v.IsSequence()) throw ParseError("expected a list", line_of(v), key);
      for (const auto& item : v) {
        const std::string name = scalar(item, key);
        const auto kind = parse_detector_kind(name);
        if (!kind) {
          throw ParseError("unknown detector '" + name +
                               "' (expected psadmm, box_admm, mmse, zf or ml)",
                           line_of(item), key);
        }
        c.detectors.push_back(*kind);
      }
    } else if (key == "rho") {
      c.psadmm.rho = to_double(v, key);
    } else if (key == "alphas") {
      c.psadmm.alphas = to_doubles(v, key);
    } else if (key == "box_admm_rho") {
      c.box_admm.rho = to_double(v, key);
      box_rho_set = true;
    } else if (key == "max_iters") {
      c.psadmm.max_iters = static_cast<int>(to_unsigned(v, key));
    } else if (key == "residual_tol") {
      c.psadmm.residual_tol = to_double(v, key);
    } else if (key == "init") {
      c.psadmm.init.mode = to_init_mode(v, key);
    } else if (key == "init_seed") {
      c.psadmm.init.seed = to_unsigned(v, key);
    } else if (key == "output_mode") {
      const std::string text = scalar(v, key);
      if (text == "x0") {
        c.psadmm.output = OutputMode::quantize_x0;
      } else if (text == "layer_signs") {
        c.psadmm.output = OutputMode::layer_signs;
      } else {
        throw ParseError("unknown output mode '" + text +
                             "' (expected x0 or layer_signs)",
                         line_of(v), key);
      }
    } else if (key == "master_seed") {
      c.master_seed = to_unsigned(v, key);
    } else if (key == "verify") {
      c.verify = to_bool(v, key);
    } else if (key == "output") {
      c.output_path = scalar(v, key);
    } else if (key == "workers") {
      c.workers = static_cast<unsigned>(to_unsigned(v, key));
    } else if (key == "long_running") {
      c.long_running = to_bool(v, key);
    } else {
      throw ParseError("unknown key", line_of(kv.first), key);
    }
  }
}

Preset make_preset(std::string name, Index users, int layers,
                   std::vector<double> alphas, double rho,
                   std::vector<double> snr) {
  ExperimentConfig c = defaults();
  c.name = name;
  c.antennas = 128;
  c.users = users;
  c.layers = layers;
  c.snr_grid_db = std::move(snr);
  c.trials = 1000;
  c.detectors = {DetectorKind::psadmm, DetectorKind::box_admm,
                 DetectorKind::mmse, DetectorKind::zf};
  c.psadmm.rho = rho;
  c.psadmm.alphas = std::move(alphas);
  c.box_admm = c.psadmm;
  c.box_admm.alphas.assign(static_cast<std::size_t>(layers), 0.0);
  c.long_running = true;

  const char* qam = layers == 1 ? "4-QAM" : layers == 2 ? "16-QAM" : "64-QAM";
  std::string caption = "B=128, U=" + std::to_string(users) + ", " + qam + ";";
  for (std::size_t q = 0; q < c.psadmm.alphas.size(); ++q) {
    caption += " alpha" + std::to_string(q + 1) + "=" + number(c.psadmm.alphas[q]) + ",";
  }
  caption += " rho=" + number(rho);
  return {std::move(name), std::move(caption), std::move(c)};
}

std::vector<double> grid(double from, double to, double step) {
  std::vector<double> out;
  for (double v = from; v <= to + 1e-9; v += step) out.push_back(v);
  return out;
}

}  // namespace

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::psadmm: return "psadmm";
    case DetectorKind::box_admm: return "box_admm";
    case DetectorKind::mmse: return "mmse";
    case DetectorKind::zf: return "zf";
    case DetectorKind::ml: return "ml";
  }
  return "unknown";
}

std::optional<DetectorKind> parse_detector_kind(std::string_view name) {
  for (auto k : {DetectorKind::psadmm, DetectorKind::box_admm, DetectorKind::mmse,
                 DetectorKind::zf, DetectorKind::ml}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  if (c.users < 1) problems.emplace_back("U must be >= 1");
  if (c.antennas < c.users) problems.emplace_back("B must be >= U");
  if (c.layers < 1 || c.layers > 15) problems.emplace_back("Q must be in [1, 15]");
  if (c.trials < 1) problems.emplace_back("trials must be >= 1");
  if (c.snr_grid_db.empty()) problems.emplace_back("snr_db must not be empty");
  for (double s : c.snr_grid_db) {
    if (std::isinf(s) && s < 0) problems.emplace_back("snr_db must not be -inf");
  }
  if (c.detectors.empty()) problems.emplace_back("detectors must not be empty");

  std::set<DetectorKind> seen;
  for (auto d : c.detectors) {
    if (!seen.insert(d).second) {
      problems.push_back("detector '" + std::string(to_string(d)) + "' listed twice");
    }
  }
  if (seen.count(DetectorKind::ml) && c.layers >= 1 && c.layers <= 15) {
    const double candidates =
        std::pow(4.0, static_cast<double>(c.layers) * static_cast<double>(c.users));
    if (candidates > kMlCandidateCap) {
      problems.emplace_back("ml requires 4^(Q*U) <= 1e6");
    }
  }

  auto check_admm = [&](const DetectorParams& p, const char* label, bool penalized) {
    if (!(p.rho > 0.0) || !std::isfinite(p.rho)) {
      problems.push_back(std::string(label) + ": rho must be positive");
    }
    if (p.max_iters < 1) problems.push_back(std::string(label) + ": max_iters must be >= 1");
    if (!(p.residual_tol > 0.0)) {
      problems.push_back(std::string(label) + ": residual_tol must be positive");
    }
    if (!penalized) return;
    if (p.alphas.size() != static_cast<std::size_t>(c.layers)) {
      problems.push_back(std::string(label) + ": alphas needs exactly Q = " +
                         std::to_string(c.layers) + " values");
      return;
    }
    for (std::size_t q = 0; q < p.alphas.size(); ++q) {
      const double a = p.alphas[q];
      const double w = layer_weight(q);
      if (!(a >= 0.0) || !std::isfinite(a)) {
        problems.push_back(std::string(label) + ": alpha_" + std::to_string(q + 1) +
                           " must be >= 0");
      } else if (!(w * w * p.rho > a)) {
        problems.push_back(std::string(label) + ": layer " + std::to_string(q + 1) +
                           " needs 4^(q-1)*rho > alpha_q");
      }
    }
  };
  if (seen.count(DetectorKind::psadmm)) check_admm(c.psadmm, "psadmm", true);
  if (seen.count(DetectorKind::box_admm)) check_admm(c.box_admm, "box_admm", false);

  if (!problems.empty()) throw ValidationError(std::move(problems));
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(e.msg, e.mark.line + 1, "");
  }
  if (!root.IsMap()) throw ParseError("top level must be a mapping", 1, "");

  ExperimentConfig c = defaults();
  if (const auto base = root["preset"]) {
    const std::string name = scalar(base, "preset");
    auto found = find_preset(name);
    if (!found) throw ParseError("unknown preset '" + name + "'", line_of(base), "preset");
    c = *found;
  }
  bool box_rho_set = false;
  apply(c, root, box_rho_set);
  // box-ADMM shares every iteration setting with PS-ADMM; only rho may differ.
  const double box_rho = box_rho_set ? c.box_admm.rho : c.psadmm.rho;
  c.box_admm = c.psadmm;
  c.box_admm.rho = box_rho;
  c.box_admm.alphas.assign(static_cast<std::size_t>(std::max(c.layers, 0)), 0.0);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  std::ostringstream os;
  if (!c.name.empty()) os << "name: " << c.name << "\n";
  os << "B: " << c.antennas << "\n";
  os << "U: " << c.users << "\n";
  os << "Q: " << c.layers << "\n";
  os << "snr_db: " << list(c.snr_grid_db) << "\n";
  os << "trials: " << c.trials << "\n";
  os << "detectors: [";
  for (std::size_t i = 0; i < c.detectors.size(); ++i) {
    os << (i ? ", " : "") << to_string(c.detectors[i]);
  }
  os << "]\n";
  os << "rho: " << number(c.psadmm.rho) << "\n";
  os << "alphas: " << list(c.psadmm.alphas) << "\n";
  if (c.box_admm.rho != c.psadmm.rho) os << "box_admm_rho: " << number(c.box_admm.rho) << "\n";
  os << "max_iters: " << c.psadmm.max_iters << "\n";
  os << "residual_tol: " << number(c.psadmm.residual_tol) << "\n";
  os << "init: " << init_name(c.psadmm.init.mode) << "\n";
  if (c.psadmm.init.mode == InitMode::random) os << "init_seed: " << c.psadmm.init.seed << "\n";
  if (c.psadmm.output == OutputMode::layer_signs) os << "output_mode: layer_signs\n";
  os << "master_seed: " << c.master_seed << "\n";
  os << "verify: " << (c.verify ? "true" : "false") << "\n";
  if (!c.output_path.empty()) os << "output: " << c.output_path << "\n";
  if (c.workers) os << "workers: " << c.workers << "\n";
  if (c.long_running) os << "long_running: true\n";
  return os.str();
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = [] {
    const auto qpsk = grid(0, 14, 2);
    const auto qam16 = grid(6, 20, 2);
    const auto qam64 = grid(12, 28, 2);
    std::vector<Preset> p;
    p.push_back(make_preset("fig1a", 16, 1, {80}, 120, qpsk));
    p.push_back(make_preset("fig1b", 32, 1, {80}, 120, qpsk));
    p.push_back(make_preset("fig1c", 64, 1, {80}, 120, qpsk));
    p.push_back(make_preset("fig1d", 128, 1, {80}, 120, qpsk));
    p.push_back(make_preset("fig1e", 16, 2, {8, 30}, 16, qam16));
    p.push_back(make_preset("fig1f", 32, 2, {9, 40}, 20, qam16));
    p.push_back(make_preset("fig1g", 64, 2, {12, 64}, 20, qam16));
    p.push_back(make_preset("fig1h", 128, 2, {10, 60}, 16, qam16));
    p.push_back(make_preset("fig1i", 16, 3, {22, 17, 95}, 96, qam64));
    p.push_back(make_preset("fig1j", 32, 3, {2, 2, 10.5}, 9, qam64));
    p.push_back(make_preset("fig1k", 64, 3, {22, 22.5, 85}, 44, qam64));
    p.push_back(make_preset("fig1l", 128, 3, {2.75, 2.25, 10.5}, 5, qam64));
    return p;
  }();
  return table;
}

std::optional<ExperimentConfig> find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.config;
  }
  return std::nullopt;
}

}  // namespace psadmm
