#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psadmm/detector.hpp"

namespace psadmm {

enum class DetectorKind { psadmm, box_admm, mmse, zf, ml };

std::string_view to_string(DetectorKind kind);
std::optional<DetectorKind> parse_detector_kind(std::string_view name);

/// One Monte Carlo experiment. See configs/example.yaml for the file schema.
struct ExperimentConfig {
  std::string name;
  Index antennas = 0;
  Index users = 0;
  int layers = 1;
  /// +inf is the noiseless sentinel.
  std::vector<double> snr_grid_db;
  std::size_t trials = 500;
  std::vector<DetectorKind> detectors;
  /// rho, alphas, iteration settings of the PS-ADMM detector.
  DetectorParams psadmm;
  /// Same settings for box-ADMM; its alphas are forced to zero at run time.
  DetectorParams box_admm;
  std::uint64_t master_seed = 1;
  bool verify = false;
  std::string output_path;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
  /// Full-size presets that take a long time at full trial counts.
  bool long_running = false;
};

/// Parses YAML text, applies defaults (K = 30, eps = 1e-5, zero
/// initialization, 500 trials) and validates. Throws ParseError for malformed
/// text, unknown keys or ill-typed values, ValidationError listing every
/// violated constraint.
ExperimentConfig parse_config(std::string_view text);

/// Reads and parses a config file. Throws IoError if it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ValidationError with every problem found.
void validate(const ExperimentConfig& config);

/// Serializes a config in the same schema parse_config reads.
std::string to_yaml(const ExperimentConfig& config);

struct Preset {
  std::string name;
  std::string caption;
  ExperimentConfig config;
};

/// Full-size presets fig1a ... fig1l (B = 128, 1000 trials).
const std::vector<Preset>& presets();
std::optional<ExperimentConfig> find_preset(std::string_view name);

}  // namespace psadmm
