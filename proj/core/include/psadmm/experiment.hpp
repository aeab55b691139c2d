#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psadmm/config.hpp"
#include "psadmm/signal.hpp"

namespace psadmm {

/// Aggregated bit errors for one (detector, SNR) cell.
struct BerRecord {
  std::string detector;
  double snr_db = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits_total = 0;
  double ber = 0.0;
  double mean_iters = 0.0;
  double mean_residual_final = 0.0;
  std::uint64_t certificate_failures = 0;
  /// Trials on which the detector threw; their bits all count as errors.
  /// Not part of the CSV schema.
  std::uint64_t detector_failures = 0;
};

/// A detector as it appears in the output: its CSV label, kind and settings.
struct DetectorEntry {
  std::string label;
  DetectorKind kind = DetectorKind::psadmm;
  DetectorParams params;
};

/// Entries for every detector enabled in the config, labelled by kind.
std::vector<DetectorEntry> detector_entries(const ExperimentConfig& config);

/// Seed of the RNG stream for one trial: splitmix64 applied to the master
/// seed, then folded with the SNR index and the trial index. Depends only on
/// its arguments, so trials can run in any order on any worker.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t snr_index,
                         std::size_t trial_index);

/// One generated trial: the transmitted bits and the channel realization.
/// The trial RNG draws bits, then H, then the noise.
struct TrialSample {
  Bits bits;
  ChannelInstance instance;
};

TrialSample draw_trial(const ExperimentConfig& config, std::size_t snr_index,
                       std::size_t trial_index);

struct ExperimentResult {
  /// Sorted by (detector, snr_db).
  std::vector<BerRecord> records;
  /// Verify mode: one line per failed certificate.
  std::vector<std::string> certificate_log;
};

/// Runs every enabled detector on identical trials. The output is fully
/// determined by the config and master seed, whatever the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Same as run_experiment for an explicit detector list. Labels must be
/// unique.
ExperimentResult run_entries(const ExperimentConfig& config,
                             const std::vector<DetectorEntry>& entries);

struct SweepCell {
  double rho = 0.0;
  std::vector<double> alphas;
  std::vector<BerRecord> records;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<std::string> certificate_log;
};

/// Full-factorial PS-ADMM sweep over rho_grid x alpha_grid. Every cell sees
/// the same channel and noise samples. Each alpha_grid entry holds one value
/// per layer. Cells violating 4^{q-1} rho > alpha_q are reported with every
/// trial counted as a detector failure.
SweepResult sweep_params(const ExperimentConfig& base,
                         const std::vector<double>& rho_grid,
                         const std::vector<std::vector<double>>& alpha_grid);

/// CSV label of a sweep cell, e.g. "psadmm_rho120_alpha80" or
/// "psadmm_rho16_alpha8:30".
std::string sweep_label(double rho, const std::vector<double>& alphas);

/// Header used by emit_csv.
inline constexpr const char* kCsvHeader =
    "detector,snr_db,bit_errors,bits_total,ber,mean_iters,mean_residual_final,"
    "certificate_failures";

/// CSV text: header plus rows sorted by (detector, snr_db); reals with 10
/// significant digits, independent of the global locale; '\n' line endings.
std::string format_csv(std::vector<BerRecord> records);

/// Writes format_csv(records) to path. Throws IoError.
void emit_csv(const std::vector<BerRecord>& records, const std::string& path);

/// Parses text produced by format_csv. Throws ParseError.
std::vector<BerRecord> parse_csv(std::string_view text);

}  // namespace psadmm
