#include "psadmm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "psadmm/baselines.hpp"
#include "psadmm/diagnostics.hpp"
#include "psadmm/errors.hpp"

namespace psadmm {
namespace {

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Eigenvalue accuracy used when certifying runs in verify mode.
constexpr double kVerifyEigenTolerance = 1e-10;
constexpr int kVerifyEigenCap = 20000;

struct EntryOutcome {
  std::uint64_t errors = 0;
  int iterations = 0;
  double final_residual = 0.0;
  bool certificate_failed = false;
  bool failed = false;
};

struct TrialOutcome {
  std::vector<EntryOutcome> entries;
  std::vector<std::string> log;
};

std::string short_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::uint64_t count_bit_errors(const Bits& truth, const ComplexVector& x_hat,
                               const ModulationSpec& mod) {
  const Bits detected = bits_from_symbols(x_hat, mod);
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) errors += truth[i] != detected[i];
  return errors;
}

TrialOutcome run_trial(const ExperimentConfig& config,
                       const std::vector<DetectorEntry>& entries,
                       std::size_t snr_index, std::size_t trial_index) {
  const ModulationSpec mod(config.layers);
  const TrialSample sample = draw_trial(config, snr_index, trial_index);
  const ChannelInstance& inst = sample.instance;

  std::optional<SpectrumBounds> bounds;
  TrialOutcome out;
  out.entries.resize(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const DetectorEntry& entry = entries[e];
    EntryOutcome& res = out.entries[e];
    try {
      ComplexVector x_hat;
      switch (entry.kind) {
        case DetectorKind::psadmm:
        case DetectorKind::box_admm: {
          DetectorParams params = entry.params;
          if (entry.kind == DetectorKind::box_admm) {
            params.alphas.assign(static_cast<std::size_t>(mod.layers()), 0.0);
          }
          params.record_states = config.verify;
          const DetectionResult result = psadmm_detect(inst, params, mod);
          x_hat = result.x_hat;
          res.iterations = result.iterations;
          res.final_residual = result.trace.iterations.back().residual;
          if (config.verify) {
            if (!bounds) {
              bounds = spectrum_bounds(gram(inst.h), kVerifyEigenTolerance,
                                       kVerifyEigenCap);
            }
            const ValidationReport report = validate_params(params, *bounds);
            const CertificateReport cert = certify(result, inst, params, report);
            if (!cert.passed()) {
              res.certificate_failed = true;
              const std::string prefix =
                  entry.label + " snr " + short_number(config.snr_grid_db[snr_index]) +
                  " trial " + std::to_string(trial_index) + ": ";
              for (const auto& line : describe_failures(cert)) {
                out.log.push_back(prefix + line);
              }
            }
          }
          break;
        }
        case DetectorKind::mmse: x_hat = mmse_detect(inst, mod); break;
        case DetectorKind::zf: x_hat = zf_detect(inst, mod); break;
        case DetectorKind::ml: x_hat = ml_bruteforce(inst, mod); break;
      }
      res.errors = count_bit_errors(sample.bits, x_hat, mod);
    } catch (const Error& err) {
      res = EntryOutcome{};
      res.failed = true;
      res.errors = sample.bits.size();
    }
  }
  return out;
}

bool record_less(const BerRecord& a, const BerRecord& b) {
  if (a.detector != b.detector) return a.detector < b.detector;
  return a.snr_db < b.snr_db;
}

void append_real(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
  out.append(buf, ptr);
}

}  // namespace

std::vector<DetectorEntry> detector_entries(const ExperimentConfig& config) {
  std::vector<DetectorEntry> out;
  for (auto kind : config.detectors) {
    DetectorEntry e;
    e.label = std::string(to_string(kind));
    e.kind = kind;
    if (kind == DetectorKind::psadmm) e.params = config.psadmm;
    if (kind == DetectorKind::box_admm) e.params = config.box_admm;
    out.push_back(std::move(e));
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t snr_index,
                         std::size_t trial_index) {
  std::uint64_t s = mix(master_seed);
  s = mix(s ^ (0xd1b54a32d192ed03ULL * (static_cast<std::uint64_t>(snr_index) + 1)));
  s = mix(s ^ (0x8cb92ba72f3d8dd7ULL * (static_cast<std::uint64_t>(trial_index) + 1)));
  return s;
}

TrialSample draw_trial(const ExperimentConfig& config, std::size_t snr_index,
                       std::size_t trial_index) {
  const ModulationSpec mod(config.layers);
  Rng rng(trial_seed(config.master_seed, snr_index, trial_index));
  TrialSample s;
  s.bits = random_bits(static_cast<std::size_t>(2 * mod.layers() * config.users), rng);
  const ComplexVector x = recompose(bits_to_layers(s.bits, mod, config.users));
  const ComplexMatrix h = rayleigh_channel(config.antennas, config.users, rng);
  const double sigma2 = noise_sigma(config.snr_grid_db.at(snr_index), config.users, mod);
  s.instance = transmit(h, x, sigma2, rng);
  return s;
}

ExperimentResult run_entries(const ExperimentConfig& config,
                             const std::vector<DetectorEntry>& entries) {
  validate(config);
  {
    std::set<std::string> labels;
    for (const auto& e : entries) {
      if (!labels.insert(e.label).second) {
        throw InvalidInput("duplicate detector label '" + e.label + "'");
      }
    }
  }

  const std::size_t snrs = config.snr_grid_db.size();
  const std::size_t total = snrs * config.trials;
  std::vector<TrialOutcome> outcomes(total);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        outcomes[i] = run_trial(config, entries, i / config.trials, i % config.trials);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  unsigned workers = config.workers ? config.workers : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, total));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  // Reduce in (snr, trial) order so floating sums do not depend on scheduling.
  ExperimentResult result;
  const auto bits_per_trial = static_cast<std::uint64_t>(2 * config.layers * config.users);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    for (std::size_t s = 0; s < snrs; ++s) {
      BerRecord rec;
      rec.detector = entries[e].label;
      rec.snr_db = config.snr_grid_db[s];
      double iters = 0.0;
      double residual_sum = 0.0;
      for (std::size_t t = 0; t < config.trials; ++t) {
        const EntryOutcome& o = outcomes[s * config.trials + t].entries[e];
        rec.bit_errors += o.errors;
        rec.certificate_failures += o.certificate_failed ? 1 : 0;
        rec.detector_failures += o.failed ? 1 : 0;
        iters += o.iterations;
        residual_sum += o.final_residual;
      }
      rec.bits_total = bits_per_trial * config.trials;
      rec.ber = static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bits_total);
      rec.mean_iters = iters / static_cast<double>(config.trials);
      rec.mean_residual_final = residual_sum / static_cast<double>(config.trials);
      result.records.push_back(std::move(rec));
    }
  }
  std::stable_sort(result.records.begin(), result.records.end(), record_less);
  for (const auto& o : outcomes) {
    result.certificate_log.insert(result.certificate_log.end(), o.log.begin(), o.log.end());
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_entries(config, detector_entries(config));
}

std::string sweep_label(double rho, const std::vector<double>& alphas) {
  std::string label = "psadmm_rho" + short_number(rho) + "_alpha";
  for (std::size_t q = 0; q < alphas.size(); ++q) {
    if (q) label += ":";
    label += short_number(alphas[q]);
  }
  return label;
}

SweepResult sweep_params(const ExperimentConfig& base,
                         const std::vector<double>& rho_grid,
                         const std::vector<std::vector<double>>& alpha_grid) {
  if (rho_grid.empty() || alpha_grid.empty()) {
    throw InvalidInput("sweep_params: empty grid");
  }
  ExperimentConfig config = base;
  // The sweep only runs PS-ADMM cells; validate the rest of the config
  // against a feasible placeholder.
  config.detectors = {DetectorKind::psadmm};
  config.psadmm.alphas.assign(static_cast<std::size_t>(config.layers), 0.0);
  config.psadmm.rho = 1.0;

  std::vector<DetectorEntry> entries;
  SweepResult out;
  for (double rho : rho_grid) {
    for (const auto& alphas : alpha_grid) {
      if (alphas.size() != static_cast<std::size_t>(base.layers)) {
        throw InvalidInput("sweep_params: every alpha grid entry needs Q values");
      }
      DetectorEntry e;
      e.label = sweep_label(rho, alphas);
      e.kind = DetectorKind::psadmm;
      e.params = base.psadmm;
      e.params.rho = rho;
      e.params.alphas = alphas;
      entries.push_back(e);
      out.cells.push_back({rho, alphas, {}});
    }
  }
  ExperimentResult run = run_entries(config, entries);
  for (std::size_t c = 0; c < entries.size(); ++c) {
    for (const auto& rec : run.records) {
      if (rec.detector == entries[c].label) out.cells[c].records.push_back(rec);
    }
  }
  out.certificate_log = std::move(run.certificate_log);
  return out;
}

std::string format_csv(std::vector<BerRecord> records) {
  std::stable_sort(records.begin(), records.end(), record_less);
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += r.detector;
    out += ',';
    append_real(out, r.snr_db);
    out += ',' + std::to_string(r.bit_errors) + ',' + std::to_string(r.bits_total) + ',';
    append_real(out, r.ber);
    out += ',';
    append_real(out, r.mean_iters);
    out += ',';
    append_real(out, r.mean_residual_final);
    out += ',' + std::to_string(r.certificate_failures) + '\n';
  }
  return out;
}

}  // namespace psadmm
