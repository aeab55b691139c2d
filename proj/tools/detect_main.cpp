// detect: Monte Carlo BER runs, parameter sweeps and parameter validation for
// the sharing-ADMM QAM detector.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "psadmm/errors.hpp"
#include "psadmm/experiment.hpp"

namespace fs = std::filesystem;
using namespace psadmm;

namespace {

std::vector<double> parse_list(const std::string& text, char sep, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidInput(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw InvalidInput(std::string(what) + ": empty list");
  return out;
}

// "60,70,80" for Q = 1; "8:30,9:40" gives one alpha vector per comma item.
std::vector<std::vector<double>> parse_alpha_grid(const std::string& text) {
  std::vector<std::vector<double>> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(parse_list(item, ':', "--alpha"));
  if (grid.empty()) throw InvalidInput("--alpha: empty list");
  return grid;
}

ExperimentConfig resolve_config(const std::string& path, const std::string& preset) {
  if (!path.empty()) return load_config(path);
  auto found = find_preset(preset);
  if (!found) throw InvalidInput("unknown preset '" + preset + "' (see `detect presets`)");
  return *found;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write to " + path + " failed");
}

void write_log(const std::string& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + '\n';
  if (lines.empty()) text = "no certificate failures\n";
  write_text(path, text);
}

void print_report(const ValidationReport& r) {
  std::printf("  lambda_min %.6g  lambda_max %.6g  (converged: %s)\n", r.bounds.lambda_min,
              r.bounds.lambda_max, r.bounds.converged ? "yes" : "no");
  for (std::size_t q = 0; q < r.gamma_layers.size(); ++q) {
    std::printf("  layer %zu: gamma %.6g  4^(q-1) rho > alpha_q: %s\n", q + 1,
                r.gamma_layers[q], r.layer_conditions[q] ? "yes" : "no");
  }
  std::printf("  gamma_0 %.6g  rho > sqrt(2) lambda_max: %s\n", r.gamma_0,
              r.spectral_condition ? "yes" : "no");
  std::printf("  convergence conditions: %s  C = %.6g%s\n",
              r.convergence_conditions() ? "hold" : "do not hold", r.c_constant,
              r.c_constant > 0 ? "" : " (iteration bound inapplicable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharing-ADMM QAM detector: BER experiments and diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out_path;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  unsigned workers = 0;
  bool verify = false;

  auto* run = app.add_subcommand("run", "Run a BER experiment and write CSV");
  auto* run_cfg = run->add_option("--config", config_path, "Experiment YAML file");
  run->add_option("--preset", preset, "Built-in preset (fig1a ... fig1l)")->excludes(run_cfg);
  auto* seed_opt = run->add_option("--seed", seed, "Master seed override");
  auto* trials_opt = run->add_option("--trials", trials, "Trial count override")
                         ->check(CLI::PositiveNumber);
  run->add_option("--out", out_path, "CSV output path (default: config output or stdout)");
  run->add_flag("--verify", verify, "Check certificates; writes <out>.certificates.txt");
  auto* workers_opt = run->add_option("--workers", workers, "Worker threads (0 = all cores)");

  std::string rho_list;
  std::string alpha_list;
  auto* sweep = app.add_subcommand("sweep", "Full-factorial rho x alpha sweep of PS-ADMM");
  sweep->add_option("--config", config_path, "Experiment YAML file")->required();
  sweep->add_option("--rho", rho_list, "Comma-separated rho values")->required();
  sweep->add_option("--alpha", alpha_list,
                    "Comma-separated alpha values; colons separate layers when Q > 1")
      ->required();
  sweep->add_option("--out", out_path, "CSV output path (default stdout)");
  auto* sweep_workers = sweep->add_option("--workers", workers, "Worker threads");

  std::string write_dir;
  auto* list = app.add_subcommand("presets", "List the built-in presets");
  list->add_option("--write", write_dir, "Also write each preset as <dir>/<name>.yaml");

  std::size_t channels = 1;
  auto* check = app.add_subcommand("validate", "Report convergence conditions on sample channels");
  auto* check_cfg = check->add_option("--config", config_path, "Experiment YAML file");
  check->add_option("--preset", preset, "Built-in preset")->excludes(check_cfg);
  check->add_option("--channels", channels, "Channels to sample")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (config_path.empty() && preset.empty()) throw InvalidInput("run: --config or --preset required");
      ExperimentConfig config = resolve_config(config_path, preset);
      if (*seed_opt) config.master_seed = seed;
      if (*trials_opt) config.trials = trials;
      if (*workers_opt) config.workers = workers;
      if (verify) config.verify = true;
      if (!out_path.empty()) config.output_path = out_path;
      if (config.long_running) {
        std::fprintf(stderr, "note: %s is a full-size preset; expect a long run\n",
                     config.name.c_str());
      }
      const auto result = run_experiment(config);
      if (config.output_path.empty()) {
        std::cout << format_csv(result.records);
      } else {
        emit_csv(result.records, config.output_path);
      }
      if (config.verify) {
        const std::string log_path = config.output_path.empty()
                                         ? std::string("certificates.txt")
                                         : config.output_path + ".certificates.txt";
        write_log(log_path, result.certificate_log);
        std::fprintf(stderr, "%zu certificate failures, report in %s\n",
                     result.certificate_log.size(), log_path.c_str());
      }
      for (const auto& r : result.records) {
        if (r.detector_failures > 0) {
          std::fprintf(stderr, "warning: %s at %g dB failed on %llu trials\n",
                       r.detector.c_str(), r.snr_db,
                       static_cast<unsigned long long>(r.detector_failures));
        }
      }
      return 0;
    }

    if (*sweep) {
      ExperimentConfig config = load_config(config_path);
      if (*sweep_workers) config.workers = workers;
      const auto rhos = parse_list(rho_list, ',', "--rho");
      const auto alphas = parse_alpha_grid(alpha_list);
      const auto result = sweep_params(config, rhos, alphas);
      std::vector<BerRecord> records;
      for (const auto& cell : result.cells) {
        records.insert(records.end(), cell.records.begin(), cell.records.end());
      }
      if (out_path.empty()) {
        std::cout << format_csv(records);
      } else {
        emit_csv(records, out_path);
      }
      return 0;
    }

    if (*list) {
      for (const auto& p : presets()) {
        std::string alphas;
        for (double a : p.config.psadmm.alphas) {
          if (!alphas.empty()) alphas += ", ";
          std::ostringstream os;
          os << a;
          alphas += os.str();
        }
        std::printf("%-6s B=%ld U=%ld Q=%d rho=%g alpha=(%s)  %s\n", p.name.c_str(),
                    static_cast<long>(p.config.antennas), static_cast<long>(p.config.users),
                    p.config.layers, p.config.psadmm.rho, alphas.c_str(), p.caption.c_str());
        if (!write_dir.empty()) {
          fs::create_directories(write_dir);
          write_text((fs::path(write_dir) / (p.name + ".yaml")).string(), to_yaml(p.config));
        }
      }
      return 0;
    }

    if (*check) {
      if (config_path.empty() && preset.empty()) {
        throw InvalidInput("validate: --config or --preset required");
      }
      const ExperimentConfig config = resolve_config(config_path, preset);
      const ModulationSpec mod(config.layers);
      require_valid_params(config.psadmm, mod);
      std::printf("%s: B=%ld U=%ld Q=%d rho=%g\n", config.name.c_str(),
                  static_cast<long>(config.antennas), static_cast<long>(config.users),
                  config.layers, config.psadmm.rho);
      for (std::size_t c = 0; c < channels; ++c) {
        const auto trial = draw_trial(config, 0, c);
        const auto bounds = spectrum_bounds(gram(trial.instance.h), kDefaultEigenTolerance, 20000);
        std::printf("channel %zu:\n", c);
        print_report(validate_params(config.psadmm, bounds));
      }
      return 0;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid config:\n");
    for (const auto& p : e.problems()) std::fprintf(stderr, "  %s\n", p.c_str());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
