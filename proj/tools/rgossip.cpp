#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "robust_gossip/errors.hpp"
#include "robust_gossip/experiment.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config, "JSON experiment config");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--trials", c.trials, "number of trials");
  cmd->add_option("--out", c.out, "output CSV path (default: stdout)");
}

rgossip::ExperimentConfig load(const Common& c) {
  rgossip::ExperimentConfig cfg = rgossip::load_config(c.config);
  if (c.seed) cfg.base_seed = *c.seed;
  if (c.trials) {
    if (*c.trials == 0) throw rgossip::ConfigError("--trials must be positive");
    cfg.trials = *c.trials;
  }
  return cfg;
}

// `--out`, then the config's output field, then stdout.
template <typename Writer>
void emit(const std::string& out, const std::filesystem::path& fallback, Writer&& write) {
  const std::filesystem::path path = out.empty() ? fallback : std::filesystem::path(out);
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream file(path);
  if (!file) throw rgossip::ConfigError("cannot write " + path.string());
  write(file);
  std::cerr << "wrote " << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gossip ranking and robust mean estimation experiments"};
  app.require_subcommand(1);

  Common spectral_opts;
  Common run_opts;
  Common breakdown_opts;
  Common preset_opts;
  std::string preset_name;
  std::size_t preset_n = 100;
  std::optional<std::uint64_t> preset_iterations;
  std::size_t workers = 0;

  auto* spectral = app.add_subcommand("spectral", "spectral constants of the configured topology");
  add_common(spectral, spectral_opts, true);
  auto* run = app.add_subcommand("run", "run a protocol ensemble and write aggregated trajectories");
  add_common(run, run_opts, true);
  run->add_option("--workers", workers, "worker threads (results do not depend on it)");
  auto* breakdown = app.add_subcommand("breakdown", "corruption-count and magnitude sweep for gotrim");
  add_common(breakdown, breakdown_opts, true);
  auto* preset = app.add_subcommand("preset", "run a named figure preset");
  add_common(preset, preset_opts, false);
  preset->add_option("name", preset_name, "preset name")
      ->required()
      ->check(CLI::IsMember(rgossip::preset_names()));
  preset->add_option("--n", preset_n, "number of nodes")->check(CLI::Range(10, 100000));
  preset->add_option("--iterations", preset_iterations, "rounds per trial");
  preset->add_option("--workers", workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*spectral) {
      const auto cfg = load(spectral_opts);
      const auto report = rgossip::cmd_spectral(cfg);
      emit(spectral_opts.out, cfg.output, [&](std::ostream& os) { rgossip::write_spectral(os, report); });
    } else if (*run) {
      auto cfg = load(run_opts);
      if (workers > 0) cfg.workers = workers;
      const auto result = rgossip::cmd_run(cfg);
      emit(run_opts.out, cfg.output, [&](std::ostream& os) { rgossip::write_csv(os, result); });
    } else if (*breakdown) {
      const auto cfg = load(breakdown_opts);
      const auto result = rgossip::cmd_breakdown(cfg);
      emit(breakdown_opts.out, cfg.output, [&](std::ostream& os) { rgossip::write_breakdown_csv(os, result); });
    } else if (*preset) {
      rgossip::PresetOptions opt;
      opt.n = preset_n;
      opt.trials = preset_opts.trials;
      opt.base_seed = preset_opts.seed.value_or(0);
      opt.iterations = preset_iterations;
      if (workers > 0) opt.workers = workers;
      const auto result = rgossip::run_preset(preset_name, opt);
      const std::string out = preset_opts.out.empty() ? preset_name + ".csv" : preset_opts.out;
      emit(out, {}, [&](std::ostream& os) { rgossip::write_csv(os, result); });
    }
  } catch (const rgossip::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const rgossip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const rgossip::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const rgossip::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const rgossip::SetupError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const rgossip::GenerationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
