// Benchmark CLI: convergence and norm-drift studies, lattice transport runs,
// and SVG rendering of the resulting CSV tables.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "dlra/dlra.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value experiment file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config seed")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--threads", args.threads,
                  "substep concurrency (1 = serial)");
}

dlra::ExperimentConfig load_config(const CommonArgs& args) {
  dlra::ExperimentConfig cfg = dlra::parse_experiment_config(args.config_path);
  if (args.seed_given) cfg.seed = args.seed;
  if (args.threads > 0) cfg.threads = args.threads;
  cfg.validate();
  return cfg;
}

void print_study(const dlra::StudyResult& study, const char* value_name) {
  for (const auto& s : study.series) {
    std::printf("%-14s r=%-3lld slope=%7.3f (%zu of %zu points%s) %s[last]=%g\n",
                s.variant.c_str(), static_cast<long long>(s.rank),
                s.fit.fit.slope, s.fit.last - s.fit.first + 1, s.h.size(),
                s.fit.floor_flagged ? ", floor excluded" : "", value_name,
                s.value.back());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamical low-rank integrator benchmarks"};
  app.require_subcommand(1);

  CommonArgs convergence_args, norm_args, lattice_args;
  auto* convergence =
      app.add_subcommand("convergence", "error-vs-h study with slope fits");
  add_common(convergence, convergence_args);
  auto* norm_drift =
      app.add_subcommand("norm-drift", "Frobenius-norm drift study");
  add_common(norm_drift, norm_args);
  auto* lattice =
      app.add_subcommand("lattice", "fixed-rank lattice transport run");
  add_common(lattice, lattice_args);

  std::string plot_csv, plot_kind = "convergence", plot_out = "plot.svg";
  auto* plot = app.add_subcommand("plot", "render a result CSV as SVG");
  plot->add_option("--csv", plot_csv, "input CSV")->required();
  plot->add_option("--kind", plot_kind, "convergence | norm-drift | heatmap");
  plot->add_option("--out", plot_out, "output SVG file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (convergence->parsed()) {
      const auto cfg = load_config(convergence_args);
      dlra::HarnessPaths paths{convergence_args.out_dir, ""};
      const auto study = dlra::run_convergence(cfg, paths);
      print_study(study, "error");
      std::printf("wrote %s/convergence.csv\n", paths.out_dir.c_str());
    } else if (norm_drift->parsed()) {
      const auto cfg = load_config(norm_args);
      dlra::HarnessPaths paths{norm_args.out_dir, ""};
      const auto study = dlra::run_norm_drift(cfg, paths);
      print_study(study, "drift");
      std::printf("wrote %s/norm_drift.csv\n", paths.out_dir.c_str());
    } else if (lattice->parsed()) {
      const auto cfg = load_config(lattice_args);
      dlra::HarnessPaths paths{lattice_args.out_dir, ""};
      const auto result = dlra::run_lattice(cfg, paths);
      for (const auto& run : result.runs) {
        std::printf("%-14s r=%-3lld stages=%d max_phi=%g wall_s=%.3f\n",
                    run.variant.c_str(), static_cast<long long>(run.rank),
                    run.stages, run.flux.maxCoeff(), run.wall_seconds);
      }
      if (result.runs.size() >= 2)
        std::printf("relative flux difference: %g\n", result.flux_difference);
      std::printf("wrote %s/runtime_summary.txt\n", paths.out_dir.c_str());
    } else if (plot->parsed()) {
      dlra::render_plot(plot_csv, dlra::plot_kind_from_string(plot_kind),
                        plot_out);
      std::printf("wrote %s\n", plot_out.c_str());
    }
  } catch (const dlra::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const dlra::InvalidInput& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const dlra::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
