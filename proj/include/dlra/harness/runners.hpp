#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dlra/harness/config.hpp"
#include "dlra/harness/csv.hpp"
#include "dlra/harness/reference.hpp"
#include "dlra/harness/slope.hpp"
#include "dlra/harness/svg.hpp"
#include "dlra/integrators/evolve.hpp"
#include "dlra/problems/lattice.hpp"
#include "dlra/problems/schrodinger.hpp"
#include "dlra/problems/synthetic.hpp"

namespace dlra {

struct HarnessPaths {
  std::string out_dir = "out";
  std::string cache_dir;  // empty: <out_dir>/cache

  std::string cache() const {
    return cache_dir.empty()
               ? (std::filesystem::path(out_dir) / "cache").string()
               : cache_dir;
  }
};

/// One (variant, rank) series of a study plus its fitted slope.
struct SeriesResult {
  std::string variant;
  Index rank = 0;
  std::vector<double> h;
  std::vector<double> value;  // relative error or norm drift
  WindowedSlopeFit fit;
};

struct StudyResult {
  std::vector<SeriesResult> series;

  const SeriesResult& find(const std::string& variant, Index rank) const {
    for (const auto& s : series)
      if (s.variant == variant && s.rank == rank) return s;
    throw InvalidInput("study series not found: " + variant);
  }
};

namespace harness_detail {

template <typename Scalar>
struct StudySetup {
  const MatrixOde<Scalar>* rhs = nullptr;
  std::function<LowRankState<Scalar>(Index)> initial_for_rank;
  std::function<DenseMatrix<Scalar>(Index)> reference_for_rank;
  std::function<std::string(Index)> cache_key_for_rank;
};

inline TruncationPolicy policy_for(const ExperimentConfig& cfg, Index rank) {
  if (cfg.truncation == TruncationMode::fixed_rank)
    return TruncationPolicy::fixed(rank);
  return TruncationPolicy::by_tolerance(cfg.theta);
}

inline EvolveOptions evolve_options(const ExperimentConfig& cfg, Index rank) {
  EvolveOptions opts;
  opts.step.solver = cfg.solver;
  opts.step.policy = policy_for(cfg, rank);
  opts.step.threads = cfg.threads;
  return opts;
}

inline std::string local_slope_field(const std::vector<double>& h,
                                     const std::vector<double>& v,
                                     std::size_t i) {
  if (i == 0 || v[i] <= 0.0 || v[i - 1] <= 0.0) return "";
  return format_double(std::log(v[i] / v[i - 1]) / std::log(h[i] / h[i - 1]));
}

template <typename Scalar>
StudyResult convergence_impl(const StudySetup<Scalar>& setup,
                             const ExperimentConfig& cfg,
                             const HarnessPaths& paths) {
  const std::vector<double> grid = cfg.h_grid();
  StudyResult study;
  CsvTable errors{"variant,rank,h,error,slope_local", {}};
  CsvTable slopes{
      "variant,rank,slope,intercept,residual,points_used,floor_flagged", {}};

  for (const Index rank : cfg.ranks) {
    const DenseMatrix<Scalar> reference = reference_solution(
        *setup.rhs, setup.reference_for_rank(rank), 0.0, cfg.final_time,
        cfg.ref_rtol, cfg.ref_atol, paths.cache(),
        setup.cache_key_for_rank(rank));
    const double ref_norm = reference.norm();
    const LowRankState<Scalar> y0 = setup.initial_for_rank(rank);

    for (const auto variant : cfg.variants) {
      SeriesResult series;
      series.variant = to_string(variant);
      series.rank = rank;
      for (const double h : grid) {
        auto out = evolve(y0, *setup.rhs, cfg.final_time, h, variant,
                          evolve_options(cfg, rank));
        if (!out.completed)
          throw NumericalError("convergence run failed (" + series.variant +
                               ", h=" + format_double(h) + "): " + out.message);
        const double err = (out.state.dense() - reference).norm() / ref_norm;
        series.h.push_back(h);
        series.value.push_back(err);
      }
      for (std::size_t i = 0; i < series.h.size(); ++i) {
        errors.rows.push_back(
            series.variant + "," + std::to_string(rank) + "," +
            format_double(series.h[i]) + "," + format_double(series.value[i]) +
            "," + local_slope_field(series.h, series.value, i));
      }
      if (series.h.size() >= 3) {
        series.fit = fit_slope_windowed(series.h, series.value);
        slopes.rows.push_back(
            series.variant + "," + std::to_string(rank) + "," +
            format_double(series.fit.fit.slope) + "," +
            format_double(series.fit.fit.intercept) + "," +
            format_double(series.fit.fit.residual) + "," +
            std::to_string(series.fit.last - series.fit.first + 1) + "," +
            (series.fit.floor_flagged ? "1" : "0"));
      } else {
        slopes.rows.push_back(series.variant + "," + std::to_string(rank) +
                              ",,,," + std::to_string(series.h.size()) + ",0");
      }
      study.series.push_back(std::move(series));
    }
  }

  const auto out = std::filesystem::path(paths.out_dir);
  write_csv(out / "convergence.csv", errors);
  write_csv(out / "convergence_slopes.csv", slopes);
  return study;
}

template <typename Scalar>
void require_norm_compatible(const MatrixOde<Scalar>& rhs,
                             std::uint64_t seed) {
  GaussianSampler rng(seed ^ 0x9e3779b97f4a7c15ull);
  for (int probe = 0; probe < 20; ++probe) {
    DenseMatrix<Scalar> z = rng.matrix<Scalar>(rhs.rows(), rhs.cols());
    DenseMatrix<Scalar> f = rhs.eval_full(0.0, z);
    const double re = std::real((z.adjoint() * f).trace());
    if (std::abs(re) > 1e-10 * z.norm() * (f.norm() + 1e-300))
      throw ConfigError(
          "norm-drift study requires a norm-compatible right-hand side");
  }
}

template <typename Scalar>
StudyResult norm_drift_impl(const StudySetup<Scalar>& setup,
                            const ExperimentConfig& cfg,
                            const HarnessPaths& paths) {
  require_norm_compatible(*setup.rhs, cfg.seed);
  const std::vector<double> grid = cfg.h_grid();
  StudyResult study;
  CsvTable drifts{"variant,rank,h,drift,slope_local", {}};
  CsvTable slopes{
      "variant,rank,slope,intercept,residual,points_used,floor_flagged", {}};

  for (const Index rank : cfg.ranks) {
    const LowRankState<Scalar> y0 = setup.initial_for_rank(rank);
    for (const auto variant : cfg.variants) {
      SeriesResult series;
      series.variant = to_string(variant);
      series.rank = rank;
      for (const double h : grid) {
        auto out = evolve(y0, *setup.rhs, cfg.final_time, h, variant,
                          evolve_options(cfg, rank));
        if (!out.completed)
          throw NumericalError("norm-drift run failed (" + series.variant +
                               ", h=" + format_double(h) + "): " + out.message);
        const double norm0 = out.records.front().norm;
        double drift = 0.0;
        for (const auto& rec : out.records)
          drift = std::max(drift, std::abs(rec.norm - norm0));
        series.h.push_back(h);
        series.value.push_back(drift);
      }
      for (std::size_t i = 0; i < series.h.size(); ++i) {
        drifts.rows.push_back(
            series.variant + "," + std::to_string(rank) + "," +
            format_double(series.h[i]) + "," + format_double(series.value[i]) +
            "," + local_slope_field(series.h, series.value, i));
      }
      if (series.h.size() >= 3) {
        series.fit = fit_slope_windowed(series.h, series.value);
        slopes.rows.push_back(
            series.variant + "," + std::to_string(rank) + "," +
            format_double(series.fit.fit.slope) + "," +
            format_double(series.fit.fit.intercept) + "," +
            format_double(series.fit.fit.residual) + "," +
            std::to_string(series.fit.last - series.fit.first + 1) + "," +
            (series.fit.floor_flagged ? "1" : "0"));
      } else {
        slopes.rows.push_back(series.variant + "," + std::to_string(rank) +
                              ",,,," + std::to_string(series.h.size()) + ",0");
      }
      study.series.push_back(std::move(series));
    }
  }

  const auto out = std::filesystem::path(paths.out_dir);
  write_csv(out / "norm_drift.csv", drifts);
  write_csv(out / "norm_drift_slopes.csv", slopes);
  return study;
}

inline SyntheticKind synthetic_kind(const std::string& problem) {
  if (problem == "synthetic_skew") return SyntheticKind::skew;
  if (problem == "synthetic_two_sided") return SyntheticKind::two_sided;
  return SyntheticKind::scalar_exponential;
}

}  // namespace harness_detail

/// Convergence study: relative Frobenius error at final time against a
/// cached dense reference, per (variant, rank, h); writes convergence.csv
/// and convergence_slopes.csv.
inline StudyResult run_convergence(const ExperimentConfig& cfg,
                                   const HarnessPaths& paths) {
  cfg.validate();
  using harness_detail::StudySetup;
  if (cfg.problem == "schrodinger") {
    SchrodingerProblem problem(cfg.grid_size);
    StudySetup<std::complex<double>> setup;
    setup.rhs = &problem.rhs();
    setup.initial_for_rank = [&](Index r) {
      return problem.initial_state(r, cfg.seed);
    };
    // the reference starts from the untruncated initial data
    setup.reference_for_rank = [&](Index) {
      return problem.initial_dense(cfg.seed);
    };
    setup.cache_key_for_rank = [&](Index) {
      return "schrodinger|n=" + std::to_string(cfg.grid_size) +
             "|seed=" + std::to_string(cfg.seed);
    };
    return harness_detail::convergence_impl(setup, cfg, paths);
  }
  if (cfg.problem.rfind("synthetic_", 0) == 0) {
    auto problem = make_synthetic(harness_detail::synthetic_kind(cfg.problem),
                                  cfg.rows, cfg.cols,
                                  std::max<Index>(cfg.ranks.front(), 1),
                                  cfg.seed, cfg.rate);
    StudySetup<double> setup;
    setup.rhs = problem.rhs.get();
    setup.initial_for_rank = [&](Index r) {
      return random_lowrank<double>(cfg.rows, cfg.cols, r, cfg.seed);
    };
    setup.reference_for_rank = [&](Index r) {
      return random_lowrank<double>(cfg.rows, cfg.cols, r, cfg.seed).dense();
    };
    setup.cache_key_for_rank = [&](Index r) {
      return cfg.problem + "|m=" + std::to_string(cfg.rows) +
             "|n=" + std::to_string(cfg.cols) +
             "|rank=" + std::to_string(r) + "|seed=" +
             std::to_string(cfg.seed) + "|rate=" + format_double(cfg.rate);
    };
    return harness_detail::convergence_impl(setup, cfg, paths);
  }
  throw ConfigError("convergence study does not support problem: " +
                    cfg.problem);
}

/// Norm-drift study on a norm-compatible problem: max_k | ||Y_k|| - ||Y_0|| |
/// per (variant, rank, h); writes norm_drift.csv and norm_drift_slopes.csv.
inline StudyResult run_norm_drift(const ExperimentConfig& cfg,
                                  const HarnessPaths& paths) {
  cfg.validate();
  using harness_detail::StudySetup;
  if (cfg.problem == "schrodinger") {
    SchrodingerProblem problem(cfg.grid_size);
    StudySetup<std::complex<double>> setup;
    setup.rhs = &problem.rhs();
    setup.initial_for_rank = [&](Index r) {
      return problem.initial_state(r, cfg.seed);
    };
    return harness_detail::norm_drift_impl(setup, cfg, paths);
  }
  if (cfg.problem == "synthetic_skew") {
    auto problem = make_synthetic(SyntheticKind::skew, cfg.rows, cfg.cols,
                                  std::max<Index>(cfg.ranks.front(), 1),
                                  cfg.seed, cfg.rate);
    StudySetup<double> setup;
    setup.rhs = problem.rhs.get();
    setup.initial_for_rank = [&](Index r) {
      return random_lowrank<double>(cfg.rows, cfg.cols, r, cfg.seed);
    };
    return harness_detail::norm_drift_impl(setup, cfg, paths);
  }
  throw ConfigError("norm-drift study does not support problem: " +
                    cfg.problem);
}

struct LatticeVariantResult {
  std::string variant;
  Index rank = 0;
  Eigen::MatrixXd flux;
  int stages = 0;
  double k_seconds = 0.0, l_seconds = 0.0, s_seconds = 0.0;
  double wall_seconds = 0.0;
  std::vector<RunRecord> records;
};

struct LatticeRunResult {
  std::vector<LatticeVariantResult> runs;
  double flux_difference = std::numeric_limits<double>::quiet_NaN();
};

/// Fixed-rank lattice runs: scalar-flux field CSV + log-scale SVG heatmap +
/// per-step record CSV per variant, and a runtime summary with the wall
/// time split by substep. Aborts on norm explosion beyond 1e6 x initial.
inline LatticeRunResult run_lattice(const ExperimentConfig& cfg,
                                    const HarnessPaths& paths) {
  cfg.validate();
  if (cfg.problem != "lattice")
    throw ConfigError("lattice study requires problem = lattice");
  std::vector<BlockOverride> overrides;
  if (!cfg.lattice_overrides.empty())
    overrides = load_block_overrides(cfg.lattice_overrides);
  LatticeProblem lattice(cfg.cells_per_dim, cfg.moment_degree, overrides);
  const double h = cfg.cfl * lattice.dx();
  const auto out_dir = std::filesystem::path(paths.out_dir);

  LatticeRunResult result;
  std::ostringstream summary;
  summary << "lattice run: cells_per_dim=" << cfg.cells_per_dim
          << " moment_degree=" << cfg.moment_degree
          << " final_time=" << format_double(cfg.final_time)
          << " h=" << format_double(h)
          << " solver=" << to_string(cfg.solver.method)
          << " substeps=" << cfg.solver.substeps << "\n";

  for (const auto variant : cfg.variants) {
    for (const Index rank : cfg.ranks) {
      LatticeVariantResult run;
      run.variant = to_string(variant);
      run.rank = rank;

      auto opts = harness_detail::evolve_options(cfg, rank);
      const LowRankState<double> y0 = lattice.initial_state(rank);
      // source injection grows the solution from the faint background; the
      // blow-up guard compares against that physical scale
      const double norm_scale =
          y0.norm() +
          std::sqrt(4.0 * M_PI) * lattice.source().norm() * cfg.final_time;
      StepObserver<double> observer =
          [&run](const LowRankState<double>&, const StepResult<double>& res) {
            run.k_seconds += res.k_seconds;
            run.l_seconds += res.l_seconds;
            run.s_seconds += res.s_seconds;
          };
      auto evolve_out = evolve(y0, lattice.rhs(), cfg.final_time, h, variant,
                               opts, observer);
      if (!evolve_out.completed)
        throw NumericalError("lattice run failed (" + run.variant +
                             "): " + evolve_out.message);
      for (const auto& rec : evolve_out.records) {
        if (rec.norm > 1e6 * std::max(norm_scale, 1e-300))
          throw NumericalError("lattice run unstable (" + run.variant +
                               "): norm " + format_double(rec.norm) +
                               " at t=" + format_double(rec.time));
      }

      run.records = evolve_out.records;
      run.stages = evolve_out.records.size() > 1
                       ? evolve_out.records[1].stages
                       : 0;
      run.wall_seconds = evolve_out.records.back().wall_seconds;
      run.flux = lattice.scalar_flux(evolve_out.state);

      const std::string tag =
          run.variant + "_r" + std::to_string(rank);
      CsvTable flux_csv{"x,y,phi", {}};
      const Index nx = lattice.cells_per_dim();
      for (Index iy = 0; iy < nx; ++iy) {
        for (Index ix = 0; ix < nx; ++ix) {
          flux_csv.rows.push_back(
              format_double((ix + 0.5) * lattice.dx()) + "," +
              format_double((iy + 0.5) * lattice.dx()) + "," +
              format_double(run.flux(ix, iy)));
        }
      }
      write_csv(out_dir / ("flux_" + tag + ".csv"), flux_csv);
      render_plot(out_dir / ("flux_" + tag + ".csv"), PlotKind::heatmap,
                  out_dir / ("flux_" + tag + ".svg"));

      CsvTable records_csv{"step,time,rank,norm,discarded,stages", {}};
      for (const auto& rec : run.records) {
        records_csv.rows.push_back(
            std::to_string(rec.step) + "," + format_double(rec.time) + "," +
            std::to_string(rec.rank) + "," + format_double(rec.norm) + "," +
            format_double(rec.discarded) + "," + std::to_string(rec.stages));
      }
      write_csv(out_dir / ("records_" + tag + ".csv"), records_csv);

      summary << run.variant << " r=" << rank
              << ": sequential_stages=" << run.stages
              << " wall_s=" << format_double(run.wall_seconds)
              << " k_s=" << format_double(run.k_seconds)
              << " l_s=" << format_double(run.l_seconds)
              << " s_s=" << format_double(run.s_seconds) << "\n";
      result.runs.push_back(std::move(run));
    }
  }

  if (result.runs.size() >= 2) {
    const auto& a = result.runs[0].flux;
    const auto& b = result.runs[1].flux;
    result.flux_difference = (a - b).norm() / b.norm();
    summary << "relative_flux_l2_difference(" << result.runs[0].variant
            << ", " << result.runs[1].variant
            << ") = " << format_double(result.flux_difference) << "\n";
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream summary_file(out_dir / "runtime_summary.txt");
  summary_file << summary.str();
  return result;
}

}  // namespace dlra
