#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dlra/harness/config.hpp"
#include "dlra/harness/reference.hpp"
#include "dlra/harness/runners.hpp"
#include "dlra/harness/slope.hpp"
#include "dlra/harness/svg.hpp"

namespace fs = std::filesystem;
using dlra::DenseMatrix;
using Mat = DenseMatrix<double>;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::size_t count_occurrences(const std::string& text,
                              const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST(FitSlope, ExactPowerLaws) {
  std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> quadratic, linear;
  for (double x : h) {
    quadratic.push_back(x * x);
    linear.push_back(3.0 * x);
  }
  EXPECT_NEAR(dlra::fit_slope(h, quadratic).slope, 2.0, 1e-12);
  EXPECT_NEAR(dlra::fit_slope(h, linear).slope, 1.0, 1e-12);
  EXPECT_NEAR(dlra::fit_slope(h, linear).intercept, std::log(3.0), 1e-12);
  EXPECT_LE(dlra::fit_slope(h, quadratic).residual, 1e-12);
}

TEST(FitSlope, RequiresThreePositivePoints) {
  std::vector<double> h = {0.1, 0.05};
  std::vector<double> e = {1.0, 0.5};
  EXPECT_THROW(dlra::fit_slope(h, e), dlra::InvalidInput);
  std::vector<double> h3 = {0.1, 0.05, 0.025};
  std::vector<double> bad = {1.0, 0.5, 0.0};
  EXPECT_THROW(dlra::fit_slope(h3, bad), dlra::InvalidInput);
}

TEST(FitSlope, WindowExcludesErrorFloor) {
  // quadratic decay on a 1e-10 floor
  std::vector<double> h, err;
  double x = 1e-1;
  for (int i = 0; i < 12; ++i) {
    h.push_back(x);
    err.push_back(x * x + 1e-10);
    x *= 0.4;
  }
  auto windowed = dlra::fit_slope_windowed(h, err);
  EXPECT_TRUE(windowed.floor_flagged);
  EXPECT_GE(windowed.fit.slope, 1.9);
  EXPECT_LE(windowed.fit.slope, 2.1);
  // clean data keeps the full window
  std::vector<double> clean;
  for (double hi : h) clean.push_back(hi * hi);
  auto full = dlra::fit_slope_windowed(h, clean);
  EXPECT_FALSE(full.floor_flagged);
  EXPECT_EQ(full.first, 0u);
  EXPECT_EQ(full.last, h.size() - 1);
  EXPECT_NEAR(full.fit.slope, 2.0, 1e-10);
}

TEST(Config, ParsesFullFile) {
  const fs::path dir = fresh_dir("dlra_cfg");
  write_file(dir / "cfg.txt",
             "# comment\n"
             "problem = schrodinger\n"
             "n = 64\n"
             "variants = parallel1, parallel2_v2\n"
             "ranks = 5,10\n"
             "h_max = 1e-1\n"
             "h_min = 1e-3\n"
             "h_points = 8\n"
             "final_time = 1.0\n"
             "truncation = tolerance\n"
             "theta = 1e-8\n"
             "solver = heun\n"
             "substeps = 4\n"
             "seed = 99\n"
             "threads = 2\n");
  auto cfg = dlra::parse_experiment_config((dir / "cfg.txt").string());
  EXPECT_EQ(cfg.problem, "schrodinger");
  EXPECT_EQ(cfg.grid_size, 64);
  ASSERT_EQ(cfg.variants.size(), 2u);
  EXPECT_EQ(cfg.variants[1], dlra::IntegratorVariant::parallel2_v2);
  ASSERT_EQ(cfg.ranks.size(), 2u);
  EXPECT_EQ(cfg.ranks[1], 10);
  EXPECT_EQ(cfg.truncation, dlra::TruncationMode::tolerance);
  EXPECT_EQ(cfg.solver.method, dlra::OdeMethod::heun);
  EXPECT_EQ(cfg.solver.substeps, 4);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.threads, 2);

  const auto grid = cfg.h_grid();
  ASSERT_EQ(grid.size(), 8u);
  EXPECT_DOUBLE_EQ(grid.front(), 1e-1);
  EXPECT_DOUBLE_EQ(grid.back(), 1e-3);
  for (std::size_t i = 1; i < grid.size(); ++i)
    EXPECT_LT(grid[i], grid[i - 1]);
}

TEST(Config, RejectsBadFiles) {
  const fs::path dir = fresh_dir("dlra_cfg_bad");
  write_file(dir / "unknown.txt", "problem = warp_drive\n");
  EXPECT_THROW(dlra::parse_experiment_config((dir / "unknown.txt").string()),
               dlra::ConfigError);
  write_file(dir / "grid.txt", "problem = schrodinger\nh_max = 1e-3\n"
                               "h_min = 1e-1\n");
  EXPECT_THROW(dlra::parse_experiment_config((dir / "grid.txt").string()),
               dlra::ConfigError);
  write_file(dir / "dup.txt", "n = 4\nn = 8\n");
  EXPECT_THROW(dlra::parse_experiment_config((dir / "dup.txt").string()),
               dlra::ConfigError);
  write_file(dir / "notnum.txt", "final_time = soon\n");
  EXPECT_THROW(dlra::parse_experiment_config((dir / "notnum.txt").string()),
               dlra::ConfigError);
  EXPECT_THROW(dlra::parse_experiment_config((dir / "missing.txt").string()),
               dlra::ConfigError);
}

TEST(Reference, ZeroFieldReturnsInitial) {
  dlra::CallbackOde<double> zero(5, 4, [](double, const Mat& y) {
    return Mat(Mat::Zero(y.rows(), y.cols()));
  });
  dlra::GaussianSampler rng(3);
  Mat a0 = rng.matrix<double>(5, 4);
  Mat ref = dlra::reference_solution(zero, a0, 0.0, 1.0, 1e-10, 1e-10, "",
                                     "zero-problem");
  EXPECT_EQ((ref - a0).norm(), 0.0);
}

TEST(Reference, MatchesClosedFormAndSelfConsistent) {
  auto problem = dlra::make_synthetic(dlra::SyntheticKind::scalar_exponential,
                                      8, 7, 3, 11, -0.7);
  Mat a0 = problem.initial.dense();
  Mat ref = dlra::reference_solution(*problem.rhs, a0, 0.0, 1.0, 1e-10, 1e-10,
                                     "", "exp-decay");
  EXPECT_LE((ref - problem.closed_form(1.0)).norm(),
            1e-8 * ref.norm());
  Mat tighter = dlra::reference_solution(*problem.rhs, a0, 0.0, 1.0, 5e-11,
                                         5e-11, "", "exp-decay");
  EXPECT_LE((ref - tighter).norm(), 1e-7 * ref.norm());
}

TEST(Reference, DiskCacheRoundTrip) {
  const fs::path dir = fresh_dir("dlra_ref_cache");
  auto problem = dlra::make_synthetic(dlra::SyntheticKind::two_sided, 6, 6, 2,
                                      13);
  Mat a0 = problem.initial.dense();
  bool from_cache = true;
  Mat first = dlra::reference_solution(*problem.rhs, a0, 0.0, 0.5, 1e-9, 1e-9,
                                       dir.string(), "cache-me", &from_cache);
  EXPECT_FALSE(from_cache);
  Mat second = dlra::reference_solution(*problem.rhs, a0, 0.0, 0.5, 1e-9, 1e-9,
                                        dir.string(), "cache-me", &from_cache);
  EXPECT_TRUE(from_cache);
  EXPECT_EQ((first - second).norm(), 0.0);
  // different tolerances miss the cache
  dlra::reference_solution(*problem.rhs, a0, 0.0, 0.5, 1e-8, 1e-8,
                           dir.string(), "cache-me", &from_cache);
  EXPECT_FALSE(from_cache);
}

TEST(RenderPlot, StructuralChecks) {
  const fs::path dir = fresh_dir("dlra_svg");
  write_file(dir / "two_series.csv",
             "variant,rank,h,error,slope_local\n"
             "parallel1,5,0.1,0.2,\n"
             "parallel1,5,0.05,0.1,1\n"
             "parallel2_v1,5,0.1,0.04,\n"
             "parallel2_v1,5,0.05,0.01,2\n");
  dlra::render_plot(dir / "two_series.csv", dlra::PlotKind::convergence,
                    dir / "plot.svg");
  const std::string svg = slurp(dir / "plot.svg");
  // two data series + four order guide lines
  EXPECT_EQ(count_occurrences(svg, "<polyline"), 6u);
  EXPECT_NE(svg.find("parallel2_v1 r=5"), std::string::npos);

  write_file(dir / "flux.csv",
             "x,y,phi\n"
             "0.5,0.5,1.0\n"
             "1.5,0.5,1e-3\n"
             "0.5,1.5,-0.25\n"
             "1.5,1.5,0.1\n");
  dlra::render_plot(dir / "flux.csv", dlra::PlotKind::heatmap,
                    dir / "flux.svg");
  const std::string heat = slurp(dir / "flux.svg");
  // the negative cell renders white (plus the background rect)
  EXPECT_GE(count_occurrences(heat, "fill=\"#ffffff\""), 2u);

  write_file(dir / "empty.csv", "variant,rank,h,error,slope_local\n");
  EXPECT_THROW(dlra::render_plot(dir / "empty.csv",
                                 dlra::PlotKind::convergence,
                                 dir / "nope.svg"),
               dlra::InvalidInput);

  // determinism: rendering twice gives identical bytes
  dlra::render_plot(dir / "two_series.csv", dlra::PlotKind::convergence,
                    dir / "plot2.svg");
  EXPECT_EQ(slurp(dir / "plot.svg"), slurp(dir / "plot2.svg"));
}

TEST(Runners, ConvergenceStudyDeterministicBytes) {
  const fs::path dir = fresh_dir("dlra_runner_det");
  dlra::ExperimentConfig cfg;
  cfg.problem = "synthetic_two_sided";
  cfg.rows = 10;
  cfg.cols = 10;
  cfg.variants = {dlra::IntegratorVariant::parallel1,
                  dlra::IntegratorVariant::parallel2_v2};
  cfg.ranks = {3};
  cfg.h_max = 0.1;
  cfg.h_min = 0.025;
  cfg.h_points = 3;
  cfg.final_time = 0.3;
  cfg.seed = 5;

  dlra::HarnessPaths paths_a{(dir / "a").string(), (dir / "cache").string()};
  dlra::HarnessPaths paths_b{(dir / "b").string(), (dir / "cache").string()};
  auto study_a = dlra::run_convergence(cfg, paths_a);
  auto study_b = dlra::run_convergence(cfg, paths_b);
  EXPECT_EQ(slurp(dir / "a" / "convergence.csv"),
            slurp(dir / "b" / "convergence.csv"));
  EXPECT_EQ(slurp(dir / "a" / "convergence_slopes.csv"),
            slurp(dir / "b" / "convergence_slopes.csv"));
  EXPECT_EQ(study_a.find("parallel1", 3).value.back(),
            study_b.find("parallel1", 3).value.back());
}

TEST(Runners, NormDriftRejectsIncompatibleProblem) {
  dlra::ExperimentConfig cfg;
  cfg.problem = "synthetic_two_sided";  // symmetric flow changes the norm
  cfg.rows = 8;
  cfg.cols = 8;
  cfg.variants = {dlra::IntegratorVariant::parallel1};
  cfg.ranks = {2};
  cfg.h_points = 3;
  cfg.h_max = 0.1;
  cfg.h_min = 0.02;
  cfg.final_time = 0.2;
  dlra::HarnessPaths paths{fresh_dir("dlra_norm_reject").string(), ""};
  EXPECT_THROW(dlra::run_norm_drift(cfg, paths), dlra::ConfigError);
}

TEST(Runners, LatticeMismatchedProblemRejected) {
  dlra::ExperimentConfig cfg;
  cfg.problem = "schrodinger";
  cfg.variants = {dlra::IntegratorVariant::parallel2_v2};
  cfg.ranks = {4};
  dlra::HarnessPaths paths{fresh_dir("dlra_lat_reject").string(), ""};
  EXPECT_THROW(dlra::run_lattice(cfg, paths), dlra::ConfigError);
}

#ifdef DLRA_BENCH_EXE
TEST(Cli, ExitCodesAndOutputs) {
  const fs::path dir = fresh_dir("dlra_cli");
  write_file(dir / "good.txt",
             "problem = synthetic_two_sided\n"
             "rows = 8\ncols = 8\n"
             "variants = parallel2_v1\n"
             "ranks = 2\n"
             "h_max = 0.1\nh_min = 0.05\nh_points = 3\n"
             "final_time = 0.2\n");
  write_file(dir / "bad.txt", "problem = nonsense\n");

  const std::string exe = DLRA_BENCH_EXE;
  auto run = [&](const std::string& args) {
    const std::string cmd = exe + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  EXPECT_EQ(run("convergence --config " + (dir / "good.txt").string() +
                " --out " + (dir / "out").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "convergence.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "convergence_slopes.csv"));

  EXPECT_EQ(run("convergence --config " + (dir / "bad.txt").string()), 2);
  EXPECT_EQ(run("convergence --config " + (dir / "missing.txt").string()), 2);
  EXPECT_EQ(run("plot --csv " + (dir / "out" / "convergence.csv").string() +
                " --kind convergence --out " + (dir / "plot.svg").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "plot.svg"));

  // identical seeds give byte-identical CSV outputs across CLI runs
  EXPECT_EQ(run("convergence --config " + (dir / "good.txt").string() +
                " --out " + (dir / "out2").string()),
            0);
  EXPECT_EQ(slurp(dir / "out" / "convergence.csv"),
            slurp(dir / "out2" / "convergence.csv"));
}
#endif

TEST(Runners, LatticeOverridesFlowThroughConfig) {
  const fs::path dir = fresh_dir("dlra_lattice_cfg");
  write_file(dir / "mats.txt", "3 3 0.0 10.0 2.0\n");
  dlra::ExperimentConfig cfg;
  cfg.problem = "lattice";
  cfg.cells_per_dim = 14;
  cfg.moment_degree = 1;
  cfg.lattice_overrides = (dir / "mats.txt").string();
  cfg.variants = {dlra::IntegratorVariant::parallel2_v2};
  cfg.ranks = {3};
  cfg.final_time = 0.25;
  cfg.solver = dlra::SolverConfig::heun_steps(1);
  dlra::HarnessPaths paths{(dir / "out").string(), ""};
  auto result = dlra::run_lattice(cfg, paths);
  ASSERT_EQ(result.runs.size(), 1u);
  // doubled source: flux scales up relative to the default material
  cfg.lattice_overrides.clear();
  dlra::HarnessPaths paths_default{(dir / "out_default").string(), ""};
  auto base = dlra::run_lattice(cfg, paths_default);
  EXPECT_GT(result.runs[0].flux.maxCoeff(),
            1.5 * base.runs[0].flux.maxCoeff());
  EXPECT_TRUE(fs::exists(dir / "out" / "flux_parallel2_v2_r3.csv"));
}
