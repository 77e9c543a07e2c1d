#include <CLI11.hpp>

#include <iostream>

#include "minty/harness.hpp"
#include "minty/problems.hpp"

namespace h = minty::harness;

int main(int argc, char** argv) {
  CLI::App app{"minty: extragradient solvers for weak Minty variational inequalities"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run methods on a problem and write trajectory CSVs");
  std::string config_path, problem;
  std::vector<std::string> methods, z0s;
  std::map<std::string, std::string> flag_values;
  std::string out_dir;
  bool plots = false;
  run->add_option("--config", config_path, "JSON experiment spec (flags given here override it)");
  run->add_option("--problem", problem, "problem name");
  run->add_option("--method", methods, "method, optionally NAME:key=value:...")->take_all();
  run->add_option("--z0", z0s, "initial point x,y (repeatable)")->take_all();
  run->add_option("--out", out_dir, "output directory (default runs)");
  run->add_flag("--plots", plots, "also write an SVG of all runs");
  const std::vector<std::pair<std::string, std::string>> param_flags = {
      {"--gamma", "gamma"}, {"--delta", "delta"}, {"--lambda", "lambda"}, {"--alpha-bar", "alpha_bar"},
      {"--nu", "nu"},       {"--tau", "tau"},     {"--iters", "iters"},   {"--tol", "tol"},
      {"--seed", "seed"},   {"--sigma", "sigma"}, {"--gamma-init", "gamma_init"}};
  for (const auto& [flag, key] : param_flags) {
    run->add_option_function<std::string>(flag, [&flag_values, key = key](const std::string& v) { flag_values[key] = v; },
                                          "parameter " + key);
  }

  // verify
  auto* verify = app.add_subcommand("verify", "check a problem's constants and invariants");
  std::string verify_problem;
  int grid_n = 400;
  verify->add_option("--problem", verify_problem, "problem name")->required();
  verify->add_option("--grid-n", grid_n, "grid points per axis (>= 100)");

  // lowerbound
  auto* lower = app.add_subcommand("lowerbound", "spectral radius of EG+ on the worst-case bilinear game");
  std::vector<double> c_values, alpha_values;
  std::string lower_out;
  lower->add_option("--c", c_values, "c values in (0,1)")->take_all()->required();
  lower->add_option("--alpha-bar", alpha_values, "alpha-bar values in (0,1)")->take_all()->required();
  lower->add_option("--out", lower_out, "directory for grid and boundary CSVs");

  // plot
  auto* plot = app.add_subcommand("plot", "render run CSVs as SVG");
  std::vector<std::string> csvs;
  std::string plot_out = "plot.svg", plot_problem;
  plot->add_option("csvs", csvs, "run CSV files");
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_option("--problem", plot_problem, "problem for the box and cycle overlay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? h::kOk : h::kUsage;
  }

  try {
    if (*run) {
      h::ExperimentSpec spec;
      if (!config_path.empty()) {
        try {
          spec = h::load_spec(config_path);
        } catch (const h::UsageError&) {
          throw;
        } catch (const std::runtime_error& e) {
          std::cerr << "error: " << e.what() << '\n';
          return h::kIoError;
        }
      }
      if (!problem.empty()) spec.problem = problem;
      if (!methods.empty()) {
        spec.methods.clear();
        for (const auto& m : methods) spec.methods.push_back(h::parse_method_spec(m));
      }
      if (!z0s.empty()) {
        spec.initial_points.clear();
        for (const auto& z : z0s) spec.initial_points.push_back(h::parse_point(z));
      }
      for (const auto& [k, v] : flag_values) spec.params[k] = v;
      if (!out_dir.empty()) spec.outputs = out_dir;
      if (plots) spec.emit_plots = true;
      if (spec.problem.empty()) throw h::UsageError("--problem is required");
      return h::cmd_run(spec, std::cout, std::cerr);
    }
    if (*verify) return h::cmd_verify(verify_problem, grid_n, std::cout, std::cerr);
    if (*lower) {
      std::optional<std::filesystem::path> dir;
      if (!lower_out.empty()) dir = lower_out;
      return h::cmd_lowerbound(c_values, alpha_values, dir, std::cout, std::cerr);
    }
    if (*plot) {
      std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
      std::optional<std::string> prob;
      if (!plot_problem.empty()) prob = plot_problem;
      return h::cmd_plot(paths, plot_out, prob, std::cout, std::cerr);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kDataError;
  }
  return h::kUsage;
}
