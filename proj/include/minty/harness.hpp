#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "minty/algorithms.hpp"

namespace minty::harness {

/// Process exit statuses shared by every subcommand.
enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kIoError = 3, kDataError = 4 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter keys accepted in configs and on the command line:
/// gamma, delta (number | auto | half-gamma), delta_offset, lambda, alpha_bar,
/// nu, tau, gamma_init (number | curvature), iters, tol, seed, sigma,
/// seg_plus_decay, gamma_max.
void apply_param(AlgorithmConfig& cfg, const std::string& key, const std::string& value);
const std::vector<std::string>& param_keys();

struct MethodSpec {
  Method method = Method::CEG;
  /// Per-method parameter overrides, applied after the shared params.
  std::map<std::string, std::string> overrides;
};

/// Parses "NAME" or "NAME:key=value:key=value".
MethodSpec parse_method_spec(const std::string& text);

struct ExperimentSpec {
  std::string problem;
  std::vector<MethodSpec> methods;
  std::vector<Vector> initial_points;
  /// Shared parameters (raw strings, see apply_param).
  std::map<std::string, std::string> params;
  std::filesystem::path outputs = "runs";
  bool emit_plots = false;

  AlgorithmConfig config_for(std::size_t method_index) const;
};

/// "x,y,..." -> Vector.
Vector parse_point(const std::string& text);

/// Flat JSON object: problem, methods, z0, out, plots, shared params by key,
/// per-method params as "<METHOD>.<key>".
nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// %.17g, which round-trips every double.
std::string format_real(double v);

std::vector<std::string> csv_columns(int dim);
void write_run_csv(std::ostream& os, const RunResult& result, int dim);
/// Throws DataError on malformed input.
std::vector<IterationRecord> read_run_csv(std::istream& is);
std::vector<IterationRecord> read_run_csv(const std::filesystem::path& path);

/// File name used for one run's CSV: "<problem>__<method>__<index>.csv".
std::string run_file_name(const std::string& problem, Method method, std::size_t point_index);

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& problem, int grid_n, std::ostream& out, std::ostream& err);
int cmd_lowerbound(const std::vector<double>& c_values, const std::vector<double>& alpha_values,
                   const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err);
int cmd_plot(const std::vector<std::filesystem::path>& run_csvs, const std::filesystem::path& out_path,
             const std::optional<std::string>& problem, std::ostream& out, std::ostream& err);

}  // namespace minty::harness
