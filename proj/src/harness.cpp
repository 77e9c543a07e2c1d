#include "minty/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "minty/diagnostics.hpp"
#include "minty/plot.hpp"

namespace minty::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
    throw UsageError("parameter " + key + ": not a number: '" + value + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw UsageError("parameter " + key + ": not an integer: '" + value + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_real(v.get<double>());
  throw UsageError("config: expected a scalar, got " + v.dump());
}

std::string point_to_string(const Vector& z) {
  std::string s;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (i) s += ",";
    s += format_real(z[i]);
  }
  return s;
}

std::optional<double> parse_optional(const std::string& field) {
  if (field.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) throw DataError("bad number in CSV: '" + field + "'");
  return v;
}

double parse_required(const std::string& field) {
  const auto v = parse_optional(field);
  if (!v) throw DataError("missing required CSV field");
  return *v;
}

}  // namespace

const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys = {"gamma", "delta", "delta_offset", "lambda", "alpha_bar",
                                                "nu",    "tau",   "gamma_init",   "iters",  "tol",
                                                "seed",  "sigma", "seg_plus_decay", "gamma_max"};
  return keys;
}

void apply_param(AlgorithmConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "gamma") {
    cfg.gamma = to_double(key, value);
  } else if (key == "delta") {
    if (value == "auto") {
      cfg.delta_policy = DeltaPolicy::automatic;
    } else if (value == "half-gamma") {
      cfg.delta_policy = DeltaPolicy::half_gamma_offset;
    } else {
      cfg.delta_policy = DeltaPolicy::fixed;
      cfg.delta_value = to_double(key, value);
    }
  } else if (key == "delta_offset") {
    cfg.delta_offset = to_double(key, value);
  } else if (key == "lambda") {
    cfg.lambda = to_double(key, value);
  } else if (key == "alpha_bar") {
    cfg.alpha_bar = to_double(key, value);
  } else if (key == "nu") {
    cfg.nu = to_double(key, value);
  } else if (key == "tau") {
    cfg.tau = to_double(key, value);
  } else if (key == "gamma_init") {
    if (value == "curvature") {
      cfg.gamma_init_policy = GammaInit::curvature;
    } else {
      cfg.gamma_init_policy = GammaInit::fixed;
      cfg.gamma_init = to_double(key, value);
    }
  } else if (key == "iters") {
    const long long v = to_integer(key, value);
    if (v < 1 || v > 100000000) throw UsageError("parameter iters out of range");
    cfg.max_iters = static_cast<int>(v);
  } else if (key == "tol") {
    cfg.residual_tol = to_double(key, value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_integer(key, value));
  } else if (key == "sigma") {
    cfg.noise_sigma = to_double(key, value);
  } else if (key == "seg_plus_decay") {
    cfg.seg_plus_decay = to_double(key, value);
  } else if (key == "gamma_max") {
    cfg.gamma_max = to_double(key, value);
  } else {
    throw UsageError("unknown parameter: " + key);
  }
}

MethodSpec parse_method_spec(const std::string& text) {
  const auto parts = split(text, ':');
  MethodSpec spec;
  const auto m = parse_method(trim(parts[0]));
  if (!m) throw UsageError("unknown method: " + parts[0]);
  spec.method = *m;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw UsageError("method override must be key=value: " + parts[i]);
    spec.overrides[trim(parts[i].substr(0, eq))] = trim(parts[i].substr(eq + 1));
  }
  return spec;
}

AlgorithmConfig ExperimentSpec::config_for(std::size_t method_index) const {
  AlgorithmConfig cfg;
  for (const auto& [k, v] : params) apply_param(cfg, k, v);
  for (const auto& [k, v] : methods.at(method_index).overrides) apply_param(cfg, k, v);
  return cfg;
}

Vector parse_point(const std::string& text) {
  const auto parts = split(text, ',');
  Vector z(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) z[static_cast<Eigen::Index>(i)] = to_double("z0", trim(parts[i]));
  return z;
}

json spec_to_json(const ExperimentSpec& spec) {
  json j = json::object();
  j["problem"] = spec.problem;
  json methods = json::array();
  for (const auto& m : spec.methods) {
    methods.push_back(std::string(method_name(m.method)));
    for (const auto& [k, v] : m.overrides) j[std::string(method_name(m.method)) + "." + k] = v;
  }
  j["methods"] = methods;
  json points = json::array();
  for (const auto& z : spec.initial_points) points.push_back(point_to_string(z));
  j["z0"] = points;
  j["out"] = spec.outputs.string();
  j["plots"] = spec.emit_plots;
  for (const auto& [k, v] : spec.params) j[k] = v;
  return j;
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  ExperimentSpec spec;
  std::map<std::string, std::map<std::string, std::string>> per_method;
  for (const auto& [key, value] : j.items()) {
    if (key == "problem") {
      spec.problem = value.get<std::string>();
    } else if (key == "methods") {
      const json list = value.is_array() ? value : json::array({value});
      for (const auto& m : list) spec.methods.push_back(parse_method_spec(m.get<std::string>()));
    } else if (key == "z0") {
      const json list = value.is_array() ? value : json::array({value});
      for (const auto& p : list) {
        if (p.is_array()) {
          Vector z(static_cast<Eigen::Index>(p.size()));
          for (std::size_t i = 0; i < p.size(); ++i) z[static_cast<Eigen::Index>(i)] = p[i].get<double>();
          spec.initial_points.push_back(z);
        } else {
          spec.initial_points.push_back(parse_point(p.get<std::string>()));
        }
      }
    } else if (key == "out") {
      spec.outputs = value.get<std::string>();
    } else if (key == "plots") {
      spec.emit_plots = value.get<bool>();
    } else if (const auto dot = key.rfind('.'); dot != std::string::npos) {
      per_method[key.substr(0, dot)][key.substr(dot + 1)] = json_scalar_to_string(value);
    } else {
      spec.params[key] = json_scalar_to_string(value);
    }
  }
  for (auto& m : spec.methods) {
    const auto it = per_method.find(std::string(method_name(m.method)));
    if (it != per_method.end()) {
      for (const auto& [k, v] : it->second) m.overrides[k] = v;
    }
  }
  // Unknown keys fail here rather than at run time.
  AlgorithmConfig probe;
  for (const auto& [k, v] : spec.params) apply_param(probe, k, v);
  return spec;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> csv_columns(int dim) {
  std::vector<std::string> cols = {"k"};
  for (int i = 0; i < dim; ++i) cols.push_back("z[" + std::to_string(i) + "]");
  for (int i = 0; i < dim; ++i) cols.push_back("zbar[" + std::to_string(i) + "]");
  for (const char* c : {"gamma_k", "alpha_k", "residual", "dist_to_star", "backtracks", "fejer_gap"}) {
    cols.emplace_back(c);
  }
  return cols;
}

void write_run_csv(std::ostream& os, const RunResult& result, int dim) {
  const auto cols = csv_columns(dim);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : result.records) {
    os << r.k;
    for (int i = 0; i < dim; ++i) os << ',' << format_real(r.z[i]);
    for (int i = 0; i < dim; ++i) os << ',' << format_real(r.z_bar[i]);
    os << ',' << format_real(r.gamma_k) << ',' << format_real(r.alpha_k) << ',' << format_real(r.residual) << ',';
    if (r.dist_to_star) os << format_real(*r.dist_to_star);
    os << ',' << r.backtracks << ',';
    if (r.fejer_gap) os << format_real(*r.fejer_gap);
    os << '\n';
  }
}

std::vector<IterationRecord> read_run_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty CSV");
  const auto header = split(trim(line), ',');
  if (header.size() < 7 || (header.size() - 7) % 2 != 0) throw DataError("unexpected CSV header");
  const int dim = static_cast<int>((header.size() - 7) / 2);
  if (header != csv_columns(dim)) throw DataError("unexpected CSV header");

  std::vector<IterationRecord> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw DataError("wrong field count on line " + std::to_string(line_no));
    try {
      IterationRecord r;
      std::size_t c = 0;
      r.k = static_cast<int>(parse_required(f[c++]));
      r.z.resize(dim);
      r.z_bar.resize(dim);
      for (int i = 0; i < dim; ++i) r.z[i] = parse_required(f[c++]);
      for (int i = 0; i < dim; ++i) r.z_bar[i] = parse_required(f[c++]);
      r.gamma_k = parse_required(f[c++]);
      r.alpha_k = parse_required(f[c++]);
      r.residual = parse_required(f[c++]);
      r.dist_to_star = parse_optional(f[c++]);
      r.backtracks = static_cast<int>(parse_required(f[c++]));
      r.fejer_gap = parse_optional(f[c++]);
      out.push_back(std::move(r));
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
  }
  return out;
}

std::vector<IterationRecord> read_run_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return read_run_csv(in);
}

std::string run_file_name(const std::string& problem, Method method, std::size_t point_index) {
  return problem + "__" + std::string(method_name(method)) + "__" + std::to_string(point_index) + ".csv";
}

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  ProblemInstance P;
  std::vector<AlgorithmConfig> configs;
  try {
    P = resolve_problem(spec.problem);
    if (spec.methods.empty()) throw UsageError("no methods given");
    if (spec.initial_points.empty()) throw UsageError("no initial points given (use --z0 x,y)");
    for (const auto& z : spec.initial_points) {
      if (z.size() != P.dim()) throw UsageError("initial point has wrong dimension");
    }
    for (std::size_t i = 0; i < spec.methods.size(); ++i) {
      configs.push_back(spec.config_for(i));
      configs.back().validate();
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::error_code ec;
  fs::create_directories(spec.outputs, ec);
  if (ec || !fs::is_directory(spec.outputs)) {
    err << "error: cannot create output directory " << spec.outputs << '\n';
    return kIoError;
  }

  struct Row {
    Method method;
    std::size_t point;
    RunResult result;
  };
  std::vector<Row> rows;
  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    for (std::size_t p = 0; p < spec.initial_points.size(); ++p) {
      RunResult result;
      try {
        result = run(P, spec.methods[m].method, configs[m], spec.initial_points[p]);
      } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
      }
      const fs::path file = spec.outputs / run_file_name(spec.problem, spec.methods[m].method, p);
      std::ofstream os(file);
      if (!os) {
        err << "error: cannot write " << file << '\n';
        return kIoError;
      }
      write_run_csv(os, result, P.dim());
      if (!os) {
        err << "error: write failed for " << file << '\n';
        return kIoError;
      }
      rows.push_back({spec.methods[m].method, p, std::move(result)});
    }
  }

  const fs::path summary_path = spec.outputs / "summary.csv";
  std::ofstream summary(summary_path);
  if (!summary) {
    err << "error: cannot write " << summary_path << '\n';
    return kIoError;
  }
  summary << "problem,method,z0_index,iterations,verdict,classification,min_residual,final_dist_to_star\n";
  std::ofstream audit(spec.outputs / "audit.txt");
  out << std::left << std::setw(14) << "method" << std::setw(6) << "z0" << std::setw(10) << "iters"
      << std::setw(18) << "verdict" << std::setw(20) << "classification" << "min_residual\n";
  for (const auto& row : rows) {
    std::string cls = "n/a";
    if (row.result.records.size() >= 100 && P.z_star) {
      cls = std::string(trajectory_class_name(classify_trajectory(row.result, P)));
    }
    std::string dist;
    if (P.z_star && row.result.final_z.allFinite()) dist = format_real((row.result.final_z - *P.z_star).norm());
    summary << spec.problem << ',' << method_name(row.method) << ',' << row.point << ','
            << row.result.records.size() << ',' << verdict_name(row.result.verdict) << ',' << cls << ','
            << format_real(row.result.min_residual) << ',' << dist << '\n';
    out << std::left << std::setw(14) << method_name(row.method) << std::setw(6) << row.point << std::setw(10)
        << row.result.records.size() << std::setw(18) << verdict_name(row.result.verdict) << std::setw(20) << cls
        << row.result.min_residual << '\n';
    for (const auto& note : row.result.audit) {
      audit << method_name(row.method) << " z0#" << row.point << ": " << note << '\n';
    }
  }
  if (!summary) {
    err << "error: write failed for " << summary_path << '\n';
    return kIoError;
  }

  if (spec.emit_plots) {
    std::vector<fs::path> files;
    for (const auto& row : rows) files.push_back(spec.outputs / run_file_name(spec.problem, row.method, row.point));
    std::ostringstream sink;
    const int rc = cmd_plot(files, spec.outputs / (spec.problem + ".svg"), spec.problem, sink, err);
    if (rc != kOk) return rc;
  }
  return kOk;
}

int cmd_verify(const std::string& problem, int grid_n, std::ostream& out, std::ostream& err) {
  ProblemInstance P;
  try {
    P = resolve_problem(problem);
    if (grid_n < 100) throw UsageError("--grid-n must be at least 100");
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  const VerifyReport rep = verify_problem(P, grid_n);
  const double neg_half_inv_L = -1.0 / (2.0 * rep.L_estimate);

  out << "verify " << problem << " (grid " << grid_n << "x" << grid_n << ")\n";
  for (const auto& c : rep.checks) {
    out << "  " << (c.passed ? "PASS" : "FAIL") << "  " << std::left << std::setw(24) << c.name << c.detail << '\n';
  }
  out << "rho=" << format_real(rep.rho.value) << '\n';
  out << "rho_argmin=" << format_real(rep.rho.argmin[0]) << ',' << format_real(rep.rho.argmin[1]) << '\n';
  out << "rho_excluded_fraction=" << format_real(rep.rho.excluded_fraction) << '\n';
  out << "L=" << format_real(rep.L_estimate) << '\n';
  out << "neg_half_inv_L=" << format_real(neg_half_inv_L) << '\n';
  out << "rho_gt_neg_half_inv_L=" << (rep.rho.value > neg_half_inv_L ? "true" : "false") << '\n';
  if (P.rho) out << "rho_stored=" << format_real(P.rho->value) << '\n';
  if (P.L_restricted) out << "L_stored=" << format_real(*P.L_restricted) << '\n';
  out << "result=" << (rep.all_passed() ? "PASS" : "FAIL") << '\n';
  return rep.all_passed() ? kOk : kCheckFailed;
}

int cmd_lowerbound(const std::vector<double>& c_values, const std::vector<double>& alpha_values,
                   const std::optional<fs::path>& out_dir, std::ostream& out, std::ostream& err) {
  if (c_values.empty() || alpha_values.empty()) {
    err << "error: need at least one --c and one --alpha-bar value\n";
    return kUsage;
  }
  for (double v : c_values) {
    if (!(v > 0.0 && v < 1.0)) {
      err << "error: c values must lie in (0,1)\n";
      return kUsage;
    }
  }
  for (double v : alpha_values) {
    if (!(v > 0.0 && v < 1.0)) {
      err << "error: alpha-bar values must lie in (0,1)\n";
      return kUsage;
    }
  }

  std::ostringstream grid;
  grid << "c,alpha_bar,a,b,spectral_radius,converges,boundary_c\n";
  out << std::left << std::setw(12) << "c" << std::setw(12) << "alpha_bar" << std::setw(22) << "spectral_radius"
      << "verdict\n";
  for (double c : c_values) {
    const auto [a, b] = worst_case_bilinear(c);
    for (double alpha : alpha_values) {
      const SpectralReport rep = eg_plus_linear_map(a, b, alpha);
      out << std::left << std::setw(12) << c << std::setw(12) << alpha << std::setw(22)
          << format_real(rep.spectral_radius)
          << (rep.converges ? "radius < 1, convergent" : "radius >= 1, non-convergent") << '\n';
      grid << format_real(c) << ',' << format_real(alpha) << ',' << format_real(a) << ',' << format_real(b) << ','
           << format_real(rep.spectral_radius) << ',' << (rep.converges ? 1 : 0) << ','
           << format_real((1.0 - alpha) / 2.0) << '\n';
    }
  }
  if (out_dir) {
    std::error_code ec;
    fs::create_directories(*out_dir, ec);
    std::ofstream g(*out_dir / "lowerbound_grid.csv");
    std::ofstream bnd(*out_dir / "lowerbound_boundary.csv");
    if (ec || !g || !bnd) {
      err << "error: cannot write to " << *out_dir << '\n';
      return kIoError;
    }
    g << grid.str();
    bnd << "alpha_bar,c\n";
    for (int i = 0; i <= 100; ++i) {
      const double alpha = i / 100.0;
      bnd << format_real(alpha) << ',' << format_real((1.0 - alpha) / 2.0) << '\n';
    }
    if (!g || !bnd) {
      err << "error: write failed in " << *out_dir << '\n';
      return kIoError;
    }
  }
  return kOk;
}

int cmd_plot(const std::vector<fs::path>& run_csvs, const fs::path& out_path,
             const std::optional<std::string>& problem, std::ostream& out, std::ostream& err) {
  if (run_csvs.empty()) {
    err << "error: no CSV files given\n";
    return kUsage;
  }
  std::vector<PlotSeries> series;
  std::optional<std::string> problem_name = problem;
  for (const auto& path : run_csvs) {
    PlotSeries s;
    s.label = path.stem().string();
    try {
      s.records = read_run_csv(path);
    } catch (const DataError& e) {
      err << "error: " << path << ": " << e.what() << '\n';
      return kDataError;
    }
    if (!problem_name) {
      const auto pos = s.label.find("__");
      if (pos != std::string::npos) problem_name = s.label.substr(0, pos);
    }
    series.push_back(std::move(s));
  }

  PlotFrame frame;
  if (problem_name) {
    try {
      const ProblemInstance P = resolve_problem(*problem_name);
      frame.box = P.domain;
      frame.cycles = P.known_cycles;
      frame.z_star = P.z_star;
      if (P.cycle_seed) frame.cycle_paths.push_back(trace_limit_cycle(P, *P.cycle_seed));
    } catch (const std::exception&) {
      // Unknown prefix or untraceable cycle: plot without that overlay.
    }
  }

  std::ofstream os(out_path);
  if (!os) {
    err << "error: cannot write " << out_path << '\n';
    return kIoError;
  }
  os << render_svg(series, frame);
  if (!os) {
    err << "error: write failed for " << out_path << '\n';
    return kIoError;
  }
  out << "wrote " << out_path.string() << '\n';
  return kOk;
}

}  // namespace minty::harness
