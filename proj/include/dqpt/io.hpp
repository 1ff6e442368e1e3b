#ifndef DQPT_IO_HPP
#define DQPT_IO_HPP

// Run configuration (flags or a flat `key = value` file), validation, and
// result persistence: CSV/JSON tables at 12 significant digits plus a JSON
// manifest that is sufficient to re-run a job.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dqpt/errors.hpp"
#include "dqpt/model.hpp"

namespace dqpt {

inline constexpr const char* kVersion = "1.0.0";

enum class Command { Quench, Spectrum, Husimi, Open, Scaling };
enum class SectorChoice { Auto, Full };
enum class OutputFormat { Csv, Json };
enum class SweepVariable { N, H, Jp, Gamma };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Quench: return "quench";
    case Command::Spectrum: return "spectrum";
    case Command::Husimi: return "husimi";
    case Command::Open: return "open";
    case Command::Scaling: return "scaling";
  }
  return "?";
}

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::N: return "n";
    case SweepVariable::H: return "h";
    case SweepVariable::Jp: return "jp";
    case SweepVariable::Gamma: return "gamma";
  }
  return "?";
}

struct OpenSystem {
  double gamma_z = 0.0;
  double gamma_m = 0.0;
};

struct Sweep {
  SweepVariable variable = SweepVariable::N;
  std::vector<double> values;
};

struct ObservableFlags {
  bool qfi_z = true;
  bool qfi_optimal = true;
  bool rate = true;
  bool decomposition = true;
  std::vector<double> husimi_times;
};

struct RunConfig {
  Command command = Command::Quench;
  ModelParams model{10, 1.0, 0.0, 1.0};
  double t_max = 8.0;
  double dt = 0.01;
  SectorChoice sector = SectorChoice::Auto;
  ObservableFlags observables;

  int krylov_dim = 30;
  double krylov_tol = 1e-10;

  int n_theta = 181;
  int n_phi = 181;

  std::optional<OpenSystem> open_system;
  double lindblad_tol = 1e-8;
  bool gamma_scan = false;
  int scan_points = 3;
  double scan_max = 0.1;
  double scan_tmax = 0.0;  // 0: use t_max

  std::optional<Sweep> sweep;
  std::vector<double> h_values;  // spectrum scan; empty means {h}
  std::optional<std::pair<double, double>> peak_window;
  double collapse_inner = 0.5;
  double collapse_outer = 1.5;

  std::string out_dir = "out";
  OutputFormat format = OutputFormat::Csv;
  int workers = 1;

  int max_sites = 24;
  int max_open_sites = 12;
  int max_dense_sites = 15;  // sector dimension 2^14

  void validate() const;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline void RunConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("--dt must be positive");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("--tmax must be positive");
  if (dt > t_max) throw ConfigError("--dt must not exceed --tmax");
  if (workers < 1) throw ConfigError("--workers must be at least 1");
  if (krylov_dim < 2) throw ConfigError("--krylov-dim must be at least 2");
  if (!(krylov_tol > 0.0)) throw ConfigError("--krylov-tol must be positive");
  if (!(lindblad_tol > 0.0)) throw ConfigError("--lindblad-tol must be positive");
  if (n_theta < 2 || n_phi < 2) throw ConfigError("--n-theta and --n-phi must be at least 2");
  if (scan_points < 1) throw ConfigError("--scan-points must be at least 1");
  if (!(scan_max >= 0.0)) throw ConfigError("--scan-max must be non-negative");
  if (scan_tmax < 0.0) throw ConfigError("--scan-tmax must be non-negative");
  if (!(collapse_inner > 0.0) || !(collapse_outer > collapse_inner)) {
    throw ConfigError("collapse windows need 0 < --collapse-inner < --collapse-outer");
  }
  for (double t : observables.husimi_times) {
    if (t < 0.0 || t > t_max) {
      throw ConfigError("husimi time " + std::to_string(t) + " lies outside [0, tmax]");
    }
  }
  if (peak_window && !(peak_window->first < peak_window->second)) {
    throw ConfigError("--peak-window needs lo < hi");
  }

  std::vector<int> sizes{model.n_sites};
  if (sweep) {
    if (sweep->values.empty()) throw ConfigError("--sweep-values is empty");
    if (sweep->variable == SweepVariable::N) {
      sizes.clear();
      for (double v : sweep->values) {
        if (v != std::floor(v)) throw ConfigError("N sweep values must be integers");
        sizes.push_back(static_cast<int>(v));
      }
    }
    if (sweep->variable == SweepVariable::Gamma) {
      if (command != Command::Open) throw ConfigError("a gamma sweep needs the open command");
      for (double v : sweep->values) {
        if (!(v >= 0.0)) throw ConfigError("gamma sweep values must be non-negative");
      }
    }
  }
  if (open_system && command != Command::Open) {
    throw ConfigError("--gamma-z/--gamma-m apply to the open command only");
  }
  if (open_system) {
    if (!(open_system->gamma_z >= 0.0) || !(open_system->gamma_m >= 0.0)) {
      throw ConfigError("--gamma-z and --gamma-m must be non-negative");
    }
  }
  if (command == Command::Open || open_system) {
    for (int n : sizes) {
      if (n > max_open_sites) {
        throw ResourceCapError("open-system runs need N <= " + std::to_string(max_open_sites) +
                               " (dense density matrix), got N=" + std::to_string(n));
      }
    }
  }
  for (int n : sizes) {
    if (n < 2) throw ConfigError("--n must be at least 2");
    if (n > max_sites) {
      throw ResourceCapError("N=" + std::to_string(n) + " exceeds the state-vector cap " +
                             std::to_string(max_sites));
    }
    ModelParams m = model;
    m.n_sites = n;
    m.validate();
  }
  if (command == Command::Spectrum) {
    for (int n : sizes) {
      if (n > max_dense_sites) {
        throw ResourceCapError("spectrum needs N <= " + std::to_string(max_dense_sites) +
                               " (dense eigensolve), got N=" + std::to_string(n));
      }
    }
  }
  if (command == Command::Scaling && (!sweep || sweep->variable != SweepVariable::N ||
                                      sweep->values.size() < 2)) {
    throw ConfigError("scaling needs --sweep-var n with at least two --sweep-values");
  }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

template <class Enum>
Enum parse_choice(const std::string& text, const std::vector<std::pair<std::string, Enum>>& table,
                  const char* flag) {
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  std::string allowed;
  for (const auto& entry : table) allowed += (allowed.empty() ? "" : "|") + entry.first;
  throw ConfigError(std::string(flag) + " must be one of " + allowed + ", got '" + text + "'");
}

}  // namespace detail

struct CliOptions {
  CLI::App app{"Exact quench dynamics of the transverse-field Ising chain", "dqpt"};
  RunConfig cfg;
  std::string sector_text = "auto";
  std::string format_text = "csv";
  std::string sweep_var_text;
  std::vector<double> sweep_values;
  std::vector<double> peak_window;
  double gamma_z = -1.0;
  double gamma_m = -1.0;
  bool no_optimal = false;
  bool no_rate = false;
  std::vector<CLI::App*> subcommands;

  CliOptions() {
    app.set_help_flag("--help", "print this help");  // -h would clash with --h
    app.set_config("--config", "", "flat key = value file mirroring the flag names");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();
    auto& c = cfg;
    app.add_option("--n", c.model.n_sites, "number of sites N")->capture_default_str();
    app.add_option("--j", c.model.J, "nearest-neighbor coupling J")->capture_default_str();
    app.add_option("--jp", c.model.Jp, "next-nearest-neighbor coupling J'")->capture_default_str();
    app.add_option("--h", c.model.h, "transverse field h")->capture_default_str();
    app.add_option("--tmax", c.t_max, "final time (units 1/J)")->capture_default_str();
    app.add_option("--dt", c.dt, "sampling step (units 1/J)")->capture_default_str();
    app.add_option("--sector", sector_text, "auto|full")->capture_default_str();
    app.add_option("--out", c.out_dir, "output directory")->capture_default_str();
    app.add_option("--format", format_text, "csv|json")->capture_default_str();
    app.add_option("--workers", c.workers, "concurrent sweep points")->capture_default_str();
    app.add_option("--krylov-dim", c.krylov_dim, "Lanczos subspace size")->capture_default_str();
    app.add_option("--krylov-tol", c.krylov_tol, "Krylov local error")->capture_default_str();
    app.add_flag("--no-optimal", no_optimal, "skip the optimal-direction QFI");
    app.add_flag("--no-rate", no_rate, "skip the Loschmidt rate function");
    app.add_option("--husimi-times", c.observables.husimi_times, "snapshot times")->delimiter(',');
    app.add_option("--n-theta", c.n_theta, "Husimi polar nodes")->capture_default_str();
    app.add_option("--n-phi", c.n_phi, "Husimi azimuthal nodes")->capture_default_str();
    app.add_option("--gamma-z", gamma_z, "dephasing rate (units J)");
    app.add_option("--gamma-m", gamma_m, "decay rate (units J)");
    app.add_option("--lindblad-tol", c.lindblad_tol, "Lindblad local error")->capture_default_str();
    app.add_flag("--scan-gamma", c.gamma_scan, "scan (gamma_z, gamma_m) over [0, scan-max]^2");
    app.add_option("--scan-points", c.scan_points, "scan points per axis")->capture_default_str();
    app.add_option("--scan-max", c.scan_max, "scan upper rate (units J)")->capture_default_str();
    app.add_option("--scan-tmax", c.scan_tmax, "final time of scan runs (0: tmax)");
    app.add_option("--sweep-var", sweep_var_text, "n|h|jp|gamma");
    app.add_option("--sweep-values", sweep_values, "sweep values")->delimiter(',');
    app.add_option("--h-values", c.h_values, "transverse fields for spectrum")->delimiter(',');
    app.add_option("--peak-window", peak_window, "lo,hi time window for peaks")
        ->delimiter(',')
        ->expected(2);
    app.add_option("--collapse-inner", c.collapse_inner, "collapse window half-width")
        ->capture_default_str();
    app.add_option("--collapse-outer", c.collapse_outer, "outer comparison half-width")
        ->capture_default_str();

    subcommands.push_back(app.add_subcommand("quench", "QFI, optimal direction and rate function"));
    subcommands.push_back(app.add_subcommand("spectrum", "diagonal/off-diagonal QFI split"));
    subcommands.push_back(app.add_subcommand("husimi", "Husimi snapshots"));
    subcommands.push_back(app.add_subcommand("open", "Lindblad dynamics and mixed-state QFI"));
    subcommands.push_back(app.add_subcommand("scaling", "finite-size scaling and collapse"));
  }

  RunConfig resolve() {
    RunConfig out = cfg;
    const std::vector<std::pair<std::string, Command>> commands{
        {"quench", Command::Quench}, {"spectrum", Command::Spectrum}, {"husimi", Command::Husimi},
        {"open", Command::Open},     {"scaling", Command::Scaling}};
    for (auto* sub : subcommands) {
      if (sub->parsed()) out.command = detail::parse_choice(sub->get_name(), commands, "command");
    }
    out.sector = detail::parse_choice<SectorChoice>(
        sector_text, {{"auto", SectorChoice::Auto}, {"full", SectorChoice::Full}}, "--sector");
    out.format = detail::parse_choice<OutputFormat>(
        format_text, {{"csv", OutputFormat::Csv}, {"json", OutputFormat::Json}}, "--format");
    out.observables.qfi_optimal = !no_optimal;
    out.observables.rate = !no_rate;
    if (gamma_z >= 0.0 || gamma_m >= 0.0 || out.command == Command::Open) {
      out.open_system = OpenSystem{std::max(gamma_z, 0.0), std::max(gamma_m, 0.0)};
    }
    if (gamma_z < -1.0 || gamma_m < -1.0 ||
        (gamma_z < 0.0 && gamma_z != -1.0) || (gamma_m < 0.0 && gamma_m != -1.0)) {
      throw ConfigError("--gamma-z and --gamma-m must be non-negative");
    }
    if (!sweep_var_text.empty() || !sweep_values.empty()) {
      if (sweep_var_text.empty()) throw ConfigError("--sweep-values needs --sweep-var");
      Sweep s;
      s.variable = detail::parse_choice<SweepVariable>(
          sweep_var_text,
          {{"n", SweepVariable::N}, {"h", SweepVariable::H}, {"jp", SweepVariable::Jp},
           {"gamma", SweepVariable::Gamma}},
          "--sweep-var");
      s.values = sweep_values;
      out.sweep = s;
    }
    if (!peak_window.empty()) out.peak_window = std::make_pair(peak_window[0], peak_window[1]);
    if (out.command == Command::Husimi && out.observables.husimi_times.empty()) {
      out.observables.husimi_times = {0.0, 0.5, 4.4, 5.34};
    }
    out.validate();
    return out;
  }
};

// Parses command-line arguments (without the program name).
inline RunConfig parse_config(std::vector<std::string> args) {
  CliOptions opts;
  std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
  try {
    opts.app.parse(args);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("invalid arguments: ") + e.what());
  }
  return opts.resolve();
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

inline nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return nlohmann::json::parse(format_number(v));
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != columns.size()) throw ConfigError("table row has the wrong width");
    rows.push_back(std::move(row));
  }

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("no column named " + name);
    const auto idx = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
  }
};

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  ensure_directory(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

// Writes `stem`.csv or `stem`.json; returns the path written.
inline std::filesystem::path write_table(const std::filesystem::path& stem, const Table& t,
                                         OutputFormat format) {
  if (format == OutputFormat::Csv) {
    std::string text;
    for (std::size_t c = 0; c < t.columns.size(); ++c) text += (c ? "," : "") + t.columns[c];
    text += "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + format_number(row[c]);
      text += "\n";
    }
    auto path = stem;
    path += ".csv";
    write_text(path, text);
    return path;
  }
  nlohmann::json j;
  j["columns"] = t.columns;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (double v : row) r.push_back(json_number(v));
    j["rows"].push_back(std::move(r));
  }
  auto path = stem;
  path += ".json";
  write_json(path, j);
  return path;
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = to_string(c.command);
  j["version"] = kVersion;
  j["model"] = {{"n", c.model.n_sites},
                {"j", json_number(c.model.J)},
                {"jp", json_number(c.model.Jp)},
                {"h", json_number(c.model.h)},
                {"boundary", "periodic"}};
  j["quench"] = {{"tmax", json_number(c.t_max)}, {"dt", json_number(c.dt)}};
  j["sector"] = c.sector == SectorChoice::Auto ? "auto" : "full";
  j["krylov"] = {{"dim", c.krylov_dim}, {"tol", json_number(c.krylov_tol)}};
  j["observables"] = {{"qfi_z", c.observables.qfi_z},
                      {"qfi_optimal", c.observables.qfi_optimal},
                      {"rate", c.observables.rate},
                      {"decomposition", c.observables.decomposition},
                      {"husimi_times", c.observables.husimi_times}};
  j["husimi_grid"] = {{"n_theta", c.n_theta}, {"n_phi", c.n_phi}};
  if (c.open_system) {
    j["open_system"] = {{"gamma_z", json_number(c.open_system->gamma_z)},
                        {"gamma_m", json_number(c.open_system->gamma_m)},
                        {"lindblad_tol", json_number(c.lindblad_tol)},
                        {"scan", c.gamma_scan},
                        {"scan_points", c.scan_points},
                        {"scan_max", json_number(c.scan_max)},
                        {"scan_tmax", json_number(c.scan_tmax)}};
  } else {
    j["open_system"] = nullptr;
  }
  if (c.sweep) {
    j["sweep"] = {{"variable", to_string(c.sweep->variable)}, {"values", c.sweep->values}};
  } else {
    j["sweep"] = nullptr;
  }
  j["h_values"] = c.h_values;
  if (c.peak_window) {
    j["peak_window"] = {c.peak_window->first, c.peak_window->second};
  } else {
    j["peak_window"] = nullptr;
  }
  j["collapse"] = {{"inner", json_number(c.collapse_inner)},
                   {"outer", json_number(c.collapse_outer)}};
  j["output"] = {{"directory", c.out_dir},
                 {"format", c.format == OutputFormat::Csv ? "csv" : "json"}};
  j["workers"] = c.workers;
  return j;
}

// Flat `key = value` text equivalent to the resolved configuration.
inline std::string to_config_text(const RunConfig& c) {
  auto join = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_number(v[k]);
    return s + "]";
  };
  std::string t;
  auto kv = [&](const std::string& k, const std::string& v) { t += k + " = " + v + "\n"; };
  kv("n", std::to_string(c.model.n_sites));
  kv("j", format_number(c.model.J));
  kv("jp", format_number(c.model.Jp));
  kv("h", format_number(c.model.h));
  kv("tmax", format_number(c.t_max));
  kv("dt", format_number(c.dt));
  kv("sector", c.sector == SectorChoice::Auto ? "auto" : "full");
  kv("krylov-dim", std::to_string(c.krylov_dim));
  kv("krylov-tol", format_number(c.krylov_tol));
  kv("n-theta", std::to_string(c.n_theta));
  kv("n-phi", std::to_string(c.n_phi));
  kv("format", c.format == OutputFormat::Csv ? "csv" : "json");
  kv("workers", std::to_string(c.workers));
  if (!c.observables.qfi_optimal) kv("no-optimal", "true");
  if (!c.observables.rate) kv("no-rate", "true");
  if (!c.observables.husimi_times.empty()) kv("husimi-times", join(c.observables.husimi_times));
  if (c.open_system) {
    kv("gamma-z", format_number(c.open_system->gamma_z));
    kv("gamma-m", format_number(c.open_system->gamma_m));
    kv("lindblad-tol", format_number(c.lindblad_tol));
    if (c.gamma_scan) kv("scan-gamma", "true");
    kv("scan-points", std::to_string(c.scan_points));
    kv("scan-max", format_number(c.scan_max));
    kv("scan-tmax", format_number(c.scan_tmax));
  }
  if (c.sweep) {
    kv("sweep-var", to_string(c.sweep->variable));
    kv("sweep-values", join(c.sweep->values));
  }
  if (!c.h_values.empty()) kv("h-values", join(c.h_values));
  if (c.peak_window) kv("peak-window", join({c.peak_window->first, c.peak_window->second}));
  kv("collapse-inner", format_number(c.collapse_inner));
  kv("collapse-outer", format_number(c.collapse_outer));
  return t;
}

// manifest.json plus run.conf (re-run with `dqpt <command> --config run.conf`).
inline void write_manifest(const RunConfig& c, const nlohmann::json& extra = nullptr) {
  const std::filesystem::path dir(c.out_dir);
  nlohmann::json j = to_json(c);
  if (!extra.is_null()) j["results"] = extra;
  write_json(dir / "manifest.json", j);
  write_text(dir / "run.conf", to_config_text(c));
}

}  // namespace dqpt

#endif  // DQPT_IO_HPP
