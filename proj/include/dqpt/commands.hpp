#ifndef DQPT_COMMANDS_HPP
#define DQPT_COMMANDS_HPP

// The five subcommands. Each writes its tables plus manifest.json/run.conf
// into cfg.out_dir and returns a small JSON summary.

#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dqpt/analysis.hpp"
#include "dqpt/dynamics.hpp"
#include "dqpt/io.hpp"
#include "dqpt/model.hpp"
#include "dqpt/observables.hpp"

namespace dqpt {

// Runs fn(0..count-1) on up to `workers` threads. Results must go to
// per-index slots; the first exception is rethrown after all threads join.
template <class Fn>
void run_parallel(std::size_t count, int workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count || failed.load()) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

inline SpinBasis quench_basis(const RunConfig& cfg, int n_sites) {
  return cfg.sector == SectorChoice::Auto ? build_basis(n_sites, initial_state_sector(n_sites))
                                          : build_basis(n_sites, Sector::full());
}

inline PropagatorConfig propagator_config(const RunConfig& cfg) {
  PropagatorConfig p;
  p.method = PropagationMethod::Krylov;
  p.dt = cfg.dt;
  p.krylov_dim = cfg.krylov_dim;
  p.tol = cfg.krylov_tol;
  return p;
}

// Model parameters for each sweep point (or the single configured model).
inline std::vector<ModelParams> sweep_models(const RunConfig& cfg) {
  if (!cfg.sweep || cfg.sweep->variable == SweepVariable::Gamma) return {cfg.model};
  std::vector<ModelParams> out;
  for (double v : cfg.sweep->values) {
    ModelParams m = cfg.model;
    switch (cfg.sweep->variable) {
      case SweepVariable::N: m.n_sites = static_cast<int>(v); break;
      case SweepVariable::H: m.h = v; break;
      case SweepVariable::Jp: m.Jp = v; break;
      case SweepVariable::Gamma: break;
    }
    out.push_back(m);
  }
  return out;
}

inline std::string model_tag(const ModelParams& m) {
  return "N" + std::to_string(m.n_sites) + "_h" + format_number(m.h) + "_jp" + format_number(m.Jp);
}

// ---------------------------------------------------------------------------
// quench
// ---------------------------------------------------------------------------

struct QuenchOptions {
  bool optimal = true;
  bool rate = true;
};

inline Table quench_table(const RunConfig& cfg, const ModelParams& m, QuenchOptions opt) {
  const SpinBasis basis = quench_basis(cfg, m.n_sites);
  const RealOperator H = build_hamiltonian(m, basis);
  const StateVector psi0 = initial_state(basis);
  const auto grid = uniform_grid(cfg.t_max, cfg.dt);
  Table t;
  t.columns = {"t", "f_Q_z", "f_Q_opt", "n_opt_x", "n_opt_y", "n_opt_z",
               "lambda", "loschmidt", "energy", "norm", "delta_phi"};
  t.rows.reserve(grid.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  propagate(H, psi0, grid, propagator_config(cfg), [&](std::size_t, double time, const StateVector& psi) {
    const QfiSample z = qfi_pure(psi, BlochDirection::z(), time);
    std::vector<double> row{time, z.f_Q, nan, nan, nan, nan, nan, nan,
                            expectation(H, psi).real(), psi.norm(), z.delta_phi()};
    if (opt.optimal) {
      const OptimalQfi best = qfi_optimal(psi, time);
      row[2] = best.sample.f_Q;
      row[3] = best.direction.nx();
      row[4] = best.direction.ny();
      row[5] = best.direction.nz();
    }
    if (opt.rate) {
      const LoschmidtSample l = rate_function(psi0, psi, m.n_sites);
      row[6] = l.rate;
      row[7] = l.echo;
    }
    t.add(std::move(row));
  });
  return t;
}

inline TimeSeries column_series(const Table& t, const std::string& name, std::string label) {
  return {t.column("t"), t.column(name), std::move(label)};
}

inline PeakFit quench_peak(const RunConfig& cfg, const TimeSeries& s) {
  return find_peak(s, cfg.peak_window ? *cfg.peak_window : main_peak_window(s));
}

inline nlohmann::json peak_json(const PeakFit& p) {
  return {{"t_c", json_number(p.t_c)}, {"f_star", json_number(p.f_star)},
          {"window", {json_number(p.t_lo), json_number(p.t_hi)}}};
}

inline nlohmann::json cmd_quench(const RunConfig& cfg) {
  const auto models = sweep_models(cfg);
  const bool single = models.size() == 1;
  const std::filesystem::path dir(cfg.out_dir);
  std::vector<nlohmann::json> summaries(models.size());
  run_parallel(models.size(), cfg.workers, [&](std::size_t k) {
    const Table t = quench_table(cfg, models[k], {cfg.observables.qfi_optimal, cfg.observables.rate});
    write_table(dir / (single ? std::string("quench") : "quench_" + model_tag(models[k])), t,
                cfg.format);
    const TimeSeries f = column_series(t, "f_Q_z", model_tag(models[k]));
    nlohmann::json s{{"n", models[k].n_sites},
                     {"h", json_number(models[k].h)},
                     {"jp", json_number(models[k].Jp)}};
    const auto fz = f.values;
    s["f_Q_z_max"] = json_number(*std::max_element(fz.begin(), fz.end()));
    if (cfg.observables.qfi_optimal) {
      const auto fo = t.column("f_Q_opt");
      s["f_Q_opt_max"] = json_number(*std::max_element(fo.begin(), fo.end()));
    }
    try {
      s["peak"] = peak_json(quench_peak(cfg, f));
    } catch (const NumericalError& e) {
      s["peak"] = nullptr;
      s["peak_error"] = e.what();
    }
    summaries[k] = std::move(s);
  });
  nlohmann::json out{{"runs", summaries}};
  write_json(dir / "summary.json", out);
  write_manifest(cfg);
  return out;
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

inline nlohmann::json cmd_spectrum(const RunConfig& cfg) {
  std::vector<int> sizes{cfg.model.n_sites};
  if (cfg.sweep && cfg.sweep->variable == SweepVariable::N) sizes = {};
  if (sizes.empty()) {
    for (double v : cfg.sweep->values) sizes.push_back(static_cast<int>(v));
  }
  const std::vector<double> fields = cfg.h_values.empty() ? std::vector<double>{cfg.model.h}
                                                          : cfg.h_values;
  const std::filesystem::path dir(cfg.out_dir);
  const auto grid = uniform_grid(cfg.t_max, cfg.dt);

  struct Point {
    int n;
    double h;
  };
  std::vector<Point> points;
  for (int n : sizes) {
    for (double h : fields) points.push_back({n, h});
  }
  std::vector<std::vector<double>> rows(points.size());
  run_parallel(points.size(), cfg.workers, [&](std::size_t k) {
    ModelParams m = cfg.model;
    m.n_sites = points[k].n;
    m.h = points[k].h;
    const SpinBasis basis = quench_basis(cfg, m.n_sites);
    const RealOperator H = build_hamiltonian(m, basis);
    const auto eig = dense_eigensystem(H, std::size_t{1} << (cfg.max_dense_sites - 1));
    const StateVector psi0 = initial_state(basis);
    const CVector c = overlap_coefficients(eig, psi0);
    const auto dec = qfi_decomposition(eig, c, grid, std::size_t{1} << (cfg.max_dense_sites - 1));

    Table t;
    t.columns = {"t", "f_diag", "f_offdiag", "f_total", "f_Q_z", "sum_check"};
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double direct = qfi_pure(spectral_state(eig, c, grid[i]), BlochDirection::z()).f_Q;
      const double check = std::abs(dec.total(i) - direct);
      worst = std::max(worst, check);
      t.add({grid[i], dec.f_diag, dec.f_offdiag[i], dec.total(i), direct, check});
    }
    write_table(dir / ("decomposition_" + model_tag(m)), t, cfg.format);
    const PeakFit peak = quench_peak(cfg, column_series(t, "f_Q_z", model_tag(m)));
    rows[k] = {static_cast<double>(m.n_sites), m.h, dec.f_diag, peak.f_star, peak.t_c,
               dec.f_diag / peak.f_star, worst};
  });
  Table scan;
  scan.columns = {"n", "h", "f_diag", "f_star", "t_c", "diag_fraction", "max_sum_check"};
  for (auto& r : rows) scan.add(std::move(r));
  write_table(dir / "spectrum", scan, cfg.format);

  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : scan.rows) {
    out.push_back({{"n", static_cast<int>(r[0])},
                   {"h", json_number(r[1])},
                   {"f_diag", json_number(r[2])},
                   {"f_star", json_number(r[3])},
                   {"t_c", json_number(r[4])},
                   {"max_sum_check", json_number(r[6])}});
  }
  nlohmann::json summary{{"points", out}};
  write_json(dir / "summary.json", summary);
  write_manifest(cfg);
  return summary;
}

// ---------------------------------------------------------------------------
// husimi
// ---------------------------------------------------------------------------

struct HusimiSnapshot {
  double t = 0.0;
  HusimiGrid grid;
  double symmetric_weight = 0.0;
};

inline std::vector<HusimiSnapshot> husimi_snapshots(const RunConfig& cfg, const ModelParams& m,
                                                    std::vector<double> times) {
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<double> grid{0.0};
  for (double t : times) {
    if (t > 0.0) grid.push_back(t);
  }
  const SpinBasis basis = quench_basis(cfg, m.n_sites);
  const RealOperator H = build_hamiltonian(m, basis);
  std::vector<HusimiSnapshot> out;
  propagate(H, initial_state(basis), grid, propagator_config(cfg),
            [&](std::size_t, double t, const StateVector& psi) {
              if (std::find(times.begin(), times.end(), t) == times.end()) return;
              out.push_back({t, husimi(psi, cfg.n_theta, cfg.n_phi), symmetric_weight(psi)});
            });
  return out;
}

inline nlohmann::json cmd_husimi(const RunConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  const auto snaps = husimi_snapshots(cfg, cfg.model, cfg.observables.husimi_times);
  Table summary;
  summary.columns = {"t", "integral", "polar_cap_mass", "symmetric_weight", "q_max", "theta_max",
                     "phi_max"};
  for (const auto& s : snaps) {
    Table q;
    q.columns = {"theta", "phi", "Q"};
    Eigen::Index bi = 0, bj = 0;
    const double qmax = s.grid.values.maxCoeff(&bi, &bj);
    for (std::size_t i = 0; i < s.grid.theta.size(); ++i) {
      for (std::size_t j = 0; j < s.grid.phi.size(); ++j) {
        q.add({s.grid.theta[i], s.grid.phi[j],
               s.grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
      }
    }
    write_table(dir / ("husimi_t" + format_number(s.t)), q, cfg.format);
    summary.add({s.t, s.grid.integral(), s.grid.polar_cap_mass(), s.symmetric_weight, qmax,
                 s.grid.theta[static_cast<std::size_t>(bi)], s.grid.phi[static_cast<std::size_t>(bj)]});
  }
  write_table(dir / "husimi_summary", summary, cfg.format);
  write_manifest(cfg);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : summary.rows) {
    out.push_back({{"t", json_number(r[0])},
                   {"integral", json_number(r[1])},
                   {"polar_cap_mass", json_number(r[2])}});
  }
  return {{"snapshots", out}};
}

// ---------------------------------------------------------------------------
// open
// ---------------------------------------------------------------------------

struct OpenTrajectory {
  Table table;  // t, f_Q_z, f_Q_z_closed, trace, min_eigenvalue, depth_*
  LindbladStats stats;
};

inline OpenTrajectory open_trajectory(const RunConfig& cfg, const ModelParams& m, OpenSystem g,
                                      double t_max) {
  const SpinBasis full = build_basis(m.n_sites, Sector::full());
  const RealOperator H = build_hamiltonian(m, full);
  const auto jumps = jump_operators(full, g.gamma_z, g.gamma_m);
  const auto grid = uniform_grid(t_max, cfg.dt);

  // Closed reference on the same grid (parity sector, Krylov).
  std::vector<double> closed;
  {
    const SpinBasis sec = build_basis(m.n_sites, initial_state_sector(m.n_sites));
    const RealOperator Hs = build_hamiltonian(m, sec);
    propagate(Hs, initial_state(sec), grid, propagator_config(cfg),
              [&](std::size_t, double t, const StateVector& psi) {
                closed.push_back(qfi_pure(psi, BlochDirection::z(), t).f_Q);
              });
  }

  LindbladConfig lc;
  lc.tol = cfg.lindblad_tol;
  lc.max_sites = static_cast<std::size_t>(cfg.max_open_sites);
  lc.check_positivity = false;  // MixedQfi below applies the same floor on its own eigensolve
  // The step control bounds entries of rho, so eigenvalue noise can reach
  // dim * tol (e.g. the zero eigenvalues of a pure state at gamma = 0).
  lc.positivity_floor =
      std::min(lc.positivity_floor, -static_cast<double>(full.dimension()) * cfg.lindblad_tol);
  OpenTrajectory out;
  out.table.columns = {"t", "f_Q_z", "f_Q_z_closed", "trace", "min_eigenvalue",
                       "depth_producibility", "depth_linear"};
  out.stats = lindblad_propagate(
      H, jumps, DensityMatrix::pure(initial_state(full)), grid, lc,
      [&](std::size_t k, double t, const DensityMatrix& rho) {
        const MixedQfi q(rho, lc.positivity_floor);
        const double f = q.qfi(BlochDirection::z(), t).f_Q;
        const int d1 = entanglement_depth(f, m.n_sites, DepthConvention::ProducibilityBound).depth;
        const int d2 = entanglement_depth(f, m.n_sites, DepthConvention::SimpleLinear).depth;
        out.table.add({t, f, closed[k], rho.trace(), q.min_eigenvalue(), static_cast<double>(d1),
                       static_cast<double>(d2)});
      });
  return out;
}

// Each dominant closed-system peak (f > 1) against the open-system maximum
// within +-radius of it.
inline Table peak_reduction(const Table& traj, double radius = 0.5) {
  const TimeSeries closed = column_series(traj, "f_Q_z_closed", "closed");
  const TimeSeries open = column_series(traj, "f_Q_z", "open");
  Table t;
  t.columns = {"peak", "t_closed", "f_closed", "t_open", "f_open", "reduction"};
  int index = 0;
  for (auto k : dominant_maxima(closed, radius)) {
    if (closed.values[k] <= 1.0) continue;
    double best = -1.0, t_best = 0.0;
    for (std::size_t j = 0; j < open.size(); ++j) {
      if (std::abs(open.times[j] - closed.times[k]) <= radius && open.values[j] > best) {
        best = open.values[j];
        t_best = open.times[j];
      }
    }
    t.add({static_cast<double>(index++), closed.times[k], closed.values[k], t_best, best,
           1.0 - best / closed.values[k]});
  }
  return t;
}

inline std::string gamma_tag(OpenSystem g) {
  return "gz" + format_number(g.gamma_z) + "_gm" + format_number(g.gamma_m);
}

inline nlohmann::json cmd_open(const RunConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  const OpenSystem base = cfg.open_system.value_or(OpenSystem{});
  std::vector<OpenSystem> rates{base};
  if (cfg.sweep && cfg.sweep->variable == SweepVariable::Gamma) {
    rates.clear();
    for (double v : cfg.sweep->values) rates.push_back({v, v});
  }
  const auto models = sweep_models(cfg);
  struct Job {
    ModelParams m;
    OpenSystem g;
  };
  std::vector<Job> jobs;
  for (const auto& m : models) {
    for (auto g : rates) jobs.push_back({m, g});
  }
  const bool single = jobs.size() == 1;
  std::vector<nlohmann::json> runs(jobs.size());
  run_parallel(jobs.size(), cfg.workers, [&](std::size_t k) {
    const auto traj = open_trajectory(cfg, jobs[k].m, jobs[k].g, cfg.t_max);
    const std::string tag = single ? "" : "_" + model_tag(jobs[k].m) + "_" + gamma_tag(jobs[k].g);
    write_table(dir / ("open" + tag), traj.table, cfg.format);
    const Table peaks = peak_reduction(traj.table);
    write_table(dir / ("open_peaks" + tag), peaks, cfg.format);
    const auto d1 = traj.table.column("depth_producibility");
    const auto d2 = traj.table.column("depth_linear");
    nlohmann::json r{{"n", jobs[k].m.n_sites},
                     {"h", json_number(jobs[k].m.h)},
                     {"gamma_z", json_number(jobs[k].g.gamma_z)},
                     {"gamma_m", json_number(jobs[k].g.gamma_m)},
                     {"max_depth_producibility", static_cast<int>(*std::max_element(d1.begin(), d1.end()))},
                     {"max_depth_linear", static_cast<int>(*std::max_element(d2.begin(), d2.end()))},
                     {"steps_accepted", traj.stats.accepted},
                     {"steps_rejected", traj.stats.rejected}};
    nlohmann::json p = nlohmann::json::array();
    for (const auto& row : peaks.rows) {
      p.push_back({{"t_closed", json_number(row[1])},
                   {"f_closed", json_number(row[2])},
                   {"f_open", json_number(row[4])},
                   {"reduction", json_number(row[5])}});
    }
    r["peaks"] = p;
    runs[k] = std::move(r);
  });

  nlohmann::json out{{"runs", runs}};
  if (cfg.gamma_scan) {
    const int pts = cfg.scan_points;
    std::vector<OpenSystem> grid;
    for (int i = 0; i < pts; ++i) {
      for (int j = 0; j < pts; ++j) {
        const double gz = pts == 1 ? 0.0 : cfg.scan_max * i / (pts - 1);
        const double gm = pts == 1 ? 0.0 : cfg.scan_max * j / (pts - 1);
        grid.push_back({gz, gm});
      }
    }
    const double t_scan = cfg.scan_tmax > 0.0 ? cfg.scan_tmax : cfg.t_max;
    std::vector<std::vector<double>> rows(grid.size());
    run_parallel(grid.size(), cfg.workers, [&](std::size_t k) {
      const auto traj = open_trajectory(cfg, cfg.model, grid[k], t_scan);
      write_table(dir / "open_scan" / gamma_tag(grid[k]), traj.table, cfg.format);
      const auto f = traj.table.column("f_Q_z");
      const auto it = std::max_element(f.begin(), f.end());
      const double t_peak = traj.table.column("t")[static_cast<std::size_t>(it - f.begin())];
      rows[k] = {grid[k].gamma_z,
                 grid[k].gamma_m,
                 *it,
                 t_peak,
                 static_cast<double>(entanglement_depth(*it, cfg.model.n_sites,
                                                        DepthConvention::ProducibilityBound).depth),
                 static_cast<double>(entanglement_depth(*it, cfg.model.n_sites,
                                                        DepthConvention::SimpleLinear).depth)};
    });
    Table scan;
    scan.columns = {"gamma_z", "gamma_m", "f_Q_z_max", "t_max", "depth_producibility",
                    "depth_linear"};
    int best1 = 1, best2 = 1;
    for (auto& r : rows) {
      best1 = std::max(best1, static_cast<int>(r[4]));
      best2 = std::max(best2, static_cast<int>(r[5]));
      scan.add(std::move(r));
    }
    write_table(dir / "open_scan", scan, cfg.format);
    out["scan"] = {{"max_depth_producibility", best1}, {"max_depth_linear", best2}};
  }
  write_json(dir / "summary.json", out);
  write_manifest(cfg);
  return out;
}

// ---------------------------------------------------------------------------
// scaling
// ---------------------------------------------------------------------------

struct ScalingResult {
  std::vector<SizedSeries> curves;
  std::vector<PeakFit> peaks;
  ScalingFit log_fit;
  ScalingFit time_fit;
  CollapseParams collapse;
  double residual_inside = 0.0;
  double residual_outside = 0.0;
  bool collapse_valid = false;
};

inline nlohmann::json fit_json(const ScalingFit& f) {
  if (f.kind == ScalingKind::LogDivergence) {
    return {{"kind", "log_divergence"},   {"a", json_number(f.a)},
            {"N0", json_number(f.N0)},     {"residual", json_number(f.residual)},
            {"r_squared", json_number(f.r_squared)}, {"flagged", f.flagged}};
  }
  return {{"kind", "linear_time"},        {"alpha", json_number(f.alpha)},
          {"beta", json_number(f.beta)},    {"residual", json_number(f.residual)},
          {"r_squared", json_number(f.r_squared)}};
}

// Peaks, both fits and the collapse diagnostics for f_Q[S_z] curves.
inline ScalingResult analyse_scaling(std::vector<SizedSeries> curves, const RunConfig& cfg) {
  ScalingResult r;
  std::vector<int> ns;
  std::vector<double> fs, ts;
  for (const auto& c : curves) {
    r.peaks.push_back(quench_peak(cfg, c.series));
    ns.push_back(c.n_sites);
    fs.push_back(r.peaks.back().f_star);
    ts.push_back(r.peaks.back().t_c);
  }
  r.log_fit = fit_log_divergence(ns, fs);
  r.time_fit = fit_linear_time(ns, ts);
  r.collapse = {r.log_fit.a, r.log_fit.N0, r.time_fit.alpha, r.time_fit.beta};
  r.curves = std::move(curves);
  if (!r.log_fit.flagged) {
    r.residual_inside = collapse_residual(r.curves, r.collapse, cfg.collapse_inner);
    r.residual_outside =
        collapse_residual_band(r.curves, r.collapse, cfg.collapse_inner, cfg.collapse_outer);
    r.collapse_valid = true;
  }
  return r;
}

inline nlohmann::json cmd_scaling(const RunConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  const auto models = sweep_models(cfg);
  std::vector<SizedSeries> curves(models.size());
  run_parallel(models.size(), cfg.workers, [&](std::size_t k) {
    const Table t = quench_table(cfg, models[k], {false, false});
    Table slim;
    slim.columns = {"t", "f_Q_z"};
    for (const auto& row : t.rows) slim.add({row[0], row[1]});
    write_table(dir / ("trajectory_N" + std::to_string(models[k].n_sites)), slim, cfg.format);
    curves[k] = {models[k].n_sites, column_series(t, "f_Q_z", model_tag(models[k]))};
  });
  const ScalingResult r = analyse_scaling(curves, cfg);

  Table peaks;
  peaks.columns = {"n", "t_c", "f_star"};
  for (std::size_t k = 0; k < r.curves.size(); ++k) {
    peaks.add({static_cast<double>(r.curves[k].n_sites), r.peaks[k].t_c, r.peaks[k].f_star});
  }
  write_table(dir / "scaling_peaks", peaks, cfg.format);

  nlohmann::json out{{"log_fit", fit_json(r.log_fit)}, {"time_fit", fit_json(r.time_fit)}};
  if (r.collapse_valid) {
    for (const auto& c : r.curves) {
      const TimeSeries s = rescale_curve(c, r.collapse);
      Table t;
      t.columns = {"x", "y"};
      for (std::size_t i = 0; i < s.size(); ++i) t.add({s.times[i], s.values[i]});
      write_table(dir / ("rescaled_N" + std::to_string(c.n_sites)), t, cfg.format);
    }
    out["collapse"] = {{"inner", json_number(cfg.collapse_inner)},
                       {"outer", json_number(cfg.collapse_outer)},
                       {"residual_inside", json_number(r.residual_inside)},
                       {"residual_outside", json_number(r.residual_outside)},
                       {"ratio", json_number(r.residual_outside / r.residual_inside)}};
  } else {
    out["collapse"] = nullptr;
  }
  write_json(dir / "scaling.json", out);
  write_manifest(cfg);
  return out;
}

inline nlohmann::json run_command(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Quench: return cmd_quench(cfg);
    case Command::Spectrum: return cmd_spectrum(cfg);
    case Command::Husimi: return cmd_husimi(cfg);
    case Command::Open: return cmd_open(cfg);
    case Command::Scaling: return cmd_scaling(cfg);
  }
  throw ConfigError("unknown command");
}

}  // namespace dqpt

#endif  // DQPT_COMMANDS_HPP
