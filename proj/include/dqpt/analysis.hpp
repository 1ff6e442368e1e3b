#ifndef DQPT_ANALYSIS_HPP
#define DQPT_ANALYSIS_HPP

// Peak extraction from sampled trajectories, finite-size scaling fits
// (f* = a log(N/N0), t_c = alpha N + beta) and the data-collapse residual.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dqpt/errors.hpp"

namespace dqpt {

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;

  void validate() const {
    if (times.size() != values.size()) throw ConfigError("time series: length mismatch");
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (!std::isfinite(times[k]) || !std::isfinite(values[k])) {
        throw ConfigError("time series '" + label + "' has non-finite entries");
      }
      if (k > 0 && !(times[k] > times[k - 1])) {
        throw ConfigError("time series '" + label + "' times must be strictly increasing");
      }
    }
  }

  std::size_t size() const { return times.size(); }

  // Linear interpolation; x must lie within [times.front(), times.back()].
  double interpolate(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) return values.back();
    const auto k = static_cast<std::size_t>(it - times.begin());
    if (*it == t || k == 0) return values[k];
    const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    return (1.0 - w) * values[k - 1] + w * values[k];
  }
};

struct PeakFit {
  double t_c = 0.0;
  double f_star = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

// The discrete maximum sits on a window boundary; the window should be widened.
class PeakAtWindowEdge : public NumericalError {
 public:
  explicit PeakAtWindowEdge(const std::string& what) : NumericalError(what) {}
};

// Discrete maximum inside [lo, hi], refined by the parabola through it and
// its two neighbours.
inline PeakFit find_peak(const TimeSeries& series, std::pair<double, double> window) {
  series.validate();
  const auto [lo, hi] = window;
  if (series.size() == 0 || !(lo < hi)) throw ConfigError("find_peak: empty window");
  if (lo < series.times.front() - 1e-12 || hi > series.times.back() + 1e-12) {
    throw ConfigError("find_peak: window lies outside the sampled range");
  }
  std::size_t first = series.size();
  std::size_t last = 0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (series.times[k] >= lo && series.times[k] <= hi) {
      first = std::min(first, k);
      last = k;
    }
  }
  if (first >= series.size() || last < first + 2) {
    throw ConfigError("find_peak: fewer than 3 samples in the window");
  }
  std::size_t best = first;
  for (std::size_t k = first; k <= last; ++k) {
    if (series.values[k] > series.values[best]) best = k;
  }
  if (best == first || best == last) {
    throw PeakAtWindowEdge("find_peak: maximum at the window edge t=" +
                           std::to_string(series.times[best]) + "; widen the window");
  }

  PeakFit fit{series.times[best], series.values[best], lo, hi};
  const double x0 = series.times[best - 1], x1 = series.times[best], x2 = series.times[best + 1];
  const double y0 = series.values[best - 1], y1 = series.values[best], y2 = series.values[best + 1];
  // Divided differences of the interpolating parabola.
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curv = (d12 - d01) / (x2 - x0);
  if (curv < 0.0) {
    const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    const double t = std::clamp(vertex, x0, x2);
    const double value = y0 + d01 * (t - x0) + curv * (t - x0) * (t - x1);
    fit.t_c = t;
    fit.f_star = std::max(value, y1);
  }
  return fit;
}

// Interior samples that are the largest value within +-radius.
inline std::vector<std::size_t> dominant_maxima(const TimeSeries& series, double radius) {
  series.validate();
  std::vector<std::size_t> out;
  const std::size_t n = series.size();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double v = series.values[k];
    if (!(v > series.values[k - 1]) || v < series.values[k + 1]) continue;
    bool dominant = true;
    for (std::size_t j = k; j-- > 0 && series.times[k] - series.times[j] <= radius;) {
      if (series.values[j] > v) dominant = false;
    }
    for (std::size_t j = k + 1; j < n && series.times[j] - series.times[k] <= radius; ++j) {
      if (series.values[j] > v) dominant = false;
    }
    if (dominant) out.push_back(k);
  }
  return out;
}

// Default peak window: +-radius around the first dominant maximum that
// reaches `fraction` of the largest one. Later revivals of small chains can
// exceed the first peak, so the global maximum alone is not used.
inline std::pair<double, double> main_peak_window(const TimeSeries& series, double radius = 0.5,
                                                  double fraction = 0.8) {
  const auto maxima = dominant_maxima(series, radius);
  if (maxima.empty()) throw NumericalError("no interior maximum in '" + series.label + "'");
  double top = 0.0;
  for (auto k : maxima) top = std::max(top, series.values[k]);
  for (auto k : maxima) {
    if (series.values[k] >= fraction * top) {
      const double t = series.times[k];
      return {std::max(series.times.front(), t - radius), std::min(series.times.back(), t + radius)};
    }
  }
  throw NumericalError("no dominant maximum in '" + series.label + "'");
}

enum class ScalingKind { LogDivergence, LinearTime };

struct ScalingFit {
  ScalingKind kind = ScalingKind::LogDivergence;
  // LogDivergence: f* = a log(N/N0). LinearTime: t_c = alpha N + beta.
  double a = 0.0;
  double N0 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;  // RMS misfit
  double r_squared = 0.0;
  bool flagged = false;  // LogDivergence with a <= 0: no divergence
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
  double r_squared = 0.0;
};

// Unweighted least squares y = slope x + intercept. Points are sorted first
// so the result does not depend on input order.
inline LineFit least_squares_line(std::vector<std::pair<double, double>> pts,
                                  std::size_t min_distinct) {
  std::sort(pts.begin(), pts.end());
  std::set<double> distinct;
  for (const auto& p : pts) distinct.insert(p.first);
  if (distinct.size() < min_distinct) {
    throw ConfigError("degenerate fit: need at least " + std::to_string(min_distinct) +
                      " distinct system sizes");
  }
  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (f.slope * x + f.intercept);
    ss_res += r * r;
  }
  f.rms = std::sqrt(ss_res / n);
  if (syy > 0.0) {
    f.r_squared = 1.0 - ss_res / syy;
  } else {
    f.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
  }
  return f;
}

}  // namespace detail

inline ScalingFit fit_log_divergence(const std::vector<int>& ns, const std::vector<double>& f_stars) {
  if (ns.size() != f_stars.size()) throw ConfigError("fit_log_divergence: length mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (ns[k] < 1) throw ConfigError("fit_log_divergence: system sizes must be positive");
    if (!(f_stars[k] > 0.0)) throw ConfigError("fit_log_divergence: peak values must be positive");
    pts.emplace_back(std::log(static_cast<double>(ns[k])), f_stars[k]);
  }
  const auto line = detail::least_squares_line(std::move(pts), 3);
  ScalingFit fit;
  fit.kind = ScalingKind::LogDivergence;
  fit.a = line.slope;
  fit.residual = line.rms;
  fit.r_squared = line.r_squared;
  const double scale = std::max(1.0, std::abs(line.intercept));
  fit.flagged = !(line.slope > 1e-12 * scale);
  fit.N0 = fit.flagged ? std::numeric_limits<double>::infinity()
                       : std::exp(-line.intercept / line.slope);
  return fit;
}

inline ScalingFit fit_linear_time(const std::vector<int>& ns, const std::vector<double>& t_cs) {
  if (ns.size() != t_cs.size()) throw ConfigError("fit_linear_time: length mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (!std::isfinite(t_cs[k])) throw ConfigError("fit_linear_time: non-finite critical time");
    pts.emplace_back(static_cast<double>(ns[k]), t_cs[k]);
  }
  const auto line = detail::least_squares_line(std::move(pts), 2);
  ScalingFit fit;
  fit.kind = ScalingKind::LinearTime;
  fit.alpha = line.slope;
  fit.beta = line.intercept;
  fit.residual = line.rms;
  fit.r_squared = line.r_squared;
  return fit;
}

// ---------------------------------------------------------------------------
// Data collapse
// ---------------------------------------------------------------------------

struct CollapseParams {
  double a = 1.0;
  double N0 = 1.0;
  double alpha = 0.0;
  double beta = 0.0;

  double critical_time(int n) const { return alpha * n + beta; }
  double amplitude(int n) const { return a * std::log(n / N0); }
};

struct SizedSeries {
  int n_sites = 0;
  TimeSeries series;
};

// x = t - t_c(N), y = f / (a log(N/N0)).
inline TimeSeries rescale_curve(const SizedSeries& c, const CollapseParams& p) {
  const double amp = p.amplitude(c.n_sites);
  if (!(amp > 0.0) || !std::isfinite(amp)) {
    throw ConfigError("collapse: a log(N/N0) must be positive for N=" + std::to_string(c.n_sites));
  }
  TimeSeries out;
  out.label = c.series.label;
  const double tc = p.critical_time(c.n_sites);
  for (std::size_t k = 0; k < c.series.size(); ++k) {
    out.times.push_back(c.series.times[k] - tc);
    out.values.push_back(c.series.values[k] / amp);
  }
  return out;
}

// Largest pairwise RMS deviation between rescaled curves over the band
// inner < |x| <= outer (inner < 0 includes x = 0). Pairs are compared on the
// union of their nodes inside the band and their common x range.
inline double collapse_residual_band(const std::vector<SizedSeries>& curves,
                                     const CollapseParams& params, double inner, double outer) {
  if (curves.size() < 2) throw ConfigError("collapse: need at least two curves");
  if (!std::isfinite(params.a) || !std::isfinite(params.N0) || !std::isfinite(params.alpha) ||
      !std::isfinite(params.beta)) {
    throw ConfigError("collapse: parameters must be finite");
  }
  std::vector<TimeSeries> scaled;
  scaled.reserve(curves.size());
  for (const auto& c : curves) {
    c.series.validate();
    scaled.push_back(rescale_curve(c, params));
  }
  auto in_band = [&](double x) { return std::abs(x) <= outer && std::abs(x) > inner; };

  double worst = 0.0;
  bool any = false;
  std::vector<double> nodes;
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    for (std::size_t j = i + 1; j < scaled.size(); ++j) {
      const auto& ci = scaled[i];
      const auto& cj = scaled[j];
      if (ci.size() == 0 || cj.size() == 0) continue;
      const double lo = std::max(ci.times.front(), cj.times.front());
      const double hi = std::min(ci.times.back(), cj.times.back());
      nodes.clear();
      for (const auto* c : {&ci, &cj}) {
        for (double x : c->times) {
          if (x >= lo && x <= hi && in_band(x)) nodes.push_back(x);
        }
      }
      std::sort(nodes.begin(), nodes.end());
      nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
      if (nodes.empty()) continue;
      double ss = 0.0;
      for (double x : nodes) {
        const double d = ci.interpolate(x) - cj.interpolate(x);
        ss += d * d;
      }
      worst = std::max(worst, std::sqrt(ss / static_cast<double>(nodes.size())));
      any = true;
    }
  }
  if (!any) throw ConfigError("collapse: no overlap between rescaled curves inside the window");
  return worst;
}

inline double collapse_residual(const std::vector<SizedSeries>& curves, const CollapseParams& params,
                                double window_halfwidth) {
  return collapse_residual_band(curves, params, -1.0, window_halfwidth);
}

}  // namespace dqpt

#endif  // DQPT_ANALYSIS_HPP
