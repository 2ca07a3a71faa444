#include "manifold/density.hpp"

#include "manifold/error.hpp"
#include "manifold/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace manifold {

std::string_view to_string(DensityMethod method) { return method == DensityMethod::pak ? "pak" : "knn"; }

DensityMethod parse_density_method(std::string_view name) {
  if (name == "knn") return DensityMethod::knn;
  if (name == "pak") return DensityMethod::pak;
  throw InputError(fmt::format("unknown density method '{}'", name));
}

double log_unit_ball_volume(double id) {
  if (!(id > 0.0) || !std::isfinite(id)) throw PreconditionError(fmt::format("dimension must be positive, got {}", id));
  return 0.5 * id * std::log(std::numbers::pi) - std::lgamma(0.5 * id + 1.0);
}

double unit_ball_volume(double id) { return std::exp(log_unit_ball_volume(id)); }

DensityField knn_density(const NeighborGraph& graph, Index k, double id, int workers) {
  if (k < 1 || k > graph.maxk()) throw PreconditionError(fmt::format("k={} outside [1, maxk={}]", k, graph.maxk()));
  const double log_omega = log_unit_ball_volume(id);
  const Index n = graph.n_points();
  const double base = std::log(static_cast<double>(k)) - std::log(static_cast<double>(n)) - log_omega;

  DensityField field;
  field.log_rho.resize(static_cast<std::size_t>(n));
  field.log_rho_err.assign(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(k)));
  field.k_used.assign(static_cast<std::size_t>(n), k);
  field.id_used = id;
  field.method = DensityMethod::knn;
  parallel_for(n, workers, [&](Index i) {
    const double d = graph.distance(i, k - 1);
    if (!(d > 0.0)) throw NumericalError(fmt::format("point {}: zero distance to neighbor {}", i, k));
    field.log_rho[static_cast<std::size_t>(i)] = base - id * std::log(d);
  });
  return field;
}

namespace {

/// Profile likelihood of the shell model with slope `a`, over shells 1..k.
/// The intercept has been maximised out: exp(F) = k / S(a) with
/// S(a) = sum_l v_l exp(a l).
struct ShellSums {
  double log_s;  // ln S(a)
  double mean;   // T / S, weighted mean of l
  double var;    // U / S - (T / S)^2
};

ShellSums shell_sums(const std::vector<double>& v, Index k, double a) {
  // exponents a (l - c) are kept non-positive
  const double c = a > 0.0 ? static_cast<double>(k) : 0.0;
  const double step = std::exp(a);
  double w = std::exp(a * (1.0 - c));
  double s = 0.0, t = 0.0, u = 0.0;
  for (Index l = 1; l <= k; ++l) {
    const double term = v[static_cast<std::size_t>(l - 1)] * w;
    const double dl = static_cast<double>(l);
    s += term;
    t += term * dl;
    u += term * dl * dl;
    w *= step;
  }
  const double mean = t / s;
  return ShellSums{std::log(s) + a * c, mean, std::max(0.0, u / s - mean * mean)};
}

struct ShellFit {
  double a;
  double log_s;  // ln S at the optimum
  double gain;   // lnL_B - lnL_A >= 0
};

ShellFit fit_slope(const std::vector<double>& v, Index k, double a0, double log_s0) {
  const double kd = static_cast<double>(k);
  const double s1 = 0.5 * kd * (kd + 1.0);
  auto profile = [&](double a, double log_s) { return -kd * log_s + a * s1; };

  double a = a0;
  ShellSums cur = shell_sums(v, k, a);
  double value = profile(a, cur.log_s);
  for (int iter = 0; iter < 100; ++iter) {
    const double grad = s1 - kd * cur.mean;
    const double curv = kd * cur.var;
    if (!(curv > 0.0) || !std::isfinite(grad)) throw NumericalError("degenerate shell volumes in PAk fit");
    double step = grad / curv;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      const double trial = a + step;
      const ShellSums next = shell_sums(v, k, trial);
      const double trial_value = profile(trial, next.log_s);
      if (std::isfinite(trial_value) && trial_value >= value - 1e-12 * std::abs(value)) {
        a = trial;
        cur = next;
        value = trial_value;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || std::abs(step) <= 1e-10 * std::max(1.0, std::abs(a))) {
      return ShellFit{a, cur.log_s, std::max(0.0, value - profile(0.0, log_s0))};
    }
  }
  throw NumericalError("PAk slope fit did not converge");
}

}  // namespace

DensityField pak_density(const NeighborGraph& graph, double id, const PakOptions& options) {
  const Index maxk = graph.maxk();
  const Index k_min = options.k_min;
  if (k_min < 3) throw PreconditionError("PAk needs k_min >= 3");
  if (maxk < k_min) throw PreconditionError(fmt::format("PAk needs maxk >= {}, graph has {}", k_min, maxk));
  const double log_omega = log_unit_ball_volume(id);
  const Index n = graph.n_points();
  const double log_n = std::log(static_cast<double>(n));

  DensityField field;
  field.log_rho.resize(static_cast<std::size_t>(n));
  field.log_rho_err.resize(static_cast<std::size_t>(n));
  field.k_used.resize(static_cast<std::size_t>(n));
  field.id_used = id;
  field.method = DensityMethod::pak;

  parallel_for(n, options.workers, [&](Index i) {
    // shell volumes in units of the outermost ball, omega * d_maxk^id
    const double log_outer = std::log(graph.distance(i, maxk - 1));
    std::vector<double> v(static_cast<std::size_t>(maxk));
    double prev = 0.0;
    for (Index l = 0; l < maxk; ++l) {
      const double d = graph.distance(i, l);
      if (!(d > 0.0)) throw NumericalError(fmt::format("point {}: zero neighbor distance", i));
      const double vol = std::exp(id * (std::log(d) - log_outer));
      v[static_cast<std::size_t>(l)] = vol - prev;
      prev = vol;
    }

    // ln S(0) for the first k shells: the whole k-ball
    auto log_ball = [&](Index k) { return id * (std::log(graph.distance(i, k - 1)) - log_outer); };
    ShellFit accepted{};
    Index k_hat = k_min;
    if (options.test == PakTest::neighbor_density) {
      // the neighbors' rows are scattered over the graph; gather them in
      // one pass of independent loads before the sequential test
      std::vector<double> dj(static_cast<std::size_t>(maxk));
      for (Index k = k_min; k <= maxk; ++k)
        dj[static_cast<std::size_t>(k - 1)] = graph.distance(graph.neighbor(i, k - 1), k - 1);
      const double log4 = std::log(4.0);
      for (Index k = k_min; k <= maxk; ++k) {
        const double lvi = id * std::log(graph.distance(i, k - 1));
        const double lvj = id * std::log(dj[static_cast<std::size_t>(k - 1)]);
        const double hi = std::max(lvi, lvj), lo = std::min(lvi, lvj);
        const double lsum = hi + std::log1p(std::exp(lo - hi));
        if (-2.0 * static_cast<double>(k) * (lvi + lvj - 2.0 * lsum + log4) > options.d_threshold) break;
        k_hat = k;
      }
      accepted = fit_slope(v, k_hat, 0.0, log_ball(k_hat));
    } else {
      double a = 0.0;
      for (Index k = k_min; k <= maxk; ++k) {
        const ShellFit fit = fit_slope(v, k, a, log_ball(k));
        if (2.0 * fit.gain > options.d_threshold && k > k_min) break;
        accepted = fit;
        k_hat = k;
        a = fit.a;
        if (2.0 * fit.gain > options.d_threshold) break;
      }
    }

    const double kd = static_cast<double>(k_hat);
    const double log_volume_unit = log_omega + id * log_outer;
    field.log_rho[static_cast<std::size_t>(i)] = std::log(kd) - accepted.log_s - log_volume_unit - log_n;
    field.log_rho_err[static_cast<std::size_t>(i)] = std::sqrt((4.0 * kd + 2.0) / (kd * (kd - 1.0)));
    field.k_used[static_cast<std::size_t>(i)] = k_hat;
  });
  return field;
}

}  // namespace manifold
