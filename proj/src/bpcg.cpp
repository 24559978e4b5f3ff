#include "netdesign/bpcg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "netdesign/kernels.hpp"

namespace netdesign {

std::function<double(double)> Objective::derivative_along(
    std::span<const double> x, std::span<const double> d) const {
  return [this, xc = std::vector<double>(x.begin(), x.end()),
          dc = std::vector<double>(d.begin(), d.end())](double t) {
    std::vector<double> point(xc.size());
    for (std::size_t i = 0; i < xc.size(); ++i) point[i] = xc[i] + t * dc[i];
    std::vector<double> grad(xc.size());
    gradient(point, grad);
    return kernels::dot(grad.data(), dc.data(), dc.size());
  };
}

std::uint64_t fingerprint(std::span<const double> data) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  for (std::size_t i = 0; i < data.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

int ActiveSet::find(std::uint64_t fp, std::span<const double> vertex) const {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (fingerprints[i] != fp) continue;
    if (vertices[i].size() == vertex.size() &&
        std::equal(vertices[i].begin(), vertices[i].end(), vertex.begin()))
      return static_cast<int>(i);
  }
  return -1;
}

void ActiveSet::compact(double drop_tol) {
  std::size_t keep = 0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (weights[i] <= drop_tol) continue;
    if (keep != i) {
      vertices[keep] = std::move(vertices[i]);
      weights[keep] = weights[i];
      fingerprints[keep] = fingerprints[i];
    }
    ++keep;
  }
  // Never drop everything; keep the heaviest vertex if all weights vanished.
  if (keep == 0 && !vertices.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < weights.size(); ++i)
      if (weights[i] > weights[best]) best = i;
    vertices[0] = std::move(vertices[best]);
    weights[0] = 1.0;
    fingerprints[0] = fingerprints[best];
    keep = 1;
  }
  vertices.resize(keep);
  weights.resize(keep);
  fingerprints.resize(keep);
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum > 0.0)
    for (double& w : weights) w /= sum;
}

std::vector<double> ActiveSet::combination() const {
  std::vector<double> x(vertices.empty() ? 0 : vertices[0].size(), 0.0);
  for (std::size_t i = 0; i < vertices.size(); ++i)
    kernels::axpy(weights[i], vertices[i].data(), x.data(), x.size());
  return x;
}

double dual_gap(std::span<const double> g, std::span<const double> x,
                std::span<const double> v) {
  return kernels::dot(g.data(), x.data(), x.size()) -
         kernels::dot(g.data(), v.data(), v.size());
}

double exact_line_search(const std::function<double(double)>& derivative,
                         double t_max, double tol) {
  if (!(t_max > 0.0)) return 0.0;
  if (derivative(0.0) >= 0.0) return 0.0;
  if (derivative(t_max) <= 0.0) return t_max;
  double lo = 0.0, hi = t_max;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (derivative(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

SolveReport bpcg_solve(const Objective& objective, Lmo& lmo,
                       std::vector<double> start, const BpcgConfig& config,
                       const std::function<void(const TraceEntry&)>& trace) {
  ActiveSet as;
  as.fingerprints.push_back(fingerprint(start));
  as.vertices.push_back(std::move(start));
  as.weights.push_back(1.0);
  return bpcg_solve(objective, lmo, std::move(as), config, trace);
}

SolveReport bpcg_solve(const Objective& objective, Lmo& lmo, ActiveSet start,
                       const BpcgConfig& config,
                       const std::function<void(const TraceEntry&)>& trace) {
  const auto t0 = std::chrono::steady_clock::now();
  if (start.vertices.empty())
    throw std::invalid_argument("bpcg_solve: empty starting set");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  SolveReport report;
  ActiveSet& as = report.active_set;
  as = std::move(start);
  as.compact(config.weight_drop_tol);
  const std::size_t n = as.vertices[0].size();

  std::vector<double> x = as.combination();
  std::vector<double> g(n), direction(n);
  double f_x = objective.value(x);
  double phi = kInf;  // lazy threshold; set from the first true LMO call
  bool gradient_fresh = false;
  double last_certified_gap = kInf;

  auto tolerance_met = [&](double gap) {
    return gap <= std::max(config.gap_tol_abs,
                           config.gap_tol_rel * std::max(1.0, std::abs(f_x)));
  };

  long iter = 0;
  while (iter < config.max_iterations &&
         seconds_since(t0) < config.time_limit_s) {
    ++iter;
    if (!gradient_fresh) {
      objective.gradient(x, g);
      gradient_fresh = true;
    }

    // Active-set extremes under the current gradient.
    std::size_t away = 0, local = 0;
    double away_val = -kInf, local_val = kInf;
    for (std::size_t i = 0; i < as.size(); ++i) {
      double val = kernels::dot(g.data(), as.vertices[i].data(), n);
      if (val > away_val) {
        away_val = val;
        away = i;
      }
      if (val < local_val) {
        local_val = val;
        local = i;
      }
    }
    double pairwise_gap = away_val - local_val;

    bool stepped = false;
    if (config.lazy && pairwise_gap >= phi && away != local) {
      // Pairwise step: shift weight from the away vertex onto the local
      // FW vertex along d = v_local - v_away.
      for (std::size_t i = 0; i < n; ++i)
        direction[i] = as.vertices[local][i] - as.vertices[away][i];
      double t_max = as.weights[away];
      double t = exact_line_search(objective.derivative_along(x, direction),
                                   t_max, config.line_search_tol);
      if (t > 0.0) {
        kernels::axpy(t, direction.data(), x.data(), n);
        as.weights[away] -= t;
        as.weights[local] += t;
        if (as.weights[away] <= config.weight_drop_tol)
          as.compact(config.weight_drop_tol);
        stepped = true;
      }
    }

    if (!stepped) {
      LmoResult res = lmo.minimize(g);
      ++report.lmo_calls;
      double gap = dual_gap(g, x, res.vertex);
      f_x = objective.value(x);
      if (res.exact) {
        report.certified = true;
        report.lower_bound = std::max(report.lower_bound, f_x - gap);
        last_certified_gap = std::min(last_certified_gap, gap);
        if (tolerance_met(gap)) break;
      }
      if (phi == kInf) phi = gap / 2.0;  // first call seeds the threshold

      if (gap >= phi || !config.lazy) {
        for (std::size_t i = 0; i < n; ++i)
          direction[i] = res.vertex[i] - x[i];
        double t = exact_line_search(objective.derivative_along(x, direction),
                                     1.0, config.line_search_tol);
        if (t > 0.0) {
          kernels::axpy(t, direction.data(), x.data(), n);
          for (double& w : as.weights) w *= (1.0 - t);
          std::uint64_t fp = fingerprint(res.vertex);
          if (int idx = as.find(fp, res.vertex); idx >= 0) {
            as.weights[idx] += t;
          } else {
            as.vertices.push_back(std::move(res.vertex));
            as.weights.push_back(t);
            as.fingerprints.push_back(fp);
          }
          as.compact(config.weight_drop_tol);
          stepped = true;
        }
      }

      if (!stepped) {
        // Neither the cache nor the oracle beat the threshold: tighten it.
        phi /= 2.0;
        double floor = 1e-16 * std::max(1.0, std::abs(f_x));
        if (phi < floor) break;  // stagnated; gap above is our certificate
      }
    }

    if (stepped) {
      gradient_fresh = false;
      if (config.refresh_interval > 0 && iter % config.refresh_interval == 0) {
        x = as.combination();
      }
      f_x = objective.value(x);
    }

    if (trace && iter % std::max(1, config.trace_every) == 0)
      trace({iter, f_x, last_certified_gap, report.lmo_calls,
             seconds_since(t0)});
  }

  report.iterations = iter;
  as.compact(config.weight_drop_tol);
  report.iterate = as.combination();
  x = report.iterate;
  report.objective = objective.value(x);
  report.dual_gap = report.certified
                        ? std::max(0.0, report.objective - report.lower_bound)
                        : kInf;
  report.wall_time_s = seconds_since(t0);
  return report;
}

}  // namespace netdesign
