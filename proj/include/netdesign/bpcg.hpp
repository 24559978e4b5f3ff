#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace netdesign {

// Answer of a linear minimization oracle. `value` is the oracle's own
// account of the linear objective; the solver recomputes the dual gap from
// the vertex itself and never trusts this number. `exact` is false when the
// oracle ran out of budget and the vertex is merely the best one found — no
// optimality certificate can be derived from such an answer.
struct LmoResult {
  std::vector<double> vertex;
  double value = 0.0;
  bool exact = true;
};

class Lmo {
 public:
  virtual ~Lmo() = default;
  /// Minimizes gradient·v over the oracle's feasible set; returns an extreme
  /// point. May throw RoutingInfeasible when the set is empty.
  virtual LmoResult minimize(std::span<const double> gradient) = 0;
};

class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x,
                        std::span<double> out) const = 0;
  /// Returns t -> d/dt f(x + t*d), used by the exact line search. The
  /// default is generic (one gradient evaluation per probe); objectives with
  /// separable structure override it with cheaper forms.
  virtual std::function<double(double)> derivative_along(
      std::span<const double> x, std::span<const double> d) const;
};

/// Order-sensitive content hash used to recognize repeated vertices.
std::uint64_t fingerprint(std::span<const double> data);

// Convex combination of extreme points representing the iterate.
struct ActiveSet {
  std::vector<std::vector<double>> vertices;
  std::vector<double> weights;       // >= 0, sum to 1
  std::vector<std::uint64_t> fingerprints;

  std::size_t size() const { return vertices.size(); }
  /// Index of an equal vertex, or -1.
  int find(std::uint64_t fp, std::span<const double> vertex) const;
  /// Drops vertices with weight <= drop_tol and renormalizes the rest.
  void compact(double drop_tol);
  /// The weighted vertex sum, recomputed from scratch.
  std::vector<double> combination() const;
};

struct BpcgConfig {
  // Stop once a certified FW gap satisfies
  // gap <= max(gap_tol_abs, gap_tol_rel * max(1, |objective|)).
  double gap_tol_rel = 1e-7;
  double gap_tol_abs = 0.0;
  long max_iterations = 1000000;
  double time_limit_s = std::numeric_limits<double>::infinity();
  double weight_drop_tol = 1e-12;  // active-set compaction threshold
  int refresh_interval = 64;       // iterations between iterate recomputes
  bool lazy = true;                // false: call the LMO every iteration
  double line_search_tol = 1e-12;
  int trace_every = 1;             // emit a trace entry every k-th iteration
};

struct TraceEntry {
  long iteration = 0;
  double objective = 0.0;
  double dual_gap = std::numeric_limits<double>::infinity();  // last certified
  long lmo_calls = 0;
  double time_s = 0.0;
};

struct SolveReport {
  std::vector<double> iterate;
  double objective = 0.0;
  // Best certified lower bound f(x_k) - gap_k over all exact LMO calls;
  // -infinity if the oracle never returned an exact answer.
  double lower_bound = -std::numeric_limits<double>::infinity();
  // objective - lower_bound, clamped at 0; +infinity when uncertified.
  double dual_gap = std::numeric_limits<double>::infinity();
  long iterations = 0;
  long lmo_calls = 0;
  double wall_time_s = 0.0;
  bool certified = false;  // true iff at least one exact LMO answer was seen
  ActiveSet active_set;
};

/// g·x - g·v: the Frank-Wolfe gap certificate when v minimizes g over the
/// feasible set. Upper-bounds the primal suboptimality of x for convex f.
double dual_gap(std::span<const double> g, std::span<const double> x,
                std::span<const double> v);

/// Minimizes phi(t) = f(x + t*d) over [0, t_max] for convex phi by
/// safeguarded bisection on its (nondecreasing) derivative.
double exact_line_search(const std::function<double(double)>& derivative,
                         double t_max, double tol = 1e-12);

/// Lazified blended pairwise conditional gradient. Maintains the iterate as
/// a convex combination of LMO vertices; pairwise steps shift weight between
/// active vertices when their promised descent beats the lazy threshold,
/// otherwise the true LMO is consulted (and the threshold halves whenever
/// even the oracle cannot beat it). Objective values never increase.
SolveReport bpcg_solve(
    const Objective& objective, Lmo& lmo, std::vector<double> start,
    const BpcgConfig& config = {},
    const std::function<void(const TraceEntry&)>& trace = nullptr);

/// Same solver resumed from an existing convex combination (for example a
/// parent node's active set filtered to the child's feasible region). The
/// set must be nonempty; weights are renormalized before the first step.
SolveReport bpcg_solve(
    const Objective& objective, Lmo& lmo, ActiveSet start,
    const BpcgConfig& config = {},
    const std::function<void(const TraceEntry&)>& trace = nullptr);

}  // namespace netdesign
