#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace pnpbif {

struct SolverConfig {
  double residual_tol = 1e-10;
  double step_tol = 1e-12;
  int max_iters = 200;
  double fd_step_scale = std::sqrt(std::numeric_limits<double>::epsilon());
  double trust_radius_init = 1.0;
  double trust_radius_max = 100.0;
  /// Threads used by multi_start; 0 picks the hardware concurrency.
  unsigned workers = 0;
  /// One Newton step with a central-difference Jacobian after convergence.
  bool central_polish = true;

  void validate() const;
};

using ScalarFunction = std::function<double(double)>;
using Vector = std::vector<double>;
using SystemFunction = std::function<Vector(const Vector&)>;

/// Root of f on [lo, hi] with f(lo) f(hi) < 0. Bisection interleaved with
/// Illinois-weighted secant steps; the secant step is dropped whenever the
/// bracket fails to halve over two iterations, so convergence is never worse
/// than about twice plain bisection. With `accelerate` false only bisection
/// is used. A DomainError at a trial point is replaced by a bisection step
/// (and, failing that, by probing toward `lo`).
///
/// Stops when f is exactly zero or the bracket is narrower than
/// step_tol * max(1, |x|). Throws NoBracketError or MaxIterError.
double bracket_root(const ScalarFunction& f, double lo, double hi, const SolverConfig& cfg,
                    bool accelerate = true);

struct SystemSolution {
  Vector x;
  double residual_norm = 0.0;  // max-norm, recomputed after the solve
  int iterations = 0;
};

/// Dogleg trust-region Newton method with a forward-difference Jacobian.
/// The trust region is measured in the scaled norm ||p_i / max(1, |x_i|)||_2.
/// A DomainError at x0 propagates; at a trial step it counts as a rejected
/// step. Throws MaxIterError, SingularJacobianError or StallError.
SystemSolution solve_system(const SystemFunction& F, const Vector& x0, const SolverConfig& cfg);

struct MultiStartBox {
  Vector lower;
  Vector upper;
  std::vector<int> counts;

  std::size_t dimension() const { return lower.size(); }
  std::size_t size() const;
  void validate() const;
};

/// Cell-centred grid: lower + (i + 1/2)(upper - lower)/count per dimension,
/// last dimension varying fastest.
std::vector<Vector> grid_nodes(const MultiStartBox& box);

struct RootSet {
  std::vector<Vector> roots;
  std::vector<double> residual_norms;
  std::vector<int> start_counts;
  int failed_starts = 0;

  std::size_t size() const { return roots.size(); }
  bool empty() const { return roots.empty(); }
};

/// Two roots coincide when their max-norm distance is at most
/// 1e-6 * max(1, |x|_inf, |y|_inf).
bool same_root(const Vector& x, const Vector& y, double rel_tol = 1e-6);

/// Runs solve_system from every start (in parallel when cfg.workers != 1),
/// merges converged roots in start order and sorts them lexicographically.
RootSet multi_start(const SystemFunction& F, const std::vector<Vector>& starts,
                    const SolverConfig& cfg);
RootSet multi_start(const SystemFunction& F, const MultiStartBox& box, const SolverConfig& cfg);

}  // namespace pnpbif
