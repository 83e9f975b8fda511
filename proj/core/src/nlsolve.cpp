#include "pnpbif/nlsolve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <optional>
#include <string>
#include <thread>

#include "pnpbif/errors.hpp"

namespace pnpbif {

void SolverConfig::validate() const {
  if (!(residual_tol > 0.0)) throw InvalidArgument("SolverConfig: residual_tol must be > 0");
  if (!(step_tol > 0.0)) throw InvalidArgument("SolverConfig: step_tol must be > 0");
  if (max_iters < 1) throw InvalidArgument("SolverConfig: max_iters must be >= 1");
  if (!(fd_step_scale > 0.0)) throw InvalidArgument("SolverConfig: fd_step_scale must be > 0");
  if (!(trust_radius_init > 0.0) || !(trust_radius_max >= trust_radius_init)) {
    throw InvalidArgument("SolverConfig: need 0 < trust_radius_init <= trust_radius_max");
  }
}

// ---------------------------------------------------------------------------
// scalar bracketing

namespace {

std::optional<double> try_eval(const ScalarFunction& f, double x) {
  try {
    const double v = f(x);
    if (std::isfinite(v)) return v;
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

}  // namespace

double bracket_root(const ScalarFunction& f, double lo, double hi, const SolverConfig& cfg,
                    bool accelerate) {
  cfg.validate();
  if (!(lo < hi)) std::swap(lo, hi);
  const auto flo = try_eval(f, lo);
  const auto fhi = try_eval(f, hi);
  if (!flo || !fhi) throw NoBracketError("bracket_root: f undefined at a bracket end");
  if (*flo == 0.0) return lo;
  if (*fhi == 0.0) return hi;
  if ((*flo > 0.0) == (*fhi > 0.0)) throw NoBracketError("bracket_root: f has equal signs");

  double a = lo, b = hi, fa = *flo, fb = *fhi;
  // Illinois weights on the retained endpoint.
  double wa = 1.0, wb = 1.0;
  int side = 0;  // which end moved last: -1 a, +1 b
  double width_two_ago = b - a, width_one_ago = b - a;

  for (int it = 0; it < std::max(cfg.max_iters, 1); ++it) {
    const double width = b - a;
    const double xm = 0.5 * (a + b);
    if (width <= cfg.step_tol * std::max(1.0, std::abs(xm))) {
      return std::abs(fa) <= std::abs(fb) ? a : b;
    }

    const double nudge = 0.5 * cfg.step_tol * std::max(1.0, std::abs(xm));
    double x = xm;
    const bool halving = width <= 0.5 * width_two_ago;
    if (accelerate && (it < 2 || halving)) {
      const double ga = wa * fa, gb = wb * fb;
      const double xs = b - gb * (b - a) / (gb - ga);
      if (std::isfinite(xs)) x = std::clamp(xs, a + nudge, b - nudge);
    }

    auto fx = try_eval(f, x);
    if (!fx && x != xm) {
      x = xm;
      fx = try_eval(f, x);
    }
    for (int j = 1; !fx && j < 60; ++j) {
      x = a + (xm - a) * std::ldexp(1.0, -j);
      if (x <= a) break;
      fx = try_eval(f, x);
    }
    if (!fx) throw MaxIterError("bracket_root: f undefined throughout the bracket");
    if (*fx == 0.0) return x;

    width_two_ago = width_one_ago;
    width_one_ago = width;
    if ((*fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = *fx;
      wa = 1.0;
      wb = side == -1 ? 0.5 * wb : 1.0;
      side = -1;
    } else {
      b = x;
      fb = *fx;
      wb = 1.0;
      wa = side == 1 ? 0.5 * wa : 1.0;
      side = 1;
    }
  }
  throw MaxIterError("bracket_root: iteration limit reached");
}

// ---------------------------------------------------------------------------
// N-dimensional dogleg

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::optional<VectorXd> try_eval(const SystemFunction& F, const VectorXd& x, std::size_t n) {
  try {
    const Vector v = F(Vector(x.data(), x.data() + x.size()));
    if (v.size() != n) throw InvalidArgument("solve_system: residual has wrong dimension");
    VectorXd out = Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(n));
    if (out.allFinite()) return out;
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

VectorXd eval_or_throw(const SystemFunction& F, const VectorXd& x, std::size_t n) {
  const Vector v = F(Vector(x.data(), x.data() + x.size()));
  if (v.size() != n) throw InvalidArgument("solve_system: residual has wrong dimension");
  VectorXd out = Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(n));
  if (!out.allFinite()) throw DomainError("solve_system: non-finite residual");
  return out;
}

// Column j of the Jacobian; falls back to a backward difference when the
// forward point is outside the domain.
MatrixXd jacobian(const SystemFunction& F, const VectorXd& x, const VectorXd& fx,
                  double scale, bool central) {
  const auto n = x.size();
  const auto m = fx.size();
  MatrixXd J(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = scale * std::max(1.0, std::abs(x[j]));
    VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const auto fp = try_eval(F, xp, static_cast<std::size_t>(m));
    if (central) {
      const auto fm = try_eval(F, xm, static_cast<std::size_t>(m));
      if (fp && fm) {
        J.col(j) = (*fp - *fm) / (xp[j] - xm[j]);
        continue;
      }
    }
    if (fp) {
      J.col(j) = (*fp - fx) / (xp[j] - x[j]);
      continue;
    }
    const auto fm = try_eval(F, xm, static_cast<std::size_t>(m));
    if (!fm) throw SolverError("solve_system: cannot difference the residual at the iterate");
    J.col(j) = (fx - *fm) / (x[j] - xm[j]);
  }
  return J;
}

constexpr double kMaxCondition = 1e14;

struct NewtonStep {
  VectorXd q;
  bool ok = false;
};

NewtonStep newton_step(const MatrixXd& Js, const VectorXd& f) {
  Eigen::JacobiSVD<MatrixXd> svd(Js, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s[0] > 0.0)) return {};
  if (s[0] / s[s.size() - 1] > kMaxCondition || !(s[s.size() - 1] > 0.0)) return {};
  NewtonStep step{svd.solve(-f), true};
  step.ok = step.q.allFinite();
  return step;
}

}  // namespace

SystemSolution solve_system(const SystemFunction& F, const Vector& x0, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n = x0.size();
  if (n == 0) throw InvalidArgument("solve_system: empty start vector");
  VectorXd x = Eigen::Map<const VectorXd>(x0.data(), static_cast<Eigen::Index>(n));
  VectorXd f = eval_or_throw(F, x, n);
  const std::size_t m = static_cast<std::size_t>(f.size());

  double radius = cfg.trust_radius_init;
  int iter = 0;
  bool converged = f.lpNorm<Eigen::Infinity>() <= cfg.residual_tol;
  bool need_jacobian = true;
  bool singular = false;
  MatrixXd Js;
  VectorXd grad, qN;
  bool have_newton = false;

  while (!converged) {
    if (iter >= cfg.max_iters) throw MaxIterError("solve_system: iteration limit reached");
    ++iter;
    const VectorXd S = x.cwiseAbs().cwiseMax(1.0);
    if (need_jacobian) {
      Js = jacobian(F, x, f, cfg.fd_step_scale, false) * S.asDiagonal();
      grad = Js.transpose() * f;
      const auto ns = newton_step(Js, f);
      have_newton = ns.ok;
      singular = !ns.ok;
      qN = ns.q;
      need_jacobian = false;
    }

    const double gnorm = grad.norm();
    if (!(gnorm > 0.0) && !have_newton) {
      throw SingularJacobianError("solve_system: zero gradient at a non-root");
    }

    VectorXd q;
    if (have_newton && qN.norm() <= radius) {
      q = qN;
    } else {
      const VectorXd Jg = Js * grad;
      const double jg2 = Jg.squaredNorm();
      const double t = jg2 > 0.0 ? grad.squaredNorm() / jg2 : radius / gnorm;
      const VectorXd qC = -t * grad;
      if (!have_newton || qC.norm() >= radius) {
        q = -(radius / gnorm) * grad;
      } else {
        // largest tau in [0, 1] with ||qC + tau (qN - qC)|| = radius
        const VectorXd dq = qN - qC;
        const double aa = dq.squaredNorm();
        const double bb = 2.0 * qC.dot(dq);
        const double cc = qC.squaredNorm() - radius * radius;
        const double tau = (-bb + std::sqrt(std::max(0.0, bb * bb - 4.0 * aa * cc))) / (2.0 * aa);
        q = qC + std::clamp(tau, 0.0, 1.0) * dq;
      }
    }

    const double phi = 0.5 * f.squaredNorm();
    const double predicted = phi - 0.5 * (f + Js * q).squaredNorm();
    const VectorXd x_trial = x + S.cwiseProduct(q);
    const auto f_trial = try_eval(F, x_trial, m);
    double ratio = 0.0;
    if (f_trial && predicted > 0.0) {
      ratio = (phi - 0.5 * f_trial->squaredNorm()) / predicted;
    }

    const double qnorm = q.norm();
    if (ratio < 0.25) {
      radius = 0.25 * std::min(radius, qnorm);
    } else if (ratio > 0.75) {
      radius = std::min(2.0 * std::max(radius, qnorm), cfg.trust_radius_max);
    }

    if (ratio > 1e-4) {
      x = x_trial;
      f = *f_trial;
      need_jacobian = true;
      converged = f.lpNorm<Eigen::Infinity>() <= cfg.residual_tol;
    } else if (radius < cfg.step_tol) {
      if (singular) throw SingularJacobianError("solve_system: singular Jacobian and stalled");
      throw StallError("solve_system: trust region collapsed");
    }
  }

  if (cfg.central_polish && iter > 0) {
    try {
      const MatrixXd J = jacobian(F, x, f, std::cbrt(std::numeric_limits<double>::epsilon()), true);
      const auto step = newton_step(J, f);
      if (step.ok) {
        const VectorXd xp = x + step.q;
        const auto fp = try_eval(F, xp, m);
        if (fp && fp->lpNorm<Eigen::Infinity>() < f.lpNorm<Eigen::Infinity>()) {
          x = xp;
          f = *fp;
        }
      }
    } catch (const SolverError&) {
    }
  }

  // independent re-check
  const auto f_check = try_eval(F, x, m);
  if (!f_check) throw SolverError("solve_system: residual undefined at the returned point");
  const double norm = f_check->lpNorm<Eigen::Infinity>();
  if (!(norm <= cfg.residual_tol)) {
    throw SolverError("solve_system: re-check residual " + std::to_string(norm) +
                      " exceeds tolerance");
  }
  return {Vector(x.data(), x.data() + x.size()), norm, iter};
}

// ---------------------------------------------------------------------------
// multi-start

std::size_t MultiStartBox::size() const {
  std::size_t total = 1;
  for (int c : counts) total *= static_cast<std::size_t>(std::max(c, 0));
  return counts.empty() ? 0 : total;
}

void MultiStartBox::validate() const {
  if (lower.empty() || lower.size() != upper.size() || lower.size() != counts.size()) {
    throw InvalidArgument("MultiStartBox: bounds and counts must have equal nonzero length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw InvalidArgument("MultiStartBox: need lower < upper");
    if (counts[i] < 1) throw InvalidArgument("MultiStartBox: counts must be >= 1");
  }
}

std::vector<Vector> grid_nodes(const MultiStartBox& box) {
  box.validate();
  const std::size_t dim = box.dimension();
  std::vector<Vector> nodes;
  nodes.reserve(box.size());
  std::vector<int> idx(dim, 0);
  for (std::size_t count = 0; count < box.size(); ++count) {
    Vector p(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const double h = (box.upper[d] - box.lower[d]) / box.counts[d];
      p[d] = box.lower[d] + (idx[d] + 0.5) * h;
    }
    nodes.push_back(std::move(p));
    for (std::size_t d = dim; d-- > 0;) {
      if (++idx[d] < box.counts[d]) break;
      idx[d] = 0;
    }
  }
  return nodes;
}

bool same_root(const Vector& x, const Vector& y, double rel_tol) {
  if (x.size() != y.size()) return false;
  double dist = 0.0, mx = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dist = std::max(dist, std::abs(x[i] - y[i]));
    mx = std::max({mx, std::abs(x[i]), std::abs(y[i])});
  }
  return dist <= rel_tol * mx;
}

RootSet multi_start(const SystemFunction& F, const std::vector<Vector>& starts,
                    const SolverConfig& cfg) {
  cfg.validate();
  std::vector<std::optional<SystemSolution>> results(starts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        results[i] = solve_system(F, starts[i], cfg);
      } catch (const Error&) {
      }
    }
  };
  unsigned nthreads = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                       : cfg.workers;
  nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, starts.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RootSet set;
  for (const auto& r : results) {
    if (!r) {
      ++set.failed_starts;
      continue;
    }
    bool merged = false;
    for (std::size_t j = 0; j < set.roots.size() && !merged; ++j) {
      if (same_root(set.roots[j], r->x)) {
        ++set.start_counts[j];
        merged = true;
      }
    }
    if (!merged) {
      set.roots.push_back(r->x);
      set.residual_norms.push_back(r->residual_norm);
      set.start_counts.push_back(1);
    }
  }

  std::vector<std::size_t> order(set.roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return set.roots[a] < set.roots[b]; });
  RootSet sorted;
  sorted.failed_starts = set.failed_starts;
  for (std::size_t i : order) {
    sorted.roots.push_back(set.roots[i]);
    sorted.residual_norms.push_back(set.residual_norms[i]);
    sorted.start_counts.push_back(set.start_counts[i]);
  }
  return sorted;
}

RootSet multi_start(const SystemFunction& F, const MultiStartBox& box, const SolverConfig& cfg) {
  return multi_start(F, grid_nodes(box), cfg);
}

}  // namespace pnpbif
