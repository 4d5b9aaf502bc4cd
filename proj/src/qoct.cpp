#include "spinoct/qoct.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iostream>
#include <limits>
#include <random>

#include "fft_util.hpp"
#include "spinoct/constants.hpp"
#include "spinoct/errors.hpp"
#include "spinoct/util.hpp"

namespace spinoct {

double gate_fidelity(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& u_target) {
  if (u.rows() != u_target.rows() || u.cols() != u_target.cols() || u.rows() != u.cols())
    throw std::invalid_argument("gate_fidelity: dimension mismatch");
  const std::complex<double> z =
      (u.adjoint() * u_target).trace() / static_cast<double>(u.rows());
  return std::norm(z);
}

double state_fidelity(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& target) {
  if (psi.size() != target.size())
    throw std::invalid_argument("state_fidelity: dimension mismatch");
  return std::norm(target.dot(psi));
}

void ControlProblem::validate(const SpectralData& spectral) const {
  if (!(b_max_t > 0.0))
    throw std::invalid_argument("ControlProblem: infeasible, b_max must be > 0");
  if (!(t_f_ns > 0.0)) throw std::invalid_argument("ControlProblem: t_f must be > 0");
  if (cutoff_index < 1) throw std::invalid_argument("ControlProblem: K must be >= 1");
  if (max_iterations < 1 || max_restarts < 0)
    throw std::invalid_argument("ControlProblem: invalid iteration limits");

  double driven_numax = 0.0;
  double mu_scale = 0.0;
  for (int j = 0; j + 1 < spectral.dimension(); ++j)
    mu_scale = std::max(mu_scale, std::abs(spectral.transition_elements(j, j + 1)));
  for (int j = 0; j + 1 < spectral.dimension(); ++j) {
    if (std::abs(spectral.transition_elements(j, j + 1)) > 1e-6 * mu_scale)
      driven_numax = std::max(driven_numax, spectral.transition_frequencies(j, j + 1));
  }
  const double cutoff_ghz = static_cast<double>(cutoff_index) / t_f_ns;
  if (cutoff_ghz < driven_numax)
    std::cerr << "warning: Fourier cutoff " << cutoff_ghz
              << " GHz is below the largest drivable transition frequency "
              << driven_numax << " GHz\n";
}

struct FidelityModel::Impl {
  ControlProblem problem;
  SpectralData spectral;
  Propagator propagator;
  TimeGrid grid;
  bool gate = false;
  Eigen::MatrixXcd u_target;
  Eigen::VectorXcd psi0;
  Eigen::VectorXcd target_state;

  explicit Impl(const ControlProblem& p)
      : problem(p),
        spectral(system_spectrum(p.system)),
        propagator(spectral, p.system.g_factor),
        grid(TimeGrid::with_step_rule(
            p.t_f_ns,
            std::max(p.cutoff_index / p.t_f_ns, spectral.max_transition_frequency()),
            p.samples_per_period)) {
    problem.validate(spectral);
    const int d = spectral.dimension();
    if (std::holds_alternative<GateTarget>(p.target)) {
      gate = true;
      const GateTarget& g = std::get<GateTarget>(p.target);
      g.validate();
      if (g.dimension() != d)
        throw std::invalid_argument("ControlProblem: gate target dimension mismatch");
      u_target = g.unitary;
    } else {
      const StateTarget& s = std::get<StateTarget>(p.target);
      s.validate();
      if (s.dimension() != d)
        throw std::invalid_argument("ControlProblem: state target dimension mismatch");
      target_state = s.state;
      if (p.initial_state.size() == 0) {
        psi0 = Eigen::VectorXcd::Zero(d);
        psi0(0) = 1.0;
      } else {
        if (p.initial_state.size() != d)
          throw std::invalid_argument("ControlProblem: initial state dimension mismatch");
        if (std::abs(p.initial_state.norm() - 1.0) > 1e-10)
          throw std::invalid_argument("ControlProblem: initial state must be normalized");
        psi0 = p.initial_state;
      }
    }
  }

  std::vector<double> samples(const Eigen::VectorXd& u) const {
    FourierPulse pulse(problem.t_f_ns, problem.cutoff_index, u, false);
    return pulse.sample_midpoints(grid.t_f_ns, grid.n_steps);
  }

  void assemble_gradient(const Eigen::VectorXd& integrand, Eigen::VectorXd& grad) const {
    const int k = problem.cutoff_index;
    const auto series =
        detail::analyze_midpoint_series(integrand.data(), grid.n_steps, k);
    const double pref = 2.0 * kTwoPi * grid.step_ns();
    const double inv_sqrt_tf = 1.0 / std::sqrt(problem.t_f_ns);
    grad.resize(2 * k + 1);
    grad(0) = pref * inv_sqrt_tf * series[0].real();
    for (int m = 1; m <= k; ++m) {
      grad(2 * m) = pref * 2.0 * inv_sqrt_tf * series[m].real();
      grad(2 * m - 1) = pref * 2.0 * inv_sqrt_tf * (-series[m].imag());
    }
  }
};

FidelityModel::FidelityModel(const ControlProblem& problem)
    : impl_(std::make_unique<Impl>(problem)) {}
FidelityModel::~FidelityModel() = default;

double FidelityModel::fidelity(const Eigen::VectorXd& u) const {
  const std::vector<double> f = impl_->samples(u);
  if (impl_->gate) {
    const Eigen::MatrixXcd u_final =
        impl_->propagator.unitary_from_samples(f, impl_->grid);
    return gate_fidelity(u_final, impl_->u_target);
  }
  const Eigen::VectorXcd psi =
      impl_->propagator.state_from_samples(f, impl_->grid, impl_->psi0);
  return state_fidelity(psi, impl_->target_state);
}

double FidelityModel::fidelity_and_gradient(const Eigen::VectorXd& u,
                                            Eigen::VectorXd& grad_u) const {
  const std::vector<double> f = impl_->samples(u);
  if (impl_->gate) {
    const auto adj = impl_->propagator.gate_adjoint(f, impl_->grid, impl_->u_target);
    impl_->assemble_gradient(adj.integrand, grad_u);
    return adj.fidelity;
  }
  const auto adj = impl_->propagator.state_adjoint(f, impl_->grid, impl_->psi0,
                                                   impl_->target_state);
  impl_->assemble_gradient(adj.integrand, grad_u);
  return adj.fidelity;
}

const TimeGrid& FidelityModel::grid() const { return impl_->grid; }
const SpectralData& FidelityModel::spectral() const { return impl_->spectral; }
const Propagator& FidelityModel::propagator() const { return impl_->propagator; }
int FidelityModel::n_coefficients() const { return 2 * impl_->problem.cutoff_index + 1; }

FourierPulse FidelityModel::pulse_from(const Eigen::VectorXd& u, bool constrained) const {
  return FourierPulse(impl_->problem.t_f_ns, impl_->problem.cutoff_index, u, constrained);
}

Eigen::VectorXd gate_gradient(const ControlProblem& problem, const Eigen::VectorXd& u) {
  if (!std::holds_alternative<GateTarget>(problem.target))
    throw std::invalid_argument("gate_gradient: problem target is not a gate");
  FidelityModel model(problem);
  Eigen::VectorXd grad;
  model.fidelity_and_gradient(u, grad);
  return grad;
}

Eigen::VectorXd state_gradient(const ControlProblem& problem, const Eigen::VectorXd& u) {
  if (!std::holds_alternative<StateTarget>(problem.target))
    throw std::invalid_argument("state_gradient: problem target is not a state");
  FidelityModel model(problem);
  Eigen::VectorXd grad;
  model.fidelity_and_gradient(u, grad);
  return grad;
}

namespace {

// Free coordinates v = (u_1 .. u_{2K-1}); u_0 = 0 and u_{2K} = -sum of the
// other cosine coefficients hold by construction.
struct FreeSpace {
  int k;

  int size() const { return 2 * k - 1; }

  Eigen::VectorXd to_u(const Eigen::VectorXd& v) const {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * k + 1);
    double cos_sum = 0.0;
    for (int j = 0; j < v.size(); ++j) {
      u(j + 1) = v(j);
      if ((j + 1) % 2 == 0) cos_sum += v(j);
    }
    u(2 * k) = -cos_sum;
    return u;
  }

  Eigen::VectorXd grad_to_v(const Eigen::VectorXd& grad_u) const {
    Eigen::VectorXd g(size());
    for (int j = 0; j < g.size(); ++j) {
      g(j) = grad_u(j + 1);
      if ((j + 1) % 2 == 0) g(j) -= grad_u(2 * k);
    }
    return g;
  }
};

// Feasible set in free coordinates: |v_j| <= bound plus the slab
// |sum of cosine coords| <= bound (the box bound of the eliminated u_{2K}).
// Dykstra alternation converges to the exact Euclidean projection.
struct Projector {
  double bound;
  int k;

  Eigen::VectorXd box(Eigen::VectorXd v) const {
    for (int j = 0; j < v.size(); ++j) v(j) = std::clamp(v(j), -bound, bound);
    return v;
  }

  Eigen::VectorXd slab(Eigen::VectorXd v) const {
    const int n_cos = k - 1;
    if (n_cos == 0) return v;
    double s = 0.0;
    for (int j = 1; j < v.size(); j += 2) s += v(j);
    if (std::abs(s) <= bound) return v;
    const double shift = (s - std::copysign(bound, s)) / n_cos;
    for (int j = 1; j < v.size(); j += 2) v(j) -= shift;
    return v;
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& v) const {
    if (k == 1) return box(v);
    Eigen::VectorXd x = v;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(v.size());
    Eigen::VectorXd q = Eigen::VectorXd::Zero(v.size());
    const double tol = 1e-14 * std::max(1.0, bound);
    for (int it = 0; it < 200; ++it) {
      const Eigen::VectorXd y = box(x + p);
      p = x + p - y;
      const Eigen::VectorXd xn = slab(y + q);
      q = y + q - xn;
      const double delta = (xn - x).lpNorm<Eigen::Infinity>();
      x = xn;
      if (delta < tol && it > 0) break;
    }
    return box(x);
  }
};

Eigen::VectorXd lbfgs_direction(const std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& memory,
                                const Eigen::VectorXd& grad) {
  if (memory.empty()) return -grad;
  Eigen::VectorXd q = grad;
  std::vector<double> alpha(memory.size());
  std::vector<double> rho(memory.size());
  for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
    const auto& [s, y] = memory[i];
    rho[i] = 1.0 / y.dot(s);
    alpha[i] = rho[i] * s.dot(q);
    q -= alpha[i] * y;
  }
  const auto& [s_last, y_last] = memory.back();
  q *= s_last.dot(y_last) / y_last.dot(y_last);
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const auto& [s, y] = memory[i];
    const double beta = rho[i] * y.dot(q);
    q += (alpha[i] - beta) * s;
  }
  return -q;
}

Eigen::VectorXd initial_guess(const ControlProblem& problem, const SpectralData& spectral,
                              const FreeSpace& fs, double bound, std::uint64_t seed,
                              int restart) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.2, 0.8);
  const double noise = restart == 0 ? 0.05 : 0.4;
  Eigen::VectorXd v(fs.size());
  for (int j = 0; j < v.size(); ++j) v(j) = noise * bound * sym(rng);

  if (problem.seed_mode == SeedMode::resonant) {
    const double scale = restart == 0 ? 0.5 : 0.5 * pos(rng);
    const int k = problem.cutoff_index;
    double mu_scale = 0.0;
    for (int j = 0; j + 1 < spectral.dimension(); ++j)
      mu_scale = std::max(mu_scale, std::abs(spectral.transition_elements(j, j + 1)));
    for (int j = 0; j + 1 < spectral.dimension(); ++j) {
      if (std::abs(spectral.transition_elements(j, j + 1)) < 1e-6 * mu_scale) continue;
      const double nu = spectral.transition_frequencies(j, j + 1);
      const int mode = std::clamp(
          static_cast<int>(std::lround(nu * problem.t_f_ns)), 1, k);
      v(2 * mode - 2) += scale * bound;  // sine coefficient of the nearest mode
    }
  }
  return v;
}

struct SingleRun {
  Eigen::VectorXd v;
  double fidelity = 0.0;
  std::string termination;
};

SingleRun run_descent(const FidelityModel& model, const ControlProblem& problem,
                      const FreeSpace& fs, const Projector& proj,
                      const Eigen::VectorXd& v_start, int restart,
                      std::vector<IterationRecord>& history, long& f_evals,
                      long& g_evals) {
  const double bound = proj.bound;
  auto fidelity_at = [&](const Eigen::VectorXd& v) {
    ++f_evals;
    return model.fidelity(fs.to_u(v));
  };
  auto fidelity_grad_at = [&](const Eigen::VectorXd& v, Eigen::VectorXd& gv) {
    ++f_evals;
    ++g_evals;
    Eigen::VectorXd gu;
    const double fid = model.fidelity_and_gradient(fs.to_u(v), gu);
    gv = fs.grad_to_v(gu);
    return fid;
  };

  Eigen::VectorXd v = proj(v_start);
  Eigen::VectorXd grad(fs.size());
  double fid = fidelity_grad_at(v, grad);
  Eigen::VectorXd best_v = v;
  double best_fid = fid;

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;

  for (int iter = 0; iter < problem.max_iterations; ++iter) {
    const Eigen::VectorXd pg = proj(v + grad) - v;
    const double pg_norm = pg.lpNorm<Eigen::Infinity>();
    history.push_back({iter, fid, pg_norm, restart});
    if (fid >= problem.stop_fidelity)
      return {v, fid, "fidelity_threshold"};
    if (pg_norm < problem.gradient_tolerance)
      return {best_v, best_fid, "gradient_norm"};

    // Minimization convention on J = -fidelity.
    const Eigen::VectorXd grad_j = -grad;
    std::vector<bool> active(fs.size(), false);
    const double edge = 1e-12 * std::max(1.0, bound);
    for (int j = 0; j < fs.size(); ++j)
      active[j] = (v(j) <= -bound + edge && grad_j(j) > 0.0) ||
                  (v(j) >= bound - edge && grad_j(j) < 0.0);
    Eigen::VectorXd grad_masked = grad_j;
    for (int j = 0; j < fs.size(); ++j)
      if (active[j]) grad_masked(j) = 0.0;

    Eigen::VectorXd dir = lbfgs_direction(memory, grad_masked);
    for (int j = 0; j < fs.size(); ++j)
      if (active[j]) dir(j) = 0.0;
    if (dir.dot(grad_j) >= -1e-14 * dir.norm() * grad_j.norm()) {
      memory.clear();
      dir = -grad_masked;
    }
    if (memory.empty()) {
      const double dmax = dir.lpNorm<Eigen::Infinity>();
      if (dmax > 0.0) dir *= std::min(1.0, 0.1 * bound / dmax);
    }

    auto arc_search = [&](const Eigen::VectorXd& d, Eigen::VectorXd& x_out,
                          double& fid_out) {
      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd x = proj(v + alpha * d);
        const Eigen::VectorXd step = x - v;
        if (step.lpNorm<Eigen::Infinity>() == 0.0) return false;
        const double fx = fidelity_at(x);
        if (-fx <= -fid + kArmijo * grad_j.dot(step)) {
          x_out = x;
          fid_out = fx;
          return true;
        }
        alpha *= 0.5;
      }
      return false;
    };

    Eigen::VectorXd x_new;
    double fid_new = 0.0;
    bool ok = arc_search(dir, x_new, fid_new);
    if (!ok && memory.size() > 0) {
      memory.clear();
      Eigen::VectorXd steepest = -grad_masked;
      const double dmax = steepest.lpNorm<Eigen::Infinity>();
      if (dmax > 0.0) steepest *= std::min(1.0, 0.1 * bound / dmax);
      ok = arc_search(steepest, x_new, fid_new);
    }
    if (!ok) return {best_v, best_fid, "stalled"};

    Eigen::VectorXd grad_new(fs.size());
    const double fid_refined = fidelity_grad_at(x_new, grad_new);
    const Eigen::VectorXd s = x_new - v;
    const Eigen::VectorXd y = -grad_new + grad;  // grad J difference
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      memory.emplace_back(s, y);
      if (memory.size() > kMemory) memory.pop_front();
    }
    v = x_new;
    fid = fid_refined;
    grad = grad_new;
    if (fid > best_fid) {
      best_fid = fid;
      best_v = v;
    }
  }
  return {best_v, best_fid, "max_iterations"};
}

}  // namespace

OptimizationResult optimize(const ControlProblem& problem) {
  FidelityModel model(problem);
  const FreeSpace fs{problem.cutoff_index};
  const double bound = problem.b_max_t * std::sqrt(problem.t_f_ns) / 2.0;
  const Projector proj{bound, problem.cutoff_index};

  OptimizationResult result;
  result.seed = problem.seed;

  double best_fid = -1.0;
  Eigen::VectorXd best_v;
  std::string best_term = "stalled";

  int attempts = 0;
  for (int attempt = 0; attempt <= problem.max_restarts; ++attempt) {
    attempts = attempt;
    const std::uint64_t run_seed = mix_seed(problem.seed, attempt);
    const Eigen::VectorXd v0 =
        initial_guess(problem, model.spectral(), fs, bound, run_seed, attempt);
    SingleRun run = run_descent(model, problem, fs, proj, v0, attempt, result.history,
                                result.function_evaluations, result.gradient_evaluations);
    if (run.fidelity > best_fid) {
      best_fid = run.fidelity;
      best_v = run.v;
      best_term = run.termination;
    }
    if (best_fid >= problem.stop_fidelity) break;
  }

  result.restarts_used = attempts;
  result.termination = best_fid >= problem.stop_fidelity ? "fidelity_threshold" : best_term;
  result.fidelity = best_fid;

  Eigen::VectorXd u = fs.to_u(best_v);
  // The eliminated cosine coefficient can exceed the box by rounding; a
  // uniform shrink of the cosine block preserves the zero-sum constraint.
  const double tail = std::abs(u(2 * problem.cutoff_index));
  if (tail > bound && tail > 0.0) {
    for (int m = 1; m <= problem.cutoff_index; ++m) u(2 * m) *= bound / tail;
  }
  result.coefficients = u;
  return result;
}

std::vector<FrontierPoint> amplitude_frontier(const ControlProblem& prototype,
                                              const GateTarget& gate,
                                              std::span<const double> times_ns,
                                              double threshold,
                                              const FrontierOptions& opts) {
  if (times_ns.empty())
    throw std::invalid_argument("amplitude_frontier: empty time list");
  std::vector<FrontierPoint> out;
  out.reserve(times_ns.size());

  for (std::size_t idx = 0; idx < times_ns.size(); ++idx) {
    const double t_f = times_ns[idx];
    ControlProblem base = prototype;
    base.t_f_ns = t_f;
    base.cutoff_index = std::max(1, static_cast<int>(std::floor(opts.cutoff_ghz * t_f)));
    base.target = gate;
    base.stop_fidelity = threshold;

    auto probe = [&](double b_max, std::uint64_t salt) {
      ControlProblem p = base;
      p.b_max_t = b_max;
      p.seed = mix_seed(prototype.seed, (idx << 20) + salt);
      return optimize(p);
    };

    FrontierPoint point;
    point.t_f_ns = t_f;

    const int d = gate.dimension();
    const double fid_zero =
        gate_fidelity(Eigen::MatrixXcd::Identity(d, d), gate.unitary);
    if (fid_zero >= threshold) {
      point.min_bmax_t = 0.0;
      point.feasible = point.verified = true;
      point.fidelity = fid_zero;
      out.push_back(point);
      continue;
    }

    const OptimizationResult top = probe(opts.b_hi_t, 0);
    if (top.fidelity < threshold) {
      point.feasible = false;
      point.min_bmax_t = std::numeric_limits<double>::quiet_NaN();
      point.fidelity = top.fidelity;
      out.push_back(point);
      continue;
    }

    double lo = 0.0;
    double hi = opts.b_hi_t;
    double hi_fid = top.fidelity;
    int iters = 0;
    while (hi - lo > std::max(opts.abs_tol_t, opts.rel_tol * hi)) {
      const double mid = 0.5 * (lo + hi);
      const OptimizationResult run = probe(mid, 16 + iters);
      ++iters;
      if (run.fidelity >= threshold) {
        hi = mid;
        hi_fid = run.fidelity;
      } else {
        lo = mid;
      }
    }

    const OptimizationResult verification = probe(hi, 4096);
    point.min_bmax_t = hi;
    point.bisection_iters = iters;
    point.feasible = true;
    point.verified = verification.fidelity >= threshold;
    point.fidelity = hi_fid;
    out.push_back(point);
  }
  return out;
}

}  // namespace spinoct
