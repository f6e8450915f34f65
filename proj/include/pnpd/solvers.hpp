#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "grid.hpp"
#include "metrics.hpp"
#include "problem.hpp"
#include "regularizers.hpp"
#include "spectral.hpp"

namespace pnpd {

enum class Algorithm { NPD, NPDIT, PNPD, PNPD_NE };
enum class GammaRule { NONE, FISTA_T };
enum class SchedulerKind { CONSTANT, DECAY_085, SQRT_INCREASE, BOOTSTRAP };

/// Rule producing the preconditioner shift nu_n.
struct Scheduler {
  SchedulerKind kind = SchedulerKind::CONSTANT;
  double nu_const = 0.1;  ///< CONSTANT, in (0, 1]
  double nu_inf = 0.01;   ///< DECAY_085 floor, in (0, 1/2)
  double nu0 = 0.01;      ///< SQRT_INCREASE / BOOTSTRAP start, in (0, 1)
  std::size_t n_bt = 20;  ///< BOOTSTRAP switch-over iteration

  void validate() const {
    switch (kind) {
      case SchedulerKind::CONSTANT:
        detail::require(nu_const > 0.0 && nu_const <= 1.0, "scheduler: nu must lie in (0, 1]");
        break;
      case SchedulerKind::DECAY_085:
        detail::require(nu_inf > 0.0 && nu_inf < 0.5, "scheduler: nu_inf must lie in (0, 0.5)");
        break;
      case SchedulerKind::SQRT_INCREASE:
        detail::require(nu0 > 0.0 && nu0 < 1.0, "scheduler: nu0 must lie in (0, 1)");
        break;
      case SchedulerKind::BOOTSTRAP:
        detail::require(nu0 > 0.0 && nu0 < 1.0, "scheduler: nu0 must lie in (0, 1)");
        detail::require(n_bt >= 1, "scheduler: n_bt must be >= 1");
        break;
    }
  }

  /// Bootstrap growth factor c = nu0^(-1/n_bt).
  double growth() const { return std::pow(nu0, -1.0 / double(n_bt)); }
};

inline double nu_at(const Scheduler& s, std::size_t n) {
  const double nd = double(n);
  switch (s.kind) {
    case SchedulerKind::CONSTANT:
      return s.nu_const;
    case SchedulerKind::DECAY_085:
      return std::pow(0.85, nd) / 2.0 + s.nu_inf;
    case SchedulerKind::SQRT_INCREASE:
      return (1.0 - 1.0 / std::sqrt(nd + 1.0)) * (1.0 - s.nu0) + s.nu0;
    case SchedulerKind::BOOTSTRAP:
      // c^(n - n_bt) written as nu0^((n_bt - n)/n_bt): exact at both ends.
      if (n >= s.n_bt) return 1.0;
      return std::min(std::pow(s.nu0, (double(s.n_bt) - nd) / double(s.n_bt)), 1.0);
  }
  return s.nu_const;
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::PNPD;
  double alpha = 1.0;
  double beta = 0.99 / 8.0;
  std::size_t k_max = 3;
  GammaRule gamma_rule = GammaRule::FISTA_T;
  double epsilon = 0.99;  ///< NPDIT step scale
  double delta_bt = 0.5;  ///< NPDIT backtracking shrink
  double L_init = 0.99;   ///< NPDIT L_{-1}
  Scheduler scheduler;
  std::optional<Polynomial> poly;  ///< stationary override of the scheduler's polynomial
  bool rescale_lambda = false;     ///< lambda_n = lambda ||S_n^{-1}||
  bool exact_prox = false;         ///< closed-form prox instead of the dual loop (L1 only)
  std::size_t max_iter = 100;

  void validate() const {
    detail::require(alpha > 0.0 && std::isfinite(alpha), "config: alpha must be > 0");
    detail::require(beta > 0.0 && std::isfinite(beta), "config: beta must be > 0");
    detail::require(k_max >= 1, "config: k_max must be >= 1");
    detail::require(epsilon > 0.0 && epsilon < 1.0, "config: epsilon must lie in (0, 1)");
    detail::require(delta_bt > 0.0 && delta_bt < 1.0, "config: delta_bt must lie in (0, 1)");
    detail::require(L_init > 0.0 && std::isfinite(L_init), "config: L_init must be > 0");
    scheduler.validate();
    detail::require(!(exact_prox && algorithm == Algorithm::NPDIT),
                    "config: exact_prox has no closed form in a variable metric");
  }
};

template <class Dual>
struct SolverState {
  std::size_t n = 0;
  Image u_curr;
  Image u_prev;
  Dual v_warm;
  double L_curr = 1.0;
  double t_curr = 1.0;
  std::size_t backtracks = 0;  ///< trials beyond the first in the last NPDIT step
  double alpha_last = 0.0;
  double beta_last = 0.0;
  double lambda_last = 0.0;
  double nu_last = 0.0;
};

// ---------------------------------------------------------------------------
// W binding per dual type: the periodic gradient for TV, the identity for L1

template <class Dual>
struct DualOps;

template <>
struct DualOps<DualField> {
  static constexpr RegKind kind = RegKind::TV_ISO;
  static constexpr double norm_sq = grad_norm_sq_bound();
  static DualField zeros(std::size_t h, std::size_t w) { return DualField(h, w); }
  static void forward(const Image& u, DualField& out) { grad_apply_into(u, out); }
  static void adjoint(const DualField& v, Image& out) { grad_adjoint_into(v, out); }
  static void prox_conj(DualField& v, double lambda) { prox_conj_tv_inplace(v, lambda); }
  static void ascend(DualField& v, double step, const DualField& wu) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      v.gx()[k] += step * wu.gx()[k];
      v.gy()[k] += step * wu.gy()[k];
    }
  }
  static double radius(const DualField& v) {
    double m = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) m = std::max(m, std::hypot(v.gx()[k], v.gy()[k]));
    return m;
  }
};

template <>
struct DualOps<Image> {
  static constexpr RegKind kind = RegKind::L1;
  static constexpr double norm_sq = 1.0;
  static Image zeros(std::size_t h, std::size_t w) { return Image(h, w); }
  static void forward(const Image& u, Image& out) { out = u; }
  static void adjoint(const Image& v, Image& out) { out = v; }
  static void prox_conj(Image& v, double lambda) { prox_conj_l1_inplace(v, lambda); }
  static void ascend(Image& v, double step, const Image& wu) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += step * wu[k];
  }
  static double radius(const Image& v) { return max_abs(v); }
};

template <class Dual>
struct InnerResult {
  Image u_avg;   ///< ergodic mean of u^1..u^k_max, the outer iterate
  Image u_last;  ///< u^k_max
  Dual v_out;    ///< v^k_max, the next warm start
};

/*
 * Nested primal-dual approximation of prox_{alpha h o W}(a_half), or of its
 * P-metric counterpart when `metric` is given (a_half then already contains
 * the -alpha P^{-1} grad f term):
 *
 *   u^k     = a_half - alpha [P^{-1}] W^T v^k
 *   v^{k+1} = prox_{beta/alpha h*}(v^k + beta/alpha W u^k)
 *
 * for k = 0..k_max-1, then u^{k_max} from v^{k_max}.
 */
template <class Dual>
InnerResult<Dual> inner_dual_loop(const Image& a_half, Dual v0, double alpha, double beta, std::size_t k_max,
                                  const Regularizer& reg, const PrecondSpectrum* metric = nullptr) {
  using Ops = DualOps<Dual>;
  detail::require(reg.kind == Ops::kind, "inner_dual_loop: regularizer does not match the dual type");
  detail::require(k_max >= 1, "inner_dual_loop: k_max must be >= 1");
  detail::require(alpha > 0.0 && beta > 0.0, "inner_dual_loop: steps must be > 0");
  detail::require(v0.height() == a_half.height() && v0.width() == a_half.width(),
                  "inner_dual_loop: warm start shape mismatch");
  if (metric) detail::require(metric->matches(a_half), "inner_dual_loop: metric shape mismatch");

  const std::size_t h = a_half.height(), w = a_half.width();
  const double ratio = beta / alpha;
  Dual v = std::move(v0);
  Dual wu = Ops::zeros(h, w);
  Image wtv(h, w);
  Image u(h, w);
  Image acc(h, w);

  auto primal = [&] {
    Ops::adjoint(v, wtv);
    if (metric) wtv = precond_solve(*metric, wtv);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = a_half[k] - alpha * wtv[k];
  };

  for (std::size_t k = 0; k < k_max; ++k) {
    primal();
    if (k >= 1)
      for (std::size_t i = 0; i < u.size(); ++i) acc[i] += u[i];
    Ops::forward(u, wu);
    Ops::ascend(v, ratio, wu);
    Ops::prox_conj(v, reg.lambda);
  }
  primal();
  for (std::size_t i = 0; i < u.size(); ++i) acc[i] += u[i];
  const double inv = 1.0 / double(k_max);
  for (auto& x : acc.data()) x *= inv;
  return {std::move(acc), std::move(u), std::move(v)};
}

// ---------------------------------------------------------------------------
// extrapolation

inline double next_t(double t) { return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0; }

/// gamma_n for the step leaving state.n. FISTA_T uses (t_{n-1} - 1)/t_n,
/// damped by min(1, C / (n^2 ||u_n - u_{n-1}|| + eps)) so the series
/// sum gamma_n ||u_n - u_{n-1}|| converges. C is typically 1e4 ||b_delta||.
template <class Dual>
double extrapolation_gamma(const SolverState<Dual>& s, GammaRule rule, double safeguard_c) {
  if (rule == GammaRule::NONE || s.n == 0) return 0.0;
  const double gamma = (s.t_curr - 1.0) / next_t(s.t_curr);
  const double diff = norm2(s.u_curr - s.u_prev);
  const double n2 = double(s.n) * double(s.n);
  const double damp = std::min(1.0, safeguard_c / (n2 * diff + std::numeric_limits<double>::epsilon()));
  return gamma * damp;
}

inline double safeguard_constant(const Problem& pb) { return 1e4 * norm2(pb.b_delta); }

namespace detail {

template <class Dual>
Image extrapolate(const SolverState<Dual>& s, double gamma) {
  if (gamma == 0.0) return s.u_curr;
  return axpy(gamma, s.u_curr - s.u_prev, s.u_curr);
}

template <class Dual>
SolverState<Dual> advance(SolverState<Dual> s, const SolverConfig& cfg, Image u_next, Dual v_next) {
  if (!all_finite(u_next)) throw numerical_error("iterate became non-finite at n = " + std::to_string(s.n));
  if (cfg.gamma_rule == GammaRule::FISTA_T && s.n >= 1) s.t_curr = next_t(s.t_curr);
  s.u_prev = std::move(s.u_curr);
  s.u_curr = std::move(u_next);
  s.v_warm = std::move(v_next);
  ++s.n;
  return s;
}

// Forward-backward step shared by NPD, PNPD and PNPD_NE. A null `precond`
// means P = I and skips the application entirely.
template <class Dual>
SolverState<Dual> forward_backward(const Problem& pb, const SolverConfig& cfg, SolverState<Dual> s,
                                   const PrecondSpectrum* precond, double lambda, bool extrapolation) {
  using Ops = DualOps<Dual>;
  detail::require(pb.reg.kind == Ops::kind, "step: regularizer does not match the dual type");
  detail::require(cfg.beta < 1.0 / Ops::norm_sq, "step: beta must be < 1/||W||^2");

  const double gamma = extrapolation ? extrapolation_gamma(s, cfg.gamma_rule, safeguard_constant(pb)) : 0.0;
  const Image u_bar = extrapolate(s, gamma);
  Image direction = grad_f(pb, u_bar);
  if (precond) direction = precond_solve(*precond, direction);
  const Image a_half = axpy(-cfg.alpha, direction, u_bar);

  const Regularizer reg = pb.reg.with_lambda(lambda);
  s.alpha_last = cfg.alpha;
  s.beta_last = cfg.beta;
  s.lambda_last = lambda;

  if (cfg.exact_prox) {
    detail::require(reg.kind == RegKind::L1, "step: exact_prox requires the L1 regularizer");
    Image u_next = soft_threshold(a_half, cfg.alpha * lambda);
    Dual v = std::move(s.v_warm);
    return advance(std::move(s), cfg, std::move(u_next), std::move(v));
  }
  auto inner = inner_dual_loop<Dual>(a_half, std::move(s.v_warm), cfg.alpha, cfg.beta, cfg.k_max, reg);
  return advance(std::move(s), cfg, std::move(inner.u_avg), std::move(inner.v_out));
}

}  // namespace detail

template <class Dual>
SolverState<Dual> init_state(const Problem& pb, const SolverConfig& cfg, std::optional<Image> u0 = std::nullopt) {
  SolverState<Dual> s;
  s.u_curr = u0 ? std::move(*u0) : pb.b_delta;
  detail::require(pb.spec.matches(s.u_curr), "init_state: initial iterate shape mismatch");
  s.u_prev = s.u_curr;
  s.v_warm = DualOps<Dual>::zeros(s.u_curr.height(), s.u_curr.width());
  s.L_curr = cfg.L_init;
  s.t_curr = 1.0;
  return s;
}

/// NPD: u_{n+1} ~ prox_{alpha h o W}(u_bar - alpha grad f(u_bar)).
template <class Dual>
SolverState<Dual> npd_step(const Problem& pb, const SolverConfig& cfg, SolverState<Dual> s) {
  detail::require(cfg.algorithm == Algorithm::NPD, "npd_step: algorithm must be NPD");
  s.nu_last = 1.0;
  return detail::forward_backward(pb, cfg, std::move(s), nullptr, pb.reg.lambda, true);
}

/// Preconditioner polynomial for step n.
inline Polynomial preconditioner_poly(const SolverConfig& cfg, std::size_t n) {
  if (cfg.poly) return *cfg.poly;
  const double nu = nu_at(cfg.scheduler, n);
  if (cfg.algorithm == Algorithm::NPDIT || cfg.scheduler.kind == SchedulerKind::CONSTANT)
    return Polynomial::shifted(nu);
  return Polynomial::blended(nu);
}

/// PNPD / PNPD_NE: the gradient step is left-preconditioned by P_n^{-1};
/// the dual loop is the plain NPD one.
template <class Dual>
SolverState<Dual> pnpd_step(const Problem& pb, const SolverConfig& cfg, SolverState<Dual> s) {
  detail::require(cfg.algorithm == Algorithm::PNPD || cfg.algorithm == Algorithm::PNPD_NE,
                  "pnpd_step: algorithm must be PNPD or PNPD_NE");
  const Polynomial poly = preconditioner_poly(cfg, s.n);
  const OperatorNorms norms = operator_norms(pb.spec, poly);
  if (cfg.alpha > (1.0 + 1e-12) / norms.normPinvAtA)
    throw std::invalid_argument("pnpd_step: alpha exceeds 1/||P^{-1} A^T A||");
  const PrecondSpectrum precond = build_precond(poly, pb.spec);
  const double lambda = cfg.rescale_lambda ? pb.reg.lambda * norms.normSinv : pb.reg.lambda;
  s.nu_last = cfg.poly ? std::numeric_limits<double>::quiet_NaN() : nu_at(cfg.scheduler, s.n);
  const bool identity = precond.is_scalar() && precond[0] == 1.0;
  return detail::forward_backward(pb, cfg, std::move(s), identity ? nullptr : &precond, lambda,
                                  cfg.algorithm == Algorithm::PNPD);
}

/*
 * NPDIT: variable-metric step with P_n = p_n(A^T A), beta_n = eps/(||P_n^{-1}|| ||W||^2)
 * and alpha_n = eps/L_n, L_n = L_{n-1}/delta^i grown until
 *
 *   f(u~) <= f(u_bar) + <grad f(u_bar), u~ - u_bar> + L_n/2 ||u~ - u_bar||_{P_n}^2.
 *
 * Each trial reruns the metric dual loop from the same warm start.
 */
template <class Dual>
SolverState<Dual> npdit_step(const Problem& pb, const SolverConfig& cfg, SolverState<Dual> s) {
  using Ops = DualOps<Dual>;
  detail::require(cfg.algorithm == Algorithm::NPDIT, "npdit_step: algorithm must be NPDIT");
  detail::require(pb.reg.kind == Ops::kind, "npdit_step: regularizer does not match the dual type");
  constexpr std::size_t kMaxTrials = 60;

  const Polynomial poly = preconditioner_poly(cfg, s.n);
  const PrecondSpectrum precond = build_precond(poly, pb.spec);
  const OperatorNorms norms = operator_norms(pb.spec, poly);
  const double beta = cfg.epsilon / (norms.normPinv * Ops::norm_sq);

  const double gamma = extrapolation_gamma(s, cfg.gamma_rule, safeguard_constant(pb));
  const Image u_bar = detail::extrapolate(s, gamma);
  const Image g = grad_f(pb, u_bar);
  const Image pg = precond_solve(precond, g);
  const double f_bar = fidelity(pb, u_bar);

  for (std::size_t i = 0; i < kMaxTrials; ++i) {
    const double L = s.L_curr / std::pow(cfg.delta_bt, double(i));
    const double alpha = cfg.epsilon / L;
    const Image a_half = axpy(-alpha, pg, u_bar);
    auto inner = inner_dual_loop<Dual>(a_half, s.v_warm, alpha, beta, cfg.k_max, pb.reg, &precond);
    const Image d = inner.u_avg - u_bar;
    const double lhs = fidelity(pb, inner.u_avg);
    const double rhs = f_bar + dot(g, d) + 0.5 * L * precond_quadratic_form(precond, d);
    if (lhs <= rhs + 1e-12 * std::abs(f_bar)) {
      s.L_curr = L;
      s.backtracks = i;
      s.alpha_last = alpha;
      s.beta_last = beta;
      s.lambda_last = pb.reg.lambda;
      s.nu_last = cfg.poly ? std::numeric_limits<double>::quiet_NaN() : nu_at(cfg.scheduler, s.n);
      return detail::advance(std::move(s), cfg, std::move(inner.u_avg), std::move(inner.v_out));
    }
  }
  throw numerical_error("npdit_step: backtracking did not terminate within 60 trials");
}

template <class Dual>
SolverState<Dual> step(const Problem& pb, const SolverConfig& cfg, SolverState<Dual> s) {
  switch (cfg.algorithm) {
    case Algorithm::NPD:
      return npd_step(pb, cfg, std::move(s));
    case Algorithm::NPDIT:
      return npdit_step(pb, cfg, std::move(s));
    case Algorithm::PNPD:
    case Algorithm::PNPD_NE:
      return pnpd_step(pb, cfg, std::move(s));
  }
  throw std::invalid_argument("step: unknown algorithm");
}

// ---------------------------------------------------------------------------

using TraceSink = std::function<void(const MetricsRow&)>;

struct RunResult {
  Image u_final;
  Trace trace;
};

inline MetricsRow measure(const Problem& pb, const Image& u, std::size_t iteration, double elapsed) {
  MetricsRow row;
  row.iteration = iteration;
  row.elapsed_s = elapsed;
  row.objective = objective(pb, u);
  if (pb.x_true) {
    row.rre = rre(u, *pb.x_true);
    row.ssim = ssim(clamp01(u), clamp01(*pb.x_true));
  } else {
    row.rre = std::numeric_limits<double>::quiet_NaN();
    row.ssim = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

template <class Dual>
RunResult run_solver_with(const Problem& pb, const SolverConfig& cfg, const TraceSink& sink,
                          std::optional<Image> u0) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  auto s = init_state<Dual>(pb, cfg, std::move(u0));
  RunResult out;
  out.trace.reserve(cfg.max_iter);
  double elapsed = 0.0;
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    const auto t0 = clock::now();
    s = step(pb, cfg, std::move(s));
    elapsed += std::chrono::duration<double>(clock::now() - t0).count();
    MetricsRow row = measure(pb, s.u_curr, s.n, elapsed);
    if (sink) sink(row);
    out.trace.push_back(row);
  }
  out.u_final = std::move(s.u_curr);
  return out;
}

/// Runs cfg.max_iter outer iterations from u0 (default b_delta), recording
/// one MetricsRow per iteration. Elapsed time counts solver steps only.
inline RunResult run_solver(const Problem& pb, const SolverConfig& cfg, const TraceSink& sink = {},
                            std::optional<Image> u0 = std::nullopt) {
  if (pb.reg.kind == RegKind::TV_ISO) return run_solver_with<DualField>(pb, cfg, sink, std::move(u0));
  return run_solver_with<Image>(pb, cfg, sink, std::move(u0));
}

}  // namespace pnpd
