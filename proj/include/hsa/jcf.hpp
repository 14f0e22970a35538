#pragma once

#include <array>

#include "hsa/controller.hpp"

namespace hsa {

/// Objective weights: w_cbf |u - u_ref|^2 + w_l2 |F - (u - u_ref)|^2.
struct JcfWeights {
  double w_cbf = 1.0;
  double w_l2 = 1.0;

  void validate() const {
    require(w_cbf > 0.0 && w_l2 > 0.0, "JcfWeights: weights must be positive");
  }
};

/// Joint control/force problem at one instant:
///   min  w_cbf |u - u_ref|^2 + w_l2 |F - (u - u_ref)|^2
///   s.t. rows_i(u) >= 0,   |F|^2 + g^T u <= c1
/// with c1 = (2kE/dt_ref + |x_vd|^2)/k^2 and g = (2 k_v / k) v.
struct JcfProblem {
  Vec u_ref;
  std::vector<CbfRow> rows;
  double c1 = 0.0;
  Vec g;
  JcfWeights weights;

  Eigen::Index dim() const { return u_ref.size(); }

  double cost(const Vec& u, const Vec& force) const {
    const Vec delta = u - u_ref;
    return weights.w_cbf * delta.squaredNorm() +
           weights.w_l2 * (force - delta).squaredNorm();
  }
  /// c1 - g^T u - |F|^2, >= 0 when the force bound holds.
  double quad_slack(const Vec& u, const Vec& force) const {
    return c1 - g.dot(u) - force.squaredNorm();
  }
};

inline JcfProblem make_jcf_problem(const RobotState& state, const Vec& x_vd,
                                   const std::vector<CbfRow>& barriers,
                                   const EnergyTank& tank,
                                   const StabilityParams& params,
                                   const ControllerGains& gains,
                                   const JcfWeights& weights) {
  params.validate();
  weights.validate();
  JcfProblem p;
  p.u_ref = reference_control(state, x_vd, gains.dt_ref).acceleration;
  p.rows = barriers;
  const double k = params.k;
  p.c1 = (2.0 * k * tank.level / params.dt_ref + x_vd.squaredNorm()) / (k * k);
  p.g = (2.0 * params.k_v / k) * state.velocity;
  p.weights = weights;
  return p;
}

struct JcfCandidate {
  Vec u;
  Vec force;
  ActiveCase case_id = ActiveCase::JcfC1;
  double lambda = 0.0;  // quadratic-constraint multiplier, scaled by 1/w_l2
  double cost = 0.0;
  double kkt_residual = 0.0;
};

/// Unit-weight cubic for the quadratic-only case, highest degree first:
/// 4c^2 l^3 + (5c^2 + 16C1 - 16 C2u) l^2 + (2c^2 + 16C1 - 16 C2u) l + 4(C1 - C2u)
/// with c^2 = |C2|^2 and C2u = C2^T u_ref.
inline std::array<double, 4> jcf_cubic_coeffs(double c1, const Vec& c2, const Vec& u_ref) {
  require_same_dim(c2, u_ref, "jcf_cubic_coeffs");
  const double c2sq = c2.squaredNorm();
  const double c2u = c2.dot(u_ref);
  return {4.0 * c2sq, 5.0 * c2sq + 16.0 * c1 - 16.0 * c2u,
          2.0 * c2sq + 16.0 * c1 - 16.0 * c2u, 4.0 * (c1 - c2u)};
}

/// Unit-weight quintic for the quadratic + one linear case, highest degree
/// first, with c2 = |C2|, c3 = (u_par - u''_ref)^2 and c4 the constant group.
inline std::array<double, 6> jcf_quintic_coeffs(double c2, double c3, double c4) {
  const double s = c2 * c2;
  return {4.0 * s,
          13.0 * s - 16.0 * c4,
          16.0 * s - 48.0 * c4,
          9.0 * s - 16.0 * c3 - 52.0 * c4,
          2.0 * s - 16.0 * c3 - 24.0 * c4,
          -4.0 * c3 - 4.0 * c4};
}

namespace detail {

// Polynomials in lambda, lowest degree first.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Poly poly_add(Poly a, const Poly& b, double scale = 1.0) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += scale * b[i];
  return a;
}

inline std::vector<double> highest_first(Poly p) {
  std::reverse(p.begin(), p.end());
  return p;
}

}  // namespace detail

/// Cubic in the scaled multiplier for the quadratic-only case with weight
/// ratio rho = w_cbf / w_l2. Stationarity gives F = -lambda g / D(lambda),
/// u - u_ref = (1 + lambda) F, D = 2 rho + 2 (rho + 1) lambda; substituting into
/// the active constraint and clearing D^2 yields
///   c l^2 - A D^2 - c l (1 + l) D = 0,  c = |g|^2, A = c1 - g^T u_ref.
inline std::vector<double> jcf_weighted_cubic(double rho, double c, double a) {
  using detail::Poly;
  const Poly D{2.0 * rho, 2.0 * (rho + 1.0)};
  const Poly lam{0.0, 1.0};
  const Poly lam1{1.0, 1.0};
  Poly p = detail::poly_mul(lam, lam);
  for (double& x : p) x *= c;
  p = detail::poly_add(p, detail::poly_mul(D, D), -a);
  p = detail::poly_add(p, detail::poly_mul(detail::poly_mul(lam, lam1), D), -c);
  return detail::highest_first(p);
}

/// Quintic for the quadratic + one linear case in complement coordinates:
///   c l^2 (1+l)^2 + c3 D^2 - A' D^2 (1+l)^2 - c l (1+l)^3 D = 0
/// with c = |g_perp|^2, c3 = (u_par - u''_ref)^2.
inline std::vector<double> jcf_weighted_quintic(double rho, double c, double c3,
                                                double a_prime) {
  using detail::Poly;
  const Poly D{2.0 * rho, 2.0 * (rho + 1.0)};
  const Poly lam{0.0, 1.0};
  const Poly lam1{1.0, 1.0};
  const Poly lam1_sq = detail::poly_mul(lam1, lam1);
  const Poly D_sq = detail::poly_mul(D, D);
  Poly p = detail::poly_mul(detail::poly_mul(lam, lam), lam1_sq);
  for (double& x : p) x *= c;
  p = detail::poly_add(p, D_sq, c3);
  p = detail::poly_add(p, detail::poly_mul(D_sq, lam1_sq), -a_prime);
  p = detail::poly_add(
      p, detail::poly_mul(detail::poly_mul(lam, detail::poly_mul(lam1_sq, lam1)), D), -c);
  return detail::highest_first(p);
}

namespace detail {

inline constexpr double kJcfFeasTol = 1e-7;
inline constexpr double kRootGuard = 1e-9;

inline double quad_scale(const JcfProblem& p, const Vec& u) {
  return 1.0 + std::abs(p.c1) + p.g.norm() * u.norm();
}

inline bool jcf_feasible(const JcfProblem& p, const Vec& u, const Vec& force) {
  if (!u.allFinite() || !force.allFinite()) return false;
  for (const auto& r : p.rows) {
    const double n = r.coeff.norm();
    if (n <= kZeroRowNorm) {
      if (r.constant < -kJcfFeasTol) return false;
      continue;
    }
    if (r.eval(u) / n < -kJcfFeasTol) return false;
  }
  return p.quad_slack(u, force) >= -kJcfFeasTol * quad_scale(p, u);
}

// Non-negative least squares over at most a handful of multipliers by subset
// enumeration; returns the smallest stationarity residual.
inline double min_stationarity_residual(const Vec& grad, const Mat& cols) {
  const Eigen::Index m = cols.cols();
  double best = grad.norm();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < m; ++j)
      if (mask & (1u << j)) idx.push_back(j);
    Mat A(cols.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) A.col(j) = cols.col(idx[j]);
    const Vec mu = A.completeOrthogonalDecomposition().solve(-grad);
    if ((mu.array() < -1e-9).any()) continue;
    best = std::min(best, (grad + A * mu).norm());
  }
  return best;
}

}  // namespace detail

/// Stationarity residual of the Lagrangian at (u, F) with non-negative
/// multipliers on the constraints active there, relative to the objective
/// gradient scale. Rows are normalized before use.
inline double jcf_kkt_residual(const JcfProblem& p, const Vec& u, const Vec& force) {
  const Eigen::Index d = p.dim();
  const Vec delta = u - p.u_ref;
  const double wc = p.weights.w_cbf, wl = p.weights.w_l2;
  Vec grad(2 * d);
  grad.head(d) = 2.0 * wc * delta - 2.0 * wl * (force - delta);
  grad.tail(d) = 2.0 * wl * (force - delta);

  std::vector<Vec> cols;
  for (const auto& r : p.rows) {
    const double n = r.coeff.norm();
    if (n <= detail::kZeroRowNorm) continue;
    if (std::abs(r.eval(u) / n) > 1e-6) continue;
    Vec c = Vec::Zero(2 * d);
    c.head(d) = -r.coeff / n;  // gradient of -row
    cols.push_back(c);
  }
  if (std::abs(p.quad_slack(u, force)) <= 1e-6 * detail::quad_scale(p, u)) {
    Vec c(2 * d);
    c.head(d) = p.g;
    c.tail(d) = 2.0 * force;
    const double n = c.norm();
    if (n > 0.0) cols.push_back(c / n);
  }
  Mat C(2 * d, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) C.col(j) = cols[j];
  const double r = cols.empty() ? grad.norm() : detail::min_stationarity_residual(grad, C);
  return r / (1.0 + grad.norm());
}

/// All feasible stationary candidates of the active-set cases, in case order.
inline std::vector<JcfCandidate> jcf_candidates(const JcfProblem& p) {
  const Eigen::Index d = p.dim();
  require(d >= 1 && d <= 2, "jcf: supports d in {1, 2}");
  const double rho = p.weights.w_cbf / p.weights.w_l2;
  std::vector<JcfCandidate> out;

  auto push = [&](const Vec& u, const Vec& force, ActiveCase c, double lambda) {
    if (!detail::jcf_feasible(p, u, force)) return;
    // Remove round-off excess so the rendered force never exceeds the bound.
    const Vec f = project_to_ball(force, std::max(p.c1 - p.g.dot(u), 0.0));
    out.push_back({u, f, c, lambda, p.cost(u, f), 0.0});
  };

  // C1: nothing active.
  push(p.u_ref, Vec::Zero(d), ActiveCase::JcfC1, 0.0);

  // C2: linear rows only; F cancels the second cost term.
  if (!p.rows.empty()) {
    if (auto sol = qp_closest(p.u_ref, p.rows)) {
      push(sol->u, sol->u - p.u_ref, ActiveCase::JcfC2, 0.0);
    }
  }

  // C3: quadratic only.
  const double c_full = p.g.squaredNorm();
  if (c_full > 1e-14) {
    const double a = p.c1 - p.g.dot(p.u_ref);
    const auto coeffs = jcf_weighted_cubic(rho, c_full, a);
    for (double lam : real_roots(coeffs).roots) {
      const double D = 2.0 * rho + 2.0 * (rho + 1.0) * lam;
      if (std::abs(D) <= detail::kRootGuard) continue;
      const Vec f = -lam * p.g / D;
      push(p.u_ref + (1.0 + lam) * f, f, ActiveCase::JcfC3, lam);
    }
  }

  // C4: quadratic + one linear row held at equality.
  for (const auto& row : p.rows) {
    const double an = row.coeff.norm();
    if (an <= detail::kZeroRowNorm) continue;
    const auto oc = orth_complement(row.coeff);
    const Mat& U = oc.basis;
    const Vec& n = oc.parallel_unit;
    const double u_par = -row.constant / an;  // n^T u on the row
    const Vec ur_perp = U.transpose() * p.u_ref;
    const double ur_par = n.dot(p.u_ref);
    const double dpar = u_par - ur_par;
    const Vec g_perp = U.transpose() * p.g;
    const double g_par = n.dot(p.g);
    const double c = g_perp.squaredNorm();
    const double a_prime = p.c1 - g_par * u_par - g_perp.dot(ur_perp);

    auto assemble = [&](const Vec& u_perp, const Vec& f_perp, double f_par, double lam) {
      const Vec u = U * u_perp + n * u_par;
      const Vec f = U * f_perp + n * f_par;
      push(u, f, ActiveCase::JcfC4, lam);
    };

    if (c <= 1e-14) {
      // u is pinned in the complement; only the normal force component is free.
      if (a_prime >= 0.0) {
        const double fp = std::sqrt(a_prime);
        const Vec zero = Vec::Zero(d - 1);
        assemble(ur_perp, zero, fp, 0.0);
        assemble(ur_perp, zero, -fp, 0.0);
      }
      continue;
    }
    const auto coeffs = jcf_weighted_quintic(rho, c, dpar * dpar, a_prime);
    for (double lam : real_roots(coeffs).roots) {
      const double D = 2.0 * rho + 2.0 * (rho + 1.0) * lam;
      if (std::abs(D) <= detail::kRootGuard || std::abs(1.0 + lam) <= detail::kRootGuard)
        continue;
      const Vec f_perp = -lam * g_perp / D;
      assemble(ur_perp + (1.0 + lam) * f_perp, f_perp, dpar / (1.0 + lam), lam);
    }
    // lambda = -1 admits solutions only when u_ref already sits on the row.
    if (std::abs(dpar) <= 1e-12 * (1.0 + std::abs(ur_par))) {
      const double D = 2.0 * rho - 2.0 * (rho + 1.0);
      const Vec f_perp = g_perp / D;
      const double rest = a_prime - f_perp.squaredNorm();
      if (rest >= 0.0) {
        assemble(ur_perp, f_perp, std::sqrt(rest), -1.0);
        assemble(ur_perp, f_perp, -std::sqrt(rest), -1.0);
      }
    }
  }

  // C5: two linear rows fix u; the force is the closest admissible one.
  if (d == 2) {
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      for (std::size_t j = i + 1; j < p.rows.size(); ++j) {
        Eigen::Matrix2d A;
        A.row(0) = p.rows[i].coeff.transpose();
        A.row(1) = p.rows[j].coeff.transpose();
        if (std::abs(A.determinant()) <= 1e-12 * (1.0 + A.norm() * A.norm())) continue;
        const Vec u = A.inverse() * Eigen::Vector2d(-p.rows[i].constant, -p.rows[j].constant);
        const double r2 = p.c1 - p.g.dot(u);
        if (r2 < 0.0) continue;
        push(u, project_to_ball(u - p.u_ref, r2), ActiveCase::JcfC5, 0.0);
      }
    }
  }
  return out;
}

/// Minimum-cost feasible candidate; ties go to the lower case index.
inline std::optional<JcfCandidate> jcf_best_candidate(const JcfProblem& p) {
  auto cands = jcf_candidates(p);
  JcfCandidate* best = nullptr;
  for (auto& c : cands) {
    if (!best || c.cost < best->cost - 1e-10 * (1.0 + std::abs(best->cost))) best = &c;
  }
  if (!best) return std::nullopt;
  best->kkt_residual = jcf_kkt_residual(p, best->u, best->force);
  return std::move(*best);
}

/// Joint synthesis: minimum-cost feasible candidate over the active-set cases;
/// when none is feasible, CBF-only u with F = 0.
inline ControlDecision jcf_solve(const JcfProblem& p) {
  const auto best = jcf_best_candidate(p);
  if (!best) return detail::fallback_decision(p.u_ref, p.rows);

  ControlDecision out;
  out.u = ControlInput(best->u);
  out.u_ref = p.u_ref;
  out.force = best->force;
  out.active_case = best->case_id;
  out.cost = best->cost;
  return out;
}

inline ControlDecision jcf_step(const RobotState& state, const Vec& x_vd,
                                const std::vector<CbfRow>& barriers,
                                const EnergyTank& tank,
                                const StabilityParams& params,
                                const ControllerGains& gains,
                                const JcfWeights& weights) {
  return jcf_solve(make_jcf_problem(state, x_vd, barriers, tank, params, gains, weights));
}

}  // namespace hsa
