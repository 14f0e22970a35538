#pragma once

#include <algorithm>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hsa/common.hpp"

namespace hsa {

/// One affine inequality `coeff^T u + constant >= 0`.
struct AffineRow {
  Vec coeff;
  double constant = 0.0;

  double eval(const Vec& u) const { return coeff.dot(u) + constant; }
};

struct QpSolution {
  Vec u;
  std::vector<std::size_t> active;  // rows held at equality by this candidate
  Vec multipliers;                  // one per active row, u - target = sum mu_i a_i
};

namespace detail {

inline constexpr double kQpFeasTol = 1e-9;
inline constexpr double kZeroRowNorm = 1e-14;

// Rows scaled to unit coefficient norm so the feasibility tolerance is a
// distance. Rows with a vanishing coefficient are kept aside as pure checks.
struct NormalizedRows {
  std::vector<AffineRow> rows;
  std::vector<std::size_t> source;
  bool constant_violation = false;
};

inline NormalizedRows normalize_rows(const std::vector<AffineRow>& rows,
                                     Eigen::Index d) {
  NormalizedRows out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    require(r.coeff.size() == d, "qp_closest: row dimension mismatch");
    require(all_finite(r.coeff) && std::isfinite(r.constant),
            "qp_closest: non-finite row");
    const double n = r.coeff.norm();
    if (n <= kZeroRowNorm) {
      if (r.constant < -kQpFeasTol) out.constant_violation = true;
      continue;
    }
    out.rows.push_back({r.coeff / n, r.constant / n});
    out.source.push_back(i);
  }
  return out;
}

inline bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// true when (cost_a, a) should replace (cost_b, b)
inline bool better_candidate(double cost_a, const Vec& a, double cost_b,
                             const Vec& b) {
  const double tie = 1e-12 * (1.0 + std::abs(cost_b));
  if (cost_a < cost_b - tie) return true;
  if (cost_a > cost_b + tie) return false;
  const double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na != nb) return na < nb;
  return lex_less(a, b);
}

}  // namespace detail

/// Closest point to `target` in the polyhedron defined by `rows`, by
/// enumeration of active sets of size <= d. Intended for d <= 2 and a handful
/// of rows; returns nullopt when the polyhedron is empty.
inline std::optional<QpSolution> qp_closest(const Vec& target,
                                            const std::vector<AffineRow>& rows) {
  const Eigen::Index d = target.size();
  require(d >= 1 && d <= 2, "qp_closest: supports d in {1, 2}");
  require(all_finite(target), "qp_closest: non-finite target");

  const auto norm = detail::normalize_rows(rows, d);
  if (norm.constant_violation) return std::nullopt;
  const auto& rs = norm.rows;

  auto feasible = [&](const Vec& u) {
    return std::all_of(rs.begin(), rs.end(), [&](const AffineRow& r) {
      return r.eval(u) >= -detail::kQpFeasTol;
    });
  };

  std::optional<QpSolution> best;
  double best_cost = 0.0;
  auto consider = [&](QpSolution cand) {
    if (!cand.u.allFinite() || !feasible(cand.u)) return;
    const double cost = (cand.u - target).squaredNorm();
    if (!best || detail::better_candidate(cost, cand.u, best_cost, best->u)) {
      best_cost = cost;
      best = std::move(cand);
    }
  };

  consider({target, {}, Vec()});
  if (best) return best;

  for (std::size_t i = 0; i < rs.size(); ++i) {
    // Unit-norm row: projection onto a^T u + c = 0.
    const double viol = rs[i].eval(target);
    Vec mu(1);
    mu[0] = -viol;
    consider({target - viol * rs[i].coeff, {norm.source[i]}, mu});
  }
  if (d == 2) {
    for (std::size_t i = 0; i < rs.size(); ++i) {
      for (std::size_t j = i + 1; j < rs.size(); ++j) {
        Eigen::Matrix2d A;
        A.row(0) = rs[i].coeff.transpose();
        A.row(1) = rs[j].coeff.transpose();
        const double det = A.determinant();
        if (std::abs(det) < 1e-12) continue;
        const Eigen::Vector2d u = A.inverse() * Eigen::Vector2d(-rs[i].constant, -rs[j].constant);
        const Vec mu = A.transpose().inverse() * (u - target);
        consider({u, {norm.source[i], norm.source[j]}, mu});
      }
    }
  }
  if (best) {
    // Report multipliers against the caller's (unnormalized) rows.
    for (Eigen::Index k = 0; k < best->multipliers.size(); ++k) {
      best->multipliers[k] /= rows[best->active[k]].coeff.norm();
    }
  }
  return best;
}

/// Euclidean projection of `target` onto the ball of squared radius
/// `radius_sq` centred at the origin.
inline Vec project_to_ball(const Vec& target, double radius_sq) {
  require(radius_sq >= 0.0, "project_to_ball: negative squared radius");
  const double n2 = target.squaredNorm();
  if (n2 <= radius_sq) return target;
  return target * std::sqrt(radius_sq / n2);
}

struct PolyRealRoots {
  std::vector<double> roots;  // ascending
  double residual = 0.0;      // max |p(root)|
};

/// Evaluate a polynomial given highest-degree-first coefficients.
inline double poly_eval(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (double ci : c) acc = acc * x + ci;
  return acc;
}

inline double poly_deriv(const std::vector<double>& c, double x) {
  double acc = 0.0;
  const auto n = c.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc = acc * x + c[i] * static_cast<double>(n - 1 - i);
  }
  return acc;
}

/// Real roots of a polynomial (highest degree first) via companion-matrix
/// eigenvalues, each refined by Newton. Leading zeros reduce the degree.
inline PolyRealRoots real_roots(std::vector<double> coeffs) {
  for (double c : coeffs) require(std::isfinite(c), "real_roots: non-finite coefficient");
  double cmax = 0.0;
  for (double c : coeffs) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) throw ContractViolation("real_roots: zero polynomial");

  auto lead = coeffs.begin();
  while (lead != coeffs.end() && std::abs(*lead) <= 1e-13 * cmax) ++lead;
  coeffs.erase(coeffs.begin(), lead);
  const std::size_t degree = coeffs.size() - 1;

  PolyRealRoots out;
  if (degree == 0) return out;

  std::vector<double> candidates;
  if (degree == 1) {
    candidates.push_back(-coeffs[1] / coeffs[0]);
  } else {
    const auto n = static_cast<Eigen::Index>(degree);
    Mat companion = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = -coeffs[j + 1] / coeffs[0];
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Mat> es(companion, /*computeEigenvectors=*/false);
    const double tol = 1e-8 * (1.0 + cmax);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> z = es.eigenvalues()[i];
      const bool real = std::abs(z.imag()) <= 1e-7 * (1.0 + std::abs(z.real()));
      // Clustered real roots can come back as a pair with a small imaginary
      // part; keep them when the real part is a root after refinement.
      const bool near_real = std::abs(z.imag()) <= 1e-4 * (1.0 + std::abs(z.real()));
      if (real) {
        candidates.push_back(z.real());
      } else if (near_real && z.imag() > 0.0) {
        double x = z.real();
        for (int it = 0; it < 3; ++it) {
          const double dp = poly_deriv(coeffs, x);
          if (dp == 0.0) break;
          x -= poly_eval(coeffs, x) / dp;
        }
        if (std::abs(poly_eval(coeffs, x)) <= tol) candidates.push_back(x);
      }
    }
  }

  for (double x : candidates) {
    double best = std::abs(poly_eval(coeffs, x));
    for (int it = 0; it < 3 && best > 0.0; ++it) {
      const double dp = poly_deriv(coeffs, x);
      if (dp == 0.0) break;
      const double next = x - poly_eval(coeffs, x) / dp;
      const double r = std::abs(poly_eval(coeffs, next));
      if (!(r < best)) break;
      x = next;
      best = r;
    }
    out.roots.push_back(x);
    out.residual = std::max(out.residual, best);
  }
  std::sort(out.roots.begin(), out.roots.end());
  return out;
}

struct OrthComplement {
  Mat basis;           // d x (d-1), orthonormal columns spanning g^perp
  Vec parallel_unit;   // g / |g|
};

/// Orthonormal basis of the complement of g. For d = 2 the basis vector is g
/// rotated by +90 degrees.
inline OrthComplement orth_complement(const Vec& g) {
  const double n = g.norm();
  if (!(n > 1e-12)) throw SingularityError("orth_complement: gradient is ~0");
  OrthComplement out;
  out.parallel_unit = g / n;
  const Eigen::Index d = g.size();
  if (d == 1) {
    out.basis = Mat(1, 0);
  } else if (d == 2) {
    out.basis = Mat(2, 1);
    out.basis << -out.parallel_unit[1], out.parallel_unit[0];
  } else {
    Eigen::JacobiSVD<Mat> svd(g.transpose(), Eigen::ComputeFullV);
    out.basis = svd.matrixV().rightCols(d - 1);
  }
  return out;
}

}  // namespace hsa
