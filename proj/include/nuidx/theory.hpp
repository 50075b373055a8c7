#pragma once

// Single-feature identification results: how the observable infection/feature
// odds ratio relates to the latent risk ratio of the feature by condition
// status, with and without a binary confounder.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "nuidx/error.hpp"

namespace nuidx::theory {

/**
 * Parameters of the single-feature latent model.
 *
 *   alpha = P(A=1)            population infection rate
 *   pi    = P(Y=1 | A=1)      condition prevalence among the infected
 *   beta0 = P(X=1 | Y=0)      baseline feature prevalence
 *   beta1 = P(X=1|Y=1)/beta0  risk ratio of the feature by condition status
 *
 * beta1 is admissible on (0, 1/beta0]; the upper bound is allowed because
 * beta0*beta1 = 1 is still a legal Bernoulli parameter.
 */
struct TheoryPoint {
  double alpha = 0.5;
  double pi = 0.25;
  double beta0 = 0.2;
  double beta1 = 1.0;
};

inline bool open_unit(double p) { return p > 0.0 && p < 1.0; }

inline void validate(const TheoryPoint& pt) {
  if (!open_unit(pt.alpha)) throw domain_error("alpha must lie in (0,1)");
  if (!open_unit(pt.pi)) throw domain_error("pi must lie in (0,1)");
  if (!open_unit(pt.beta0)) throw domain_error("beta0 must lie in (0,1)");
  if (!(pt.beta1 > 0.0) || pt.beta0 * pt.beta1 > 1.0)
    throw domain_error("beta1 must lie in (0, 1/beta0]");
}

inline double odds(double p) { return p / (1.0 - p); }

/// Observable odds ratio between infection and the feature in closed form.
/// Independent of alpha.
inline double or_closed_form(const TheoryPoint& pt) {
  validate(pt);
  const double num = pt.pi * (1.0 - pt.beta1);
  const double den = pt.beta0 * pt.pi * (1.0 - pt.beta1) + (1.0 - pt.beta0);
  return 1.0 - num / den;
}

/// P(A=1 | X=x) under the latent model.
inline double theta_x(const TheoryPoint& pt, int x) {
  validate(pt);
  if (x != 0 && x != 1) throw domain_error("x must be 0 or 1");
  const double a = pt.alpha, p = pt.pi, b0 = pt.beta0, b1 = pt.beta1;
  if (x == 1) {
    return (b1 + (1.0 - p) / p) / (b1 + (1.0 - a * p) / (a * p));
  }
  const double absent_y1 = (1.0 - b0 * b1) * p;
  const double absent_y0 = 1.0 - b0;
  return (absent_y1 + absent_y0 * (1.0 - p)) / (absent_y1 + absent_y0 * (1.0 / a - p));
}

/// Same as theta_x(pt, x) with alpha replaced.
inline double theta_x(TheoryPoint pt, double alpha, int x) {
  pt.alpha = alpha;
  return theta_x(pt, x);
}

/// Value of beta1 at which the odds ratio and beta1 coincide.
inline double phi_threshold(double pi, double beta0) {
  if (!open_unit(pi)) throw domain_error("pi must lie in (0,1)");
  if (!open_unit(beta0)) throw domain_error("beta0 must lie in (0,1)");
  return ((1.0 - pi) / pi) * ((1.0 - beta0) / beta0);
}

/// Position of the odds ratio relative to beta1, measured as distance from 1.
enum class Magnitude {
  or_farther,  ///< |OR-1| > |beta1-1|
  equal,       ///< |OR-1| == |beta1-1|
  or_closer,   ///< |OR-1| < |beta1-1|
};

inline std::string to_string(Magnitude m) {
  switch (m) {
    case Magnitude::or_farther: return "OR_farther";
    case Magnitude::equal: return "equal";
    case Magnitude::or_closer: return "OR_closer";
  }
  return "?";
}

/// Distances closer than `tol` (relative to max(1, |beta1|)) count as equal.
inline Magnitude magnitude_relation(const TheoryPoint& pt, double tol = 1e-12) {
  const double orv = or_closed_form(pt);
  const double d_beta = std::abs(pt.beta1 - 1.0);
  const double d_or = std::abs(orv - 1.0);
  const double scale = std::max(1.0, std::abs(pt.beta1));
  if (std::abs(d_beta - d_or) <= tol * scale) return Magnitude::equal;
  return d_or > d_beta ? Magnitude::or_farther : Magnitude::or_closer;
}

/// True when the odds ratio is biased toward the null for every admissible beta1.
inline bool attenuation_region(double pi, double beta0) {
  if (!open_unit(pi)) throw domain_error("pi must lie in (0,1)");
  if (!open_unit(beta0)) throw domain_error("beta0 must lie in (0,1)");
  return beta0 < 1.0 - pi / (1.0 - pi);
}

/// Binary confounder Z with marginal risk ratios on infection and on feature
/// baseline prevalence.
struct ConfounderDesign {
  double pz = 0.5;
  double rr_az = 1.0;
  double rr_xz = 1.0;
};

/**
 * Solve for P(.|Z=0), P(.|Z=1) given the marginal, P(Z=1) and the ratio
 * P(.|Z=1)/P(.|Z=0):
 *
 *   p0 = marginal / ((1-pz) + pz*rr),  p1 = rr*p0.
 *
 * Throws infeasible_error if either probability leaves (0,1).
 */
inline std::pair<double, double> solve_conditional_from_marginal(double marginal, double pz,
                                                                 double rr) {
  if (!open_unit(marginal)) throw domain_error("marginal must lie in (0,1)");
  if (!open_unit(pz)) throw domain_error("pz must lie in (0,1)");
  if (!(rr > 0.0)) throw domain_error("risk ratio must be positive");
  const double p0 = marginal / ((1.0 - pz) + pz * rr);
  const double p1 = rr * p0;
  if (!open_unit(p0) || !open_unit(p1))
    throw infeasible_error("conditional probabilities leave (0,1): p0=" + std::to_string(p0) +
                           " p1=" + std::to_string(p1));
  return {p0, p1};
}

/// Exact joint distribution of (Z, Y, A, X) over {0,1}^4.
class JointTable {
 public:
  static constexpr std::size_t index(int z, int y, int a, int x) {
    return static_cast<std::size_t>(z * 8 + y * 4 + a * 2 + x);
  }
  double operator()(int z, int y, int a, int x) const { return cells_[index(z, y, a, x)]; }
  double& operator()(int z, int y, int a, int x) { return cells_[index(z, y, a, x)]; }
  const std::array<double, 16>& cells() const { return cells_; }

  double total() const {
    double s = 0.0;
    for (double c : cells_) s += c;
    return s;
  }

  /// P(A=a, X=x, Z=z), summed over Y.
  double axz(int a, int x, int z) const { return (*this)(z, 0, a, x) + (*this)(z, 1, a, x); }

  double p_az(int a, int z) const { return axz(a, 0, z) + axz(a, 1, z); }

 private:
  std::array<double, 16> cells_{};
};

/**
 * Build the exact joint table:
 *   Z ~ Bern(pz); A | Z from (alpha, rr_az); Y | A=1 ~ Bern(pi), Y=0 if A=0;
 *   X | Y, Z ~ Bern(b(Z) * beta1^Y) with b(1)/b(0) = rr_xz and E[b(Z)] = beta0.
 */
inline JointTable build_confounded_joint(double alpha, double pi, double beta0, double beta1,
                                         const ConfounderDesign& design) {
  validate(TheoryPoint{alpha, pi, beta0, beta1});
  const auto [a0, a1] = solve_conditional_from_marginal(alpha, design.pz, design.rr_az);
  const auto [b0, b1] = solve_conditional_from_marginal(beta0, design.pz, design.rr_xz);
  const double pa[2] = {a0, a1};
  const double pb[2] = {b0, b1};
  for (double b : pb) {
    if (b * beta1 > 1.0)
      throw infeasible_error("b(z)*beta1 exceeds 1 for the requested design");
  }
  JointTable jt;
  for (int z = 0; z < 2; ++z) {
    const double pzv = z == 1 ? design.pz : 1.0 - design.pz;
    for (int a = 0; a < 2; ++a) {
      const double pav = a == 1 ? pa[z] : 1.0 - pa[z];
      for (int y = 0; y < 2; ++y) {
        const double pyv = a == 0 ? (y == 0 ? 1.0 : 0.0) : (y == 1 ? pi : 1.0 - pi);
        const double px1 = y == 1 ? pb[z] * beta1 : pb[z];
        jt(z, y, a, 1) = pzv * pav * pyv * px1;
        jt(z, y, a, 0) = pzv * pav * pyv * (1.0 - px1);
      }
    }
  }
  return jt;
}

/// Balancing weight w(a,z) = P(A=1|Z=z) / P(A=a|Z=z) evaluated on the table.
inline double balancing_weight(const JointTable& jt, int a, int z) {
  const double p1 = jt.p_az(1, z);
  const double pa = jt.p_az(a, z);
  if (!(p1 > 0.0) || !(jt.p_az(0, z) > 0.0))
    throw domain_error("stratum z=" + std::to_string(z) + " lacks infected or uninfected mass");
  return p1 / pa;
}

/**
 * Odds ratio of infection by feature status. Unweighted uses the population
 * table; weighted uses the pseudopopulation with balancing weights.
 */
inline double or_from_joint(const JointTable& jt, bool weighted) {
  double m[2][2] = {};  // m[a][x]
  for (int z = 0; z < 2; ++z) {
    for (int a = 0; a < 2; ++a) {
      const double w = weighted ? balancing_weight(jt, a, z) : 1.0;
      for (int x = 0; x < 2; ++x) m[a][x] += w * jt.axz(a, x, z);
    }
  }
  const double px1 = m[0][1] + m[1][1];
  const double px0 = m[0][0] + m[1][0];
  if (!(px1 > 0.0) || !(px0 > 0.0)) throw domain_error("degenerate feature margin");
  const double theta1 = m[1][1] / px1;
  const double theta0 = m[1][0] / px0;
  return odds(theta1) / odds(theta0);
}

/// Weighted odds ratio written as the marginal IPTW contrast among the
/// infected: odds(X | A=1) over the weighted odds(X | A=0).
inline double or_iptw_att(const JointTable& jt) {
  double treated[2] = {};
  double control[2] = {};
  for (int z = 0; z < 2; ++z) {
    const double w0 = balancing_weight(jt, 0, z);
    for (int x = 0; x < 2; ++x) {
      treated[x] += jt.axz(1, x, z);
      control[x] += w0 * jt.axz(0, x, z);
    }
  }
  if (!(treated[0] > 0.0) || !(treated[1] > 0.0) || !(control[0] > 0.0) || !(control[1] > 0.0))
    throw domain_error("degenerate feature margin");
  return (treated[1] / treated[0]) / (control[1] / control[0]);
}

}  // namespace nuidx::theory
