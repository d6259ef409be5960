/**
 * @file calibration.hpp
 * @brief Fundamental-solution series of the deformed flatness system of a
 *        conformal model: monodromy exponents R_n, gauge tail G_n, the
 *        raised and lowered coefficient families, and the extension of all
 *        of this by a boundary coordinate.
 */
#pragma once

#include <utility>

#include "frobjet/model.hpp"

namespace frobjet {

struct Calibration {
  /// Copy of the input model; base point and Euler translations may be
  /// relabeled during construction so that column 0 of lower_at(0) equals
  /// the coordinate functions themselves.
  ModelSpec model;
  int depth = 0;  // families stored for d = -1 .. depth

  /// upper[d+1] is the z^{d+1} coefficient of the fundamental solution
  /// U(z) = Id + sum_{d>=0} upper[d+1] z^{d+1}; upper[0] = Id.
  std::vector<JetMatrix> upper;
  /// lower[d+1] carries the signed coefficients of U(z)^{-1}:
  /// U(z)^{-1} = Id + sum_{d>=1} (-1)^d lower[d] z^d.
  std::vector<JetMatrix> lower;

  std::vector<QMatrix> r;  // r[i] = R_{i+1}; trailing zero matrices trimmed
  std::vector<QMatrix> g;  // g[i] = G_{i+1}, i = 0 .. depth
  std::vector<Rat> mu;     // mu^a = q^a - delta/2 (empty without Euler data)
  bool frobenius_symmetric = false;

  const JetMatrix& upper_at(int d) const;  // d >= -1, throws depth error
  const JetMatrix& lower_at(int d) const;
  QMatrix r_at(int n) const;  // R_n, zero matrix beyond the stored range
  QMatrix r_total() const;    // sum of all R_n
};

/**
 * Monodromy exponents and gauge tail at the base point, solved entrywise
 * from the homogeneity ladder
 *
 *   (-1)^{n-1} R_n^T = delta_{n,1} U1^T + n G_n + [Q, G_n]
 *       + sum_{k=1}^{n-1} (G_{n-k} delta_{k,1} U1^T - (-1)^{k-1} R_k^T G_{n-k}),
 *
 * where U1 = (E^mu c^a_{mu b}) at the base point and Q = diag(q^a). Slots
 * with n + q^a - q^b = 0 go to R_n (and the matching G_n entry is gauged to
 * zero); all other slots determine G_n. Returns (R_1..R_depth, G_1..G_depth).
 */
std::pair<std::vector<QMatrix>, std::vector<QMatrix>> compute_r_g(const ModelSpec& m, int depth);

/**
 * Integrates both coefficient families to the given depth by total-degree
 * induction from the base point, with initial values given by the inverse
 * series of Id + sum G_n^T z^n. Requires g_in to cover n = 1 .. depth+1.
 * Every coordinate direction of the defining equation
 * d(upper_d)/dt^g = upper_{d-1} C_g is re-verified after assembly; a nonzero
 * residual (a non-integrable model) raises a structured error naming the
 * offending coefficient. Coordinates are relabeled, when necessary, so that
 * column 0 of lower_at(0) is exactly t^a.
 */
Calibration integrate_calibration(const ModelSpec& m, const std::vector<QMatrix>& r_in,
                                  const std::vector<QMatrix>& g_in, int depth);

/// compute_r_g followed by integrate_calibration.
Calibration build_calibration(const ModelSpec& m, int depth);

/// Convolution of the stored series with its inverse, both orders, minus Id,
/// checked to z^{depth+1}.
std::vector<ResidualReport> calibration_inverse_residuals(const Calibration& c);

/// Defining equations of both families re-checked in every direction:
/// d(upper_d)/dt^g = upper_{d-1} C_g and d(lower_d)/dt^g = C_g lower_{d-1}.
std::vector<ResidualReport> calibration_pde_residuals(const Calibration& c);

/// Euler-weighted homogeneity of both families against the stored R_n:
///   E d(upper_d) = (d+1) upper_d + [upper_d, Q] + sum (-1)^{i-1} R_i upper_{d-i},
///   E d(lower_d) = (d+1) lower_d + [lower_d, Q] + sum lower_{d-i} R_i.
std::vector<ResidualReport> calibration_homogeneity_residuals(const Calibration& c);

/// Metric conjugation: eta R_n eta^{-1} = (-1)^{n-1} R_n^T and
/// eta lower_d eta^{-1} = (upper_d)^T. Only meaningful for scalar-potential
/// models; the outcome is also recorded in the frobenius_symmetric flag.
std::vector<ResidualReport> calibration_symmetry_residuals(const Calibration& c);

/**
 * Calibration of the boundary extension m_ext (an open_to_extension output)
 * of base.model, built with the same zero-gauge recursion and checked
 * blockwise against the base: the first N rows and columns of both families
 * and of every R_n must reproduce the base data, the boundary column of the
 * raised family (rows <= N) and of every R_n must vanish. Any mismatch
 * raises a gauge error.
 */
Calibration extend_calibration(const Calibration& base, const ModelSpec& m_ext);

struct OpenCalibration {
  Calibration base;  // N-coordinate calibration
  Calibration ext;   // (N+1)-coordinate extension calibration
  int closed_n = 0;  // N

  /// Boundary row of the lowered extension family. beta is 0-based
  /// (beta = closed_n is the boundary direction itself), d >= -1.
  const Jet& phi(int beta, int d) const { return ext.lower_at(d).at(closed_n, beta); }
  QMatrix r_tilde_at(int n) const { return ext.r_at(n); }
  const std::vector<Rat>& mu_tilde() const { return ext.mu; }
};

/**
 * Packages the boundary row of an extension calibration and verifies the
 * three axioms it satisfies: the start value phi(b,-1) = delta_{b,boundary},
 * the first-derivative equation in every direction (driven by the second
 * derivatives of the open potential alone), and homogeneity with weights
 * d + 1/2 + mu^b. Throws a structured error on any nonzero residual.
 */
OpenCalibration open_calibration(const Calibration& base, const Calibration& ext);

/// The axiom residuals of an open calibration, for reporting.
std::vector<ResidualReport> open_calibration_residuals(const OpenCalibration& oc);

/// One-step convenience: closed calibration, extension, boundary row.
OpenCalibration build_open_calibration(const ModelSpec& m, int depth);

}  // namespace frobjet
