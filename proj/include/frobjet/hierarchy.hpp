/**
 * @file hierarchy.hpp
 * @brief Topological solution of the principal hierarchy and the descendent
 *        potentials assembled from a calibration on top of it.
 */
#pragma once

#include "frobjet/calibration.hpp"
#include "frobjet/descseries.hpp"

namespace frobjet {

ResidualReport report_from(const std::string& name, const DescSeries& residual);

/// t~^coord_level: the variable itself, shifted by -1 at (coord 0, level 1).
/// Level 0 gives the coordinate value jet x_coord + base[coord].
DescSeries tilde_var(int nc, int level_cap, int deg_cap, int trunc, const std::vector<Rat>& base,
                     int coord, int level);

/// Multiply by t~^coord_level; level 0 multiplies by the coordinate value jet.
DescSeries tilde_mul(const DescSeries& s, const std::vector<Rat>& base, int coord, int level);

struct TopSolution {
  std::vector<DescSeries> v;  // one series per coordinate
  int p_max = 0;              // descendent levels carried
  int g_max = 0;              // desc-degree window
  SubstContext ctx;           // substitution t -> v, built once
};

/**
 * The solution of the principal hierarchy that restricts to t^a_0 when all
 * t^*_{>=1} vanish, computed by desc-degree induction from the fixed point
 *
 *   v^a = t^a_0 + sum_{d>=0} (lower_d)^a_b|_{t=v} t^b_{d+1}.
 *
 * Requires cal.depth >= p_max + g_max; the window is recorded on the result.
 */
TopSolution topological_solution(const Calibration& cal, int p_max, int g_max);

/// Defining flows dv^a/dt^b_d = d/dx((lower_d)^a_b|_{t=v}) re-checked for
/// every b and d <= p_max, x being the unit coordinate t^1_0.
std::vector<ResidualReport> flow_residuals(const Calibration& cal, const TopSolution& top);

/// sum_d t~^g_{d+1} dv^a/dt^g_d + delta^{a,1} = 0.
ResidualReport string_residual(const Calibration& cal, const TopSolution& top);

/// sum_d t~^g_d dv^a/dt^g_d = 0.
ResidualReport dilaton_residual(const Calibration& cal, const TopSolution& top);

/**
 * Two-index family
 *
 *   Omega^p_q = sum_{i=0}^q (-1)^{q-i} upper_{p+q-i} lower_{i-1},
 *
 * with the conventions Omega^{-1}_q = Omega^q_{-1} = delta_{q,0} Id.
 * Requires p + q <= depth.
 */
JetMatrix omega_pq(const Calibration& cal, int p, int q);

/// The same family from the alternating sum over the other index,
/// sum_{i=0}^p (-1)^{p-i} upper_{i-1} lower_{p+q-i}.
JetMatrix omega_pq_alt(const Calibration& cal, int p, int q);

/// For all p <= p_max, q <= q_max: agreement of both defining sums, the
/// derivative recursions d(Omega^p_q) = upper_{p-1} d(lower_q) and
/// d(Omega^p_q) = d(upper_p) lower_{q-1}, and the unit-direction identity
/// d(Omega^p_q)/dt^1 = Omega^{p-1}_q + Omega^p_{q-1}.
std::vector<ResidualReport> omega_pq_residuals(const Calibration& cal, int p_max, int q_max);

/**
 * Descendent potential
 *
 *   F = 1/2 sum_{p,q} t~^a_p t~^b_q sum_{i=0}^q (-1)^{q-i}
 *         (lower_{p+q-i})^m_a eta_{mn} (lower_{i-1})^n_b |_{t=v},
 *
 * summed over p, q <= p_max. Requires a metric-compatible calibration
 * (frobenius_symmetric; gauge error otherwise) and depth >= 2 p_max.
 */
DescSeries descendent_potential(const Calibration& cal, const TopSolution& top);

/// sum_p t~^a_{p+1} dF/dt^a_p + 1/2 eta_{ab} t^a_0 t^b_0 = 0.
ResidualReport potential_string_residual(const Calibration& cal, const TopSolution& top,
                                         const DescSeries& f);

/// F with all t^*_{>=1} set to zero differs from the model potential by at
/// most a quadratic polynomial.
ResidualReport potential_base_residual(const Calibration& cal, const DescSeries& f);

/// Genus-zero recursion of third derivatives,
///   d3F/dt^a_{A+1} dt^b_B dt^g_C
///     = d2F/dt^a_A dt^m_0 eta^{mn} d3F/dt^n_0 dt^b_B dt^g_C,
/// checked for all coordinates with A < a_max, B <= b_max, C <= c_max.
std::vector<ResidualReport> trr_residuals(const Calibration& cal, const DescSeries& f, int a_max, int b_max, int c_max);

/**
 * Descendent vector potentials F^{a,p} = sum_q (Omega^p_q)^a_b|_{t=v} t~^b_q
 * for p = 0..p_out, on any (not necessarily metric) calibration. Result is
 * indexed [p][a]. Requires depth >= p_out + p_max.
 */
std::vector<std::vector<DescSeries>> descendent_vector_potentials(const Calibration& cal,
                                                                  const TopSolution& top,
                                                                  int p_out);

/// The p < 0 convention F^{a,p} = (-1)^{p+1} t~^a_{-p-1} on the same shape.
DescSeries vector_potential_negative(const Calibration& cal, const TopSolution& top, int alpha,
                                     int p);

/// Per p: the gradient property dF^{a,p}/dt^b_q = (Omega^p_q)^a_b|_{t=v},
/// the ladder sum_q t~^b_{q+1} dF^{a,p}/dt^b_q + F^{a,p-1} = 0 (including
/// the conventional rows p <= 0), and the base window: F^{a,0}|_{t_{>=1}=0}
/// minus the flat potential component is at most linear.
std::vector<ResidualReport> vector_potential_residuals(
    const Calibration& cal, const TopSolution& top,
    const std::vector<std::vector<DescSeries>>& fv);

/// Metric consistency F^{a,p} = eta^{am} dF/dt^m_p.
std::vector<ResidualReport> gradient_consistency_residuals(
    const Calibration& cal, const DescSeries& f,
    const std::vector<std::vector<DescSeries>>& fv);

/// Sampled symmetry of substituted derivatives,
/// d(Omega^p_q)^a_b|_{t=v}/dt^g_r = d(Omega^p_r)^a_g|_{t=v}/dt^b_q.
std::vector<ResidualReport> omega_top_symmetry_residuals(const Calibration& cal,
                                                         const TopSolution& top, int samples,
                                                         unsigned seed);

/**
 * Open descendent potential F^o = sum_{d} t~^a_d Phi_{a,d}|_{t=v~}, summed
 * over all extension coordinates a (boundary included) and d <= p_max.
 * ext_top must be the topological solution of oc.ext.
 */
DescSeries open_descendent_potential(const OpenCalibration& oc, const TopSolution& ext_top);

/// Open recursion residuals, componentwise over every retained direction:
///   d(dF^o/dt^a_{p+1}) = d2F/dt^a_p dt^m_0 eta^{mn} d(dF^o/dt^n_0)
///                        + dF^o/dt^a_p d(dF^o/ds),   a <= N,
///   d(dF^o/ds_{p+1})   = dF^o/ds_p d(dF^o/ds).
/// f_closed is the closed-model descendent potential on the same window.
std::vector<ResidualReport> open_trr_residuals(const OpenCalibration& oc,
                                               const TopSolution& ext_top,
                                               const DescSeries& f_closed,
                                               const DescSeries& f_open);

/// F^o with all t^*_{>=1} set to zero differs from the open potential by at
/// most a linear polynomial.
ResidualReport open_potential_base_residual(const OpenCalibration& oc, const DescSeries& f_open);

/// dF/ds_n = (dF/ds_0)^{n+1} / (n+1)! for n <= n_max, s = coordinate s_coord.
std::vector<ResidualReport> s_chain_residuals(const DescSeries& f, int s_coord, int n_max);

}  // namespace frobjet
