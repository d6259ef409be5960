/**
 * @file virasoro.hpp
 * @brief Quadratic symmetry operators of the descendent potentials: the
 *        graded matrix family P_m, the operator tables built from a
 *        calibration, their closed-form bracket, and the residuals of the
 *        constraints they impose on closed, open and vector potentials.
 */
#pragma once

#include "frobjet/hierarchy.hpp"

namespace frobjet {

/**
 * P_m(A, R) for a diagonal A (given by its entries), from the recursion
 *
 *   P_{-1} = Id,   P_{m+1} = R P_m + P_m (A + m + 1/2),
 *
 * so P_0 = R + A - 1/2 and each step appends one factor.
 */
QMatrix pm_matrix(int m, const std::vector<Rat>& adiag, const QMatrix& r);

/// The same family as a normal-ordered product: every power of R to the
/// left of every diagonal factor, i.e. column beta collects the x^k
/// coefficients of prod_{i=0..m} (x + a_beta + i - 1/2) against R^k.
QMatrix pm_matrix_ordered(int m, const std::vector<Rat>& adiag, const QMatrix& r);

/// Keep entries with q[row] - q[col] == p, zero the rest.
QMatrix graded_part(const QMatrix& mat, const std::vector<Rat>& q, const Rat& p);

/**
 * Quadratic differential operator in the descendent variables, stored on
 * the finite slot table slot = level*nv + coord, level < levels:
 *
 *   X = e^-2 u^T tt u + u^T td D + e^2 D^T dd D + e^-1 lt.u + e ld.D + c0,
 *
 * where u_i is the shifted variable t~_i, D_i = d/dt_i and e the genus
 * bookkeeping scalar. tt and dd are kept symmetric.
 */
struct VirasoroOp {
  int nv = 0, levels = 0;
  QMatrix tt, td, dd;
  std::vector<Rat> lt, ld;
  Rat c0 = Rat(0);

  VirasoroOp() = default;
  VirasoroOp(int nv_in, int levels_in);

  int size() const { return nv * levels; }
  int slot(int coord, int level) const { return level * nv + coord; }
  int slot_level(int i) const { return i / nv; }
  int slot_coord(int i) const { return i % nv; }

  VirasoroOp& operator+=(const VirasoroOp& o);
  VirasoroOp& operator-=(const VirasoroOp& o);
  VirasoroOp& operator*=(const Rat& s);
  friend VirasoroOp operator+(VirasoroOp a, const VirasoroOp& b) { return a += b; }
  friend VirasoroOp operator-(VirasoroOp a, const VirasoroOp& b) { return a -= b; }
  friend VirasoroOp operator*(const Rat& s, VirasoroOp a) { return a *= s; }

  /// Exact equality of every coefficient whose slots all sit below the
  /// level window (c0 always compared).
  bool equal_through(const VirasoroOp& o, int level_window) const;
};

/// First nonzero coefficient of z within the level window, as a report.
ResidualReport op_report(const std::string& name, const VirasoroOp& z, int level_window);

/**
 * Operator L_m, m >= -1, of a conformal metric calibration, on a table of
 * the given size. Row/column selection is by the graded parts of
 * P_m(mu + shift, R) with mu = q - delta/2 and R the total exponent sum;
 * the constant is c0 = delta_{m,0} tr(1/4 - mu^2)/4.
 */
VirasoroOp build_virasoro(const Calibration& cal, int m, int levels);

/**
 * Open operator: the closed L_m of oc.base embedded on nv = N+1 slots,
 * plus the boundary lines driven by P_m(mu~ + shift, R~) of the extension
 * (the e^-1 row, the boundary derivative column of td including the
 * s-ladder, the e row with its 3(m+1)!/4 boundary tail, the mixed dd
 * block, and the constant 3/4 at m = 0).
 */
VirasoroOp build_open_virasoro(const OpenCalibration& oc, int m, int levels);

/// z = [x, y] in closed form on the shared table.
VirasoroOp bracket(const VirasoroOp& x, const VirasoroOp& y);

/// Pairwise checks bracket(ops[i], ops[j]) = (i-j) ops[i+j] for
/// -1 <= j < i <= i_max, with ops[k] holding the operator of index k-1.
std::vector<ResidualReport> commutator_residuals(const std::vector<VirasoroOp>& ops, int i_max,
                                                 int level_window);

/// Second evaluation path for the bracket: polynomials with an epsilon
/// power per term, monomials as sorted slot lists with repetition.
using EpsMono = std::pair<int, std::vector<int>>;
using EpsPoly = std::map<EpsMono, Rat>;

EpsPoly eps_mono(int eps_pow, std::vector<int> slots);
EpsPoly apply_op(const VirasoroOp& x, const EpsPoly& p);
/// x(y p) - y(x p), term by term.
EpsPoly bracket_apply(const VirasoroOp& x, const VirasoroOp& y, const EpsPoly& p);

/**
 * Genus-zero coefficient of (X e^{F/e^2})/e^{F/e^2} at e^-2:
 *
 *   u^T tt u + u^T td (dF) + (dF)^T dd (dF),
 *
 * restricted to monomials of level <= level_window (rows above the window
 * only produce higher-level monomials and are dropped). Requires f to
 * carry every derivative column the table touches below the window.
 */
DescSeries genus0_residual(const VirasoroOp& op, const std::vector<Rat>& base, const DescSeries& f,
                           int level_window);

/// Coefficient at e^-1 with the mixed exponential e^{F/e^2 + Fo/e}:
///   lt.u + u^T td (dFo) + ld.(dF) + 2 (dF)^T dd (dFo).
/// f_closed lives on the closed coordinates and is lifted internally.
DescSeries open_genus0_residual(const VirasoroOp& op, const std::vector<Rat>& base,
                                const DescSeries& f_closed, const DescSeries& f_open,
                                int level_window);

/// Constraint residuals of the descendent potential for m = -1..m_max.
std::vector<ResidualReport> virasoro_residuals(const Calibration& cal, const DescSeries& f,
                                               int m_max, int level_window);

/// Open constraint residuals for m = -1..m_max: per m the e^-1 residual
/// and the agreement of the e^-2 coefficient with the embedded closed one.
std::vector<ResidualReport> open_virasoro_residuals(const OpenCalibration& oc,
                                                    const DescSeries& f_closed,
                                                    const DescSeries& f_open, int m_max,
                                                    int level_window);

/**
 * Vector-potential constraints of a conformal (not necessarily metric)
 * calibration at the weight parameter lambda, mu = q + lambda - 3/2:
 *
 *   A^a_m = sum_{d1 >= -1, d2} (-1)^{d2+1}
 *           (Omega^0_{d1}|_{t=v})^a_g ([P_m(mu - d2, R)]_{m-1-d1-d2})^g_n F^{n,d2},
 *
 * with the stored rows F^{n,d2} for d2 >= 0 and the sign-alternating
 * variable rows below. One report per (m, a), m = -1..m_max.
 */
std::vector<ResidualReport> flat_virasoro_residuals(const Calibration& cal, const TopSolution& top,
                                                    const std::vector<std::vector<DescSeries>>& fv,
                                                    int m_max, const Rat& lambda, int level_window);

/// The two-index contraction of both coefficient families through the
/// graded parts of P_n(mu - d2, R),
///   C_{m,n} = sum_{d1,d2 >= -1} (-1)^{d2+1}
///             Omega^0_{d1} [P_n(mu - d2, R)]_{m-d1-d2} Omega^{d2}_0,
/// which must vanish identically for m >= n >= -1.
JetMatrix cmn_matrix(const Calibration& cal, int m, int n, const Rat& lambda);

/// cmn_matrix reports over -1 <= n <= m <= m_max.
std::vector<ResidualReport> cmn_residuals(const Calibration& cal, int m_max, const Rat& lambda);

}  // namespace frobjet
