/**
 * @file model.hpp
 * @brief Model data for (open, conformal) Frobenius and flat F-manifolds,
 *        plus residual checkers for their defining equations.
 *
 * Conventions: coordinates are 0-based internally (coordinate 0 is the unit
 * direction t^1). In open mode the extra boundary coordinate s is the last
 * variable, index N (0-based). Potentials are stored as jets in the offsets
 * from base_point.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frobjet/jet_matrix.hpp"

namespace frobjet {

struct EulerData {
  std::vector<Rat> q;  // charges, q[0] = 0
  std::vector<Rat> r;  // translation part of E
  Rat delta;           // conformal dimension
};

struct OpenExt {
  Jet fo;       // open potential, jet in N+1 variables (s last)
  Rat r_extra;  // E^s translation component; E^s = (1-delta)/2 s + r_extra
};

struct ModelSpec {
  std::string id;
  int n = 0;  // closed dimension N
  std::optional<QMatrix> eta;
  /// One jet (Frobenius scalar potential, needs eta) or n jets (flat-F
  /// vector potential), each in n variables.
  std::vector<Jet> potential;
  std::optional<EulerData> euler;
  std::vector<Rat> base;  // length n, or n+1 with open_ext
  std::optional<OpenExt> open_ext;
  int trunc = 0;  // jet truncation order of the potentials

  bool frobenius() const { return potential.size() == 1; }
  int num_vars() const { return open_ext ? n + 1 : n; }
  /// eta^{-1}; cached lazily would be overkill, models are tiny.
  QMatrix eta_inv() const;
  /// Charge vector including the open coordinate when present
  /// (q^s = (1+delta)/2).
  std::vector<Rat> charges() const;
  /// Translation vector including r_extra when open.
  std::vector<Rat> translations() const;
  /// The Euler component E^gamma as a jet in nv variables.
  Jet euler_jet(int gamma, int nv) const;
  /// Largest integer spread max(q^a - q^b); 0 when no euler data.
  int integer_q_spread() const;
  /// Structural sanity: eta symmetric/invertible, q[0]=0, sizes coherent.
  void validate() const;
};

struct ResidualReport {
  std::string name;
  int valid_order = -1;  // jet order up to which the residual was checked
  int valid_deg = -1;    // desc-degree window, when applicable
  bool is_zero = true;
  std::string location;  // first nonzero coefficient, human-readable
  Rat value = Rat(0);    // its value
};

ResidualReport report_from(const std::string& name, const Jet& residual);
ResidualReport report_from(const std::string& name, const JetMatrix& residual);
/// Merge family members into one report (first failure wins).
ResidualReport merge_reports(const std::string& name, const std::vector<ResidualReport>& parts);

/**
 * Structure constants as matrices C_gamma with (C_gamma)^a_b = c^a_{gamma b}:
 * Frobenius c^a_{bg} = eta^{am} F_{mbg}; flat-F c^a_{bg} = d^2 F^a / dt^b dt^g.
 */
std::vector<JetMatrix> structure_constants(const ModelSpec& m);

/// Associativity residuals, one per index tuple up to symmetry.
std::vector<ResidualReport> wdvv_residual(const ModelSpec& m);

/// Open WDVV residuals: both equation families over all (a,b,g) and (a,b).
std::vector<ResidualReport> open_wdvv_residual(const ModelSpec& m);

/// F_{1ab} = eta_ab; open mode adds Fo_{1a} = 0 and Fo_{1s} = 1;
/// flat-F mode checks d^2 F^a / dt^1 dt^b = delta^a_b.
ResidualReport unit_checks(const ModelSpec& m);

/// Extracted inhomogeneous constants of the Euler identity.
struct EulerConstants {
  QMatrix a;           // quadratic part coefficients (Frobenius) or A^a_b (flat-F)
  std::vector<Rat> b;  // linear part (row a of flat-F A-matrix lives in `a`)
  Rat c = Rat(0);      // constant part (Frobenius scalar mode)
  std::vector<Rat> open_lin;  // linear part of the open-potential residual
  Rat open_const = Rat(0);
};

/**
 * Homogeneity residual: L_E F - (3-delta) F at most quadratic (Frobenius),
 * L_E F^o - (3-delta)/2 F^o at most linear (open part), E(F^a) -
 * (2-q^a)F^a at most linear (flat-F). Extracted constants reported.
 */
ResidualReport euler_residual(const ModelSpec& m, EulerConstants* out = nullptr);

/// Frobenius -> flat-F with F^a = eta^{am} dF/dt^m.
ModelSpec to_flat_f(const ModelSpec& m);

/// Forget the boundary data: the closed model alone.
ModelSpec closed_slice(ModelSpec m);

/**
 * Frobenius + open potential -> (N+1)-dim flat-F extension with vector
 * potential (eta^{1m} dF/dt^m, ..., F^o). Throws a structured error when
 * the open WDVV or unit residuals are nonzero.
 */
ModelSpec open_to_extension(const ModelSpec& m);

/**
 * Attach F^o = u * s for a canonical coordinate u: requires du/dt^1 = 1 and
 * c^nu_{ab} du/dt^nu = du/dt^a du/dt^b; throws with the offending residual
 * otherwise. Homogeneity constant of E(F^o) - (3-delta)/2 F^o (the
 * coefficient of s) is reported via euler_residual on the result.
 */
ModelSpec canonical_open_solution(const ModelSpec& m, const Jet& u);

}  // namespace frobjet
