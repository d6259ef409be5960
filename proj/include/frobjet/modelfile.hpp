/**
 * @file modelfile.hpp
 * @brief JSON model files: strict parsing and deterministic serialization.
 *
 * Layout (every rational is a "p/q" string, never a JSON number):
 *
 *   dimension       int N >= 1, required
 *   metric          N x N array of rationals, optional
 *   potential       object, or array of N objects (vector potential):
 *                     monomials:  [[e_0,..,e_{nv-1}], "p/q"] pairs
 *                     exp_terms:  {coeff, var, scale, prefactor_monomial?}
 *                   an exp term is prefactor * coeff * exp(scale * x_var)
 *   euler           {q, r, delta, r_extra?}, optional; r_extra needs an
 *                   open potential
 *   open_potential  object, same shape, in N+1 variables (boundary last)
 *   base_point      array of rationals, length nv, optional, default 0
 *   truncation      {jet_order, D, P_max, G_max, m_max, lambdas}, optional
 *
 * Potentials are expansions in the offsets x = t - base_point. Monomials
 * (and exp-term prefactors) above the jet order contribute nothing, so a
 * file re-read at a lower jet order is the truncation of the original.
 * Unknown keys anywhere are a parse error.
 */
#pragma once

#include <string>
#include <vector>

#include "frobjet/builtins.hpp"
#include "frobjet/model.hpp"

namespace frobjet {

/// Run parameters carried by a file's truncation block.
struct RunParams {
  RecommendedDepths depths;
  std::vector<Rat> lambdas;  // empty: the pipeline picks its samples
};

struct ModelFile {
  ModelSpec spec;
  RunParams params;
};

/// Parse a model file; `id` labels the spec in reports. jet_order > 0
/// overrides the file's truncation.jet_order. Throws Error::parse.
ModelFile parse_model_file(const std::string& text, const std::string& id,
                           int jet_order = 0);

/// Read and parse a file from disk; the id is the basename without .json.
ModelFile load_model_file(const std::string& path, int jet_order = 0);

/// Serialize a spec with its run parameters. Potentials are written as
/// explicit monomial lists of the stored jets. Only certified coefficients
/// are written: the file's jet_order is the least valid order across the
/// potentials, so a spec with exact jets re-parses identically.
std::string serialize_model_file(const ModelSpec& spec, const RunParams& params);

/// Model file for a built-in. Potentials that are exponential families are
/// written with exp_terms, keeping the file exact under jet-order changes
/// where the family allows it.
std::string export_builtin_file(const std::string& id);

/// Field-by-field equality, ignoring the id label. Jets must agree in
/// stored coefficients and validity, not just up to the common order.
bool specs_identical(const ModelSpec& a, const ModelSpec& b);

}  // namespace frobjet
