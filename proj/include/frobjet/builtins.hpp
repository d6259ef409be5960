/**
 * @file builtins.hpp
 * @brief Catalogue of built-in models with recommended truncation depths.
 *
 * Ids: point, point_open, a2_3spin, p1, p1_open(a,b), p1_open(a,b,+|-),
 * p1_canonical(1|2). The p1_open parameters are rationals; the sign
 * defaults to +.
 */
#pragma once

#include "frobjet/model.hpp"

namespace frobjet {

struct RecommendedDepths {
  int jet_order = 6;  // truncation of the potential jets
  int calib_depth = 8;
  int level_cap = 3;
  int deg_cap = 3;
  int m_max = 2;
};

struct BuiltinModel {
  ModelSpec spec;
  RecommendedDepths rec;
};

///// Construct a built-in by id; throws Error::parse for unknown ids.
/// jet_order overrides the recommended potential truncation when > 0.
BuiltinModel builtin(const std::string& id, int jet_order = 0);

/// Canonical id list (family members at their sampled parameters).
std::vector<std::string> builtin_ids();

}  // namespace frobjet
