/**
 * @file pipeline.hpp
 * @brief Check orchestration: staged residual runs over a model file.
 *
 * Stages, in dependency order:
 *
 *   wdvv -> units -> euler -> calibrate -> hierarchy -> trr
 *        -> virasoro -> open-virasoro -> commutators
 *
 * A selected stage is skipped (status "skip") when a stage it depends on
 * was selected and did not pass; it reports "n/a" when the model lacks the
 * data the stage checks (no Euler field, no metric, no open potential).
 * Effective truncation depths are widened from the requested ones so that
 * every window a stage touches is actually computed, and are recorded on
 * the run.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frobjet/modelfile.hpp"

namespace frobjet {

/// Canonical stage order.
const std::vector<std::string>& stage_names();

struct CheckOptions {
  std::vector<std::string> stages;        // empty: every stage
  std::optional<int> m_max;               // override truncation.m_max
  std::optional<std::vector<Rat>> lambdas;  // override weight samples
};

struct StageResult {
  std::string stage;
  std::string status;  // pass | fail | skip | n/a
  std::string note;    // skip reason or applicability note
  std::vector<ResidualReport> checks;
  double ms = 0;  // wall time; never serialized into reports
};

struct CheckRun {
  std::string model;
  RunParams effective;  // depths actually used
  int window = 1;
  int spread = 0;
  std::vector<Rat> lambdas;  // weight samples actually used
  std::vector<StageResult> stages;
  bool ok = true;  // no selected stage failed
};

CheckRun run_checks(const ModelFile& mf, const CheckOptions& opt);

/// Machine report, deterministic byte-for-byte for equal inputs and flags.
std::string report_json(const CheckRun& run);

/// Human-readable report with one line per stage.
std::string report_text(const CheckRun& run);

/// Exact serialization of a derived object: "potential", "calibration",
/// "vtop", or "operator" (at index m). Throws on unknown objects.
std::string dump_object(const ModelFile& mf, const std::string& object, int m);

}  // namespace frobjet
