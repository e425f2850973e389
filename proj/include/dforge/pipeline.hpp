#pragma once
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dforge/dirac_chain.hpp"
#include "dforge/modelfile.hpp"

namespace dforge {

struct PipelineOptions {
  std::string command;               // analyze | gauge | equiv | fixgauge | simulate
  std::vector<std::string> models;   // file paths (equiv takes two)
  std::string gauge;                 // --gauge: named entry of [gauges]
  std::string action;                // --action: named [action] block
  std::string format = "text";       // --format: text | json
  std::optional<double> step;        // --step: overrides simulation grids
  std::optional<double> tol;         // --tol: overrides drift tolerances
  std::string out;                   // --out path (only used for csv naming here)
  unsigned seed = 20260814;          // randomized self-test seed
};

struct PipelineResult {
  int exit_code = 0;                 // 0 ok, 3 when a numerical flag was raised
  std::string report;                // rendered text or json document
  std::string emitted_model;         // gauged model file (gauge command only)
  std::vector<std::pair<std::string, std::string>> csv_files;  // name -> content
};

// Full analysis used by several commands: Legendre transform, stabilization,
// classification.
struct Analysis {
  HamiltonianSystem hs;
  ChainReport chain;
};
Analysis analyze_model(const ModelFile& mf);

// Orchestrates one command over the loaded model files and renders the
// report. Throws the module errors (model_error, analysis_error,
// numerical_error, kernel_error); the caller maps them to exit codes.
PipelineResult run_pipeline(const PipelineOptions& opt);

}  // namespace dforge
