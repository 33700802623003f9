#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "workspace.hpp"

namespace selfpref::cli {

// Each command writes its artifacts through the workspace and returns the
// one-line summary printed on success.

std::string cmd_ingest(const Workspace& ws);

struct GenerateArgs {
  std::vector<std::string> models;  // empty: every configured model
  std::size_t limit = 0;            // 0: all origins
};
std::string cmd_generate(const Workspace& ws, const GenerateArgs& a);

struct PairArgs {
  std::string model;
  std::string alternative;  // empty: pair against the human original
  std::string order;        // empty: config value
};
std::string cmd_pair(const Workspace& ws, const PairArgs& a);

struct EvaluateArgs {
  std::string evaluator;
  std::string pairs;
  std::string variant = "standard";
};
std::string cmd_evaluate(const Workspace& ws, const EvaluateArgs& a);

struct MetricsArgs {
  std::string records;
  std::string truth;
  std::string annotations;
  std::optional<std::size_t> resamples;
};
std::string cmd_metrics(const Workspace& ws, const MetricsArgs& a);

struct FitArgs {
  std::string records;
  std::string pairs;  // default: the manifest named in the run log
  std::string features = "phi,psi";
  std::optional<std::size_t> top_k;
  std::optional<double> ridge;
};
std::string cmd_fit(const Workspace& ws, const FitArgs& a);

struct SimulateArgs {
  std::string evaluator;
  std::string model;  // default: the evaluator's own model
};
std::string cmd_simulate(const Workspace& ws, const SimulateArgs& a);

struct MitigateArgs {
  std::string values;  // CSV of reported percentages; skips all model calls
  std::string evaluator;
  std::string pairs;
  std::string panel;
  std::string truth;
};
std::string cmd_mitigate(const Workspace& ws, const MitigateArgs& a);

struct ReportArgs {
  std::vector<std::string> figures;
  std::vector<std::string> tables;
};
std::string cmd_report(const Workspace& ws, const ReportArgs& a);

}  // namespace selfpref::cli
