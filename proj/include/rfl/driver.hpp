#pragma once

#include <string>
#include <vector>

#include "rfl/check.hpp"

// Batch entry point: check files, render diagnostics, emit VCs.

namespace rfl {

struct RunConfig {
  std::vector<std::string> inputs;
  long long fuel = 100000;
  int lambdaPool = 8;
  int instanceBudget = 64;
  long long branchBudget = 10000;
  std::string solver = "builtin";  // builtin | external:<path>
  std::string emitSmtDir;          // empty = no emission
  bool verbose = false;
};

struct RunReport {
  int exitCode = 0;
  std::string text;  // deterministic, one line per obligation
};

RunReport run(const RunConfig& config);

std::string renderDiagnostic(const Diagnostic& d);
std::string renderObligation(const Obligation& o, const std::string& file);

}  // namespace rfl
