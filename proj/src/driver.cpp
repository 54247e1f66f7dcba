#include "rfl/driver.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfl/parser.hpp"
#include "rfl/smt.hpp"

namespace rfl {

namespace {

std::string verdictWord(const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::Valid: return "PASS";
    case Verdict::Kind::Invalid: return "FAIL";
    case Verdict::Kind::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string spanText(const Span& s) {
  return std::to_string(s.lo) + "-" + std::to_string(s.hi);
}

std::string baseName(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

}  // namespace

std::string renderObligation(const Obligation& o, const std::string& file) {
  std::ostringstream os;
  os << verdictWord(o.verdict) << " " << file << ":" << spanText(o.span) << " ["
     << o.rule << "] " << o.declName << " #" << o.index;
  if (o.verdict.kind == Verdict::Kind::Invalid) {
    os << " goal: " << printPred(o.vc.goal);
    if (!o.metric.empty()) os << " metric: " << o.metric;
  } else if (o.verdict.kind == Verdict::Kind::Unknown) {
    os << " goal: " << printPred(o.vc.goal) << " reason: " << o.verdict.reason;
    if (!o.metric.empty()) os << " metric: " << o.metric;
  }
  return os.str();
}

std::string renderDiagnostic(const Diagnostic& d) {
  std::ostringstream os;
  switch (d.level) {
    case Diagnostic::Level::Fail: os << "FAIL "; break;
    case Diagnostic::Level::Unknown: os << "UNKNOWN "; break;
    case Diagnostic::Level::Error: os << "ERROR "; break;
    case Diagnostic::Level::Info: os << "INFO "; break;
  }
  os << d.file << ":" << spanText(d.span) << " [" << d.rule << "] " << d.message;
  if (!d.countermodel.empty()) {
    os << "\n  countermodel:";
    std::istringstream in(d.countermodel);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) os << "\n  " << line;
  }
  return os.str();
}

RunReport run(const RunConfig& config) {
  RunReport report;
  std::ostringstream out;

  CheckOptions opts;
  opts.lambdaPool = config.lambdaPool;
  opts.instanceBudget = config.instanceBudget;
  opts.branchBudget = config.branchBudget;
  opts.verbose = config.verbose;
  if (config.solver.rfind("external:", 0) == 0) {
    opts.externalSolver = config.solver.substr(9);
    if (!std::filesystem::exists(opts.externalSolver)) {
      report.exitCode = 2;
      report.text = "ERROR external solver not found: " + opts.externalSolver + "\n";
      return report;
    }
  } else if (config.solver != "builtin") {
    report.exitCode = 2;
    report.text = "ERROR unknown solver mode: " + config.solver + "\n";
    return report;
  }

  bool allPass = true;
  for (const auto& path : config.inputs) {
    std::ifstream in(path);
    if (!in) {
      out << "ERROR " << path << ":0-0 [IO] cannot read file\n";
      allPass = false;
      continue;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    Program prog;
    try {
      prog = parseProgram(buf.str());
    } catch (const ParseError& e) {
      Diagnostic d;
      d.level = Diagnostic::Level::Error;
      d.file = path;
      d.span = e.span;
      d.rule = e.kind;
      d.message = e.what();
      out << renderDiagnostic(d) << "\n";
      allPass = false;
      continue;
    }

    CheckResult result = checkProgram(prog, opts, path);

    // Deterministic report ordering: by span, then obligation sequence.
    std::vector<const Obligation*> ordered;
    for (const auto& o : result.obligations)
      if (!o.internal) ordered.push_back(&o);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Obligation* a, const Obligation* b) {
                       if (a->span.lo != b->span.lo) return a->span.lo < b->span.lo;
                       return false;
                     });
    for (const auto* o : ordered) {
      out << renderObligation(*o, path) << "\n";
      if (o->verdict.kind != Verdict::Kind::Valid) allPass = false;
    }
    for (const auto& d : result.diagnostics) {
      if (d.level == Diagnostic::Level::Info && !config.verbose) continue;
      if (d.level == Diagnostic::Level::Fail ||
          d.level == Diagnostic::Level::Unknown)
        continue;  // already reflected in obligation lines
      out << renderDiagnostic(d) << "\n";
      if (d.level == Diagnostic::Level::Error) allPass = false;
    }

    if (!config.emitSmtDir.empty()) {
      std::filesystem::create_directories(config.emitSmtDir);
      for (const auto& o : result.obligations) {
        if (o.internal) continue;
        std::string name = baseName(path) + "." + o.declName + "." +
                           std::to_string(o.index) + ".smt2";
        std::ofstream smt(std::filesystem::path(config.emitSmtDir) / name);
        smt << emitSmtlib2(o.vc);
      }
    }
  }

  report.exitCode = allPass ? 0 : 1;
  report.text = out.str();
  return report;
}

}  // namespace rfl
