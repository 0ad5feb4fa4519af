#include "sovai/api.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sovai {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitSolver = 2;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", round12(v));
  return buf;
}

std::string fixed(double v, int width, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*f", width, prec, v);
  return buf;
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("$", "cannot read file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json parseJsonFile(const std::string& path) {
  const std::string text = readFile(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("$", path + ": malformed JSON: " + e.what());
  }
}

/// A file path, or "builtin:<id>" for one of the built-in archetypes.
Scenario scenarioArg(const std::string& arg) {
  constexpr std::string_view prefix = "builtin:";
  if (arg.rfind(prefix, 0) == 0) {
    const std::string id = arg.substr(prefix.size());
    if (auto s = builtinScenario(id)) return *s;
    throw ValidationError("$", "no built-in scenario '" + id + "'");
  }
  return loadScenarioFile(arg);
}

std::string solutionTable(const std::string& title, const EconomyModel& model,
                          const PlannerSolution& s) {
  std::ostringstream out;
  const MarginalReturns mr = marginalReturns(model, s.allocation);
  out << title << "\n";
  out << pad("pillar", 9) << pad("  allocation", 13) << pad("  capacity", 11) << "  marg.return\n";
  for (PillarId id : kAllPillars) {
    out << pad(pillarName(id), 9) << fixed(s.allocation[id], 13) << fixed(s.capacities[id], 11)
        << fixed(mr[id], 14) << "\n";
  }
  out << "\nbudget " << num(model.budget()) << "  spent " << num(s.allocation.total())
      << "  multiplier mu* " << num(s.multiplier) << "\n";
  out << "openness O* " << num(s.openness) << (s.flags.opennessAtBound ? " (at bound)" : "") << "\n";
  out << "welfare S " << fixed(s.welfare.S, 0) << "  G " << fixed(s.welfare.G, 0) << "  P "
      << fixed(s.welfare.P, 0) << "  W " << fixed(s.welfare.W, 0) << "\n";
  out << "max KKT residual " << num(s.kktResiduals.maxAbs());
  if (s.flags.mClipped) out << "  [model autonomy saturated]";
  out << (s.flags.globalityVerified ? "  [grid check passed]" : "  [grid check not run]") << "\n";
  return out.str();
}

std::string gateTable(const EconomyModel& model, const GateResult& g, double mu) {
  std::ostringstream out;
  out << "mu " << num(mu) << "  alpha " << num(model.alpha()) << "  bar mu/alpha "
      << (model.alpha() > 0.0 ? num(mu / model.alpha()) : std::string("undefined")) << "\n";
  const MarginalReturns mr = marginalReturns(model, g.allocation);
  out << pad("pillar", 9) << pad("  allocation", 13) << pad("  marg.return", 14) << "  verdict\n";
  for (PillarId id : kAllPillars) {
    out << pad(pillarName(id), 9) << fixed(g.allocation[id], 13) << fixed(mr[id], 14) << "  "
        << verdictName(g.verdicts[id]) << "\n";
  }
  out << "implied budget " << num(g.impliedBudget) << (g.allDeferred ? "  (all deferred)" : "") << "\n";
  return out.str();
}

std::string checklistTable(const std::vector<ChecklistDecision>& decisions) {
  std::ostringstream out;
  for (const auto& d : decisions) {
    out << (d.approved ? "approve " : "reject  ") << fixed(d.margin, 8, 2) << "  " << d.name << "\n";
  }
  if (decisions.empty()) out << "(empty checklist)\n";
  return out.str();
}

std::string ahpTable(const WeightResult& w) {
  std::ostringstream out;
  for (std::size_t i = 0; i < w.weights.size(); ++i) {
    const std::string label =
        w.weights.size() == kPillarCount ? std::string(pillarKey(kAllPillars[i])) : std::to_string(i);
    out << pad(label, 9) << num(w.weights[i]) << "\n";
  }
  out << "lambda_max " << num(w.principalEigenvalue) << "\n";
  out << "CR " << num(w.consistencyRatio) << (w.consistent ? " (consistent)" : " (inconsistent)") << "\n";
  return out.str();
}

std::string oracleTable(const OracleSolution& o) {
  std::ostringstream out;
  out << "grid resolution " << o.gridResolution << "\n";
  for (PillarId id : kAllPillars) out << pad(pillarName(id), 9) << fixed(o.allocation[id], 13) << "\n";
  out << "openness " << num(o.openness) << "\n";
  out << "welfare S " << fixed(o.welfare.S, 0) << "  W " << fixed(o.welfare.W, 0) << "\n";
  return out.str();
}

std::string compareTable(const ComparisonReport& r) {
  std::ostringstream out;
  out << pad("", 22) << pad(r.idA, 16) << pad(r.idB, 16) << "delta\n";
  auto line = [&](const std::string& label, double a, double b) {
    out << pad(label, 22) << pad(num(a), 16) << pad(num(b), 16) << num(b - a) << "\n";
  };
  for (const auto& d : r.deltas) line(d.path, d.a, d.b);
  out << "\n";
  for (PillarId id : kAllPillars) {
    line("x_" + std::string(pillarKey(id)), r.a.allocation[id], r.b.allocation[id]);
  }
  line("openness O*", r.a.openness, r.b.openness);
  line("multiplier mu*", r.a.multiplier, r.b.multiplier);
  line("S", r.a.welfare.S, r.b.welfare.S);
  line("W", r.a.welfare.W, r.b.welfare.W);
  out << "\nwelfare gap drivers (one at a time)\n";
  if (r.drivers.empty()) out << "  none: parameters are identical\n";
  for (const auto& d : r.drivers) {
    out << "  " << pad(d.parameter, 22) << (d.error.empty() ? num(d.welfareEffect) : "error: " + d.error)
        << "\n";
  }
  return out.str();
}

std::vector<double> parseValues(const std::string& list) {
  std::vector<double> out;
  std::vector<ValidationIssue> issues;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    const auto e = tok.find_last_not_of(" \t");
    tok = b == std::string::npos ? "" : tok.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size()) {
      issues.push_back({"values[" + std::to_string(out.size()) + "]", "not a number: '" + tok + "'"});
    }
    out.push_back(v);
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return out;
}

void printIssues(const ValidationError& e, std::ostream& err) {
  err << "error: validation failed\n";
  for (const auto& i : e.issues()) err << "  " << i.path << ": " << i.reason << "\n";
}

}  // namespace

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planner's model for sovereign AI budgets: allocation, openness, spending gate.",
               "sovai"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SolveOptions opts;
  auto solverFlags = [&](CLI::App* sub) {
    sub->add_option("--seed", opts.randomSeed, "random seed for the restarts");
    sub->add_option("--tol", opts.tolerance, "KKT tolerance")->check(CLI::Range(1e-15, 0.5));
  };

  std::string file, fileB, format;
  auto formatFlags = [&](CLI::App* sub, std::vector<std::string> allowed) {
    auto* group = sub->add_option_group("format");
    for (const auto& f : allowed) {
      group->add_flag_callback("--" + f, [&format, f] { format = f; }, "output as " + f);
    }
    group->require_option(0, 1);
  };

  auto* solve = app.add_subcommand("solve", "solve the planner's problem on the scenario's budget");
  solve->add_option("scenario", file, "scenario file or builtin:<id>")->required();
  formatFlags(solve, {"json", "table"});
  solverFlags(solve);

  OpennessParams op{1.0, 1.0, 0.0, 0.0, 1.0};
  auto* openness = app.add_subcommand("openness", "closed-form optimal openness");
  openness->add_option("--alpha", op.sovereigntyWeight, "sovereignty weight")->required();
  openness->add_option("--g", op.benefitScale, "benefit scale")->required();
  openness->add_option("--k", op.benefitCurvature, "benefit curvature")->required();
  openness->add_option("--lambda", op.riskSensitivity, "risk sensitivity")->required();
  openness->add_option("--p", op.exposureSlope, "exposure slope")->required();
  formatFlags(openness, {"json"});

  std::optional<double> mu;
  auto* gate = app.add_subcommand("gate", "spending at an exogenous price of funds");
  gate->add_option("scenario", file, "scenario file or builtin:<id>")->required();
  gate->add_option("--mu", mu, "price of public funds (default: the scenario's exogenous mu)");
  formatFlags(gate, {"json", "table"});
  solverFlags(gate);

  std::string observations, period;
  auto* dashboard = app.add_subcommand("dashboard", "marginal-returns dashboard for one period");
  dashboard->add_option("scenario", file, "scenario file or builtin:<id>")->required();
  dashboard->add_option("--observations", observations, "metric observations (JSON)");
  dashboard->add_option("--period", period, "period label, e.g. 2025-Q3");
  formatFlags(dashboard, {"json", "csv", "table"});
  solverFlags(dashboard);

  auto* checklist = app.add_subcommand("checklist", "evaluate the scenario's openness checklist");
  checklist->add_option("scenario", file, "scenario file or builtin:<id>")->required();
  formatFlags(checklist, {"json", "table"});

  auto* ahp = app.add_subcommand("ahp", "weights from a pairwise-comparison matrix");
  ahp->add_option("matrix", file, "JSON matrix, or whitespace rows with entries like 3 or 1/3")
      ->required();
  formatFlags(ahp, {"json", "table"});

  std::string param, values;
  auto* sweep = app.add_subcommand("sweep", "one-parameter sensitivity sweep");
  sweep->add_option("scenario", file, "scenario file or builtin:<id>")->required();
  sweep->add_option("--param", param, "parameter path, e.g. lambda or pillars.data.a")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  formatFlags(sweep, {"json", "csv"});
  solverFlags(sweep);

  auto* compare = app.add_subcommand("compare", "compare two scenarios");
  compare->add_option("a", file, "scenario file or builtin:<id>")->required();
  compare->add_option("b", fileB, "scenario file or builtin:<id>")->required();
  formatFlags(compare, {"json", "table"});
  solverFlags(compare);

  int resolution = 60;
  auto* oracle = app.add_subcommand("oracle", "exhaustive grid search (verification)");
  oracle->add_option("scenario", file, "scenario file or builtin:<id>")->required();
  oracle->add_option("--resolution", resolution, "grid points per axis")->check(CLI::PositiveNumber);
  formatFlags(oracle, {"json", "table"});
  solverFlags(oracle);

  std::string addr = "127.0.0.1:8080";
  std::string storePath = "scenarios";
  int timeout = 30;
  bool noBuiltins = false;
  auto* serve = app.add_subcommand("serve", "run the HTTP JSON service");
  serve->add_option("--addr", addr, "host:port to bind");
  serve->add_option("--store", storePath, "scenario store directory");
  serve->add_option("--timeout", timeout, "request read/write timeout in seconds")
      ->check(CLI::PositiveNumber);
  serve->add_flag("--no-builtins", noBuiltins, "do not add the built-in scenarios to the store");
  solverFlags(serve);

  std::string builtinId, outDir;
  auto* builtin = app.add_subcommand("builtin", "list, print or export the built-in scenarios");
  builtin->add_option("id", builtinId, "scenario id to print");
  builtin->add_option("--out", outDir, "write every built-in scenario to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    opts.validate();
    if (*solve) {
      const Scenario s = scenarioArg(file);
      const PlannerSolution sol = solveJoint(s.model, opts);
      if (format == "json") {
        out << dumpJson(toJson(sol));
      } else {
        out << solutionTable("Scenario " + s.id + " (" + s.name + ")", s.model, sol);
      }
    } else if (*openness) {
      op.validate();
      const OpennessChoice o = optimalOpenness(op);
      if (format == "json") {
        out << dumpJson(toJson(o));
      } else {
        out << num(o.O) << "\n";
      }
    } else if (*gate) {
      const Scenario s = scenarioArg(file);
      double price = 0.0;
      if (mu) {
        price = *mu;
      } else if (s.muMode.isExogenous()) {
        price = s.muMode.mu;
      } else {
        throw ValidationError("--mu", "required: the scenario has no exogenous mu");
      }
      if (!(price > 0.0)) throw ValidationError("--mu", "must be > 0");
      const GateResult g = gateModeAllocation(s.model, price, opts);
      if (format == "json") {
        out << dumpJson(toJson(g, price, s.model.alpha()));
      } else {
        out << gateTable(s.model, g, price);
      }
    } else if (*dashboard) {
      const Scenario s = scenarioArg(file);
      std::vector<MetricObservation> obs;
      if (!observations.empty()) obs = loadObservations(parseJsonFile(observations));
      const DashboardReport r = marginalReturnsDashboard(s, obs, opts, period);
      if (format == "json") {
        out << dumpJson(toJson(r));
      } else if (format == "csv") {
        out << dashboardCsv(r);
      } else {
        out << dashboardTable(r);
      }
      if (r.solverFailure) {
        err << "error: solver failure: " << *r.solverFailure << "\n";
        return kExitSolver;
      }
    } else if (*checklist) {
      const Scenario s = scenarioArg(file);
      const auto decisions = evaluateChecklist(s.checklist);
      out << (format == "json" ? dumpJson(toJson(decisions)) : checklistTable(decisions));
    } else if (*ahp) {
      const std::string text = readFile(file);
      const auto first = text.find_first_not_of(" \t\r\n");
      PairwiseMatrix matrix = [&] {
        if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
          try {
            return matrixFromJson(Json::parse(text));
          } catch (const Json::parse_error& e) {
            throw ValidationError("$", std::string("malformed JSON: ") + e.what());
          }
        }
        return matrixFromText(text);
      }();
      const WeightResult w = ahpWeights(matrix);
      out << (format == "json" ? dumpJson(toJson(w)) : ahpTable(w));
    } else if (*sweep) {
      const Scenario s = scenarioArg(file);
      const SweepTable t = sensitivity(s, param, parseValues(values), opts);
      out << (format == "json" ? dumpJson(toJson(t)) : sensitivityCsv(t));
    } else if (*compare) {
      const ComparisonReport r = compareScenarios(scenarioArg(file), scenarioArg(fileB), opts);
      out << (format == "json" ? dumpJson(toJson(r)) : compareTable(r));
    } else if (*oracle) {
      const Scenario s = scenarioArg(file);
      const OracleSolution o = gridOracle(s.model, resolution);
      out << (format == "json" ? dumpJson(toJson(o)) : oracleTable(o));
    } else if (*serve) {
      ServiceConfig config;
      const auto colon = addr.rfind(':');
      if (colon == std::string::npos) throw ValidationError("--addr", "expected host:port");
      config.host = addr.substr(0, colon);
      try {
        config.port = std::stoi(addr.substr(colon + 1));
      } catch (const std::exception&) {
        throw ValidationError("--addr", "bad port in '" + addr + "'");
      }
      config.storePath = storePath;
      config.solverDefaults = opts;
      config.timeoutSeconds = timeout;
      config.seedBuiltins = !noBuiltins;
      ScenarioStore store(config.storePath);
      for (const auto& skipped : store.skipped()) err << "warning: skipped " << skipped << "\n";
      if (config.seedBuiltins) store.seed(builtinScenarios());
      Service service(store, config.solverDefaults);
      HttpServer server(service, config, err);
      const int port = server.bind();
      if (port < 0) {
        err << "error: cannot bind " << addr << "\n";
        return kExitInvalid;
      }
      err << "listening on http://" << config.host << ":" << port << " (store " << storePath << ")"
          << std::endl;
      server.listen();
    } else if (*builtin) {
      if (!outDir.empty()) {
        std::filesystem::create_directories(outDir);
        for (const auto& s : builtinScenarios()) {
          const auto path = std::filesystem::path(outDir) / (s.id + ".json");
          std::ofstream(path, std::ios::binary) << dumpScenario(s);
          out << path.string() << "\n";
        }
      } else if (builtinId.empty()) {
        for (const auto& s : builtinScenarios()) out << s.id << "\t" << s.name << "\n";
      } else if (auto s = builtinScenario(builtinId)) {
        out << dumpScenario(*s);
      } else {
        throw ValidationError("id", "no built-in scenario '" + builtinId + "'");
      }
    }
  } catch (const ValidationError& e) {
    printIssues(e, err);
    return kExitInvalid;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SolverFailure& e) {
    err << "error: solver failure: " << e.what() << "\n"
        << dumpJson(toJson(e.bestIterate()));
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace sovai
