// Python bindings for the safety-analysis core. The module exposes the same
// operations as the command-line tool, returning plain dicts shaped like the
// tool's JSON reports so results can be compared across the two front ends.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssmcheck/dcca.hpp"
#include "ssmcheck/diagnostics.hpp"
#include "ssmcheck/failures.hpp"
#include "ssmcheck/parser.hpp"
#include "ssmcheck/predicate.hpp"
#include "ssmcheck/quant.hpp"
#include "ssmcheck/state_space.hpp"

namespace py = pybind11;
using namespace ssmcheck;

namespace {

ComposeFlavor flavorFromString(const std::string& s) {
    if (s == "qualitative") return ComposeFlavor::Qualitative;
    if (s == "dtmc") return ComposeFlavor::Dtmc;
    if (s == "mdp") return ComposeFlavor::Mdp;
    throw py::value_error("flavor must be 'qualitative', 'dtmc', or 'mdp', not '" + s + "'");
}

OccurrenceSemantics occurrenceFromString(const std::string& s) {
    if (s == "current") return OccurrenceSemantics::Current;
    if (s == "ever") return OccurrenceSemantics::Ever;
    throw py::value_error("occurrence must be 'current' or 'ever', not '" + s + "'");
}

// Prepare for the probabilistic semantics and build the explicit chain.
std::pair<PreparedModel, StateSpace> composeDtmc(const SystemModel& declared, uint64_t stateCap) {
    PreparedModel prepared = prepareForAnalysis(declared, {AnalysisMode::Dtmc, false});
    ComposeCaps caps;
    caps.stateCap = stateCap;
    StateSpace space = compose(prepared.model, ComposeFlavor::Dtmc, caps);
    return {std::move(prepared), std::move(space)};
}

py::dict pointToDict(const ApproximationPoint& p) {
    py::dict d;
    d["t_hours"] = p.tHours;
    d["steps"] = p.steps;
    d["t_hours_rounded"] = p.tHoursRounded;
    d["exp_cdf"] = p.exponentialCdf;
    d["geom_cdf"] = p.geometricCdfValue;
    d["abs_err"] = p.absoluteError;
    d["rel_err"] = std::isnan(p.relativeError) ? py::object(py::none())
                                               : py::object(py::float_(p.relativeError));
    return d;
}

// Tag type for the capacity exception; never thrown itself.
struct CapacityTag {};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Safety analysis of synchronous parallel systems: fault injection, "
              "minimal critical sets, and bounded-horizon hazard probabilities.";

    static py::exception<CapacityTag> capacityError(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Capacity) {
                PyErr_SetString(capacityError.ptr(), e.what());
            } else if (e.kind() == ErrorKind::Internal) {
                PyErr_SetString(PyExc_RuntimeError, e.what());
            } else {
                PyErr_SetString(PyExc_ValueError, e.what());
            }
        }
    });

    py::class_<SystemModel>(m, "Model", "A parsed system model (automata, predicates, "
                                        "failure modes, hazard).")
        .def_property_readonly("name", [](const SystemModel& s) { return s.name; })
        .def_property_readonly("dt_seconds", [](const SystemModel& s) { return s.dtSeconds; })
        .def_property_readonly("automata",
                               [](const SystemModel& s) {
                                   std::vector<std::string> names;
                                   for (const auto& a : s.automata) names.push_back(a.name);
                                   return names;
                               })
        .def_property_readonly("failure_modes",
                               [](const SystemModel& s) {
                                   std::vector<std::string> names;
                                   for (const auto& f : s.failures) names.push_back(f.name);
                                   return names;
                               })
        .def_property_readonly("hazard",
                               [](const SystemModel& s) -> py::object {
                                   if (!s.hazard) return py::none();
                                   return py::str(printPredicate(**s.hazard));
                               })
        .def("__repr__", [](const SystemModel& s) {
            return "<ssmcheck.Model '" + s.name + "': " + std::to_string(s.automata.size()) +
                   " automata, " + std::to_string(s.failures.size()) + " failure modes>";
        });

    m.def("parse_model",
          [](const std::string& text, const std::string& name) { return parseModel(text, name); },
          py::arg("text"), py::arg("name") = "model",
          "Parse model text into a Model. Raises ValueError on malformed input.");

    m.def("load_model", [](const std::string& path) { return loadModel(path); }, py::arg("path"),
          "Load a model from a file.");

    m.def("print_model", [](const SystemModel& model) { return printModel(model); },
          py::arg("model"),
          "Render the model back into its concrete syntax (useful after pin_failures).");

    m.def("validate",
          [](const SystemModel& model, const std::string& flavorText, uint64_t stateCap) {
              ComposeFlavor flavor = flavorFromString(flavorText);
              std::vector<Diagnostic> diags;
              {
                  py::gil_scoped_release release;
                  ComposeCaps caps;
                  caps.stateCap = stateCap;
                  diags = validateModel(model, flavor, /*requireHazard=*/false, caps);
              }
              py::list errors;
              py::list warnings;
              bool ok = true;
              for (const auto& d : diags) {
                  if (d.severity == Diagnostic::Severity::Error) {
                      ok = false;
                      errors.append(formatDiagnostic(d));
                  } else {
                      warnings.append(formatDiagnostic(d));
                  }
              }
              py::dict r;
              r["ok"] = ok;
              r["errors"] = errors;
              r["warnings"] = warnings;
              return r;
          },
          py::arg("model"), py::arg("flavor") = "dtmc",
          py::arg("state_cap") = uint64_t(10'000'000),
          "Check the model for the given semantics; returns {'ok', 'errors', 'warnings'}.");

    m.def("dcca",
          [](const SystemModel& model, const std::string& occurrenceText, bool witnesses,
             uint64_t stateCap) {
              DccaOptions opts;
              opts.occurrence = occurrenceFromString(occurrenceText);
              opts.witnesses = witnesses;
              opts.stateCap = stateCap;
              DccaResult res = [&] {
                  py::gil_scoped_release release;
                  return DccaAnalyzer(model, opts).run();
              }();
              py::dict r;
              r["hazard"] = res.hazardText;
              r["failure_modes"] = res.failureModes;
              r["empty_set_critical"] = res.emptySetCritical;
              r["minimal_critical_sets"] = res.minimalCriticalSets;
              py::list ws;
              for (const auto& w : res.witnesses) {
                  py::dict wd;
                  wd["set"] = w.modes;
                  py::list trace;
                  for (const auto& step : w.steps) {
                      py::dict sd;
                      for (size_t i = 0; i < res.automataNames.size(); ++i) {
                          sd[py::str(res.automataNames[i])] = step.localStates[i];
                      }
                      trace.append(sd);
                  }
                  wd["trace"] = trace;
                  ws.append(wd);
              }
              r["witnesses"] = ws;
              py::dict stats;
              stats["states"] = res.stats.states;
              stats["transitions"] = res.stats.transitions;
              stats["checks_performed"] = res.stats.checksPerformed;
              stats["subsets_pruned"] = res.stats.subsetsPruned;
              stats["sets_found"] = res.stats.setsFound;
              r["stats"] = stats;
              return r;
          },
          py::arg("model"), py::arg("occurrence") = "current", py::arg("witnesses") = true,
          py::arg("state_cap") = uint64_t(10'000'000),
          "Find all minimal critical sets of failure modes for the declared hazard.");

    m.def("hazard_probability",
          [](const SystemModel& model, long long k, unsigned workers, uint64_t stateCap) {
              py::gil_scoped_release release;
              auto [prepared, space] = composeDtmc(model, stateCap);
              IterationOptions iter;
              iter.workers = workers;
              return hazardProbability(prepared.model, space, k, iter);
          },
          py::arg("model"), py::arg("k"), py::arg("workers") = 1,
          py::arg("state_cap") = uint64_t(10'000'000),
          "P(hazard within k steps) from the initial state, by value iteration.");

    m.def("hazard_curve",
          [](const SystemModel& model, long long k, long long stride, unsigned workers,
             uint64_t stateCap) {
              std::vector<CurvePoint> curve = [&] {
                  py::gil_scoped_release release;
                  auto [prepared, space] = composeDtmc(model, stateCap);
                  IterationOptions iter;
                  iter.workers = workers;
                  return hazardCurve(prepared.model, space, k, stride, iter);
              }();
              py::list out;
              for (const auto& pt : curve) {
                  py::dict d;
                  d["k"] = pt.k;
                  d["t_seconds"] = pt.tSeconds;
                  d["probability"] = pt.probability;
                  out.append(d);
              }
              return out;
          },
          py::arg("model"), py::arg("k"), py::arg("stride") = 1, py::arg("workers") = 1,
          py::arg("state_cap") = uint64_t(10'000'000),
          "Hazard probability at step 0, every `stride` steps, and k.");

    m.def("fta_bound",
          [](const SystemModel& model, long long k,
             const std::map<std::string, double>& demandBounds, uint64_t stateCap) {
              DccaOptions opts;
              opts.witnesses = false;
              opts.stateCap = stateCap;
              std::vector<std::string> warnings;
              auto [sets, modes] = [&] {
                  py::gil_scoped_release release;
                  DccaResult res = DccaAnalyzer(model, opts).run();
                  std::vector<ModeHorizonProbability> mhp =
                      modeHorizonProbabilities(model, k, demandBounds, warnings);
                  return std::make_pair(std::move(res.minimalCriticalSets), std::move(mhp));
              }();
              py::list terms;
              for (const auto& set : sets) {
                  double term = ftaBound({set}, modes);
                  py::dict t;
                  t["set"] = set;
                  t["probability"] = term;
                  terms.append(t);
              }
              py::dict r;
              r["terms"] = terms;
              r["bound"] = ftaBound(sets, modes);
              r["warnings"] = warnings;
              return r;
          },
          py::arg("model"), py::arg("k"),
          py::arg("demand_bounds") = std::map<std::string, double>{},
          py::arg("state_cap") = uint64_t(10'000'000),
          "Fault-tree upper bound on the hazard probability over k steps: the sum over "
          "minimal critical sets of the product of per-mode occurrence probabilities.");

    m.def("approximation_error",
          [](double ratePerHour, double dtSeconds, double tHours) {
              return pointToDict(approximationError(ratePerHour, dtSeconds, tHours));
          },
          py::arg("rate_per_hour"), py::arg("dt_seconds"), py::arg("t_hours"),
          "Discretization error of the per-step geometric model against the "
          "continuous-time exponential distribution at one horizon.");

    m.def("rate_to_step_probability", &rateToStepProbability, py::arg("rate_per_hour"),
          py::arg("dt_seconds"),
          "Probability that a rate-driven event occurs during one step: rate * dt / 3600.");

    m.def("geometric_cdf", &geometricCdf, py::arg("p"), py::arg("k"),
          "P(first occurrence within k steps) at per-step probability p.");

    m.def("monte_carlo",
          [](const SystemModel& model, long long k, uint64_t samples, uint64_t seed,
             uint64_t stateCap) {
              MonteCarloResult res = [&] {
                  py::gil_scoped_release release;
                  auto [prepared, space] = composeDtmc(model, stateCap);
                  return monteCarloHazard(prepared.model, space, k, samples, seed);
              }();
              py::dict r;
              r["samples"] = res.samples;
              r["hits"] = res.hits;
              r["estimate"] = res.estimate;
              r["half_width_95"] = res.halfWidth95;
              return r;
          },
          py::arg("model"), py::arg("k"), py::arg("samples") = uint64_t(100'000),
          py::arg("seed") = uint64_t(1), py::arg("state_cap") = uint64_t(10'000'000),
          "Estimate the k-step hazard probability by forward simulation. "
          "Deterministic for a fixed seed.");

    m.def("pin_failures",
          [](const SystemModel& model, const std::map<std::string, bool>& pinned) {
              return pinFailures(model, pinned);
          },
          py::arg("model"), py::arg("pinned"),
          "Return a copy of the model with the named failure modes fixed to present "
          "(True) or absent (False); their declarations are removed.");

    m.def("check_conservative",
          [](const SystemModel& original, const SystemModel& extended,
             const std::vector<std::string>& observables, uint64_t stateCap) {
              ConservativeResult res = [&] {
                  py::gil_scoped_release release;
                  ConservativeOptions opts;
                  opts.stateCap = stateCap;
                  return checkConservative(original, extended, observables, opts);
              }();
              py::dict r;
              r["equivalent"] = res.equivalent;
              r["note"] = res.note;
              return r;
          },
          py::arg("original"), py::arg("extended"), py::arg("observables"),
          py::arg("state_cap") = uint64_t(10'000'000),
          "Check that `extended` shows the same behavior as `original` on the named "
          "predicates, by bisimulation over the possible-step graphs.");
}
