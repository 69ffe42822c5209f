// Command-line front end: parses a model file, runs the requested analysis,
// and emits a machine-readable report (JSON, or CSV where noted). Reports are
// byte-identical for identical inputs; anything timing-dependent only appears
// behind --timings.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssmcheck/dcca.hpp"
#include "ssmcheck/failures.hpp"
#include "ssmcheck/parser.hpp"
#include "ssmcheck/quant.hpp"
#include "ssmcheck/report.hpp"
#include "ssmcheck/state_space.hpp"

namespace {

using namespace ssmcheck;
using Clock = std::chrono::steady_clock;

struct Config {
    std::string modelPath;
    std::string outPath;
    long long k = -1;
    std::string timeText;
    std::string flavorText = "dtmc";
    std::string occurrenceText = "current";
    bool noWitnesses = false;
    unsigned workers = 0;  // 0 = available parallelism
    uint64_t stateCap = 10'000'000;
    bool timings = false;
    long long curveStride = 0;
    std::string curveOut;
    std::vector<std::string> demandBounds;
    bool boundOnly = false;
    uint64_t samples = 100000;
    uint64_t seed = 1;
    // approx-error
    double ratePerHour = 0.0;
    std::string dtText;
    std::string timesText;
    std::string sweepText;
    std::string formatText = "csv";
};

void writeOut(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::fwrite(content.data(), 1, content.size(), stdout);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throwError(ErrorKind::Usage, "cannot open '" + path + "' for writing");
    }
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) {
        throwError(ErrorKind::Usage, "writing to '" + path + "' failed");
    }
}

// Resolve -k / --time into a step count. Exactly one must be given; a
// duration must be an integral multiple of the model's step length.
long long horizonSteps(const SystemModel& model, const Config& cfg) {
    const bool haveK = cfg.k >= 0;
    const bool haveTime = !cfg.timeText.empty();
    if (haveK == haveTime) {
        throwError(ErrorKind::Usage, "exactly one of -k and --time must be given");
    }
    if (haveK) return cfg.k;
    double seconds = parseDurationSeconds(cfg.timeText);
    double ratio = seconds / model.dtSeconds;
    long long k = std::llround(ratio);
    if (k < 0 || std::fabs(ratio - static_cast<double>(k)) >
                     1e-9 * std::max(1.0, std::fabs(ratio))) {
        throwError(ErrorKind::Usage,
                   "the duration " + cfg.timeText + " is not an integral multiple of the step length dt = " +
                       formatDouble(model.dtSeconds) + " s");
    }
    return k;
}

ComposeFlavor parseFlavor(const std::string& text) {
    if (text == "dtmc") return ComposeFlavor::Dtmc;
    if (text == "mdp") return ComposeFlavor::Mdp;
    if (text == "qualitative") return ComposeFlavor::Qualitative;
    throwError(ErrorKind::Usage, "unknown flavor '" + text + "' (expected dtmc, mdp, or qualitative)");
}

OccurrenceSemantics parseOccurrence(const std::string& text) {
    if (text == "current") return OccurrenceSemantics::Current;
    if (text == "ever") return OccurrenceSemantics::Ever;
    throwError(ErrorKind::Usage, "unknown occurrence semantics '" + text + "' (expected current or ever)");
}

std::map<std::string, double> parseDemandBounds(const std::vector<std::string>& entries) {
    std::map<std::string, double> bounds;
    for (const auto& e : entries) {
        auto eq = e.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == e.size()) {
            throwError(ErrorKind::Usage, "demand bounds take the form NAME=VALUE, got '" + e + "'");
        }
        std::string name = e.substr(0, eq);
        std::string valueText = e.substr(eq + 1);
        char* end = nullptr;
        double value = std::strtod(valueText.c_str(), &end);
        if (end == valueText.c_str() || *end != '\0') {
            throwError(ErrorKind::Usage, "'" + valueText + "' is not a number in demand bound '" + e + "'");
        }
        bounds[name] = value;
    }
    return bounds;
}

std::string hazardName(const SystemModel& model) {
    return model.hazardName.empty() ? "H" : model.hazardName;
}

int cmdValidate(const Config& cfg) {
    SystemModel model = loadModel(cfg.modelPath);
    ComposeFlavor flavor = parseFlavor(cfg.flavorText);
    ComposeCaps caps;
    caps.stateCap = cfg.stateCap;
    auto diags = validateModel(model, flavor, /*requireHazard=*/false, caps);
    bool ok = true;
    for (const auto& d : diags) {
        std::cerr << formatDiagnostic(d) << "\n";
        if (d.severity == Diagnostic::Severity::Error) ok = false;
    }
    JsonWriter w;
    w.beginObject();
    w.key("schema").value(1);
    w.key("operation").value("validate");
    w.key("model").value(model.name);
    w.key("flavor").value(cfg.flavorText);
    w.key("ok").value(ok);
    w.key("errors").beginArray();
    for (const auto& d : diags) {
        if (d.severity == Diagnostic::Severity::Error) w.value(formatDiagnostic(d));
    }
    w.endArray();
    w.key("warnings").beginArray();
    for (const auto& d : diags) {
        if (d.severity == Diagnostic::Severity::Warning) w.value(formatDiagnostic(d));
    }
    w.endArray();
    w.endObject();
    writeOut(cfg.outPath, w.str() + "\n");
    return ok ? 0 : 1;
}

int cmdDcca(const Config& cfg) {
    SystemModel model = loadModel(cfg.modelPath);
    DccaOptions options;
    options.occurrence = parseOccurrence(cfg.occurrenceText);
    options.witnesses = !cfg.noWitnesses;
    options.stateCap = cfg.stateCap;
    auto t0 = Clock::now();
    DccaAnalyzer analyzer(model, options);
    DccaResult res = analyzer.run();
    auto t1 = Clock::now();

    JsonWriter w;
    w.beginObject();
    w.key("schema").value(1);
    w.key("operation").value("dcca");
    w.key("model").value(model.name);
    w.key("hazard").value(res.hazardText);
    w.key("occurrence").value(cfg.occurrenceText);
    w.key("failure_modes").beginArray();
    for (const auto& m : res.failureModes) w.value(m);
    w.endArray();
    w.key("empty_set_critical").value(res.emptySetCritical);
    w.key("minimal_critical_sets").beginArray();
    for (const auto& set : res.minimalCriticalSets) {
        w.beginArray();
        for (const auto& name : set) w.value(name);
        w.endArray();
    }
    w.endArray();
    w.key("witnesses").beginArray();
    for (const auto& wit : res.witnesses) {
        w.beginObject();
        w.key("set").beginArray();
        for (const auto& name : wit.modes) w.value(name);
        w.endArray();
        w.key("trace").beginArray();
        for (const auto& step : wit.steps) {
            w.beginObject();
            for (size_t i = 0; i < res.automataNames.size(); ++i) {
                w.key(res.automataNames[i]).value(step.localStates[i]);
            }
            w.endObject();
        }
        w.endArray();
        w.endObject();
    }
    w.endArray();
    w.key("stats").beginObject();
    w.key("states").value(res.stats.states);
    w.key("transitions").value(res.stats.transitions);
    w.key("checks_performed").value(res.stats.checksPerformed);
    w.key("subsets_pruned").value(res.stats.subsetsPruned);
    w.key("sets_found").value(res.stats.setsFound);
    w.endObject();
    if (cfg.timings) {
        w.key("runtime_ms").value(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    w.endObject();
    writeOut(cfg.outPath, w.str() + "\n");
    return 0;
}

int cmdHazard(const Config& cfg) {
    SystemModel model = loadModel(cfg.modelPath);
    long long k = horizonSteps(model, cfg);
    PrepareOptions po;
    po.mode = AnalysisMode::Dtmc;
    ComposeCaps caps;
    caps.stateCap = cfg.stateCap;
    IterationOptions iter;
    iter.workers = cfg.workers;

    auto t0 = Clock::now();
    PreparedModel prepared = prepareForAnalysis(model, po);
    StateSpace space = compose(prepared.model, ComposeFlavor::Dtmc, caps);
    double probability;
    if (cfg.curveStride > 0) {
        if (cfg.curveOut.empty()) {
            throwError(ErrorKind::Usage, "--curve needs --curve-out FILE for the CSV");
        }
        auto curve = hazardCurve(prepared.model, space, k, cfg.curveStride, iter);
        probability = curve.back().probability;
        std::string csv = "k,t_seconds,probability\n";
        for (const auto& p : curve) {
            csv += std::to_string(p.k);
            csv += ',';
            csv += formatReportDouble(p.tSeconds);
            csv += ',';
            csv += formatReportDouble(p.probability);
            csv += '\n';
        }
        writeOut(cfg.curveOut, csv);
    } else {
        probability = hazardProbability(prepared.model, space, k, iter);
    }
    auto t1 = Clock::now();

    JsonWriter w;
    w.beginObject();
    w.key("schema").value(1);
    w.key("operation").value("hazard");
    w.key("model").value(model.name);
    w.key("hazard").value(hazardName(model));
    w.key("k").value(k);
    w.key("t").value(static_cast<double>(k) * model.dtSeconds);
    w.key("probability").value(probability);
    if (cfg.timings) {
        w.key("runtime_ms").value(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    w.endObject();
    writeOut(cfg.outPath, w.str() + "\n");
    return 0;
}

int cmdFtaBound(const Config& cfg) {
    SystemModel model = loadModel(cfg.modelPath);
    long long k = horizonSteps(model, cfg);
    std::map<std::string, double> bounds = parseDemandBounds(cfg.demandBounds);

    DccaOptions dopt;
    dopt.occurrence = parseOccurrence(cfg.occurrenceText);
    dopt.witnesses = false;
    dopt.stateCap = cfg.stateCap;
    DccaAnalyzer analyzer(model, dopt);
    DccaResult sets = analyzer.run();
    if (sets.emptySetCritical) {
        throwError(ErrorKind::Validation,
                   "the hazard is reachable with no failure mode active; fix the functional model first");
    }

    std::vector<std::string> warnings;
    auto modes = modeHorizonProbabilities(model, k, bounds, warnings);
    double bound = ftaBound(sets.minimalCriticalSets, modes);

    std::optional<double> modelChecked;
    if (!cfg.boundOnly) {
        PrepareOptions po;
        po.mode = AnalysisMode::Dtmc;
        ComposeCaps caps;
        caps.stateCap = cfg.stateCap;
        IterationOptions iter;
        iter.workers = cfg.workers;
        PreparedModel prepared = prepareForAnalysis(model, po);
        StateSpace space = compose(prepared.model, ComposeFlavor::Dtmc, caps);
        modelChecked = hazardProbability(prepared.model, space, k, iter);
    }

    for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";

    JsonWriter w;
    w.beginObject();
    w.key("schema").value(1);
    w.key("operation").value("fta-bound");
    w.key("model").value(model.name);
    w.key("hazard").value(hazardName(model));
    w.key("k").value(k);
    w.key("t").value(static_cast<double>(k) * model.dtSeconds);
    w.key("terms").beginArray();
    {
        std::map<std::string, double> prob;
        for (const auto& m : modes) prob.emplace(m.name, m.probability);
        for (const auto& set : sets.minimalCriticalSets) {
            double term = 1.0;
            for (const auto& name : set) term *= prob.at(name);
            w.beginObject();
            w.key("set").beginArray();
            for (const auto& name : set) w.value(name);
            w.endArray();
            w.key("probability").value(term);
            w.endObject();
        }
    }
    w.endArray();
    w.key("bound").value(bound);
    if (modelChecked) {
        w.key("model_checked").value(*modelChecked);
        w.key("bound_holds").value(bound >= *modelChecked);
    }
    w.key("warnings").beginArray();
    for (const auto& warning : warnings) w.value(warning);
    w.endArray();
    w.endObject();
    writeOut(cfg.outPath, w.str() + "\n");
    return 0;
}

int cmdApproxError(const Config& cfg) {
    if (!(cfg.ratePerHour > 0.0)) {
        throwError(ErrorKind::Usage, "--rate must be a positive failure rate per hour");
    }
    if (cfg.dtText.empty()) {
        throwError(ErrorKind::Usage, "--dt is required (e.g. --dt 1s)");
    }
    double dtSeconds = parseDurationSeconds(cfg.dtText);
    std::vector<double> times;
    if (!cfg.timesText.empty() && !cfg.sweepText.empty()) {
        throwError(ErrorKind::Usage, "give either --times or --sweep, not both");
    }
    if (!cfg.timesText.empty()) {
        size_t pos = 0;
        while (pos < cfg.timesText.size()) {
            size_t comma = cfg.timesText.find(',', pos);
            std::string piece = cfg.timesText.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            char* end = nullptr;
            double t = std::strtod(piece.c_str(), &end);
            if (end == piece.c_str() || *end != '\0') {
                throwError(ErrorKind::Usage, "'" + piece + "' is not a number in --times");
            }
            times.push_back(t);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    } else if (!cfg.sweepText.empty()) {
        double lo = 0.0, hi = 0.0;
        long points = 0;
        if (std::sscanf(cfg.sweepText.c_str(), "%lf:%lf:%ld", &lo, &hi, &points) != 3 ||
            !(lo > 0.0) || !(hi > lo) || points < 2) {
            throwError(ErrorKind::Usage,
                       "--sweep takes MIN:MAX:POINTS with 0 < MIN < MAX and POINTS >= 2");
        }
        for (long i = 0; i < points; ++i) {
            double f = static_cast<double>(i) / static_cast<double>(points - 1);
            times.push_back(lo * std::pow(hi / lo, f));
        }
    } else {
        throwError(ErrorKind::Usage, "one of --times or --sweep is required");
    }

    std::vector<ApproximationPoint> points;
    points.reserve(times.size());
    for (double t : times) points.push_back(approximationError(cfg.ratePerHour, dtSeconds, t));

    if (cfg.formatText == "json") {
        JsonWriter w;
        w.beginObject();
        w.key("schema").value(1);
        w.key("operation").value("approx-error");
        w.key("rate_per_hour").value(cfg.ratePerHour);
        w.key("dt_seconds").value(dtSeconds);
        w.key("points").beginArray();
        for (const auto& p : points) {
            w.beginObject();
            w.key("t_hours").value(p.tHours);
            w.key("steps").value(p.steps);
            w.key("t_hours_rounded").value(p.tHoursRounded);
            w.key("exp_cdf").value(p.exponentialCdf);
            w.key("geom_cdf").value(p.geometricCdfValue);
            w.key("abs_err").value(p.absoluteError);
            w.key("rel_err");
            if (std::isnan(p.relativeError)) {
                w.null();
            } else {
                w.value(p.relativeError);
            }
            w.endObject();
        }
        w.endArray();
        w.endObject();
        writeOut(cfg.outPath, w.str() + "\n");
    } else if (cfg.formatText == "csv") {
        std::string csv = "t_hours,exp_cdf,geom_cdf,abs_err,rel_err\n";
        for (const auto& p : points) {
            csv += formatReportDouble(p.tHours);
            csv += ',';
            csv += formatReportDouble(p.exponentialCdf);
            csv += ',';
            csv += formatReportDouble(p.geometricCdfValue);
            csv += ',';
            csv += formatReportDouble(p.absoluteError);
            csv += ',';
            if (!std::isnan(p.relativeError)) csv += formatReportDouble(p.relativeError);
            csv += '\n';
        }
        writeOut(cfg.outPath, csv);
    } else {
        throwError(ErrorKind::Usage, "unknown format '" + cfg.formatText + "' (expected csv or json)");
    }
    return 0;
}

int cmdSimulate(const Config& cfg) {
    SystemModel model = loadModel(cfg.modelPath);
    long long k = horizonSteps(model, cfg);
    PrepareOptions po;
    po.mode = AnalysisMode::Dtmc;
    ComposeCaps caps;
    caps.stateCap = cfg.stateCap;
    PreparedModel prepared = prepareForAnalysis(model, po);
    StateSpace space = compose(prepared.model, ComposeFlavor::Dtmc, caps);
    MonteCarloResult res = monteCarloHazard(prepared.model, space, k, cfg.samples, cfg.seed);

    JsonWriter w;
    w.beginObject();
    w.key("schema").value(1);
    w.key("operation").value("simulate");
    w.key("model").value(model.name);
    w.key("hazard").value(hazardName(model));
    w.key("k").value(k);
    w.key("t").value(static_cast<double>(k) * model.dtSeconds);
    w.key("samples").value(res.samples);
    w.key("seed").value(cfg.seed);
    w.key("hits").value(res.hits);
    w.key("estimate").value(res.estimate);
    w.key("half_width_95").value(res.halfWidth95);
    w.endObject();
    writeOut(cfg.outPath, w.str() + "\n");
    return 0;
}

void addHorizonOptions(CLI::App* sub, Config& cfg) {
    sub->add_option("-k,--steps", cfg.k, "Horizon as a step count");
    sub->add_option("--time", cfg.timeText,
                    "Horizon as a duration (h, min, s, ms); must be an integral "
                    "multiple of the model's dt");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-based safety analysis of synchronous parallel systems"};
    app.require_subcommand(1);
    Config cfg;

    CLI::App* validate = app.add_subcommand("validate", "Check a model file and report diagnostics");
    validate->add_option("model", cfg.modelPath, "Model file")->required();
    validate->add_option("--flavor", cfg.flavorText, "Composition flavor: dtmc, mdp, or qualitative");
    validate->add_option("--state-cap", cfg.stateCap, "Abort if the composed space exceeds this many states");
    validate->add_option("-o,--output", cfg.outPath, "Write the report here instead of stdout");

    CLI::App* dcca = app.add_subcommand("dcca", "Compute the minimal critical failure-mode sets for the hazard");
    dcca->add_option("model", cfg.modelPath, "Model file")->required();
    dcca->add_option("--occurrence", cfg.occurrenceText, "Failure-mode occurrence semantics: current or ever");
    dcca->add_flag("--no-witnesses", cfg.noWitnesses, "Skip witness traces");
    dcca->add_option("--state-cap", cfg.stateCap, "Abort if the composed space exceeds this many states");
    dcca->add_flag("--timings", cfg.timings, "Include runtime_ms in the report (breaks byte-identity)");
    dcca->add_option("-o,--output", cfg.outPath, "Write the report here instead of stdout");

    CLI::App* hazard = app.add_subcommand("hazard", "Probability that the hazard occurs within the horizon");
    hazard->add_option("model", cfg.modelPath, "Model file")->required();
    addHorizonOptions(hazard, cfg);
    hazard->add_option("--workers", cfg.workers, "Worker threads (0 = available parallelism)");
    hazard->add_option("--state-cap", cfg.stateCap, "Abort if the composed space exceeds this many states");
    hazard->add_flag("--timings", cfg.timings, "Include runtime_ms in the report (breaks byte-identity)");
    hazard->add_option("--curve", cfg.curveStride, "Also write the probability at every multiple of this stride");
    hazard->add_option("--curve-out", cfg.curveOut, "CSV file for --curve (columns k,t_seconds,probability)");
    hazard->add_option("-o,--output", cfg.outPath, "Write the report here instead of stdout");

    CLI::App* fta = app.add_subcommand("fta-bound", "Fault-tree upper bound on the hazard probability");
    fta->add_option("model", cfg.modelPath, "Model file")->required();
    addHorizonOptions(fta, cfg);
    fta->add_option("--occurrence", cfg.occurrenceText, "Occurrence semantics for the underlying set computation");
    fta->add_option("--demand-bound", cfg.demandBounds,
                    "NAME=VALUE horizon probability for a per-demand mode (repeatable)");
    fta->add_flag("--bound-only", cfg.boundOnly, "Skip the model-checked comparison value");
    fta->add_option("--workers", cfg.workers, "Worker threads (0 = available parallelism)");
    fta->add_option("--state-cap", cfg.stateCap, "Abort if the composed space exceeds this many states");
    fta->add_option("-o,--output", cfg.outPath, "Write the report here instead of stdout");

    CLI::App* approx = app.add_subcommand(
        "approx-error", "Per-step geometric vs. continuous exponential: discretization error");
    approx->add_option("--rate", cfg.ratePerHour, "Failure rate per hour")->required();
    approx->add_option("--dt", cfg.dtText, "Step length (e.g. 1s, 10ms)")->required();
    approx->add_option("--times", cfg.timesText, "Comma-separated list of times in hours");
    approx->add_option("--sweep", cfg.sweepText, "MIN:MAX:POINTS geometric sweep of times in hours");
    approx->add_option("--format", cfg.formatText, "csv (default) or json");
    approx->add_option("-o,--output", cfg.outPath, "Write the report here instead of stdout");

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo estimate of the hazard probability");
    sim->add_option("model", cfg.modelPath, "Model file")->required();
    addHorizonOptions(sim, cfg);
    sim->add_option("--samples", cfg.samples, "Number of runs");
    sim->add_option("--seed", cfg.seed, "RNG seed");
    sim->add_option("--state-cap", cfg.stateCap, "Abort if the composed space exceeds this many states");
    sim->add_option("-o,--output", cfg.outPath, "Write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(validate)) return cmdValidate(cfg);
        if (app.got_subcommand(dcca)) return cmdDcca(cfg);
        if (app.got_subcommand(hazard)) return cmdHazard(cfg);
        if (app.got_subcommand(fta)) return cmdFtaBound(cfg);
        if (app.got_subcommand(approx)) return cmdApproxError(cfg);
        if (app.got_subcommand(sim)) return cmdSimulate(cfg);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Usage: return 2;
            case ErrorKind::Capacity: return 3;
            default: return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
