#pragma once

#include <string>
#include <vector>

#include "ssmcheck/model.hpp"

namespace ssmcheck {

// Converts an occurrence rate (per hour) into the probability that the event
// occurs during one synchronous step of length dtSeconds: p = rate * dt / 3600.
double rateToStepProbability(double ratePerHour, double dtSeconds);

// P(first occurrence within k steps) for a per-step probability p, computed as
// -expm1(k * log1p(-p)) so tiny p and huge k lose no precision.
double geometricCdf(double p, long long k);

// How well the discretized per-step model tracks the continuous-time
// exponential distribution over a time horizon.
struct ApproximationPoint {
    double tHours = 0.0;          // requested horizon
    long long steps = 0;          // k = round(t / dt)
    double tHoursRounded = 0.0;   // k * dt, the horizon actually modeled
    double exponentialCdf = 0.0;  // 1 - exp(-rate * t)
    double geometricCdfValue = 0.0;
    double absoluteError = 0.0;   // |geometric - exponential|
    double relativeError = 0.0;   // absolute / exponential (NaN if exponential == 0)
};

ApproximationPoint approximationError(double ratePerHour, double dtSeconds, double tHours);

// The analysis semantics a model is being prepared for.
enum class AnalysisMode {
    Qualitative,  // possible-step graph; declared failure modes become free chaos
    Dtmc,         // fully probabilistic; every mode needs a probability
    Mdp,          // probabilistic with nondeterministic modes allowed
};

// Builds the two-state (no/yes) automaton realizing a declared failure mode
// under the given analysis mode. Per-demand modes are not buildable this way;
// they need the structural transformation in injectPerDemand.
Automaton buildFailureAutomaton(const FailureDecl& decl, AnalysisMode mode, double dtSeconds);

// Rewrites the model so the named per-demand failure mode (failures[declIndex])
// becomes part of the state space with the correct timing: on a step where a
// demand is placed on the target component, the component's response and the
// mode's occurrence are decided together. Registers .in() expansions so
// expressions keep their meaning, marks the declaration materialized, and
// re-resolves.
void injectPerDemand(SystemModel& model, size_t declIndex);

struct PrepareOptions {
    AnalysisMode mode = AnalysisMode::Dtmc;
    // Add a sticky tracker automaton per failure mode recording whether the
    // mode was ever active (used by ever-occurred activity semantics).
    bool occurrenceTrackers = false;
};

struct PreparedFailureMode {
    std::string name;
    FailureKind kind = FailureKind::Persistent;
    // Holds in a state iff the mode counts as active there under the chosen
    // activity semantics.
    PredPtr activity;
};

struct PreparedModel {
    SystemModel model;
    std::vector<PreparedFailureMode> failureModes;  // declaration order
};

// Turns every declared failure mode into concrete automata for the given
// analysis mode. Throws Error(Validation) on models whose declarations cannot
// be realized in that mode.
PreparedModel prepareForAnalysis(const SystemModel& declared, const PrepareOptions& options);

struct ConservativeOptions {
    uint64_t stateCap = 10'000'000;
};

struct ConservativeResult {
    bool equivalent = false;
    std::string note;  // short explanation of the first observed difference
};

// Checks whether `extended` shows the same observable behavior as `original`:
// both are prepared for qualitative analysis, composed into possible-step
// graphs, and compared by bisimulation where the observation of a state is the
// value vector of the named predicates in `observables` (which must exist in
// both models). Probability-zero branches are not possible steps, so an
// extension whose added failure modes cannot fire is equivalent to the
// original.
ConservativeResult checkConservative(const SystemModel& original,
                                     const SystemModel& extended,
                                     const std::vector<std::string>& observables,
                                     const ConservativeOptions& options = {});

} // namespace ssmcheck
