#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssmcheck/predicate.hpp"

namespace ssmcheck {

// One probabilistic branch of a transition: go to `target` with `probability`.
struct Branch {
    std::string targetName;
    int32_t targetIndex = -1;
    double probability = 1.0;
};

// A guarded transition group: when `guard` holds in the PRE-step global state
// and the automaton is in `fromName`, the automaton moves along one of the
// branches. Branch probabilities must sum to 1.
struct TransitionGroup {
    std::string fromName;
    int32_t fromIndex = -1;
    PredPtr guard;
    std::vector<Branch> branches;
    SourcePos pos;
};

struct Automaton {
    std::string name;
    std::vector<std::string> states;
    std::string initName;
    int32_t initIndex = -1;
    std::vector<TransitionGroup> groups;
    SourcePos pos;

    int32_t stateIndex(const std::string& s) const;
};

struct NamedPredicate {
    std::string name;
    PredPtr expr;
    SourcePos pos;
};

// How an injected failure mode occurs and how it goes away again.
enum class FailureKind : uint8_t {
    Persistent,  // may occur any step; never goes away
    Transient,   // freely appears and disappears (nondeterministic template)
    PerTime,     // occurs each step with probability derived from a rate
    PerDemand,   // occurs with probability q on each demand placed on a component
};

// For per-time modes: what happens to an active failure on later steps.
enum class Disappearance : uint8_t {
    Latching,   // stays active forever once it occurred
    Repair,     // becomes inactive with a per-step probability from repairRatePerHour
    PerStep,    // presence re-sampled every step (independent per-step occurrence)
};

struct FailureDecl {
    std::string name;
    FailureKind kind = FailureKind::Persistent;

    // PerTime
    double ratePerHour = 0.0;
    Disappearance disappearance = Disappearance::Latching;
    double repairRatePerHour = 0.0;

    // PerDemand
    double demandProbability = 0.0;
    std::string targetAutomaton;  // the component whose demands can fail
    PredPtr demandGuard;          // when a demand is placed (over the pre-step state)

    // Set once the mode has been turned into a concrete automaton in the
    // model; resolve() then prefers the automaton and printModel skips the decl.
    bool materialized = false;

    SourcePos pos;
};

// A defined meaning for <automaton>.in(<state>) atoms, registered when a
// structural transformation folds several original states into one.
struct InExpansion {
    std::string automatonName;
    std::string stateName;
    PredPtr expansion;
};

// A synchronous parallel system: automata stepping in lock-step, named
// predicates, declared failure modes, and an optional hazard predicate.
struct SystemModel {
    double dtSeconds = 1.0;
    std::string name;  // informational (source file stem)

    std::vector<Automaton> automata;
    std::vector<NamedPredicate> predicates;
    std::vector<FailureDecl> failures;
    std::optional<PredPtr> hazard;
    std::string hazardName;
    std::vector<InExpansion> inExpansions;

    int32_t automatonIndex(const std::string& name) const;
    int32_t predicateIndex(const std::string& name) const;
    int32_t failureIndex(const std::string& name) const;

    // Re-binds every name in every expression and transition to indices.
    // Must be called after any structural change. Returns diagnostics for
    // unresolvable names and malformed declarations; expressions mentioning a
    // declared-but-unmaterialized failure mode resolve to a sentinel index
    // and are not an error.
    std::vector<Diagnostic> resolve();

    // Evaluates a resolved expression over a vector of local state indices,
    // one per automaton, in automata order.
    bool evaluate(const PredicateExpr& expr, std::span<const uint8_t> locals) const;
};

// Replaces every atom over the named failure automata with the constant given
// by the map (true = failed), removes those automata and their declarations,
// and re-resolves. Names must refer to declared failure modes.
SystemModel pinFailures(const SystemModel& model, const std::map<std::string, bool>& pinned);

} // namespace ssmcheck
