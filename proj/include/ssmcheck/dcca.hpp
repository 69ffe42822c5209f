#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssmcheck/failures.hpp"
#include "ssmcheck/state_space.hpp"

namespace ssmcheck {

// Which states count as a failure mode being "active" when deciding whether a
// path uses only modes from a candidate set.
enum class OccurrenceSemantics {
    Current,  // active iff the mode automaton is currently in 'yes'
    Ever,     // active iff the mode has been in 'yes' at any earlier point
};

struct DccaOptions {
    OccurrenceSemantics occurrence = OccurrenceSemantics::Current;
    bool witnesses = true;
    uint64_t stateCap = 10'000'000;
};

struct DccaStats {
    uint64_t states = 0;
    uint64_t transitions = 0;
    uint64_t checksPerformed = 0;
    uint64_t subsetsPruned = 0;
    uint64_t setsFound = 0;
};

// One step of a witness trace: local state names per automaton, in automata
// order of the analyzed (chaos-extended) model.
struct WitnessStep {
    std::vector<std::string> localStates;
};

struct Witness {
    std::vector<std::string> modes;  // the critical set the trace belongs to
    std::vector<WitnessStep> steps;  // initial state first, hazard state last
};

struct DccaResult {
    std::string hazardText;
    std::vector<std::string> failureModes;   // declaration order; ≤ 64 modes
    bool emptySetCritical = false;           // hazard reachable with no mode active
    std::vector<std::vector<std::string>> minimalCriticalSets;
    std::vector<Witness> witnesses;
    std::vector<std::string> automataNames;  // of the analyzed model, for traces
    DccaStats stats;
};

// Finds all minimal critical sets of failure modes: a set Γ is critical if the
// hazard is reachable on a path along which only modes in Γ are ever active.
// The search space replaces every declared mode by a free two-state chaos
// automaton, so criticality is judged against every behavior any occurrence
// pattern could produce.
class DccaAnalyzer {
public:
    DccaAnalyzer(const SystemModel& declared, const DccaOptions& options = {});

    // True iff the given set of mode names is critical.
    bool isCritical(const std::vector<std::string>& modes);

    // Full minimal-critical-set search (cardinality-ascending, pruning
    // supersets of found sets). If the empty set is critical the hazard is a
    // functional problem and no sets are reported.
    DccaResult run();

    const SystemModel& analyzedModel() const { return prepared_.model; }
    const StateSpace& space() const { return space_; }

private:
    bool criticalMask(uint64_t mask) const;
    Witness buildWitness(uint64_t mask, const std::vector<std::string>& modes) const;

    DccaOptions options_;
    PreparedModel prepared_;
    StateSpace space_;
    std::string hazardText_;
    std::vector<uint64_t> activeMask_;  // per state: bit m = mode m active
    Bitset hazardBits_;
    // Predecessor graph in CSR form over the qualitative space.
    std::vector<uint64_t> predOffset_;
    std::vector<uint32_t> predState_;
    uint64_t edgeCount_ = 0;
};

} // namespace ssmcheck
