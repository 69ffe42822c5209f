#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssmcheck/model.hpp"

namespace ssmcheck {

// How transitions of the composed system are built from the automata.
enum class ComposeFlavor {
    Qualitative,  // possible steps only: per automaton, the union of all
                  // positive-probability successors of enabled groups
    Dtmc,         // exactly one enabled group per automaton per state
    Mdp,          // one choice group per combination of enabled groups
};

struct ComposeCaps {
    uint64_t stateCap = 10'000'000;
};

// Explicit state space of the synchronous composition. States are discovered
// breadth-first from the initial state, which always has index 0; all arrays
// are indexed by that discovery order.
//
// Storage is compressed-sparse-row:
//   state s has choice groups groupOffset[s] .. groupOffset[s+1)-1
//   group g has branches     branchOffset[g] .. branchOffset[g+1)-1
// Dtmc and Qualitative spaces have exactly one group per state.
struct StateSpace {
    ComposeFlavor flavor = ComposeFlavor::Dtmc;
    uint32_t automatonCount = 0;
    uint64_t stateCount = 0;
    uint64_t branchCount = 0;

    // Local state indices, automatonCount bytes per state.
    std::vector<uint8_t> locals;
    std::vector<uint64_t> groupOffset;   // stateCount + 1 entries
    std::vector<uint64_t> branchOffset;  // groupCount + 1 entries
    std::vector<uint32_t> target;        // branchCount entries
    std::vector<double> probability;     // branchCount entries (1.0 throughout
                                         // for Qualitative spaces)

    std::span<const uint8_t> local(uint64_t state) const {
        return {locals.data() + state * automatonCount, automatonCount};
    }
    uint64_t groupCount() const { return groupOffset.empty() ? 0 : groupOffset.size() - 1; }
};

// Builds the reachable state space. Throws Error(Validation) on deadlocks (no
// enabled group for some automaton), on nondeterminism under Dtmc flavor, on
// branch probabilities that do not sum to 1, and Error(Capacity) past the
// state cap. The model must be resolved.
StateSpace compose(const SystemModel& model, ComposeFlavor flavor, const ComposeCaps& caps = {});

// One bit per state of a StateSpace.
using Bitset = std::vector<uint64_t>;

inline bool bitsetTest(const Bitset& b, uint64_t i) { return (b[i >> 6] >> (i & 63)) & 1; }
inline void bitsetSet(Bitset& b, uint64_t i) { b[i >> 6] |= uint64_t(1) << (i & 63); }

// Evaluates an expression of the model in every state.
Bitset labelStates(const SystemModel& model, const StateSpace& space, const PredicateExpr& expr);

// Renders a state as "A:local, B:local, ..." in automata order.
std::string describeState(const SystemModel& model, std::span<const uint8_t> locals);

// Static checks plus a trial composition; collects problems instead of
// throwing. With `requireHazard`, a missing hazard declaration is an error.
std::vector<Diagnostic> validateModel(const SystemModel& model, ComposeFlavor flavor,
                                      bool requireHazard, const ComposeCaps& caps = {});

} // namespace ssmcheck
