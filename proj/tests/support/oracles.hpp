#pragma once

// Independent reference implementations used to cross-check the engines.
// They deliberately avoid the production composition/value-iteration code:
// successors are computed straight off the automaton structs, probabilities
// by direct recursion on the definition, and critical sets by exhaustive
// subset enumeration with an explicit minimality filter.

#include <cstdint>
#include <string>
#include <vector>

#include "ssmcheck/dcca.hpp"
#include "ssmcheck/failures.hpp"
#include "ssmcheck/model.hpp"

namespace ssmcheck::testsupport {

// P(hazard within <= k steps) for a deterministic probabilistic model
// (every automaton must have exactly one enabled group in every reachable
// joint state). Recursion on the first-hit decomposition with memoization on
// (joint state, remaining steps).
double oracleHazardProbability(const SystemModel& prepared, long long k);

// Maximum of the same quantity over all ways of resolving nondeterministic
// group choices, by exhaustive recursion over the choice tree.
double oracleMaxHazardProbability(const SystemModel& prepared, long long k);

// Minimal critical failure-mode sets by checking every subset: a subset is
// critical iff a forward search that only passes through states where no
// other mode is active can reach the hazard. Returns each set as a sorted
// name list; the list of sets is sorted for stable comparison.
std::vector<std::vector<std::string>> oracleMinimalCriticalSets(
    const SystemModel& declared, OccurrenceSemantics occurrence);

// True iff the empty set is critical in the oracle's sense.
bool oracleEmptySetCritical(const SystemModel& declared,
                            OccurrenceSemantics occurrence);

} // namespace ssmcheck::testsupport
