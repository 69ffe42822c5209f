#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ssmcheck/failures.hpp"
#include "ssmcheck/state_space.hpp"

namespace ssmcheck {

struct IterationOptions {
    // Worker threads for the value-iteration sweeps; 0 picks the hardware
    // concurrency. Results are bit-identical for every worker count.
    unsigned workers = 1;
    // Called after each iteration i (1-based) with the current value vector.
    std::function<void(long long i, const std::vector<double>&)> onStep;
};

// P(φ until ψ within ≤ k steps), computed per start state by backward value
// iteration over a Dtmc-flavor space:
//   x_0 = [ψ];  x_{i+1}(s) = 1 if ψ(s), Σ_s' P(s,s') x_i(s') if φ(s)∧¬ψ(s), else 0.
// Row sums use compensated (Kahan) accumulation in a fixed order.
std::vector<double> boundedUntilVector(const StateSpace& space, const Bitset& phi,
                                       const Bitset& psi, long long k,
                                       const IterationOptions& options = {});

// Same, returning only the value at the initial state.
double boundedUntil(const StateSpace& space, const Bitset& phi, const Bitset& psi,
                    long long k, const IterationOptions& options = {});

// P(hazard reached within ≤ k steps) from the initial state. The hazard is
// checked in every state along the path including the initial one.
double hazardProbability(const SystemModel& model, const StateSpace& space, long long k,
                         const IterationOptions& options = {});

struct CurvePoint {
    long long k = 0;
    double tSeconds = 0.0;
    double probability = 0.0;
};

// Hazard probability at k = 0, every multiple of `stride`, and kMax.
std::vector<CurvePoint> hazardCurve(const SystemModel& model, const StateSpace& space,
                                    long long kMax, long long stride,
                                    const IterationOptions& options = {});

// Maximum of P(φ until ψ within ≤ k steps) over all resolutions of the
// nondeterministic choices of an Mdp-flavor space.
std::vector<double> maxBoundedUntilVector(const StateSpace& space, const Bitset& phi,
                                          const Bitset& psi, long long k,
                                          const IterationOptions& options = {});
double maxBoundedUntil(const StateSpace& space, const Bitset& phi, const Bitset& psi,
                       long long k, const IterationOptions& options = {});

// Per failure mode, P(the mode occurs at least once within k steps) ignoring
// the rest of the system — the ingredients of the fault-tree bound.
struct ModeHorizonProbability {
    std::string name;
    double probability = 0.0;
    bool fromDefault = false;  // per-demand mode bounded by its declared q
};

std::vector<ModeHorizonProbability> modeHorizonProbabilities(
    const SystemModel& declared, long long k,
    const std::map<std::string, double>& perDemandBounds,
    std::vector<std::string>& warnings);

// Σ over sets of Π over modes of the per-mode horizon probability: the
// fault-tree upper bound on the hazard probability given the minimal critical
// sets. Throws Error(Validation) if a set names a mode without a probability.
double ftaBound(const std::vector<std::vector<std::string>>& sets,
                const std::vector<ModeHorizonProbability>& modes);

// Diagnostic only. P(states where no failure mode outside `modes` is active,
// until the hazard, within ≤ k steps). This conditions the *trace shape*, not
// the causes: it is NOT the probability that the given set of modes brings the
// hazard about, and it can be arbitrarily far from any such quantity. It is
// exposed under this explicit name so exploratory use cannot be mistaken for
// a causal probability.
double restrictedTraceHazardDiagnostic(const PreparedModel& prepared,
                                       const StateSpace& space,
                                       const std::vector<std::string>& modes,
                                       long long k,
                                       const IterationOptions& options = {});

struct MonteCarloResult {
    uint64_t samples = 0;
    uint64_t hits = 0;
    double estimate = 0.0;
    double halfWidth95 = 0.0;
};

// Forward simulation of a Dtmc-flavor space: counts runs on which the hazard
// holds at some step ≤ k (the initial state counts as step 0). Deterministic
// for a fixed seed.
MonteCarloResult monteCarloHazard(const SystemModel& model, const StateSpace& space,
                                  long long k, uint64_t samples, uint64_t seed);

} // namespace ssmcheck
