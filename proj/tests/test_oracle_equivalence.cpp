#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ssmcheck/dcca.hpp"
#include "ssmcheck/failures.hpp"
#include "ssmcheck/quant.hpp"
#include "ssmcheck/state_space.hpp"
#include "support/oracles.hpp"
#include "support/random_models.hpp"

using namespace ssmcheck;
using namespace ssmcheck::testsupport;

namespace {

Bitset allTrueBits(uint64_t n) { return Bitset((n + 63) / 64, ~uint64_t(0)); }

std::vector<std::vector<std::string>> sortedSets(std::vector<std::vector<std::string>> sets) {
    for (auto& s : sets) std::sort(s.begin(), s.end());
    std::sort(sets.begin(), sets.end());
    return sets;
}

} // namespace

TEST_CASE("value iteration matches direct recursion on random deterministic models") {
    RandomModelOptions opts;  // 3 automata, per-time modes, deterministic
    int checked = 0;
    for (uint64_t seed = 1; seed <= 60; ++seed) {
        CAPTURE(seed);
        std::mt19937_64 rng(seed);
        SystemModel declared = randomModel(rng, opts);
        PreparedModel prepared = prepareForAnalysis(declared, {AnalysisMode::Dtmc, false});
        StateSpace sp = compose(prepared.model, ComposeFlavor::Dtmc, {});
        for (long long k : {0, 3, 6}) {
            double engine = hazardProbability(prepared.model, sp, k);
            double oracle = oracleHazardProbability(prepared.model, k);
            CHECK(std::fabs(engine - oracle) <= 1e-12);
            ++checked;
        }
    }
    CHECK(checked == 180);
}

TEST_CASE("critical-set search matches exhaustive subset enumeration") {
    RandomModelOptions opts;
    int checked = 0;
    int used = 0;
    for (uint64_t seed = 101; used < 50 && seed <= 400; ++seed) {
        CAPTURE(seed);
        std::mt19937_64 rng(seed);
        SystemModel declared = randomModel(rng, opts);
        if (declared.failures.empty()) continue;  // nothing to search over
        ++used;
        for (OccurrenceSemantics occ : {OccurrenceSemantics::Current, OccurrenceSemantics::Ever}) {
            DccaOptions dopts;
            dopts.occurrence = occ;
            dopts.witnesses = false;
            DccaResult engine = DccaAnalyzer(declared, dopts).run();
            bool oracleEmpty = oracleEmptySetCritical(declared, occ);
            CHECK(engine.emptySetCritical == oracleEmpty);
            if (!oracleEmpty) {
                CHECK(sortedSets(engine.minimalCriticalSets) ==
                      oracleMinimalCriticalSets(declared, occ));
            }
            ++checked;
        }
    }
    CHECK(used == 50);
    CHECK(checked == 100);
}

TEST_CASE("worst-case iteration matches exhaustive policy recursion") {
    RandomModelOptions opts;
    opts.nondeterministic = true;
    int checked = 0;
    for (uint64_t seed = 201; seed <= 240; ++seed) {
        CAPTURE(seed);
        std::mt19937_64 rng(seed);
        SystemModel declared = randomModel(rng, opts);
        PreparedModel prepared = prepareForAnalysis(declared, {AnalysisMode::Mdp, false});
        StateSpace sp = compose(prepared.model, ComposeFlavor::Mdp, {});
        Bitset psi = labelStates(prepared.model, sp, **prepared.model.hazard);
        Bitset phi = allTrueBits(sp.stateCount);
        for (long long k : {0, 2, 4}) {
            double engine = maxBoundedUntil(sp, phi, psi, k);
            double oracle = oracleMaxHazardProbability(prepared.model, k);
            CHECK(std::fabs(engine - oracle) <= 1e-12);
            ++checked;
        }
    }
    CHECK(checked == 120);
}
