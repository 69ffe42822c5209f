#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ssmcheck/dcca.hpp"
#include "ssmcheck/parser.hpp"

using namespace ssmcheck;

namespace {

using SetList = std::vector<std::vector<std::string>>;

SetList sorted(SetList sets) {
    for (auto& s : sets) std::sort(s.begin(), s.end());
    std::sort(sets.begin(), sets.end());
    return sets;
}

// A witness must be a real trace: starts in the initial state, follows edges
// of the analyzed possible-step space, activates only modes of its set before
// the end, and ends in a hazard state.
void checkWitness(DccaAnalyzer& analyzer, const Witness& w) {
    const SystemModel& m = analyzer.analyzedModel();
    const StateSpace& sp = analyzer.space();
    REQUIRE(!w.steps.empty());

    auto indexOf = [&](const WitnessStep& step) -> uint64_t {
        REQUIRE(step.localStates.size() == m.automata.size());
        std::vector<uint8_t> locals(m.automata.size());
        for (size_t i = 0; i < m.automata.size(); ++i) {
            int32_t si = m.automata[i].stateIndex(step.localStates[i]);
            REQUIRE(si >= 0);
            locals[i] = static_cast<uint8_t>(si);
        }
        for (uint64_t s = 0; s < sp.stateCount; ++s) {
            if (std::equal(locals.begin(), locals.end(), sp.local(s).begin())) return s;
        }
        FAIL("witness step is not a reachable state");
        return 0;
    };

    std::vector<uint64_t> path;
    for (const auto& step : w.steps) path.push_back(indexOf(step));
    CHECK(path.front() == 0);

    for (size_t i = 0; i + 1 < path.size(); ++i) {
        bool connected = false;
        for (uint64_t b = sp.branchOffset[sp.groupOffset[path[i]]];
             b < sp.branchOffset[sp.groupOffset[path[i] + 1]]; ++b) {
            if (sp.target[b] == path[i + 1]) connected = true;
        }
        CHECK_MESSAGE(connected, "witness steps ", i, " and ", i + 1, " are not one step apart");
    }

    // Only modes of the set are active before the final state.
    std::set<std::string> allowed(w.modes.begin(), w.modes.end());
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        for (int32_t f = 0; f < static_cast<int32_t>(m.failures.size()); ++f) {
            const std::string& name = m.failures[f].name;
            if (allowed.count(name)) continue;
            int32_t aIdx = m.automatonIndex(name);
            REQUIRE(aIdx >= 0);
            int32_t yes = m.automata[aIdx].stateIndex("yes");
            CHECK(sp.local(path[i])[aIdx] != yes);
        }
    }
    CHECK(m.evaluate(**m.hazard, sp.local(path.back())));
}

} // namespace

TEST_CASE("a single latching mode guarding the hazard is the lone critical set") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton W { states ok, bad; init ok;\n"
        "  ok -> bad [F.state == yes]; ok -> ok [!(F.state == yes)]; bad -> bad [true]; }\n"
        "failure F per_time(360/h);\n"
        "failure G per_time(360/h);\n"
        "hazard H = W.state == bad;\n",
        "single");
    DccaAnalyzer analyzer(m, {});
    DccaResult r = analyzer.run();
    CHECK(!r.emptySetCritical);
    CHECK(sorted(r.minimalCriticalSets) == SetList{{"F"}});
    // {} and the two singletons are checked; {F,G} is pruned as a superset.
    CHECK(r.stats.checksPerformed == 3);
    CHECK(r.stats.subsetsPruned == 1);
    CHECK(r.stats.setsFound == 1);
    REQUIRE(r.witnesses.size() == 1);
    checkWitness(analyzer, r.witnesses[0]);

    CHECK(analyzer.isCritical({"F"}));
    CHECK(!analyzer.isCritical({"G"}));
    CHECK(analyzer.isCritical({"F", "G"}));  // supersets of critical sets stay critical
    try {
        analyzer.isCritical({"nope"});
        FAIL_CHECK("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("'nope'") != std::string::npos);
    }
}

TEST_CASE("an unreachable hazard has no critical sets") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton W { states ok, gone; init ok; ok -> ok [true]; gone -> gone [true]; }\n"
        "failure F per_time(360/h);\n"
        "hazard H = W.state == gone;\n",
        "unreachable");
    DccaResult r = DccaAnalyzer(m, {}).run();
    CHECK(!r.emptySetCritical);
    CHECK(r.minimalCriticalSets.empty());
    CHECK(r.witnesses.empty());
    CHECK(r.stats.setsFound == 0);
    CHECK(r.stats.checksPerformed == 2);  // {} and {F}: nothing to prune
}

TEST_CASE("a hazard reachable without any failure is flagged, not enumerated") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton W { states ok, bad; init ok;\n"
        "  ok -> {0.5: ok, 0.5: bad} [true]; bad -> bad [true]; }\n"
        "failure F per_time(360/h);\n"
        "hazard H = W.state == bad;\n",
        "functional");
    DccaResult r = DccaAnalyzer(m, {}).run();
    CHECK(r.emptySetCritical);
    CHECK(r.minimalCriticalSets.empty());
    CHECK(r.stats.checksPerformed == 1);  // the empty set; search stops there
}

TEST_CASE("a conjunction of two modes needs both: one two-element set") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton W { states ok, bad; init ok;\n"
        "  ok -> bad [F1.state == yes & F2.state == yes];\n"
        "  ok -> ok [!(F1.state == yes & F2.state == yes)];\n"
        "  bad -> bad [true]; }\n"
        "failure F1 per_time(360/h);\n"
        "failure F2 per_time(360/h);\n"
        "hazard H = W.state == bad;\n",
        "pair");
    DccaAnalyzer analyzer(m, {});
    DccaResult r = analyzer.run();
    CHECK(sorted(r.minimalCriticalSets) == SetList{{"F1", "F2"}});
    CHECK(!analyzer.isCritical({"F1"}));
    CHECK(!analyzer.isCritical({"F2"}));
    // {} + 2 singletons + 1 pair, nothing prunable.
    CHECK(r.stats.checksPerformed == 4);
    CHECK(r.stats.subsetsPruned == 0);
    for (const auto& w : r.witnesses) checkWitness(analyzer, w);
}

TEST_CASE("the backup case study has exactly the eight known two-mode sets") {
    SystemModel m = loadModel(std::string(SSMCHECK_EXAMPLES_DIR) + "/backup_system.ssm");
    const SetList expected = sorted({
        {"A1FailsSig", "A2FailsActivate"},
        {"A1FailsSig", "A2FailsSig"},
        {"A1FailsSig", "MonitorFails"},
        {"A1FailsSig", "S2FailsSig"},
        {"A2FailsActivate", "MonitorFails"},
        {"A2FailsSig", "MonitorFails"},
        {"MonitorFails", "S2FailsSig"},
        {"S1FailsSig", "S2FailsSig"},
    });

    DccaAnalyzer current(m, {});
    DccaResult rc = current.run();
    CHECK(!rc.emptySetCritical);
    CHECK(sorted(rc.minimalCriticalSets) == expected);
    CHECK(rc.stats.states == 1537);
    CHECK(rc.stats.transitions == 98368);
    // 1 empty + 6 singletons + 15 pairs + the 2 triples containing no critical
    // pair; the other 18 triples, all 15 quadruples, 6 quintuples and the full
    // set are supersets of findings.
    CHECK(rc.stats.checksPerformed == 24);
    CHECK(rc.stats.subsetsPruned == 40);
    CHECK(rc.stats.setsFound == 8);
    REQUIRE(rc.witnesses.size() == 8);
    for (const auto& w : rc.witnesses) checkWitness(current, w);

    // Trace-history semantics: a larger space (sticky trackers), same sets.
    DccaOptions ever;
    ever.occurrence = OccurrenceSemantics::Ever;
    DccaResult re = DccaAnalyzer(m, ever).run();
    CHECK(sorted(re.minimalCriticalSets) == expected);
    CHECK(re.stats.states == 45377);
    CHECK(re.stats.states > rc.stats.states);
}

TEST_CASE("witnesses can be disabled") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton W { states ok, bad; init ok;\n"
        "  ok -> bad [F.state == yes]; ok -> ok [!(F.state == yes)]; bad -> bad [true]; }\n"
        "failure F per_time(360/h);\n"
        "hazard H = W.state == bad;\n",
        "nowit");
    DccaOptions opts;
    opts.witnesses = false;
    DccaResult r = DccaAnalyzer(m, opts).run();
    CHECK(r.minimalCriticalSets.size() == 1);
    CHECK(r.witnesses.empty());
}

TEST_CASE("criticality is judged against worst-case occurrence, not rates") {
    // The mode's declared rate is irrelevant for the qualitative question:
    // even a zero rate yields the same critical sets.
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton W { states ok, bad; init ok;\n"
        "  ok -> bad [F.state == yes]; ok -> ok [!(F.state == yes)]; bad -> bad [true]; }\n"
        "failure F per_time(0/h);\n"
        "hazard H = W.state == bad;\n",
        "rates");
    DccaResult r = DccaAnalyzer(m, {}).run();
    CHECK(sorted(r.minimalCriticalSets) == SetList{{"F"}});
}
