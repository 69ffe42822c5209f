#include <doctest.h>

#include <cmath>
#include <string>

#include "ssmcheck/failures.hpp"
#include "ssmcheck/parser.hpp"
#include "ssmcheck/quant.hpp"
#include "ssmcheck/state_space.hpp"

using namespace ssmcheck;

namespace {

// Every joint branch on which a demand-driven mode leaves "no" must start in a
// state where the transformed demand condition holds: occurrence is tied to
// demands, never free-running.
void checkDemandGating(const PreparedModel& prepared, const StateSpace& sp,
                       const std::string& modeName) {
    int32_t declIdx = prepared.model.failureIndex(modeName);
    REQUIRE(declIdx >= 0);
    const PredPtr& demand = prepared.model.failures[declIdx].demandGuard;
    REQUIRE(demand);
    int32_t fIdx = prepared.model.automatonIndex(modeName);
    REQUIRE(fIdx >= 0);
    int32_t no = prepared.model.automata[fIdx].stateIndex("no");
    int32_t yes = prepared.model.automata[fIdx].stateIndex("yes");

    uint64_t occurrences = 0;
    for (uint64_t s = 0; s < sp.stateCount; ++s) {
        if (sp.local(s)[fIdx] != no) continue;
        bool demandHere = prepared.model.evaluate(*demand, sp.local(s));
        for (uint64_t b = sp.branchOffset[sp.groupOffset[s]];
             b < sp.branchOffset[sp.groupOffset[s + 1]]; ++b) {
            if (sp.local(sp.target[b])[fIdx] == yes) {
                ++occurrences;
                CHECK_MESSAGE(demandHere, "mode fired without a demand in state ",
                              describeState(prepared.model, sp.local(s)));
            }
        }
    }
    CHECK(occurrences > 0);  // the walk must actually exercise occurrence edges
}

} // namespace

TEST_CASE("demand failures with one outcome pair fold into the component") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton T { states idle, go; init idle;\n"
        "  idle -> go [act_ok];\n"
        "  idle -> idle [!act_ok];\n"
        "  go -> idle [true]; }\n"
        "pred act_ok = !(F.state == yes);\n"
        "failure F per_demand(0.1) on T demand (T.state == idle);\n"
        "hazard H = T.state == go;\n",
        "elide");
    PreparedModel prepared = prepareForAnalysis(m, {AnalysisMode::Dtmc, false});

    // No separate decision automaton: one success and one failure target.
    CHECK(prepared.model.automatonIndex("F_decide") < 0);
    CHECK(prepared.model.automatonIndex("F") >= 0);
    int32_t tIdx = prepared.model.automatonIndex("T");
    REQUIRE(tIdx >= 0);
    CHECK(prepared.model.automata[tIdx].stateIndex("idle__pending") >= 0);

    StateSpace sp = compose(prepared.model, ComposeFlavor::Dtmc, {});
    // The demand is retried forever and its failure is absorbing, so the
    // probability of ever reaching "go" freezes at the first demand's success.
    CHECK(hazardProbability(prepared.model, sp, 0) == 0.0);
    for (long long k : {1, 2, 3, 10}) {
        CHECK(hazardProbability(prepared.model, sp, k) == doctest::Approx(0.9).epsilon(1e-12));
    }
    checkDemandGating(prepared, sp, "F");
}

TEST_CASE("demand failures with several success targets get a decision automaton") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton B { states on, off; init on; on -> off [true]; off -> on [true]; }\n"
        "pred boost = B.state == on;\n"
        "pred ok_act = !(F.state == yes);\n"
        "automaton T { states idle, fast, slow; init idle;\n"
        "  idle -> fast [ok_act & boost];\n"
        "  idle -> slow [ok_act & !boost];\n"
        "  idle -> idle [F.state == yes];\n"
        "  fast -> idle [true];\n"
        "  slow -> idle [true]; }\n"
        "failure F per_demand(0.25) on T demand (T.state == idle);\n"
        "hazard H = F.state == yes;\n",
        "decide");
    PreparedModel prepared = prepareForAnalysis(m, {AnalysisMode::Dtmc, false});

    int32_t dIdx = prepared.model.automatonIndex("F_decide");
    REQUIRE(dIdx >= 0);
    const Automaton& decide = prepared.model.automata[dIdx];
    CHECK(decide.stateIndex("fast__idle") >= 0);
    CHECK(decide.stateIndex("slow__idle") >= 0);
    CHECK(decide.stateIndex("undef") >= 0);
    CHECK(decide.initName == "undef");

    StateSpace sp = compose(prepared.model, ComposeFlavor::Dtmc, {});
    // A demand every other step, each failing with probability 1/4,
    // and a failed demand is the hazard: P(2n) = P(2n-1) = 1 - (3/4)^n.
    CHECK(hazardProbability(prepared.model, sp, 0) == 0.0);
    for (int n = 1; n <= 6; ++n) {
        double expected = 1.0 - std::pow(0.75, n);
        CHECK(hazardProbability(prepared.model, sp, 2 * n - 1) ==
              doctest::Approx(expected).epsilon(1e-12));
        CHECK(hazardProbability(prepared.model, sp, 2 * n) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
    checkDemandGating(prepared, sp, "F");
}

TEST_CASE("the backup case study keeps demand occurrences tied to demands") {
    SystemModel m = loadModel(std::string(SSMCHECK_EXAMPLES_DIR) + "/backup_system.ssm");
    PreparedModel prepared = prepareForAnalysis(m, {AnalysisMode::Dtmc, false});
    StateSpace sp = compose(prepared.model, ComposeFlavor::Dtmc, {});
    checkDemandGating(prepared, sp, "A2FailsActivate");
}

TEST_CASE("injection order of independent demand modes does not matter observably") {
    const char* text =
        "const dt = 1s;\n"
        "automaton P { states idle, go; init idle;\n"
        "  idle -> go [!(F1.state == yes)]; idle -> idle [F1.state == yes];\n"
        "  go -> idle [true]; }\n"
        "automaton Q { states idle, go; init idle;\n"
        "  idle -> go [!(F2.state == yes)]; idle -> idle [F2.state == yes];\n"
        "  go -> go [true]; }\n"
        "failure F1 per_demand(0.1) on P demand (P.state == idle);\n"
        "failure F2 per_demand(0.2) on Q demand (Q.state == idle);\n"
        "pred p_go = P.state == go;\n"
        "pred q_go = Q.state == go;\n"
        "hazard H = Q.state == go;\n";
    SystemModel firstThenSecond = parseModel(text, "order12");
    injectPerDemand(firstThenSecond, 0);
    injectPerDemand(firstThenSecond, 1);
    SystemModel secondThenFirst = parseModel(text, "order21");
    injectPerDemand(secondThenFirst, 1);
    injectPerDemand(secondThenFirst, 0);
    ConservativeResult r =
        checkConservative(firstThenSecond, secondThenFirst, {"p_go", "q_go"});
    CHECK(r.equivalent);
}

TEST_CASE("two demand modes on the same component are rejected") {
    try {
        parseModel(
            "const dt = 1s;\n"
            "automaton T { states idle, go; init idle;\n"
            "  idle -> go [!(F1.state == yes) & !(F2.state == yes)];\n"
            "  idle -> idle [F1.state == yes | F2.state == yes];\n"
            "  go -> idle [true]; }\n"
            "failure F1 per_demand(0.1) on T demand (T.state == idle);\n"
            "failure F2 per_demand(0.2) on T demand (T.state == idle);\n"
            "hazard H = T.state == go;\n",
            "twice");
        FAIL_CHECK("expected an error");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("'F1'") != std::string::npos);
        CHECK(msg.find("'F2'") != std::string::npos);
        CHECK(msg.find("per-demand") != std::string::npos);
    }
}

TEST_CASE("guards mixing a demand mode into larger formulas are rejected") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton B { states on, off; init on; on -> off [true]; off -> on [true]; }\n"
        "automaton T { states idle, go; init idle;\n"
        "  idle -> go [F.state == yes | B.state == on];\n"
        "  idle -> idle [!(F.state == yes | B.state == on)];\n"
        "  go -> idle [true]; }\n"
        "failure F per_demand(0.1) on T demand (T.state == idle);\n"
        "hazard H = T.state == go;\n",
        "mixed");
    try {
        prepareForAnalysis(m, {AnalysisMode::Dtmc, false});
        FAIL_CHECK("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("separable") != std::string::npos);
    }
}

TEST_CASE("a guard asking for the mode both present and absent is rejected") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton T { states idle, go; init idle;\n"
        "  idle -> go [F.state == yes & F.state == no];\n"
        "  idle -> idle [true];\n"
        "  go -> idle [true]; }\n"
        "failure F per_demand(0.1) on T demand (T.state == idle);\n"
        "hazard H = T.state == go;\n",
        "conflict");
    try {
        prepareForAnalysis(m, {AnalysisMode::Dtmc, false});
        FAIL_CHECK("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("both absent and present") != std::string::npos);
    }
}

TEST_CASE("a demand state needs both a success and a failure reaction") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton T { states idle, go; init idle;\n"
        "  idle -> go [!(F.state == yes)];\n"
        "  go -> idle [true]; }\n"
        "failure F per_demand(0.1) on T demand (T.state == idle);\n"
        "hazard H = T.state == go;\n",
        "lopsided");
    try {
        prepareForAnalysis(m, {AnalysisMode::Dtmc, false});
        FAIL_CHECK("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("no failure transition") != std::string::npos);
    }
}

TEST_CASE("gated reactions must be deterministic") {
    SystemModel m = parseModel(
        "const dt = 1s;\n"
        "automaton T { states idle, go; init idle;\n"
        "  idle -> {0.5: go, 0.5: idle} [!(F.state == yes)];\n"
        "  idle -> idle [F.state == yes];\n"
        "  go -> idle [true]; }\n"
        "failure F per_demand(0.1) on T demand (T.state == idle);\n"
        "hazard H = T.state == go;\n",
        "branching");
    try {
        prepareForAnalysis(m, {AnalysisMode::Dtmc, false});
        FAIL_CHECK("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("single deterministic target") != std::string::npos);
    }
}
