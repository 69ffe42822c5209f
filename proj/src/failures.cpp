#include "ssmcheck/failures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "ssmcheck/state_space.hpp"

namespace ssmcheck {

double rateToStepProbability(double ratePerHour, double dtSeconds) {
    if (!(ratePerHour >= 0.0)) {
        throwError(ErrorKind::Validation, "occurrence rate must be nonnegative");
    }
    if (!(dtSeconds > 0.0)) {
        throwError(ErrorKind::Validation, "step length must be positive");
    }
    double p = ratePerHour * (dtSeconds / 3600.0);
    if (p >= 1.0) {
        throwError(ErrorKind::Validation,
                   "rate " + std::to_string(ratePerHour) + "/h at a step of " +
                   std::to_string(dtSeconds) +
                   "s gives a per-step probability >= 1; the discretization is invalid");
    }
    return p;
}

double geometricCdf(double p, long long k) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throwError(ErrorKind::Validation, "probability out of [0,1]");
    }
    if (k < 0) {
        throwError(ErrorKind::Validation, "step count must be nonnegative");
    }
    if (k == 0 || p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    return -std::expm1(static_cast<double>(k) * std::log1p(-p));
}

ApproximationPoint approximationError(double ratePerHour, double dtSeconds, double tHours) {
    if (!(tHours >= 0.0)) {
        throwError(ErrorKind::Validation, "time horizon must be nonnegative");
    }
    ApproximationPoint pt;
    pt.tHours = tHours;
    pt.steps = std::llround(tHours * 3600.0 / dtSeconds);
    pt.tHoursRounded = static_cast<double>(pt.steps) * dtSeconds / 3600.0;
    double p = rateToStepProbability(ratePerHour, dtSeconds);
    pt.exponentialCdf = -std::expm1(-ratePerHour * pt.tHoursRounded);
    pt.geometricCdfValue = geometricCdf(p, pt.steps);
    pt.absoluteError = std::fabs(pt.exponentialCdf - pt.geometricCdfValue);
    pt.relativeError = pt.exponentialCdf > 0.0 ? pt.absoluteError / pt.exponentialCdf
                                               : std::numeric_limits<double>::quiet_NaN();
    return pt;
}

namespace {

TransitionGroup makeGroup(std::string from, std::vector<Branch> branches, PredPtr guard) {
    TransitionGroup g;
    g.fromName = std::move(from);
    g.branches = std::move(branches);
    g.guard = std::move(guard);
    return g;
}

Automaton chaosAutomaton(const std::string& name) {
    Automaton a;
    a.name = name;
    a.states = {"no", "yes"};
    a.initName = "no";
    a.groups.push_back(makeGroup("no", {{"no", -1, 1.0}}, predTrue()));
    a.groups.push_back(makeGroup("no", {{"yes", -1, 1.0}}, predTrue()));
    a.groups.push_back(makeGroup("yes", {{"yes", -1, 1.0}}, predTrue()));
    a.groups.push_back(makeGroup("yes", {{"no", -1, 1.0}}, predTrue()));
    return a;
}

} // namespace

Automaton buildFailureAutomaton(const FailureDecl& decl, AnalysisMode mode, double dtSeconds) {
    if (mode == AnalysisMode::Qualitative) {
        // Worst-case occurrence: the mode may appear and disappear freely.
        return chaosAutomaton(decl.name);
    }
    Automaton a;
    a.name = decl.name;
    a.states = {"no", "yes"};
    a.initName = "no";
    switch (decl.kind) {
        case FailureKind::PerTime: {
            double p = rateToStepProbability(decl.ratePerHour, dtSeconds);
            a.groups.push_back(makeGroup("no", {{"no", -1, 1.0 - p}, {"yes", -1, p}}, predTrue()));
            switch (decl.disappearance) {
                case Disappearance::Latching:
                    a.groups.push_back(makeGroup("yes", {{"yes", -1, 1.0}}, predTrue()));
                    break;
                case Disappearance::Repair: {
                    double mu = rateToStepProbability(decl.repairRatePerHour, dtSeconds);
                    a.groups.push_back(
                        makeGroup("yes", {{"no", -1, mu}, {"yes", -1, 1.0 - mu}}, predTrue()));
                    break;
                }
                case Disappearance::PerStep:
                    // Presence is re-drawn each step, independent of the
                    // current state: same outgoing distribution as from "no".
                    a.groups.push_back(
                        makeGroup("yes", {{"no", -1, 1.0 - p}, {"yes", -1, p}}, predTrue()));
                    break;
            }
            return a;
        }
        case FailureKind::Persistent:
            if (mode == AnalysisMode::Dtmc) {
                throwError(ErrorKind::Validation,
                           "failure mode '" + decl.name +
                           "' declares no probability; a probabilistic analysis needs per_time or per_demand",
                           decl.pos);
            }
            a.groups.push_back(makeGroup("no", {{"no", -1, 1.0}}, predTrue()));
            a.groups.push_back(makeGroup("no", {{"yes", -1, 1.0}}, predTrue()));
            a.groups.push_back(makeGroup("yes", {{"yes", -1, 1.0}}, predTrue()));
            return a;
        case FailureKind::Transient:
            if (mode == AnalysisMode::Dtmc) {
                throwError(ErrorKind::Validation,
                           "failure mode '" + decl.name +
                           "' declares no probability; a probabilistic analysis needs per_time or per_demand",
                           decl.pos);
            }
            return chaosAutomaton(decl.name);
        case FailureKind::PerDemand:
            throwError(ErrorKind::Internal,
                       "per-demand modes are realized by injectPerDemand, not buildFailureAutomaton");
    }
    throwError(ErrorKind::Internal, "unknown failure pattern");
}

namespace {

// ---- per-demand injection -------------------------------------------------

// Follows predicate references and removes double negations until the shape
// of the expression is apparent.
const PredicateExpr* expandForMatch(const PredicateExpr* e, const SystemModel& model, int depth = 0) {
    if (depth > 64) return e;
    if (e->kind == PredKind::Ref) {
        int32_t i = model.predicateIndex(e->refName);
        if (i >= 0) return expandForMatch(model.predicates[i].expr.get(), model, depth + 1);
    }
    return e;
}

// Is `e` (after expansion) exactly an atom over the failure automaton F in
// the given polarity? Success means "F is in no"; failure means "F is in yes".
enum class GatePolarity { None, Success, Failure };

GatePolarity classifyGate(const PredicateExpr* e, const std::string& failureName,
                          const SystemModel& model, int depth = 0) {
    if (depth > 64) return GatePolarity::None;
    e = expandForMatch(e, model, depth);
    if (e->kind == PredKind::StateEq || e->kind == PredKind::InState) {
        if (e->automatonName != failureName) return GatePolarity::None;
        if (e->stateName == "no") return GatePolarity::Success;
        if (e->stateName == "yes") return GatePolarity::Failure;
        return GatePolarity::None;
    }
    if (e->kind == PredKind::Not) {
        GatePolarity inner = classifyGate(e->children[0].get(), failureName, model, depth + 1);
        if (inner == GatePolarity::Success) return GatePolarity::Failure;
        if (inner == GatePolarity::Failure) return GatePolarity::Success;
        return GatePolarity::None;
    }
    return GatePolarity::None;
}

bool mentionsAutomaton(const PredicateExpr* e, const std::string& name, const SystemModel& model,
                       std::set<std::string>* visitedRefs) {
    switch (e->kind) {
        case PredKind::StateEq:
        case PredKind::InState:
            return e->automatonName == name;
        case PredKind::Ref: {
            if (visitedRefs->count(e->refName)) return false;
            visitedRefs->insert(e->refName);
            int32_t i = model.predicateIndex(e->refName);
            if (i < 0) return false;
            return mentionsAutomaton(model.predicates[i].expr.get(), name, model, visitedRefs);
        }
        default:
            for (const auto& c : e->children) {
                if (mentionsAutomaton(c.get(), name, model, visitedRefs)) return true;
            }
            return false;
    }
}

bool mentionsAutomaton(const PredPtr& e, const std::string& name, const SystemModel& model) {
    std::set<std::string> visited;
    return mentionsAutomaton(e.get(), name, model, &visited);
}

// Splits a guard into its top-level conjuncts (not looking through refs).
void topLevelConjuncts(const PredPtr& e, std::vector<PredPtr>& out) {
    if (e->kind == PredKind::And) {
        for (const auto& c : e->children) topLevelConjuncts(c, out);
    } else {
        out.push_back(e);
    }
}

// Replaces `A.state == d` atoms by `A.in(d)` for d in the rewrite set,
// leaving registered expansion expressions untouched (the caller simply does
// not pass them through here).
PredPtr rewriteToInState(const PredPtr& p, const std::string& automatonName,
                         const std::set<std::string>& states) {
    const PredicateExpr& e = *p;
    switch (e.kind) {
        case PredKind::StateEq:
            if (e.automatonName == automatonName && states.count(e.stateName)) {
                PredicateExpr copy = e;
                copy.kind = PredKind::InState;
                copy.automatonIndex = -1;
                copy.stateIndex = -1;
                copy.inExpansionIndex = -1;
                return std::make_shared<const PredicateExpr>(std::move(copy));
            }
            return p;
        case PredKind::Not:
        case PredKind::And:
        case PredKind::Or: {
            PredicateExpr copy = e;
            bool changed = false;
            for (auto& c : copy.children) {
                PredPtr nc = rewriteToInState(c, automatonName, states);
                if (nc != c) changed = true;
                c = std::move(nc);
            }
            if (!changed) return p;
            return std::make_shared<const PredicateExpr>(std::move(copy));
        }
        default:
            return p;
    }
}

std::string freshStateName(const Automaton& a, std::string base) {
    while (a.stateIndex(base) >= 0) base += "_";
    return base;
}

std::string freshAutomatonName(const SystemModel& m, std::string base) {
    while (m.automatonIndex(base) >= 0 || m.failureIndex(base) >= 0) base += "_";
    return base;
}

struct GatedTransition {
    std::string target;
    PredPtr remainder;  // guard with the gate conjunct(s) stripped
};

} // namespace

void injectPerDemand(SystemModel& model, size_t declIndex) {
    if (declIndex >= model.failures.size()) {
        throwError(ErrorKind::Internal, "failure declaration index out of range");
    }
    const std::string failureName = model.failures[declIndex].name;
    const std::string targetName = model.failures[declIndex].targetAutomaton;
    const double q = model.failures[declIndex].demandProbability;
    if (model.failures[declIndex].kind != FailureKind::PerDemand) {
        throwError(ErrorKind::Internal, "injectPerDemand on a non-per-demand mode");
    }
    if (model.failures[declIndex].materialized) {
        throwError(ErrorKind::Internal, "failure mode '" + failureName + "' is already materialized");
    }
    int32_t mIdx = model.automatonIndex(targetName);
    if (mIdx < 0) {
        throwError(ErrorKind::Validation,
                   "per-demand failure mode '" + failureName + "' targets unknown automaton '" +
                   targetName + "'", model.failures[declIndex].pos);
    }
    const PredPtr demandGuard = model.failures[declIndex].demandGuard;

    Automaton& M = model.automata[mIdx];

    // 1. Classify M's transition groups by their use of the failure mode.
    struct DemandState {
        std::vector<GatedTransition> success;  // A_s
        std::vector<GatedTransition> failure;  // B_s
    };
    std::map<std::string, DemandState> demandStates;  // keyed by from-state name
    std::vector<std::string> demandStateOrder;        // first-seen order
    std::vector<TransitionGroup> ungated;

    for (const auto& g : M.groups) {
        std::vector<PredPtr> conjuncts;
        topLevelConjuncts(g.guard, conjuncts);
        std::vector<PredPtr> kept;
        int successGates = 0, failureGates = 0;
        for (const auto& c : conjuncts) {
            GatePolarity pol = classifyGate(c.get(), failureName, model);
            if (pol == GatePolarity::Success) {
                ++successGates;
            } else if (pol == GatePolarity::Failure) {
                ++failureGates;
            } else {
                if (mentionsAutomaton(c, failureName, model)) {
                    throwError(ErrorKind::Validation,
                               "guard of a transition from '" + M.name + "." + g.fromName +
                               "' mentions failure mode '" + failureName +
                               "' in a form that is not a separable success/failure condition",
                               g.pos);
                }
                kept.push_back(c);
            }
        }
        if (successGates == 0 && failureGates == 0) {
            ungated.push_back(g);
            continue;
        }
        if (successGates > 0 && failureGates > 0) {
            throwError(ErrorKind::Validation,
                       "guard of a transition from '" + M.name + "." + g.fromName +
                       "' requires failure mode '" + failureName +
                       "' to be both absent and present", g.pos);
        }
        if (g.branches.size() != 1) {
            throwError(ErrorKind::Validation,
                       "transition from '" + M.name + "." + g.fromName + "' gated on failure mode '" +
                       failureName + "' must have a single deterministic target", g.pos);
        }
        auto& ds = demandStates[g.fromName];
        if (ds.success.empty() && ds.failure.empty()) demandStateOrder.push_back(g.fromName);
        GatedTransition gt{g.branches[0].targetName, predAnd(kept)};
        if (successGates > 0) {
            ds.success.push_back(std::move(gt));
        } else {
            ds.failure.push_back(std::move(gt));
        }
    }

    for (const auto& s : demandStateOrder) {
        const auto& ds = demandStates.at(s);
        if (ds.success.empty()) {
            throwError(ErrorKind::Validation,
                       "state '" + M.name + "." + s + "' reacts to failure mode '" + failureName +
                       "' but has no success transition (one with the mode absent)");
        }
        if (ds.failure.empty()) {
            throwError(ErrorKind::Validation,
                       "state '" + M.name + "." + s + "' reacts to failure mode '" + failureName +
                       "' but has no failure transition (one with the mode present)");
        }
    }

    // Distinct success/failure targets per demand state, first-seen order.
    auto distinctTargets = [](const std::vector<GatedTransition>& v) {
        std::vector<std::string> out;
        for (const auto& t : v) {
            if (std::find(out.begin(), out.end(), t.target) == out.end()) out.push_back(t.target);
        }
        return out;
    };

    bool elide = true;
    for (const auto& s : demandStateOrder) {
        const auto& ds = demandStates.at(s);
        if (distinctTargets(ds.success).size() != 1 || distinctTargets(ds.failure).size() != 1) {
            elide = false;
        }
    }

    // 2. Merged state per demand state.
    std::map<std::string, std::string> mergedName;
    for (const auto& s : demandStateOrder) {
        std::string ms = freshStateName(M, s + "__pending");
        M.states.push_back(ms);
        mergedName[s] = ms;
    }

    // 3. Rebuild M: ungated groups survive; gated groups become one demand
    // transition into the merged state.
    std::vector<TransitionGroup> rebuilt = ungated;
    for (const auto& s : demandStateOrder) {
        rebuilt.push_back(makeGroup(s, {{mergedName[s], -1, 1.0}}, demandGuard));
    }

    // 4. Lift: while the automaton sits in a merged state it virtually
    // occupies one of the demand's outcome states; every transition of those
    // states applies, guarded by actually being there.
    std::vector<std::string> rewriteOrder;  // all outcome states, first-seen
    std::set<std::string> rewriteSet;
    for (const auto& s : demandStateOrder) {
        const auto& ds = demandStates.at(s);
        for (const auto& list : {ds.success, ds.failure}) {
            for (const auto& t : list) {
                if (rewriteSet.insert(t.target).second) rewriteOrder.push_back(t.target);
            }
        }
    }
    std::vector<TransitionGroup> lifted;
    for (const auto& s : demandStateOrder) {
        const auto& ds = demandStates.at(s);
        std::vector<std::string> represented;
        for (const auto& list : {ds.success, ds.failure}) {
            for (const auto& t : list) {
                if (std::find(represented.begin(), represented.end(), t.target) == represented.end()) {
                    represented.push_back(t.target);
                }
            }
        }
        for (const auto& x : represented) {
            for (const auto& h : rebuilt) {
                if (h.fromName != x) continue;
                TransitionGroup lg = h;
                lg.fromName = mergedName[s];
                lg.fromIndex = -1;
                lg.guard = predAnd(h.guard, predInState(M.name, x));
                lifted.push_back(std::move(lg));
            }
        }
    }
    for (auto& g : lifted) rebuilt.push_back(std::move(g));
    M.groups = std::move(rebuilt);

    // 5. The decide automaton records which outcome pair a demand selected.
    // demandCond(s) = "virtually in s" ∧ declared demand.
    auto demandCond = [&](const std::string& s) {
        return predAnd(predInState(M.name, s), demandGuard);
    };
    std::string decideAutomatonName;
    if (!elide) {
        Automaton D;
        D.name = decideAutomatonName = freshAutomatonName(model, failureName + "_decide");
        std::vector<std::pair<std::string, std::string>> pairOrder;
        auto pairState = [](const std::string& a, const std::string& b) { return a + "__" + b; };
        for (const auto& s : demandStateOrder) {
            const auto& ds = demandStates.at(s);
            for (const auto& a : ds.success) {
                for (const auto& b : ds.failure) {
                    auto key = std::make_pair(a.target, b.target);
                    if (std::find(pairOrder.begin(), pairOrder.end(), key) == pairOrder.end()) {
                        pairOrder.push_back(key);
                    }
                }
            }
        }
        for (const auto& [a, b] : pairOrder) D.states.push_back(pairState(a, b));
        D.states.push_back("undef");
        D.initName = "undef";

        std::vector<PredPtr> anyDemandTerms;
        for (const auto& s : demandStateOrder) anyDemandTerms.push_back(demandCond(s));
        PredPtr noDemand = predNot(predOr(anyDemandTerms));

        for (const auto& z : D.states) {
            for (const auto& s : demandStateOrder) {
                const auto& ds = demandStates.at(s);
                for (const auto& a : ds.success) {
                    for (const auto& b : ds.failure) {
                        PredPtr guard = predAnd({demandCond(s), a.remainder, b.remainder});
                        D.groups.push_back(
                            makeGroup(z, {{pairState(a.target, b.target), -1, 1.0}}, guard));
                    }
                }
            }
            D.groups.push_back(makeGroup(z, {{"undef", -1, 1.0}}, noDemand));
        }
        model.automata.push_back(std::move(D));
    }

    // 6. The failure automaton itself: leaves "no" only while the demand
    // holds, and then with probability q.
    {
        Automaton F;
        F.name = failureName;
        F.states = {"no", "yes"};
        F.initName = "no";
        F.groups.push_back(makeGroup("no", {{"no", -1, 1.0 - q}, {"yes", -1, q}}, demandGuard));
        F.groups.push_back(makeGroup("no", {{"no", -1, 1.0}}, predNot(demandGuard)));
        F.groups.push_back(makeGroup("yes", {{"yes", -1, 1.0}}, predTrue()));
        model.automata.push_back(std::move(F));
    }

    // 7. Register what "in(d)" means for the outcome states: literally in d,
    // or in a merged state that resolved to d.
    const Automaton& Mref = model.automata[mIdx];
    for (const auto& d : rewriteOrder) {
        std::vector<PredPtr> terms;
        terms.push_back(predStateEq(Mref.name, d));
        for (const auto& s : demandStateOrder) {
            const auto& ds = demandStates.at(s);
            const std::string& ms = mergedName.at(s);
            auto succTargets = distinctTargets(ds.success);
            auto failTargets = distinctTargets(ds.failure);
            bool inSucc = std::find(succTargets.begin(), succTargets.end(), d) != succTargets.end();
            bool inFail = std::find(failTargets.begin(), failTargets.end(), d) != failTargets.end();
            if (elide) {
                if (inSucc) {
                    terms.push_back(predAnd(predStateEq(Mref.name, ms), predStateEq(failureName, "no")));
                }
                if (inFail) {
                    terms.push_back(predAnd(predStateEq(Mref.name, ms), predStateEq(failureName, "yes")));
                }
            } else {
                auto pairState = [](const std::string& a, const std::string& b) { return a + "__" + b; };
                if (inSucc) {
                    std::vector<PredPtr> pairTerms;
                    for (const auto& b : failTargets) {
                        pairTerms.push_back(predStateEq(decideAutomatonName, pairState(d, b)));
                    }
                    terms.push_back(predAnd({predStateEq(Mref.name, ms), predOr(pairTerms),
                                             predStateEq(failureName, "no")}));
                }
                if (inFail) {
                    std::vector<PredPtr> pairTerms;
                    for (const auto& a : succTargets) {
                        pairTerms.push_back(predStateEq(decideAutomatonName, pairState(a, d)));
                    }
                    terms.push_back(predAnd({predStateEq(Mref.name, ms), predOr(pairTerms),
                                             predStateEq(failureName, "yes")}));
                }
            }
        }
        model.inExpansions.push_back({Mref.name, d, predOr(terms)});
    }

    // 8. Everywhere except inside the registered expansions, plain equality
    // on an outcome state now means "virtually in that state".
    for (auto& a : model.automata) {
        for (auto& g : a.groups) g.guard = rewriteToInState(g.guard, targetName, rewriteSet);
    }
    for (auto& p : model.predicates) p.expr = rewriteToInState(p.expr, targetName, rewriteSet);
    for (auto& d : model.failures) {
        if (d.demandGuard) d.demandGuard = rewriteToInState(d.demandGuard, targetName, rewriteSet);
    }
    if (model.hazard) model.hazard = rewriteToInState(*model.hazard, targetName, rewriteSet);

    model.failures[declIndex].materialized = true;

    auto diags = model.resolve();
    for (const auto& d : diags) {
        if (d.severity == Diagnostic::Severity::Error) {
            throwError(ErrorKind::Validation,
                       "while injecting failure mode '" + failureName + "': " + d.message, d.pos);
        }
    }
}

PreparedModel prepareForAnalysis(const SystemModel& declared, const PrepareOptions& options) {
    PreparedModel out;
    out.model = declared;
    auto diags = out.model.resolve();
    for (const auto& d : diags) {
        if (d.severity == Diagnostic::Severity::Error) {
            throwError(ErrorKind::Validation, d.message, d.pos);
        }
    }
    if (out.model.failures.size() > 64) {
        throwError(ErrorKind::Validation, "at most 64 failure modes are supported");
    }

    if (options.mode != AnalysisMode::Qualitative) {
        for (size_t i = 0; i < out.model.failures.size(); ++i) {
            if (out.model.failures[i].kind == FailureKind::PerDemand &&
                !out.model.failures[i].materialized) {
                injectPerDemand(out.model, i);
            }
        }
    }
    for (auto& decl : out.model.failures) {
        if (decl.materialized) continue;
        out.model.automata.push_back(buildFailureAutomaton(decl, options.mode, out.model.dtSeconds));
        decl.materialized = true;
    }

    if (options.occurrenceTrackers) {
        for (const auto& decl : out.model.failures) {
            Automaton t;
            t.name = freshAutomatonName(out.model, decl.name + "_seen");
            t.states = {"clean", "seen"};
            t.initName = "clean";
            t.groups.push_back(makeGroup("clean", {{"seen", -1, 1.0}}, predStateEq(decl.name, "yes")));
            t.groups.push_back(
                makeGroup("clean", {{"clean", -1, 1.0}}, predNot(predStateEq(decl.name, "yes"))));
            t.groups.push_back(makeGroup("seen", {{"seen", -1, 1.0}}, predTrue()));
            out.model.automata.push_back(std::move(t));
        }
    }

    for (const auto& decl : out.model.failures) {
        PreparedFailureMode m;
        m.name = decl.name;
        m.kind = decl.kind;
        PredPtr active = predStateEq(decl.name, "yes");
        if (options.occurrenceTrackers) {
            active = predOr(active, predStateEq(decl.name + "_seen", "seen"));
        }
        m.activity = std::move(active);
        out.failureModes.push_back(std::move(m));
    }

    auto finalDiags = out.model.resolve();
    for (const auto& d : finalDiags) {
        if (d.severity == Diagnostic::Severity::Error) {
            throwError(ErrorKind::Internal, "analysis preparation broke the model: " + d.message, d.pos);
        }
    }
    for (auto& m : out.failureModes) {
        // Resolve the activity expressions against the prepared model by
        // borrowing its resolver via a throwaway named predicate.
        SystemModel probe = out.model;
        probe.predicates.push_back({"__activity", m.activity, {}});
        auto probeDiags = probe.resolve();
        for (const auto& d : probeDiags) {
            if (d.severity == Diagnostic::Severity::Error) {
                throwError(ErrorKind::Internal, "activity expression failed to resolve: " + d.message);
            }
        }
        m.activity = probe.predicates.back().expr;
    }
    return out;
}

namespace {

bool allModesProbabilistic(const SystemModel& m) {
    for (const auto& d : m.failures) {
        if (d.kind == FailureKind::Persistent || d.kind == FailureKind::Transient) return false;
    }
    return true;
}

} // namespace

ConservativeResult checkConservative(const SystemModel& original, const SystemModel& extended,
                                     const std::vector<std::string>& observables,
                                     const ConservativeOptions& options) {
    for (const auto& obs : observables) {
        if (original.predicateIndex(obs) < 0 || extended.predicateIndex(obs) < 0) {
            throwError(ErrorKind::Validation,
                       "observable predicate '" + obs + "' must be named in both models");
        }
    }
    auto prepareOne = [&](const SystemModel& m) {
        PrepareOptions po;
        po.mode = allModesProbabilistic(m) ? AnalysisMode::Dtmc : AnalysisMode::Mdp;
        return prepareForAnalysis(m, po);
    };
    PreparedModel a = prepareOne(original);
    PreparedModel b = prepareOne(extended);
    ComposeCaps caps;
    caps.stateCap = options.stateCap;
    StateSpace sa = compose(a.model, ComposeFlavor::Qualitative, caps);
    StateSpace sb = compose(b.model, ComposeFlavor::Qualitative, caps);

    // Observation per state: bit vector over the observables.
    auto observe = [&](const SystemModel& m, const StateSpace& s) {
        std::vector<uint64_t> obs(s.stateCount, 0);
        if (observables.size() > 64) {
            throwError(ErrorKind::Validation, "at most 64 observables are supported");
        }
        for (size_t oi = 0; oi < observables.size(); ++oi) {
            const PredicateExpr& e = *m.predicates[m.predicateIndex(observables[oi])].expr;
            for (uint64_t st = 0; st < s.stateCount; ++st) {
                if (m.evaluate(e, s.local(st))) obs[st] |= uint64_t(1) << oi;
            }
        }
        return obs;
    };
    std::vector<uint64_t> obsA = observe(a.model, sa);
    std::vector<uint64_t> obsB = observe(b.model, sb);

    // Partition refinement over the disjoint union of the two possible-step
    // graphs; initial partition by observation.
    const uint64_t n = sa.stateCount + sb.stateCount;
    auto successors = [&](uint64_t u, std::vector<uint32_t>& out) {
        out.clear();
        if (u < sa.stateCount) {
            for (uint64_t bix = sa.branchOffset[sa.groupOffset[u]];
                 bix < sa.branchOffset[sa.groupOffset[u + 1]]; ++bix) {
                out.push_back(sa.target[bix]);
            }
        } else {
            uint64_t v = u - sa.stateCount;
            for (uint64_t bix = sb.branchOffset[sb.groupOffset[v]];
                 bix < sb.branchOffset[sb.groupOffset[v + 1]]; ++bix) {
                out.push_back(static_cast<uint32_t>(sb.target[bix] + sa.stateCount));
            }
        }
    };

    std::vector<uint32_t> block(n);
    {
        std::map<uint64_t, uint32_t> byObs;
        for (uint64_t u = 0; u < n; ++u) {
            uint64_t o = u < sa.stateCount ? obsA[u] : obsB[u - sa.stateCount];
            block[u] = byObs.emplace(o, static_cast<uint32_t>(byObs.size())).first->second;
        }
    }
    bool changed = true;
    std::vector<uint32_t> succ;
    while (changed) {
        changed = false;
        std::map<std::pair<uint32_t, std::vector<uint32_t>>, uint32_t> sig;
        std::vector<uint32_t> next(n);
        for (uint64_t u = 0; u < n; ++u) {
            successors(u, succ);
            std::vector<uint32_t> sblocks;
            sblocks.reserve(succ.size());
            for (uint32_t v : succ) sblocks.push_back(block[v]);
            std::sort(sblocks.begin(), sblocks.end());
            sblocks.erase(std::unique(sblocks.begin(), sblocks.end()), sblocks.end());
            next[u] = sig.emplace(std::make_pair(block[u], std::move(sblocks)),
                                  static_cast<uint32_t>(sig.size()))
                          .first->second;
        }
        if (next != block) {
            changed = true;
            block = std::move(next);
        }
    }

    ConservativeResult result;
    result.equivalent = block[0] == block[sa.stateCount];
    if (!result.equivalent) {
        uint64_t oA = obsA[0], oB = obsB[0];
        if (oA != oB) {
            for (size_t oi = 0; oi < observables.size(); ++oi) {
                if (((oA >> oi) & 1) != ((oB >> oi) & 1)) {
                    result.note = "observable '" + observables[oi] + "' differs already in the initial state";
                    break;
                }
            }
        } else {
            result.note = "reachable observable behavior differs";
        }
    }
    return result;
}

} // namespace ssmcheck
