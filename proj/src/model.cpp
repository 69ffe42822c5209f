#include "ssmcheck/model.hpp"

#include <functional>
#include <unordered_map>

namespace ssmcheck {

int32_t Automaton::stateIndex(const std::string& s) const {
    for (size_t i = 0; i < states.size(); ++i) {
        if (states[i] == s) return static_cast<int32_t>(i);
    }
    return -1;
}

int32_t SystemModel::automatonIndex(const std::string& n) const {
    for (size_t i = 0; i < automata.size(); ++i) {
        if (automata[i].name == n) return static_cast<int32_t>(i);
    }
    return -1;
}

int32_t SystemModel::predicateIndex(const std::string& n) const {
    for (size_t i = 0; i < predicates.size(); ++i) {
        if (predicates[i].name == n) return static_cast<int32_t>(i);
    }
    return -1;
}

int32_t SystemModel::failureIndex(const std::string& n) const {
    for (size_t i = 0; i < failures.size(); ++i) {
        if (failures[i].name == n) return static_cast<int32_t>(i);
    }
    return -1;
}

namespace {

struct Resolver {
    const SystemModel& model;
    std::vector<Diagnostic>& diags;
    std::unordered_map<std::string, int32_t> autoIdx;
    std::unordered_map<std::string, int32_t> predIdx;
    std::unordered_map<std::string, int32_t> declIdx;  // non-materialized failure decls
    std::unordered_map<std::string, std::unordered_map<std::string, int32_t>> inExpIdx;

    void error(const std::string& msg, SourcePos pos) {
        diags.push_back({Diagnostic::Severity::Error, msg, pos});
    }

    PredPtr resolveExpr(const PredPtr& p) {
        PredicateExpr e = *p;  // copy-and-fill; nodes may be shared across models
        switch (e.kind) {
            case PredKind::True:
            case PredKind::False:
                return p;
            case PredKind::StateEq:
            case PredKind::InState: {
                if (e.kind == PredKind::InState) {
                    e.inExpansionIndex = -1;
                    auto itA = inExpIdx.find(e.automatonName);
                    if (itA != inExpIdx.end()) {
                        auto itS = itA->second.find(e.stateName);
                        if (itS != itA->second.end()) {
                            e.inExpansionIndex = itS->second;
                            e.automatonIndex = -1;
                            e.stateIndex = -1;
                            return std::make_shared<const PredicateExpr>(std::move(e));
                        }
                    }
                }
                auto itA = autoIdx.find(e.automatonName);
                if (itA != autoIdx.end()) {
                    e.automatonIndex = itA->second;
                    const Automaton& a = model.automata[itA->second];
                    e.stateIndex = a.stateIndex(e.stateName);
                    if (e.stateIndex < 0) {
                        error("automaton '" + e.automatonName + "' has no state '" + e.stateName + "'", e.pos);
                    }
                } else if (auto itD = declIdx.find(e.automatonName); itD != declIdx.end()) {
                    // Declared failure mode not yet turned into an automaton:
                    // remember which declaration the atom refers to so a later
                    // resolve (after materialization) can bind it for real.
                    e.automatonIndex = -2 - itD->second;
                    if (e.stateName == "no") {
                        e.stateIndex = 0;
                    } else if (e.stateName == "yes") {
                        e.stateIndex = 1;
                    } else {
                        error("failure mode '" + e.automatonName + "' has states 'no' and 'yes', not '" + e.stateName + "'", e.pos);
                    }
                } else {
                    error("unknown automaton '" + e.automatonName + "'", e.pos);
                    e.automatonIndex = -1;
                }
                return std::make_shared<const PredicateExpr>(std::move(e));
            }
            case PredKind::Ref: {
                auto it = predIdx.find(e.refName);
                if (it != predIdx.end()) {
                    e.refIndex = it->second;
                } else {
                    error("unknown predicate '" + e.refName + "'", e.pos);
                    e.refIndex = -1;
                }
                return std::make_shared<const PredicateExpr>(std::move(e));
            }
            case PredKind::Not:
            case PredKind::And:
            case PredKind::Or: {
                for (auto& c : e.children) c = resolveExpr(c);
                return std::make_shared<const PredicateExpr>(std::move(e));
            }
        }
        return p;
    }
};

} // namespace

std::vector<Diagnostic> SystemModel::resolve() {
    std::vector<Diagnostic> diags;
    Resolver r{*this, diags, {}, {}, {}, {}};

    for (size_t i = 0; i < automata.size(); ++i) {
        auto [it, fresh] = r.autoIdx.emplace(automata[i].name, static_cast<int32_t>(i));
        if (!fresh) {
            r.error("duplicate automaton name '" + automata[i].name + "'", automata[i].pos);
        }
        std::unordered_map<std::string, int> seen;
        for (const auto& s : automata[i].states) {
            if (!seen.emplace(s, 1).second) {
                r.error("automaton '" + automata[i].name + "' declares state '" + s + "' twice", automata[i].pos);
            }
        }
    }
    for (size_t i = 0; i < predicates.size(); ++i) {
        if (!r.predIdx.emplace(predicates[i].name, static_cast<int32_t>(i)).second) {
            r.error("duplicate predicate name '" + predicates[i].name + "'", predicates[i].pos);
        }
    }
    for (size_t i = 0; i < failures.size(); ++i) {
        const FailureDecl& d = failures[i];
        if (failureIndex(d.name) != static_cast<int32_t>(i)) {
            r.error("duplicate failure mode name '" + d.name + "'", d.pos);
        }
        if (!d.materialized) {
            if (r.autoIdx.count(d.name)) {
                r.error("failure mode '" + d.name + "' collides with an automaton of the same name", d.pos);
            }
            r.declIdx.emplace(d.name, static_cast<int32_t>(i));
        } else if (!r.autoIdx.count(d.name)) {
            r.error("failure mode '" + d.name + "' is marked materialized but has no automaton", d.pos);
        }
    }
    // Two per-demand modes on the same component would need their decision
    // steps interleaved; that combination is rejected.
    for (size_t i = 0; i < failures.size(); ++i) {
        const FailureDecl& a = failures[i];
        if (a.kind != FailureKind::PerDemand || a.materialized) continue;
        for (size_t j = i + 1; j < failures.size(); ++j) {
            const FailureDecl& b = failures[j];
            if (b.kind == FailureKind::PerDemand && !b.materialized && a.targetAutomaton == b.targetAutomaton) {
                r.error("failure modes '" + a.name + "' and '" + b.name +
                        "' are both per-demand modes on automaton '" + a.targetAutomaton + "'", b.pos);
            }
        }
    }
    for (size_t i = 0; i < inExpansions.size(); ++i) {
        r.inExpIdx[inExpansions[i].automatonName][inExpansions[i].stateName] = static_cast<int32_t>(i);
    }

    for (auto& a : automata) {
        a.initIndex = a.stateIndex(a.initName);
        if (a.initIndex < 0) {
            r.error("automaton '" + a.name + "' has no state '" + a.initName + "' to start in", a.pos);
        }
        for (auto& g : a.groups) {
            g.fromIndex = a.stateIndex(g.fromName);
            if (g.fromIndex < 0) {
                r.error("automaton '" + a.name + "' has no state '" + g.fromName + "'", g.pos);
            }
            g.guard = r.resolveExpr(g.guard);
            for (auto& b : g.branches) {
                b.targetIndex = a.stateIndex(b.targetName);
                if (b.targetIndex < 0) {
                    r.error("automaton '" + a.name + "' has no state '" + b.targetName + "'", g.pos);
                }
            }
        }
    }
    for (auto& p : predicates) p.expr = r.resolveExpr(p.expr);
    for (auto& d : failures) {
        if (d.kind == FailureKind::PerDemand) {
            if (automatonIndex(d.targetAutomaton) < 0) {
                r.error("per-demand failure mode '" + d.name + "' targets unknown automaton '" + d.targetAutomaton + "'", d.pos);
            }
            if (d.demandGuard) d.demandGuard = r.resolveExpr(d.demandGuard);
        }
    }
    if (hazard) hazard = r.resolveExpr(*hazard);
    for (auto& x : inExpansions) x.expansion = r.resolveExpr(x.expansion);

    // Named predicates may reference each other; a reference cycle would make
    // evaluation diverge, so reject it here. 0 = unvisited, 1 = on stack, 2 = done.
    std::vector<int> mark(predicates.size(), 0);
    std::function<bool(int32_t)> dfs = [&](int32_t i) -> bool {
        if (mark[i] == 2) return true;
        if (mark[i] == 1) return false;
        mark[i] = 1;
        std::function<bool(const PredicateExpr&)> walk = [&](const PredicateExpr& e) -> bool {
            if (e.kind == PredKind::Ref && e.refIndex >= 0) {
                if (!dfs(e.refIndex)) return false;
            }
            for (const auto& c : e.children) {
                if (!walk(*c)) return false;
            }
            return true;
        };
        bool ok = walk(*predicates[i].expr);
        mark[i] = 2;
        return ok;
    };
    for (size_t i = 0; i < predicates.size(); ++i) {
        if (mark[i] == 0 && !dfs(static_cast<int32_t>(i))) {
            r.error("predicate definitions form a reference cycle involving '" + predicates[i].name + "'", predicates[i].pos);
        }
    }
    return diags;
}

bool SystemModel::evaluate(const PredicateExpr& expr, std::span<const uint8_t> locals) const {
    switch (expr.kind) {
        case PredKind::True: return true;
        case PredKind::False: return false;
        case PredKind::StateEq:
        case PredKind::InState: {
            if (expr.kind == PredKind::InState && expr.inExpansionIndex >= 0) {
                return evaluate(*inExpansions[expr.inExpansionIndex].expansion, locals);
            }
            if (expr.automatonIndex <= -2) {
                throwError(ErrorKind::Internal,
                           "expression mentions failure mode '" + expr.automatonName +
                           "' which has not been turned into an automaton");
            }
            if (expr.automatonIndex < 0 || expr.stateIndex < 0) {
                throwError(ErrorKind::Internal, "evaluating an unresolved state atom");
            }
            return locals[expr.automatonIndex] == expr.stateIndex;
        }
        case PredKind::Ref:
            if (expr.refIndex < 0) {
                throwError(ErrorKind::Internal, "evaluating an unresolved predicate reference");
            }
            return evaluate(*predicates[expr.refIndex].expr, locals);
        case PredKind::Not:
            return !evaluate(*expr.children[0], locals);
        case PredKind::And:
            for (const auto& c : expr.children) {
                if (!evaluate(*c, locals)) return false;
            }
            return true;
        case PredKind::Or:
            for (const auto& c : expr.children) {
                if (evaluate(*c, locals)) return true;
            }
            return false;
    }
    throwError(ErrorKind::Internal, "evaluating an expression of unknown kind");
}

namespace {

PredPtr substitutePinned(const PredPtr& p, const std::map<std::string, bool>& pinned) {
    const PredicateExpr& e = *p;
    switch (e.kind) {
        case PredKind::StateEq:
        case PredKind::InState: {
            auto it = pinned.find(e.automatonName);
            if (it == pinned.end()) return p;
            bool failed = it->second;
            if (e.stateName == "yes") return failed ? predTrue() : predFalse();
            if (e.stateName == "no") return failed ? predFalse() : predTrue();
            throwError(ErrorKind::Validation,
                       "failure mode '" + e.automatonName + "' has states 'no' and 'yes', not '" + e.stateName + "'",
                       e.pos);
        }
        case PredKind::Not:
        case PredKind::And:
        case PredKind::Or: {
            PredicateExpr copy = e;
            bool changed = false;
            for (auto& c : copy.children) {
                PredPtr nc = substitutePinned(c, pinned);
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

} // namespace

SystemModel pinFailures(const SystemModel& model, const std::map<std::string, bool>& pinned) {
    SystemModel out = model;
    for (const auto& [name, value] : pinned) {
        (void)value;
        if (out.failureIndex(name) < 0) {
            throwError(ErrorKind::Validation, "cannot pin '" + name + "': no such failure mode");
        }
    }
    std::erase_if(out.failures, [&](const FailureDecl& d) { return pinned.count(d.name) != 0; });
    std::erase_if(out.automata, [&](const Automaton& a) { return pinned.count(a.name) != 0; });

    for (auto& a : out.automata) {
        for (auto& g : a.groups) g.guard = substitutePinned(g.guard, pinned);
    }
    for (auto& p : out.predicates) p.expr = substitutePinned(p.expr, pinned);
    for (auto& d : out.failures) {
        if (d.demandGuard) d.demandGuard = substitutePinned(d.demandGuard, pinned);
    }
    if (out.hazard) out.hazard = substitutePinned(*out.hazard, pinned);
    for (auto& x : out.inExpansions) x.expansion = substitutePinned(x.expansion, pinned);

    auto diags = out.resolve();
    for (const auto& d : diags) {
        if (d.severity == Diagnostic::Severity::Error) {
            throwError(ErrorKind::Validation, "after pinning failure modes: " + d.message, d.pos);
        }
    }
    return out;
}

} // namespace ssmcheck
