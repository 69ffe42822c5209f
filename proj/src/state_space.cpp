#include "ssmcheck/state_space.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>

#include "ssmcheck/failures.hpp"

namespace ssmcheck {

namespace {

struct VecHash {
    size_t operator()(const std::vector<uint8_t>& v) const {
        uint64_t h = 1469598103934665603ull;
        for (uint8_t b : v) {
            h ^= b;
            h *= 1099511628211ull;
        }
        return static_cast<size_t>(h);
    }
};

constexpr double kProbabilitySumTolerance = 1e-9;

void checkGroupSum(const SystemModel& model, const Automaton& a, const TransitionGroup& g) {
    double sum = 0.0;
    for (const auto& b : g.branches) {
        if (!(b.probability >= 0.0 && b.probability <= 1.0)) {
            throwError(ErrorKind::Validation,
                       "automaton '" + a.name + "', state '" + g.fromName +
                       "': branch probability " + std::to_string(b.probability) +
                       " is outside [0,1]", g.pos);
        }
        sum += b.probability;
    }
    if (std::fabs(sum - 1.0) > kProbabilitySumTolerance) {
        throwError(ErrorKind::Validation,
                   "automaton '" + a.name + "', state '" + g.fromName +
                   "': branch probabilities sum to " + std::to_string(sum) + ", not 1", g.pos);
    }
    (void)model;
}

} // namespace

std::string describeState(const SystemModel& model, std::span<const uint8_t> locals) {
    std::string out = "{";
    for (size_t i = 0; i < model.automata.size(); ++i) {
        if (i) out += ", ";
        out += model.automata[i].name + ":" + model.automata[i].states[locals[i]];
    }
    out += "}";
    return out;
}

StateSpace compose(const SystemModel& model, ComposeFlavor flavor, const ComposeCaps& caps) {
    const size_t n = model.automata.size();
    if (n == 0) {
        throwError(ErrorKind::Validation, "the model has no automata");
    }
    if (caps.stateCap > 0xFFFFFFFFull) {
        throwError(ErrorKind::Validation, "the state cap cannot exceed 4294967295");
    }
    for (const auto& a : model.automata) {
        if (a.states.size() > 256) {
            throwError(ErrorKind::Validation,
                       "automaton '" + a.name + "' has more than 256 states");
        }
        if (a.initIndex < 0) {
            throwError(ErrorKind::Internal, "composing an unresolved model");
        }
    }

    // Transition groups per automaton indexed by source state.
    std::vector<std::vector<std::vector<const TransitionGroup*>>> bySource(n);
    for (size_t i = 0; i < n; ++i) {
        bySource[i].resize(model.automata[i].states.size());
        for (const auto& g : model.automata[i].groups) {
            bySource[i][g.fromIndex].push_back(&g);
        }
    }

    StateSpace space;
    space.flavor = flavor;
    space.automatonCount = static_cast<uint32_t>(n);

    std::unordered_map<std::vector<uint8_t>, uint32_t, VecHash> index;
    std::vector<uint8_t> init(n);
    for (size_t i = 0; i < n; ++i) init[i] = static_cast<uint8_t>(model.automata[i].initIndex);
    index.emplace(init, 0);
    space.locals.insert(space.locals.end(), init.begin(), init.end());
    space.stateCount = 1;
    space.groupOffset.push_back(0);
    space.branchOffset.push_back(0);

    auto intern = [&](const std::vector<uint8_t>& locals) -> uint32_t {
        auto it = index.find(locals);
        if (it != index.end()) return it->second;
        if (space.stateCount >= caps.stateCap) {
            throwError(ErrorKind::Capacity,
                       "state space exceeds the cap of " + std::to_string(caps.stateCap) +
                       " states");
        }
        uint32_t id = static_cast<uint32_t>(space.stateCount++);
        index.emplace(locals, id);
        space.locals.insert(space.locals.end(), locals.begin(), locals.end());
        return id;
    };

    std::vector<std::vector<const TransitionGroup*>> enabledPer(n);
    std::vector<uint8_t> succ(n);

    for (uint64_t s = 0; s < space.stateCount; ++s) {
        // space.locals grows while we iterate; copy the current state's view.
        std::vector<uint8_t> locals(space.locals.begin() + s * n, space.locals.begin() + (s + 1) * n);
        for (size_t i = 0; i < n; ++i) {
            enabledPer[i].clear();
            for (const TransitionGroup* g : bySource[i][locals[i]]) {
                if (model.evaluate(*g->guard, locals)) enabledPer[i].push_back(g);
            }
            if (enabledPer[i].empty()) {
                std::string guards;
                for (const auto& g : model.automata[i].groups) {
                    if (g.fromIndex != locals[i]) continue;
                    if (!guards.empty()) guards += "  ";
                    guards += "[" + printPredicate(*g.guard) + "]";
                }
                if (guards.empty()) guards = "(none declared)";
                throwError(ErrorKind::Validation,
                           "automaton '" + model.automata[i].name +
                           "' has no enabled transition in state " + describeState(model, locals) +
                           " (deadlock); its guards there are " + guards);
            }
            if (flavor == ComposeFlavor::Dtmc && enabledPer[i].size() > 1) {
                std::string guards;
                for (const TransitionGroup* g : enabledPer[i]) {
                    if (!guards.empty()) guards += "  and  ";
                    guards += "[" + printPredicate(*g->guard) + "]";
                }
                throwError(ErrorKind::Validation,
                           "automaton '" + model.automata[i].name + "' has " +
                           std::to_string(enabledPer[i].size()) + " enabled transitions in state " +
                           describeState(model, locals) + ": " + guards +
                           " (not deterministic; use a worst-case analysis for nondeterministic models)");
            }
        }

        if (flavor == ComposeFlavor::Qualitative) {
            // Per automaton, all positive-probability successors; the joint
            // successors are their product, stored as a single group.
            std::vector<std::vector<uint8_t>> targets(n);
            for (size_t i = 0; i < n; ++i) {
                for (const TransitionGroup* g : enabledPer[i]) {
                    for (const auto& b : g->branches) {
                        if (b.probability <= 0.0) continue;
                        uint8_t t = static_cast<uint8_t>(b.targetIndex);
                        bool seen = false;
                        for (uint8_t u : targets[i]) {
                            if (u == t) { seen = true; break; }
                        }
                        if (!seen) targets[i].push_back(t);
                    }
                }
                if (targets[i].empty()) {
                    throwError(ErrorKind::Validation,
                               "automaton '" + model.automata[i].name +
                               "' has no possible successor in state " + describeState(model, locals) +
                               " (all enabled branches have probability 0)");
                }
            }
            std::vector<size_t> pick(n, 0);
            while (true) {
                for (size_t i = 0; i < n; ++i) succ[i] = targets[i][pick[i]];
                space.target.push_back(intern(succ));
                space.probability.push_back(1.0);
                size_t i = 0;
                for (; i < n; ++i) {
                    if (++pick[i] < targets[i].size()) break;
                    pick[i] = 0;
                }
                if (i == n) break;
            }
            space.branchOffset.push_back(space.target.size());
            space.groupOffset.push_back(space.groupOffset.back() + 1);
        } else if (flavor == ComposeFlavor::Dtmc) {
            for (size_t i = 0; i < n; ++i) {
                checkGroupSum(model, model.automata[i], *enabledPer[i][0]);
            }
            std::vector<size_t> pick(n, 0);
            while (true) {
                double p = 1.0;
                for (size_t i = 0; i < n; ++i) {
                    const Branch& b = enabledPer[i][0]->branches[pick[i]];
                    succ[i] = static_cast<uint8_t>(b.targetIndex);
                    p *= b.probability;
                }
                if (p > 0.0) {
                    space.target.push_back(intern(succ));
                    space.probability.push_back(p);
                }
                size_t i = 0;
                for (; i < n; ++i) {
                    if (++pick[i] < enabledPer[i][0]->branches.size()) break;
                    pick[i] = 0;
                }
                if (i == n) break;
            }
            space.branchOffset.push_back(space.target.size());
            space.groupOffset.push_back(space.groupOffset.back() + 1);
        } else {  // Mdp
            std::vector<size_t> groupPick(n, 0);
            uint64_t groupsHere = 0;
            while (true) {
                for (size_t i = 0; i < n; ++i) {
                    checkGroupSum(model, model.automata[i], *enabledPer[i][groupPick[i]]);
                }
                std::vector<size_t> pick(n, 0);
                while (true) {
                    double p = 1.0;
                    for (size_t i = 0; i < n; ++i) {
                        const Branch& b = enabledPer[i][groupPick[i]]->branches[pick[i]];
                        succ[i] = static_cast<uint8_t>(b.targetIndex);
                        p *= b.probability;
                    }
                    if (p > 0.0) {
                        space.target.push_back(intern(succ));
                        space.probability.push_back(p);
                    }
                    size_t i = 0;
                    for (; i < n; ++i) {
                        if (++pick[i] < enabledPer[i][groupPick[i]]->branches.size()) break;
                        pick[i] = 0;
                    }
                    if (i == n) break;
                }
                space.branchOffset.push_back(space.target.size());
                ++groupsHere;
                size_t i = 0;
                for (; i < n; ++i) {
                    if (++groupPick[i] < enabledPer[i].size()) break;
                    groupPick[i] = 0;
                }
                if (i == n) break;
            }
            space.groupOffset.push_back(space.groupOffset.back() + groupsHere);
        }
    }
    space.branchCount = space.target.size();
    return space;
}

Bitset labelStates(const SystemModel& model, const StateSpace& space, const PredicateExpr& expr) {
    Bitset bits((space.stateCount + 63) / 64, 0);
    for (uint64_t s = 0; s < space.stateCount; ++s) {
        if (model.evaluate(expr, space.local(s))) bitsetSet(bits, s);
    }
    return bits;
}

std::vector<Diagnostic> validateModel(const SystemModel& model, ComposeFlavor flavor,
                                      bool requireHazard, const ComposeCaps& caps) {
    std::vector<Diagnostic> out;
    SystemModel copy = model;
    auto diags = copy.resolve();
    for (auto& d : diags) out.push_back(std::move(d));
    bool hasError = false;
    for (const auto& d : out) {
        if (d.severity == Diagnostic::Severity::Error) hasError = true;
    }
    if (hasError) return out;

    if (!(copy.dtSeconds > 0.0)) {
        out.push_back({Diagnostic::Severity::Error, "the step length dt must be positive", {}});
        return out;
    }
    if (requireHazard && !copy.hazard) {
        out.push_back({Diagnostic::Severity::Error, "the model declares no hazard", {}});
        return out;
    }
    for (const auto& a : copy.automata) {
        for (const auto& g : a.groups) {
            try {
                checkGroupSum(copy, a, g);
            } catch (const Error& e) {
                out.push_back({Diagnostic::Severity::Error, e.what(), e.pos()});
                hasError = true;
            }
        }
    }
    if (hasError) return out;

    PrepareOptions po;
    po.mode = flavor == ComposeFlavor::Qualitative ? AnalysisMode::Qualitative
              : flavor == ComposeFlavor::Dtmc      ? AnalysisMode::Dtmc
                                                   : AnalysisMode::Mdp;
    PreparedModel prepared;
    try {
        prepared = prepareForAnalysis(copy, po);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Capacity) throw;
        out.push_back({Diagnostic::Severity::Error, e.what(), e.pos()});
        return out;
    }
    StateSpace space;
    try {
        space = compose(prepared.model, flavor, caps);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Capacity) throw;
        out.push_back({Diagnostic::Severity::Error, e.what(), e.pos()});
        return out;
    }
    for (const auto& d : prepared.model.failures) {
        if (d.kind != FailureKind::PerDemand || !d.demandGuard) continue;
        Bitset demand = labelStates(prepared.model, space, *d.demandGuard);
        bool any = false;
        for (uint64_t w : demand) {
            if (w) { any = true; break; }
        }
        if (!any) {
            out.push_back({Diagnostic::Severity::Warning,
                           "the demand of failure mode '" + d.name +
                           "' is never placed in any reachable state", d.pos});
        }
    }
    return out;
}

} // namespace ssmcheck
