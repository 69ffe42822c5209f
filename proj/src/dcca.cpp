#include "ssmcheck/dcca.hpp"

#include <algorithm>
#include <numeric>

namespace ssmcheck {

DccaAnalyzer::DccaAnalyzer(const SystemModel& declared, const DccaOptions& options)
    : options_(options) {
    PrepareOptions po;
    po.mode = AnalysisMode::Qualitative;
    po.occurrenceTrackers = options.occurrence == OccurrenceSemantics::Ever;
    prepared_ = prepareForAnalysis(declared, po);
    if (!prepared_.model.hazard) {
        throwError(ErrorKind::Validation, "the model declares no hazard");
    }
    hazardText_ = declared.hazardName.empty() ? "H" : declared.hazardName;
    ComposeCaps caps;
    caps.stateCap = options.stateCap;
    space_ = compose(prepared_.model, ComposeFlavor::Qualitative, caps);

    const size_t m = prepared_.failureModes.size();
    activeMask_.assign(space_.stateCount, 0);
    for (size_t mi = 0; mi < m; ++mi) {
        const PredicateExpr& act = *prepared_.failureModes[mi].activity;
        for (uint64_t s = 0; s < space_.stateCount; ++s) {
            if (prepared_.model.evaluate(act, space_.local(s))) {
                activeMask_[s] |= uint64_t(1) << mi;
            }
        }
    }
    hazardBits_ = labelStates(prepared_.model, space_, **prepared_.model.hazard);

    // Predecessor lists in CSR form (qualitative spaces have one group per
    // state, so the branch array is the edge list).
    edgeCount_ = space_.branchCount;
    std::vector<uint64_t> indeg(space_.stateCount + 1, 0);
    for (uint64_t b = 0; b < space_.branchCount; ++b) ++indeg[space_.target[b] + 1];
    predOffset_.assign(space_.stateCount + 1, 0);
    std::partial_sum(indeg.begin(), indeg.end(), predOffset_.begin());
    predState_.resize(space_.branchCount);
    std::vector<uint64_t> fill(predOffset_.begin(), predOffset_.end() - 1);
    for (uint64_t s = 0; s < space_.stateCount; ++s) {
        for (uint64_t b = space_.branchOffset[space_.groupOffset[s]];
             b < space_.branchOffset[space_.groupOffset[s + 1]]; ++b) {
            predState_[fill[space_.target[b]]++] = static_cast<uint32_t>(s);
        }
    }
}

bool DccaAnalyzer::criticalMask(uint64_t mask) const {
    // Least fixpoint of E[allowed U hazard], computed backwards from the
    // hazard states. A hazard state qualifies outright; any other state
    // qualifies if only modes inside the mask are active there and some
    // successor qualifies.
    std::vector<uint8_t> marked(space_.stateCount, 0);
    std::vector<uint32_t> worklist;
    for (uint64_t s = 0; s < space_.stateCount; ++s) {
        if (bitsetTest(hazardBits_, s)) {
            marked[s] = 1;
            worklist.push_back(static_cast<uint32_t>(s));
        }
    }
    while (!worklist.empty()) {
        uint32_t u = worklist.back();
        worklist.pop_back();
        if (marked[0]) break;
        for (uint64_t i = predOffset_[u]; i < predOffset_[u + 1]; ++i) {
            uint32_t p = predState_[i];
            if (marked[p]) continue;
            if ((activeMask_[p] & ~mask) != 0) continue;  // a mode outside the set is active
            marked[p] = 1;
            worklist.push_back(p);
        }
    }
    return marked[0] != 0;
}

bool DccaAnalyzer::isCritical(const std::vector<std::string>& modes) {
    uint64_t mask = 0;
    for (const auto& name : modes) {
        size_t mi = 0;
        for (; mi < prepared_.failureModes.size(); ++mi) {
            if (prepared_.failureModes[mi].name == name) break;
        }
        if (mi == prepared_.failureModes.size()) {
            throwError(ErrorKind::Validation, "unknown failure mode '" + name + "'");
        }
        mask |= uint64_t(1) << mi;
    }
    return criticalMask(mask);
}

Witness DccaAnalyzer::buildWitness(uint64_t mask, const std::vector<std::string>& modes) const {
    // Forward search through states where only modes of the set are active,
    // stopping at the first hazard state; breadth-first so the trace is short.
    Witness w;
    w.modes = modes;
    std::vector<int64_t> parent(space_.stateCount, -2);  // -2 unvisited, -1 root
    std::vector<uint32_t> queue;
    uint64_t found = UINT64_MAX;
    parent[0] = -1;
    if (bitsetTest(hazardBits_, 0)) {
        found = 0;
    } else {
        queue.push_back(0);
        for (size_t qi = 0; qi < queue.size() && found == UINT64_MAX; ++qi) {
            uint32_t u = queue[qi];
            if ((activeMask_[u] & ~mask) != 0) continue;  // cannot be left within the set
            for (uint64_t b = space_.branchOffset[space_.groupOffset[u]];
                 b < space_.branchOffset[space_.groupOffset[u + 1]]; ++b) {
                uint32_t v = space_.target[b];
                if (parent[v] != -2) continue;
                parent[v] = u;
                if (bitsetTest(hazardBits_, v)) {
                    found = v;
                    break;
                }
                queue.push_back(v);
            }
        }
    }
    if (found == UINT64_MAX) return w;  // no witness (should not happen for critical sets)
    std::vector<uint32_t> path;
    for (int64_t s = static_cast<int64_t>(found); s != -1; s = parent[s]) {
        path.push_back(static_cast<uint32_t>(s));
    }
    std::reverse(path.begin(), path.end());
    for (uint32_t s : path) {
        WitnessStep step;
        auto locals = space_.local(s);
        for (size_t i = 0; i < prepared_.model.automata.size(); ++i) {
            step.localStates.push_back(prepared_.model.automata[i].states[locals[i]]);
        }
        w.steps.push_back(std::move(step));
    }
    return w;
}

DccaResult DccaAnalyzer::run() {
    DccaResult result;
    result.hazardText = hazardText_;
    for (const auto& m : prepared_.failureModes) result.failureModes.push_back(m.name);
    for (const auto& a : prepared_.model.automata) result.automataNames.push_back(a.name);
    result.stats.states = space_.stateCount;
    result.stats.transitions = space_.branchCount;

    const size_t m = prepared_.failureModes.size();

    ++result.stats.checksPerformed;
    if (criticalMask(0)) {
        // The hazard is reachable with no failure mode active at all: a
        // functional defect. Mode sets are meaningless until it is fixed.
        result.emptySetCritical = true;
        return result;
    }

    // Mode positions ordered by name: subsets are enumerated by cardinality,
    // then lexicographically in that name order.
    std::vector<size_t> byName(m);
    std::iota(byName.begin(), byName.end(), size_t{0});
    std::sort(byName.begin(), byName.end(), [&](size_t a, size_t b) {
        return prepared_.failureModes[a].name < prepared_.failureModes[b].name;
    });

    std::vector<uint64_t> foundMasks;
    for (size_t c = 1; c <= m; ++c) {
        // Combination positions into byName, starting at {0, 1, ..., c-1}.
        std::vector<size_t> comb(c);
        std::iota(comb.begin(), comb.end(), size_t{0});
        while (true) {
            uint64_t mask = 0;
            for (size_t pos : comb) mask |= uint64_t(1) << byName[pos];
            bool pruned = false;
            for (uint64_t f : foundMasks) {
                if ((mask & f) == f) {
                    pruned = true;
                    break;
                }
            }
            if (pruned) {
                ++result.stats.subsetsPruned;
            } else {
                ++result.stats.checksPerformed;
                if (criticalMask(mask)) {
                    foundMasks.push_back(mask);
                    std::vector<std::string> names;
                    for (size_t mi = 0; mi < m; ++mi) {
                        if (mask & (uint64_t(1) << mi)) {
                            names.push_back(prepared_.failureModes[mi].name);
                        }
                    }
                    std::sort(names.begin(), names.end());
                    if (options_.witnesses) {
                        result.witnesses.push_back(buildWitness(mask, names));
                    }
                    result.minimalCriticalSets.push_back(std::move(names));
                }
            }
            // next combination
            bool advanced = false;
            for (size_t i = c; i-- > 0;) {
                if (comb[i] != i + m - c) {
                    ++comb[i];
                    for (size_t j = i + 1; j < c; ++j) comb[j] = comb[j - 1] + 1;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) break;
        }
    }
    result.stats.setsFound = result.minimalCriticalSets.size();
    return result;
}

} // namespace ssmcheck
