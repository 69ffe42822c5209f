#include "support/oracles.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace ssmcheck::testsupport {

namespace {

using Locals = std::vector<uint8_t>;

// Indices of the groups enabled for each automaton in the given joint state.
std::vector<std::vector<size_t>> enabledGroups(const SystemModel& m, const Locals& locals) {
    std::vector<std::vector<size_t>> enabled(m.automata.size());
    for (size_t i = 0; i < m.automata.size(); ++i) {
        const Automaton& a = m.automata[i];
        for (size_t g = 0; g < a.groups.size(); ++g) {
            if (a.groups[g].fromIndex != locals[i]) continue;
            if (m.evaluate(*a.groups[g].guard, locals)) enabled[i].push_back(g);
        }
        if (enabled[i].empty()) {
            throw std::runtime_error("oracle: deadlock in automaton " + a.name);
        }
    }
    return enabled;
}

// All joint successors of one fixed group choice, with probabilities, by
// walking the Cartesian product of positive-probability branches.
void jointBranches(const SystemModel& m, const Locals& locals,
                   const std::vector<size_t>& choice,
                   std::vector<std::pair<Locals, double>>& out) {
    out.clear();
    out.push_back({locals, 1.0});
    for (size_t i = 0; i < m.automata.size(); ++i) {
        const TransitionGroup& g = m.automata[i].groups[choice[i]];
        std::vector<std::pair<Locals, double>> next;
        for (const auto& [partial, p] : out) {
            for (const Branch& b : g.branches) {
                if (!(b.probability > 0.0)) continue;
                Locals ext = partial;
                ext[i] = static_cast<uint8_t>(b.targetIndex);
                next.push_back({std::move(ext), p * b.probability});
            }
        }
        out = std::move(next);
    }
}

Locals initialLocals(const SystemModel& m) {
    Locals locals(m.automata.size());
    for (size_t i = 0; i < m.automata.size(); ++i) {
        locals[i] = static_cast<uint8_t>(m.automata[i].initIndex);
    }
    return locals;
}

struct ProbOracle {
    const SystemModel& m;
    bool maximize;
    long long k;
    std::map<std::pair<Locals, long long>, double> memo;

    double value(const Locals& locals, long long depth) {
        if (m.evaluate(**m.hazard, locals)) return 1.0;
        if (depth == k) return 0.0;
        auto key = std::make_pair(locals, depth);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        auto enabled = enabledGroups(m, locals);
        // Odometer over one group choice per automaton.
        std::vector<size_t> pick(m.automata.size(), 0);
        double best = 0.0;
        bool first = true;
        std::vector<std::pair<Locals, double>> succ;
        while (true) {
            std::vector<size_t> choice(m.automata.size());
            for (size_t i = 0; i < choice.size(); ++i) choice[i] = enabled[i][pick[i]];
            if (!maximize) {
                for (size_t i = 0; i < enabled.size(); ++i) {
                    if (enabled[i].size() != 1) {
                        throw std::runtime_error("oracle: nondeterministic model in deterministic analysis");
                    }
                }
            }
            jointBranches(m, locals, choice, succ);
            double sum = 0.0;
            for (const auto& [next, p] : succ) sum += p * value(next, depth + 1);
            if (first || sum > best) best = sum;
            first = false;

            size_t i = 0;
            for (; i < pick.size(); ++i) {
                if (++pick[i] < enabled[i].size()) break;
                pick[i] = 0;
            }
            if (i == pick.size()) break;
        }
        memo.emplace(key, best);
        return best;
    }
};

// The qualitative possible-step relation: union over group choices of all
// positive-probability branch combinations.
std::set<Locals> qualitativeSuccessors(const SystemModel& m, const Locals& locals) {
    auto enabled = enabledGroups(m, locals);
    std::set<Locals> result;
    std::vector<size_t> pick(m.automata.size(), 0);
    std::vector<std::pair<Locals, double>> succ;
    while (true) {
        std::vector<size_t> choice(m.automata.size());
        for (size_t i = 0; i < choice.size(); ++i) choice[i] = enabled[i][pick[i]];
        jointBranches(m, locals, choice, succ);
        for (const auto& [next, p] : succ) result.insert(next);
        size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < enabled[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    return result;
}

struct QualOracle {
    SystemModel m;  // prepared qualitative model (chaos automata materialized)
    std::vector<PreparedFailureMode> modes;

    bool active(const Locals& locals, size_t mode) const {
        return m.evaluate(*modes[mode].activity, locals);
    }

    // Critical: some path from the initial state reaches the hazard visiting
    // only states (hazard state excepted) where every active mode is in the set.
    bool critical(uint64_t mask) const {
        Locals init = initialLocals(m);
        if (m.evaluate(**m.hazard, init)) return true;
        auto allowed = [&](const Locals& locals) {
            for (size_t mi = 0; mi < modes.size(); ++mi) {
                if (mask & (uint64_t(1) << mi)) continue;
                if (active(locals, mi)) return false;
            }
            return true;
        };
        if (!allowed(init)) return false;
        std::set<Locals> seen{init};
        std::vector<Locals> frontier{init};
        while (!frontier.empty()) {
            Locals cur = frontier.back();
            frontier.pop_back();
            for (const Locals& next : qualitativeSuccessors(m, cur)) {
                if (!seen.insert(next).second) continue;
                if (m.evaluate(**m.hazard, next)) return true;
                if (allowed(next)) frontier.push_back(next);
            }
        }
        return false;
    }
};

QualOracle makeQualOracle(const SystemModel& declared, OccurrenceSemantics occurrence) {
    PrepareOptions po;
    po.mode = AnalysisMode::Qualitative;
    po.occurrenceTrackers = occurrence == OccurrenceSemantics::Ever;
    PreparedModel prepared = prepareForAnalysis(declared, po);
    QualOracle q;
    q.m = std::move(prepared.model);
    q.modes = std::move(prepared.failureModes);
    return q;
}

} // namespace

double oracleHazardProbability(const SystemModel& prepared, long long k) {
    ProbOracle o{prepared, false, k, {}};
    return o.value(initialLocals(prepared), 0);
}

double oracleMaxHazardProbability(const SystemModel& prepared, long long k) {
    ProbOracle o{prepared, true, k, {}};
    return o.value(initialLocals(prepared), 0);
}

std::vector<std::vector<std::string>> oracleMinimalCriticalSets(
    const SystemModel& declared, OccurrenceSemantics occurrence) {
    QualOracle q = makeQualOracle(declared, occurrence);
    const size_t m = q.modes.size();
    std::vector<uint64_t> criticalMasks;
    for (uint64_t mask = 0; mask < (uint64_t(1) << m); ++mask) {
        if (q.critical(mask)) criticalMasks.push_back(mask);
    }
    std::vector<std::vector<std::string>> result;
    for (uint64_t mask : criticalMasks) {
        if (mask == 0) continue;
        bool minimal = true;
        for (uint64_t other : criticalMasks) {
            if (other != mask && (mask & other) == other) {
                minimal = false;
                break;
            }
        }
        // If the empty set is critical no nonempty set is minimal.
        if (minimal) {
            std::vector<std::string> names;
            for (size_t mi = 0; mi < m; ++mi) {
                if (mask & (uint64_t(1) << mi)) names.push_back(q.modes[mi].name);
            }
            std::sort(names.begin(), names.end());
            result.push_back(std::move(names));
        }
    }
    std::sort(result.begin(), result.end());
    return result;
}

bool oracleEmptySetCritical(const SystemModel& declared, OccurrenceSemantics occurrence) {
    return makeQualOracle(declared, occurrence).critical(0);
}

} // namespace ssmcheck::testsupport
