#include "ssmcheck/quant.hpp"

#include <algorithm>
#include <barrier>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "ssmcheck/parser.hpp"

namespace ssmcheck {

namespace {

enum class RowKind : uint8_t { Zero, Phi, Psi };

// Compensated (Neumaier) dot product of one branch group with the value
// vector, in branch order. The summation order is fixed per row, so results
// do not depend on how rows are partitioned across workers.
double groupDot(const StateSpace& space, uint64_t g, const std::vector<double>& x) {
    double sum = 0.0;
    double comp = 0.0;
    for (uint64_t b = space.branchOffset[g]; b < space.branchOffset[g + 1]; ++b) {
        double term = space.probability[b] * x[space.target[b]];
        double t = sum + term;
        if (std::fabs(sum) >= std::fabs(term)) {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

double rowValue(const StateSpace& space, bool maximize, uint64_t s,
                const std::vector<double>& x) {
    uint64_t g0 = space.groupOffset[s];
    uint64_t g1 = space.groupOffset[s + 1];
    if (!maximize) return groupDot(space, g0, x);
    double best = 0.0;
    for (uint64_t g = g0; g < g1; ++g) {
        double v = groupDot(space, g, x);
        if (g == g0 || v > best) best = v;
    }
    return best;
}

std::vector<double> iterate(const StateSpace& space, bool maximize, const Bitset& phi,
                            const Bitset& psi, long long k,
                            const IterationOptions& options) {
    if (k < 0) {
        throwError(ErrorKind::Validation, "the step bound must be nonnegative");
    }
    const uint64_t n = space.stateCount;
    std::vector<RowKind> kind(n, RowKind::Zero);
    std::vector<double> x(n, 0.0);
    for (uint64_t s = 0; s < n; ++s) {
        if (bitsetTest(psi, s)) {
            kind[s] = RowKind::Psi;
            x[s] = 1.0;
        } else if (bitsetTest(phi, s)) {
            kind[s] = RowKind::Phi;
        }
    }
    if (k == 0) return x;

    uint64_t workers = options.workers == 0
                           ? std::max(1u, std::thread::hardware_concurrency())
                           : options.workers;
    workers = std::min<uint64_t>(workers, n);

    std::vector<double> y(n, 0.0);

    auto sweepRange = [&](const std::vector<double>& from, std::vector<double>& to,
                          uint64_t lo, uint64_t hi) -> bool {
        bool changed = false;
        for (uint64_t s = lo; s < hi; ++s) {
            double v;
            switch (kind[s]) {
                case RowKind::Psi: v = 1.0; break;
                case RowKind::Phi: v = rowValue(space, maximize, s, from); break;
                default: v = 0.0; break;
            }
            if (v != from[s]) changed = true;
            to[s] = v;
        }
        return changed;
    };

    if (workers <= 1) {
        for (long long i = 1; i <= k; ++i) {
            bool changed = sweepRange(x, y, 0, n);
            x.swap(y);
            if (options.onStep) options.onStep(i, x);
            if (!changed) {
                // Fixpoint reached: every later iterate is identical.
                if (options.onStep) {
                    for (long long j = i + 1; j <= k; ++j) options.onStep(j, x);
                }
                break;
            }
        }
        return x;
    }

    struct Shared {
        std::vector<double>* from = nullptr;
        std::vector<double>* to = nullptr;
        std::vector<uint8_t> changed;
        long long iter = 0;
        bool done = false;
    } sh;
    sh.from = &x;
    sh.to = &y;
    sh.changed.assign(workers, 0);

    auto completion = [&]() noexcept {
        bool changed = false;
        for (uint8_t c : sh.changed) changed = changed || c != 0;
        std::fill(sh.changed.begin(), sh.changed.end(), 0);
        ++sh.iter;
        std::swap(sh.from, sh.to);
        if (options.onStep) options.onStep(sh.iter, *sh.from);
        if (sh.iter >= k) {
            sh.done = true;
        } else if (!changed) {
            if (options.onStep) {
                for (long long j = sh.iter + 1; j <= k; ++j) options.onStep(j, *sh.from);
            }
            sh.done = true;
        }
    };

    std::barrier bar(static_cast<std::ptrdiff_t>(workers), completion);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (uint64_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            const uint64_t lo = n * w / workers;
            const uint64_t hi = n * (w + 1) / workers;
            while (true) {
                sh.changed[w] = sweepRange(*sh.from, *sh.to, lo, hi) ? 1 : 0;
                bar.arrive_and_wait();
                if (sh.done) break;
            }
        });
    }
    for (auto& t : pool) t.join();
    return std::move(*sh.from);
}

Bitset allTrue(uint64_t n) {
    Bitset b((n + 63) / 64, ~uint64_t(0));
    return b;
}

const PredicateExpr& requireHazard(const SystemModel& model) {
    if (!model.hazard) {
        throwError(ErrorKind::Validation, "the model declares no hazard");
    }
    return **model.hazard;
}

} // namespace

std::vector<double> boundedUntilVector(const StateSpace& space, const Bitset& phi,
                                       const Bitset& psi, long long k,
                                       const IterationOptions& options) {
    if (space.flavor != ComposeFlavor::Dtmc) {
        throwError(ErrorKind::Internal,
                   "bounded-until iteration needs a probabilistic deterministic space");
    }
    return iterate(space, false, phi, psi, k, options);
}

double boundedUntil(const StateSpace& space, const Bitset& phi, const Bitset& psi,
                    long long k, const IterationOptions& options) {
    return boundedUntilVector(space, phi, psi, k, options)[0];
}

double hazardProbability(const SystemModel& model, const StateSpace& space, long long k,
                         const IterationOptions& options) {
    const PredicateExpr& hazard = requireHazard(model);
    Bitset psi = labelStates(model, space, hazard);
    return boundedUntil(space, allTrue(space.stateCount), psi, k, options);
}

std::vector<CurvePoint> hazardCurve(const SystemModel& model, const StateSpace& space,
                                    long long kMax, long long stride,
                                    const IterationOptions& options) {
    if (kMax < 0) {
        throwError(ErrorKind::Validation, "the step bound must be nonnegative");
    }
    if (stride <= 0) {
        throwError(ErrorKind::Validation, "the curve stride must be positive");
    }
    const PredicateExpr& hazard = requireHazard(model);
    Bitset psi = labelStates(model, space, hazard);

    std::vector<CurvePoint> points;
    auto record = [&](long long i, double p) {
        points.push_back({i, static_cast<double>(i) * model.dtSeconds, p});
    };
    record(0, bitsetTest(psi, 0) ? 1.0 : 0.0);
    if (kMax == 0) return points;

    IterationOptions inner = options;
    inner.onStep = [&](long long i, const std::vector<double>& x) {
        if (i % stride == 0 || i == kMax) record(i, x[0]);
        if (options.onStep) options.onStep(i, x);
    };
    boundedUntilVector(space, allTrue(space.stateCount), psi, kMax, inner);
    return points;
}

std::vector<double> maxBoundedUntilVector(const StateSpace& space, const Bitset& phi,
                                          const Bitset& psi, long long k,
                                          const IterationOptions& options) {
    if (space.flavor != ComposeFlavor::Mdp && space.flavor != ComposeFlavor::Dtmc) {
        throwError(ErrorKind::Internal,
                   "worst-case bounded-until iteration needs a probabilistic space");
    }
    return iterate(space, true, phi, psi, k, options);
}

double maxBoundedUntil(const StateSpace& space, const Bitset& phi, const Bitset& psi,
                       long long k, const IterationOptions& options) {
    return maxBoundedUntilVector(space, phi, psi, k, options)[0];
}

double restrictedTraceHazardDiagnostic(const PreparedModel& prepared,
                                       const StateSpace& space,
                                       const std::vector<std::string>& modes,
                                       long long k, const IterationOptions& options) {
    uint64_t mask = 0;
    for (const auto& name : modes) {
        size_t mi = 0;
        for (; mi < prepared.failureModes.size(); ++mi) {
            if (prepared.failureModes[mi].name == name) break;
        }
        if (mi == prepared.failureModes.size()) {
            throwError(ErrorKind::Validation, "unknown failure mode '" + name + "'");
        }
        mask |= uint64_t(1) << mi;
    }
    const PredicateExpr& hazard = requireHazard(prepared.model);
    Bitset psi = labelStates(prepared.model, space, hazard);
    Bitset phi((space.stateCount + 63) / 64, 0);
    for (uint64_t s = 0; s < space.stateCount; ++s) {
        bool outside = false;
        for (size_t mi = 0; mi < prepared.failureModes.size() && !outside; ++mi) {
            if (mask & (uint64_t(1) << mi)) continue;
            if (prepared.model.evaluate(*prepared.failureModes[mi].activity, space.local(s))) {
                outside = true;
            }
        }
        if (!outside) bitsetSet(phi, s);
    }
    return boundedUntil(space, phi, psi, k, options);
}

std::vector<ModeHorizonProbability> modeHorizonProbabilities(
    const SystemModel& declared, long long k,
    const std::map<std::string, double>& perDemandBounds,
    std::vector<std::string>& warnings) {
    if (k < 0) {
        throwError(ErrorKind::Validation, "the step bound must be nonnegative");
    }
    for (const auto& [name, value] : perDemandBounds) {
        int32_t idx = declared.failureIndex(name);
        if (idx < 0 || declared.failures[idx].kind != FailureKind::PerDemand) {
            throwError(ErrorKind::Validation,
                       "'" + name + "' is not a per-demand failure mode");
        }
        if (!(value >= 0.0 && value <= 1.0)) {
            throwError(ErrorKind::Validation,
                       "the demand bound for '" + name + "' must lie in [0, 1]");
        }
    }
    std::vector<ModeHorizonProbability> result;
    for (const auto& decl : declared.failures) {
        ModeHorizonProbability entry;
        entry.name = decl.name;
        switch (decl.kind) {
            case FailureKind::PerTime: {
                double p = rateToStepProbability(decl.ratePerHour, declared.dtSeconds);
                entry.probability = geometricCdf(p, k);
                break;
            }
            case FailureKind::PerDemand: {
                auto it = perDemandBounds.find(decl.name);
                if (it != perDemandBounds.end()) {
                    entry.probability = it->second;
                } else {
                    entry.probability = decl.demandProbability;
                    entry.fromDefault = true;
                    warnings.push_back(
                        "failure mode '" + decl.name +
                        "': no horizon bound supplied; using its per-demand probability " +
                        formatDouble(decl.demandProbability) +
                        ", which assumes at most one demand in the horizon (override with "
                        "a demand bound for this mode)");
                }
                break;
            }
            default:
                // Nondeterministic modes carry no probability; they only matter
                // if a critical set references them, which ftaBound reports.
                continue;
        }
        result.push_back(std::move(entry));
    }
    return result;
}

double ftaBound(const std::vector<std::vector<std::string>>& sets,
                const std::vector<ModeHorizonProbability>& modes) {
    std::map<std::string, double> prob;
    for (const auto& m : modes) prob.emplace(m.name, m.probability);
    double bound = 0.0;
    for (const auto& set : sets) {
        double term = 1.0;
        for (const auto& name : set) {
            auto it = prob.find(name);
            if (it == prob.end()) {
                throwError(ErrorKind::Validation,
                           "no horizon probability is available for failure mode '" +
                               name + "'");
            }
            term *= it->second;
        }
        bound += term;
    }
    return bound;
}

MonteCarloResult monteCarloHazard(const SystemModel& model, const StateSpace& space,
                                  long long k, uint64_t samples, uint64_t seed) {
    if (space.flavor != ComposeFlavor::Dtmc) {
        throwError(ErrorKind::Internal, "simulation needs a probabilistic deterministic space");
    }
    if (k < 0) {
        throwError(ErrorKind::Validation, "the step bound must be nonnegative");
    }
    if (samples == 0) {
        throwError(ErrorKind::Validation, "the sample count must be positive");
    }
    const PredicateExpr& hazard = requireHazard(model);
    Bitset psi = labelStates(model, space, hazard);

    std::mt19937_64 rng(seed);
    uint64_t hits = 0;
    for (uint64_t run = 0; run < samples; ++run) {
        uint32_t s = 0;
        bool hit = bitsetTest(psi, 0);
        for (long long step = 0; step < k && !hit; ++step) {
            uint64_t g = space.groupOffset[s];
            double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            uint64_t chosen = space.branchOffset[g + 1] - 1;
            double cum = 0.0;
            for (uint64_t b = space.branchOffset[g]; b < space.branchOffset[g + 1]; ++b) {
                cum += space.probability[b];
                if (u < cum) {
                    chosen = b;
                    break;
                }
            }
            s = space.target[chosen];
            hit = bitsetTest(psi, s);
        }
        if (hit) ++hits;
    }
    MonteCarloResult result;
    result.samples = samples;
    result.hits = hits;
    result.estimate = static_cast<double>(hits) / static_cast<double>(samples);
    result.halfWidth95 =
        1.96 * std::sqrt(result.estimate * (1.0 - result.estimate) /
                         static_cast<double>(samples));
    return result;
}

} // namespace ssmcheck
