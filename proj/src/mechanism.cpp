#include "copsched/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "copsched/rng.hpp"

namespace copsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

void validate_instance(const Instance& inst) {
    if (inst.t1.empty() || inst.t1.size() != inst.t2.size())
        throw std::domain_error("instance: need two equal-length non-empty rows");
    for (std::size_t j = 0; j < inst.t1.size(); ++j) {
        if (!(inst.t1[j] >= 0.0) || !std::isfinite(inst.t1[j]) ||
            !(inst.t2[j] >= 0.0) || !std::isfinite(inst.t2[j]))
            throw std::domain_error("instance: times must be finite and >= 0");
    }
}

double task_ratio(double t1, double t2) {
    if (t1 == 0.0) return 0.0; // free on machine 1 (also the 0/0 convention)
    if (t2 == 0.0) return kInf;
    return t1 / t2;
}

Allocation allocate(const Instance& inst, std::span<const double> draws) {
    if (draws.size() != inst.num_tasks())
        throw std::domain_error("allocate: one threshold draw per task required");
    Allocation alloc;
    alloc.on_machine1.resize(inst.num_tasks());
    for (std::size_t j = 0; j < inst.num_tasks(); ++j)
        alloc.on_machine1[j] =
            task_ratio(inst.t1[j], inst.t2[j]) < draws[j] ? 1 : 0;
    return alloc;
}

double makespan(const Instance& inst, const Allocation& alloc) {
    if (alloc.on_machine1.size() != inst.num_tasks())
        throw std::domain_error("makespan: allocation shape mismatch");
    double load1 = 0.0, load2 = 0.0;
    for (std::size_t j = 0; j < inst.num_tasks(); ++j) {
        if (alloc.on_machine1[j])
            load1 += inst.t1[j];
        else
            load2 += inst.t2[j];
    }
    return std::max(load1, load2);
}

double opt_makespan(const Instance& inst, int max_tasks) {
    validate_instance(inst);
    const std::size_t n = inst.num_tasks();
    if (n > static_cast<std::size_t>(max_tasks))
        throw std::length_error("opt_makespan: instance too large for the exact oracle");
    // Gray-code walk over all subsets; one task flips machine per step.
    double load1 = 0.0, load2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) load2 += inst.t2[j];
    double best = std::max(load1, load2);
    std::vector<std::uint8_t> on1(n, 0);
    const std::uint64_t total = 1ull << n;
    for (std::uint64_t i = 1; i < total; ++i) {
        const unsigned j = static_cast<unsigned>(__builtin_ctzll(i));
        if (on1[j]) {
            on1[j] = 0;
            load1 -= inst.t1[j];
            load2 += inst.t2[j];
        } else {
            on1[j] = 1;
            load1 += inst.t1[j];
            load2 -= inst.t2[j];
        }
        best = std::min(best, std::max(load1, load2));
    }
    return best;
}

RatioEstimate estimate_ratio(const Instance& inst, const Copula& c,
                             long long samples, std::uint64_t seed,
                             bool parallel) {
    validate_instance(inst);
    if (samples < 1) throw std::domain_error("estimate_ratio: samples must be >= 1");
    if (static_cast<std::size_t>(c.n) != inst.num_tasks())
        throw std::domain_error("estimate_ratio: copula dimension must equal task count");
    const double opt = opt_makespan(inst);
    const std::size_t n = inst.num_tasks();

    // Per-draw makespans land in indexed slots (chunked to bound memory);
    // the accumulation is a single serial pass in draw order, so the
    // estimate is bitwise identical for any thread count.
    const long long chunk = std::min<long long>(samples, 1 << 16);
    std::vector<double> mk(static_cast<std::size_t>(chunk));
    double sum = 0.0, sumsq = 0.0;
    bool any_positive = false;
    for (long long base = 0; base < samples; base += chunk) {
        const long long count = std::min(chunk, samples - base);
        if (parallel) {
#pragma omp parallel
            {
                std::vector<double> row(n);
#pragma omp for schedule(static)
                for (long long i = 0; i < count; ++i) {
                    sample_point(c, seed, static_cast<std::size_t>(base + i), row.data());
                    mk[static_cast<std::size_t>(i)] =
                        makespan(inst, allocate(inst, row));
                }
            }
        } else {
            std::vector<double> row(n);
            for (long long i = 0; i < count; ++i) {
                sample_point(c, seed, static_cast<std::size_t>(base + i), row.data());
                mk[static_cast<std::size_t>(i)] = makespan(inst, allocate(inst, row));
            }
        }
        for (long long i = 0; i < count; ++i) {
            const double v = mk[static_cast<std::size_t>(i)];
            if (v > 0.0) any_positive = true;
            sum += v;
            sumsq += v * v;
        }
    }

    RatioEstimate est;
    est.samples = samples;
    if (opt == 0.0) {
        // A zero optimum with a nonzero mechanism makespan is an infinite
        // ratio; an entirely free instance counts as ratio 1.
        est.mean_ratio = any_positive ? kInf : 1.0;
        est.std_err = 0.0;
        return est;
    }
    const double ns = static_cast<double>(samples);
    const double mean = sum / ns;
    est.mean_ratio = mean / opt;
    if (samples > 1) {
        const double var = std::max(0.0, (sumsq - ns * mean * mean) / (ns - 1.0));
        est.std_err = std::sqrt(var / ns) / opt;
    }
    return est;
}

namespace {

double alloc_probability_machine1(const Marginal& m, double t1, double t2) {
    const double r = task_ratio(t1, t2);
    if (std::isinf(r)) return 0.0;
    return 1.0 - eval_F(m, r);
}

} // namespace

MonotonicityReport check_monotonicity(const Instance& inst, const Copula& c,
                                      int perturbations, std::uint64_t seed) {
    validate_instance(inst);
    if (perturbations < 1)
        throw std::domain_error("check_monotonicity: perturbations must be >= 1");
    const std::size_t n = inst.num_tasks();
    MonotonicityReport rep;
    for (int k = 0; k < perturbations; ++k) {
        Rng g = substream(seed, static_cast<std::uint64_t>(k), 0x30130ULL);
        const int machine = g.u01() < 0.5 ? 1 : 2;
        Instance pert = inst;
        std::vector<double>& row = machine == 1 ? pert.t1 : pert.t2;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = g.u01();
            if (u < 0.25) continue;            // report unchanged
            if (u < 0.40) { row[j] = 0.0; continue; }
            if (row[j] == 0.0)
                row[j] = 3.0 * g.u01();        // leave the zero convention
            else
                row[j] *= std::exp(1.5 * (g.u01() - 0.5));
        }
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double p, pp, t, tp;
            if (machine == 1) {
                p = alloc_probability_machine1(c.marginal, inst.t1[j], inst.t2[j]);
                pp = alloc_probability_machine1(c.marginal, pert.t1[j], pert.t2[j]);
                t = inst.t1[j];
                tp = pert.t1[j];
            } else {
                p = 1.0 - alloc_probability_machine1(c.marginal, inst.t1[j], inst.t2[j]);
                pp = 1.0 - alloc_probability_machine1(c.marginal, pert.t1[j], pert.t2[j]);
                t = inst.t2[j];
                tp = pert.t2[j];
            }
            inner += (p - pp) * (t - tp);
        }
        rep.max_violation = std::max(rep.max_violation, inner);
        ++rep.cases;
    }
    return rep;
}

} // namespace copsched
