#pragma once
#include <cstdint>
#include <span>
#include <vector>

#include "copsched/copula.hpp"

namespace copsched {

// Two-machine instance: t1[j], t2[j] are task j's processing times on
// machine 1 and machine 2.
struct Instance {
    std::vector<double> t1;
    std::vector<double> t2;

    std::size_t num_tasks() const { return t1.size(); }
};

void validate_instance(const Instance& inst); // shapes, finiteness, sign

// Per-task time ratio t1/t2 with the zero conventions: t1 = 0 -> 0 (machine 1
// whenever the threshold is positive), t1 > 0 = t2 -> +inf (machine 2).
double task_ratio(double t1, double t2);

struct Allocation {
    std::vector<std::uint8_t> on_machine1; // 1 iff task j runs on machine 1
};

// Threshold rule: task j goes to machine 1 iff t1[j]/t2[j] < draws[j].
Allocation allocate(const Instance& inst, std::span<const double> draws);

double makespan(const Instance& inst, const Allocation& alloc);

// Exact minimum makespan over all 2^n allocations (Gray-code sweep).
// Throws std::length_error beyond max_tasks.
double opt_makespan(const Instance& inst, int max_tasks = 24);

struct RatioEstimate {
    double mean_ratio = 0.0;
    double std_err = 0.0;
    long long samples = 0;
};

// Monte-Carlo estimate of E[makespan] / OPT over fresh threshold draws.
// Draw i is row i of sample(copula, samples, seed), so the estimate is
// bitwise reproducible for any thread count.
RatioEstimate estimate_ratio(const Instance& inst, const Copula& c,
                             long long samples, std::uint64_t seed,
                             bool parallel = true);

struct MonotonicityReport {
    double max_violation = 0.0; // positive part of the worst inner product
    long long cases = 0;
};

// For random single-machine perturbations of inst, checks the allocation-
// monotonicity inner product at probability level: with p_1j = 1 - F(r_j)
// and p_2j = F(r_j) closed-form, sum_j (p_ij - p~_ij)(t_ij - t~_ij) <= 0
// for the perturbed machine i. Exact because every threshold realization
// allocates by the same monotone rule.
MonotonicityReport check_monotonicity(const Instance& inst, const Copula& c,
                                      int perturbations, std::uint64_t seed);

} // namespace copsched
