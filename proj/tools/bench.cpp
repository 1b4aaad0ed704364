// copsched-bench — serial vs OpenMP timings for the parallel kernels.
// Each kernel keeps a serial reference path; this binary times both and
// checks that they agree, so the parallel variants stay honest.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "copsched/bounds.hpp"
#include "copsched/mechanism.hpp"
#include "copsched/optimizer.hpp"

namespace {

using namespace copsched;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void print_row(const char* name, double serial_s, double parallel_s, bool match) {
    std::printf("%-24s %12.3fs %12.3fs %9.2fx   %s\n", name, serial_s, parallel_s,
                serial_s / parallel_s, match ? "match" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    std::uint64_t seed = 20240817;
    if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);

#ifdef _OPENMP
    std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP unavailable: both columns run the serial path\n");
#endif
    std::printf("%-24s %13s %13s %10s\n", "kernel", "serial", "parallel", "speedup");

    // Batch sampling, negative-dependence law on 8 coordinates.
    {
        const Copula c = make_clayton(8, make_piecewise(1.7646, 0.7536));
        const std::size_t count = 400000;
        auto t0 = clock_type::now();
        const SampleBatch a = sample_serial(c, count, seed);
        const double ts = seconds_since(t0);
        t0 = clock_type::now();
        const SampleBatch b = sample(c, count, seed);
        const double tp = seconds_since(t0);
        print_row("sample 4e5 x 8", ts, tp, a.x == b.x);
    }

    // Monte-Carlo ratio estimate on a fixed 8-task instance.
    {
        const Copula c = make_clayton(8, make_piecewise(1.7646, 0.7536));
        Instance inst;
        inst.t1 = {1.0, 0.4, 2.5, 0.9, 1.7, 0.2, 3.1, 0.6};
        inst.t2 = {0.8, 1.1, 2.0, 1.4, 0.5, 0.9, 2.2, 1.3};
        const long long samples = 400000;
        auto t0 = clock_type::now();
        const RatioEstimate a = estimate_ratio(inst, c, samples, seed, false);
        const double ts = seconds_since(t0);
        t0 = clock_type::now();
        const RatioEstimate b = estimate_ratio(inst, c, samples, seed, true);
        const double tp = seconds_since(t0);
        print_row("estimate_ratio 4e5", ts, tp, a.mean_ratio == b.mean_ratio);
    }

    // Surface maximization, 8 independent repetitions.
    {
        const Copula c = make_clayton(2, make_piecewise(2.2468, 0.7607));
        auto t0 = clock_type::now();
        const RatioReport a = maximize_phi(c, 8, seed, false);
        const double ts = seconds_since(t0);
        t0 = clock_type::now();
        const RatioReport b = maximize_phi(c, 8, seed, true);
        const double tp = seconds_since(t0);
        print_row("maximize_phi 8 runs", ts, tp,
                  a.max_value == b.max_value && a.argmax_x == b.argmax_x &&
                      a.argmax_y == b.argmax_y);
    }

    // Grid lower-bound certificate at resolution 2e-3.
    {
        auto t0 = clock_type::now();
        const LowerBoundReport a = verify_lower_bound(2e-3, 1.5852, false);
        const double ts = seconds_since(t0);
        t0 = clock_type::now();
        const LowerBoundReport b = verify_lower_bound(2e-3, 1.5852, true);
        const double tp = seconds_since(t0);
        print_row("verify_lb res 2e-3", ts, tp, a.minimax == b.minimax);
    }

    return 0;
}
