// Threshold mechanism: allocation rule, makespans, the exact optimum,
// Monte-Carlo ratio estimation, and the allocation-monotonicity audit.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "copsched/copula.hpp"
#include "copsched/marginal.hpp"
#include "copsched/mechanism.hpp"
#include "copsched/optimizer.hpp"
#include "copsched/ratio.hpp"
#include "oracles.hpp"

using namespace copsched;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Instance square_ones() { return Instance{{1.0, 1.0}, {1.0, 1.0}}; }

Copula clayton_preset(long long n) {
    double a = 0.0, b = 0.0;
    preset_ab(n, &a, &b);
    return make_clayton(n, make_piecewise(a, b));
}

Instance random_instance(std::mt19937_64& g, std::size_t tasks, double lo = 0.1,
                         double hi = 3.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Instance inst;
    inst.t1.resize(tasks);
    inst.t2.resize(tasks);
    for (std::size_t j = 0; j < tasks; ++j) {
        inst.t1[j] = u(g);
        inst.t2[j] = u(g);
    }
    return inst;
}

} // namespace

TEST_CASE("task_ratio zero conventions") {
    CHECK(task_ratio(0.0, 5.0) == 0.0);
    CHECK(task_ratio(0.0, 0.0) == 0.0); // free task: machine 1 by convention
    CHECK(task_ratio(3.0, 0.0) == kInf);
    CHECK(task_ratio(2.0, 4.0) == 0.5);
    CHECK(task_ratio(4.0, 2.0) == 2.0);
}

TEST_CASE("validate_instance rejects malformed inputs") {
    CHECK_NOTHROW(validate_instance(Instance{{1.0, 0.0}, {0.0, 2.0}}));
    CHECK_THROWS_AS(validate_instance(Instance{{}, {}}), std::domain_error);
    CHECK_THROWS_AS(validate_instance(Instance{{1.0}, {1.0, 2.0}}), std::domain_error);
    CHECK_THROWS_AS(validate_instance(Instance{{-1.0}, {1.0}}), std::domain_error);
    CHECK_THROWS_AS(validate_instance(Instance{{1.0}, {kInf}}), std::domain_error);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate_instance(Instance{{nan}, {1.0}}), std::domain_error);
}

TEST_CASE("allocate sends a task to machine 1 iff its ratio is strictly below the draw") {
    const Instance inst{{1.0, 2.0, 0.0, 3.0}, {2.0, 2.0, 0.0, 0.0}};
    // Ratios: 0.5, 1, 0 (free), inf (pinned to machine 2).
    const std::vector<double> draws{0.5, 1.0000001, 0.1, 100.0};
    const Allocation alloc = allocate(inst, draws);
    REQUIRE(alloc.on_machine1.size() == 4);
    CHECK(alloc.on_machine1[0] == 0); // 0.5 < 0.5 is false: ties go to machine 2
    CHECK(alloc.on_machine1[1] == 1);
    CHECK(alloc.on_machine1[2] == 1); // 0 < any positive draw
    CHECK(alloc.on_machine1[3] == 0); // inf is below nothing

    CHECK_THROWS_AS(allocate(inst, std::vector<double>{1.0}), std::domain_error);
}

TEST_CASE("makespan is the heavier machine's load") {
    const Instance inst{{1.0, 2.0, 3.0}, {2.0, 1.0, 1.0}};
    Allocation alloc;
    alloc.on_machine1 = {1, 0, 1};
    CHECK(makespan(inst, alloc) == 4.0); // loads 1+3 vs 1
    alloc.on_machine1 = {0, 0, 0};
    CHECK(makespan(inst, alloc) == 4.0); // everything on machine 2
    alloc.on_machine1 = {1, 1, 1};
    CHECK(makespan(inst, alloc) == 6.0);
    alloc.on_machine1 = {1, 1};
    CHECK_THROWS_AS(makespan(inst, alloc), std::domain_error);
}

TEST_CASE("opt_makespan: hand example, zeros, and the task-count guard") {
    CHECK(opt_makespan(Instance{{2.0, 3.0}, {4.0, 1.0}}) == 2.0);
    CHECK(opt_makespan(Instance{{0.0, 0.0}, {0.0, 0.0}}) == 0.0);
    CHECK(opt_makespan(Instance{{5.0}, {3.0}}) == 3.0);

    Instance big;
    big.t1.assign(25, 1.0);
    big.t2.assign(25, 1.0);
    CHECK_THROWS_AS(opt_makespan(big), std::length_error);
    const Instance five{{1, 1, 1, 1, 1}, {1, 1, 1, 1, 1}};
    CHECK_THROWS_AS(opt_makespan(five, 4), std::length_error);
    CHECK(opt_makespan(five, 5) == 3.0); // 2-3 split of unit tasks
}

TEST_CASE("opt_makespan agrees with a plain subset scan on random instances") {
    std::mt19937_64 g(20240817);
    for (int it = 0; it < 200; ++it) {
        const std::size_t tasks = 1 + static_cast<std::size_t>(g() % 10);
        Instance inst = random_instance(g, tasks);
        if (it % 5 == 0) inst.t1[g() % tasks] = 0.0; // exercise free tasks
        if (it % 7 == 0) inst.t2[g() % tasks] = 0.0;
        // The incremental Gray-code loads may differ from fresh per-subset
        // sums by a few ulps of rounding drift.
        const double expect = oracles::opt_makespan(inst.t1, inst.t2);
        CHECK(std::abs(opt_makespan(inst) - expect) < 1e-9);
    }
}

TEST_CASE("mechanism makespan never beats the optimum") {
    const Copula c = clayton_preset(6);
    std::mt19937_64 g(7);
    const Instance inst = random_instance(g, 6);
    const double opt = opt_makespan(inst);
    const SampleBatch batch = sample(c, 200, 99);
    std::vector<double> row(6);
    for (std::size_t i = 0; i < batch.count; ++i) {
        for (std::size_t j = 0; j < 6; ++j) row[j] = batch.at(i, j);
        CHECK(makespan(inst, allocate(inst, row)) >= opt - 1e-12);
    }
}

TEST_CASE("estimate_ratio is exactly 1 on the unit square under pairing") {
    // Antithetic thresholds (X, 1/X) always split the two unit tasks: one
    // draw lands above 1, the other below, so every makespan equals OPT.
    const RatioEstimate est = estimate_ratio(square_ones(), clayton_preset(2), 20000, 42);
    CHECK(est.mean_ratio == 1.0);
    CHECK(est.std_err == 0.0);
    CHECK(est.samples == 20000);
}

TEST_CASE("estimate_ratio on the unit square under independent thresholds") {
    // Each task flips a fair coin (P(X > 1) = 1/2): half the time the tasks
    // split (makespan 1), half the time they collide (makespan 2).
    const Copula c = make_independent(2, make_piecewise(1.715, 0.76));
    const RatioEstimate est = estimate_ratio(square_ones(), c, 100000, 42);
    CHECK(est.std_err > 0.0);
    CHECK(std::abs(est.mean_ratio - 1.5) <= 3.0 * est.std_err);
    CHECK(est.std_err == doctest::Approx(0.5 / std::sqrt(100000.0)).epsilon(0.05));
}

TEST_CASE("random two-task instances respect the certified guarantee") {
    const Copula c = clayton_preset(2);
    std::mt19937_64 g(314159);
    for (int it = 0; it < 5; ++it) {
        const Instance inst = random_instance(g, 2);
        const RatioEstimate est = estimate_ratio(inst, c, 100000, 1000 + it);
        CHECK(est.mean_ratio - 3.0 * est.std_err <= 1.5067710964 + 1e-9);
    }
}

TEST_CASE("the worst-case bound dominates the adversarial-ratio instance") {
    // Task ratios at the maximizer of phi; any concrete scaling of such an
    // instance stays below the worst-case value.
    const Copula c = clayton_preset(2);
    const RatioReport rep = maximize_phi(c, 3, 5);
    const Instance inst{{rep.argmax_x, rep.argmax_y}, {1.0, 1.0}};
    const RatioEstimate est = estimate_ratio(inst, c, 100000, 8);
    CHECK(est.mean_ratio <= rep.max_value + 3.0 * est.std_err + 1e-9);
}

TEST_CASE("zero-optimum instances are allocated for free") {
    // A zero ratio sits strictly below every positive draw and an infinite
    // ratio above every draw, so each task OPT can place for free is placed
    // for free by the threshold rule too — the ratio convention is 1.
    const Instance insts[] = {
        {{0.0, 5.0}, {3.0, 0.0}}, // free on opposite machines
        {{1.0, 1.0}, {0.0, 0.0}}, // both pinned (free) on machine 2
        {{0.0, 0.0, 4.0}, {2.0, 0.0, 0.0}},
    };
    for (const Instance& inst : insts) {
        const Copula c = clayton_preset(static_cast<long long>(inst.num_tasks()));
        const RatioEstimate est = estimate_ratio(inst, c, 1000, 3);
        CHECK(est.mean_ratio == 1.0);
        CHECK(est.std_err == 0.0);
    }
}

TEST_CASE("estimate_ratio determinism and guards") {
    std::mt19937_64 g(22);
    const Instance inst = random_instance(g, 3);
    const Copula c = clayton_preset(3);
    const RatioEstimate a = estimate_ratio(inst, c, 4096, 77, true);
    const RatioEstimate b = estimate_ratio(inst, c, 4096, 77, true);
    const RatioEstimate s = estimate_ratio(inst, c, 4096, 77, false);
    CHECK(a.mean_ratio == b.mean_ratio);
    CHECK(a.std_err == b.std_err);
    CHECK(a.mean_ratio == s.mean_ratio);
    CHECK(a.std_err == s.std_err);

    const RatioEstimate one = estimate_ratio(inst, c, 1, 77);
    CHECK(one.std_err == 0.0);
    CHECK(one.samples == 1);

    CHECK_THROWS_AS(estimate_ratio(inst, c, 0, 77), std::domain_error);
    CHECK_THROWS_AS(estimate_ratio(inst, clayton_preset(2), 100, 77), std::domain_error);
    CHECK_THROWS_AS(estimate_ratio(Instance{{1.0}, {1.0, 2.0}}, c, 100, 77),
                    std::domain_error);
}

TEST_CASE("allocation probabilities move against single-machine perturbations") {
    std::mt19937_64 g(5150);
    for (int it = 0; it < 10; ++it) {
        const std::size_t tasks = 2 + static_cast<std::size_t>(g() % 5);
        Instance inst = random_instance(g, tasks, 0.0, 3.0);
        if (it % 3 == 0) inst.t1[g() % tasks] = 0.0; // hit the zero conventions
        const Copula c = clayton_preset(static_cast<long long>(tasks));
        const MonotonicityReport rep = check_monotonicity(inst, c, 100, 900 + it);
        CHECK(rep.cases == 100);
        CHECK(rep.max_violation == 0.0);
    }
    CHECK_THROWS_AS(
        check_monotonicity(square_ones(), clayton_preset(2), 0, 1), std::domain_error);
}
