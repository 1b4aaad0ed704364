#include "copsched/bounds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "copsched/rng.hpp"

namespace copsched {

namespace {

constexpr double kA = kCertAlpha;
constexpr double kB = kCertBeta;

// The seven expressions, one per certificate point, as functions of the
// F-values they touch. Constants kept as exact rationals in the doubles.
double phi1(double f4) { // (alpha, alpha)
    return (1.0 + kA) - (1.0 + kA) * f4 + (1.0 + 1.0 / kA) * f4 * f4;
}
double phi2(double f5) { // (beta, beta)
    return (1.0 + kB) - (1.0 + kB) * f5 + (1.0 + 1.0 / kB) * f5 * f5;
}
double phi3(double f4, double f5) { // (alpha, beta)
    return (1.0 + kB) - f4 - kB * f5 + (1.0 + 1.0 / kA) * f4 * f5;
}
double phi4(double f3, double f4) { // (1, alpha)
    return (1.0 + kA) - f3 - kA * f4 + 2.0 * f3 * f4;
}
double phi5(double f2, double f3) { // (1/alpha, 1)
    return 2.0 - (2.0 - kA) * f2 - f3 + 2.0 * f2 * f3;
}
double phi6(double f1, double f2) { // (1/beta, 1/alpha)
    return (1.0 + 1.0 / kA) - (1.0 - kB + 1.0 / kA) * f1 - (1.0 / kA) * f2 +
           (1.0 + 1.0 / kA) * f1 * f2;
}
double phi7(double f1) { // (1/beta, 1/beta)
    return (1.0 + 1.0 / kB) - (1.0 - kB + 2.0 / kB) * f1 +
           (1.0 + 1.0 / kB) * f1 * f1;
}

// Conservative Lipschitz coefficient: the largest over the seven expressions
// of sum over variables of |linear coefficient| + |bilinear coefficient|,
// attained at the (1, alpha) point: (1 + 2) + (alpha + 2) = 6.352.
constexpr double kLipschitz = 6.352;

double seven_max(const std::array<double, 5>& f) {
    const std::array<double, 7> p = phi_at_points(f);
    return *std::max_element(p.begin(), p.end());
}

} // namespace

std::array<CertificatePoint, 7> certificate_points() {
    return {{{kA, kA, +1},
             {kB, kB, +1},
             {kA, kB, +1},
             {1.0, kA, +1},
             {1.0 / kA, 1.0, -1},
             {1.0 / kB, 1.0 / kA, -1},
             {1.0 / kB, 1.0 / kB, -1}}};
}

LambdaConstants lambda_constants() {
    LambdaConstants l;
    l.l1 = 383.0 / 500.0 + std::sqrt(154595269.0) / 105500.0;
    l.l2 = 169.0 * (3830.0 * l.l1 - 2367.0) / (2500.0 * (294.0 * l.l1 - 169.0));
    l.l3 = 169.0 / 250.0 - (227.0 / 2500.0) / (2.0 * l.l2 - 1.0);
    l.l4 = 0.5 - 0.0908 / (2.0 * l.l3 - 0.648);
    return l;
}

std::array<double, 5> marginal_tuple(const Marginal& m) {
    return {eval_F(m, 1.0 / kB), eval_F(m, 1.0 / kA), eval_F(m, 1.0),
            eval_F(m, kA), eval_F(m, kB)};
}

std::array<double, 7> phi_at_points(const std::array<double, 5>& f) {
    if (!(f[0] >= 0.0) || !(f[4] <= 1.0))
        throw std::domain_error("phi_at_points: values must lie in [0,1]");
    for (int i = 0; i + 1 < 5; ++i)
        if (!(f[i] <= f[i + 1]))
            throw std::domain_error("phi_at_points: values must be non-decreasing");
    return {phi1(f[3]), phi2(f[4]),       phi3(f[3], f[4]), phi4(f[2], f[3]),
            phi5(f[1], f[2]), phi6(f[0], f[1]), phi7(f[0])};
}

LowerBoundReport verify_lower_bound(double resolution, double threshold, bool parallel) {
    if (!(resolution >= 1e-4) || !(resolution <= 1e-1))
        throw std::domain_error("verify_lower_bound: resolution must be in [1e-4, 1e-1]");
    const auto t0 = std::chrono::steady_clock::now();
    const int K = static_cast<int>(std::llround(1.0 / resolution));
    const int N = K + 1;
    std::vector<double> v(N);
    for (int k = 0; k < N; ++k) v[k] = static_cast<double>(k) / K;

    // Each expression couples F-values at most one index apart, so the
    // minimax over monotone tuples decomposes along the chain
    // f1 - f2 - f3 - f4 - f5. D*[j] is the least achievable maximum of all
    // expressions settled so far, given the current chain value v[j].
    std::vector<double> d2(N), d3(N), d4(N), d5(N);
    std::vector<int> back2(N), back3(N), back4(N), back5(N);

    const bool use_threads = parallel;
    auto stage = [&](const std::vector<double>& prev, std::vector<double>& next,
                     std::vector<int>& back, auto&& coupler) {
#pragma omp parallel for schedule(static) if (use_threads)
        for (int j = 0; j < N; ++j) {
            double best = std::numeric_limits<double>::infinity();
            int best_i = 0;
            for (int i = 0; i <= j; ++i) {
                const double cand = std::max(prev[i], coupler(v[i], v[j]));
                if (cand < best) {
                    best = cand;
                    best_i = i;
                }
            }
            next[j] = best;
            back[j] = best_i;
        }
    };

    std::vector<double> d1(N);
    for (int i = 0; i < N; ++i) d1[i] = phi7(v[i]);
    stage(d1, d2, back2, [](double f1, double f2) { return phi6(f1, f2); });
    stage(d2, d3, back3, [](double f2, double f3) { return phi5(f2, f3); });
    stage(d3, d4, back4, [](double f3, double f4) { return phi4(f3, f4); });
    for (int l = 0; l < N; ++l) d4[l] = std::max(d4[l], phi1(v[l]));
    stage(d4, d5, back5, [](double f4, double f5) { return phi3(f4, f5); });

    double minimax = std::numeric_limits<double>::infinity();
    int best_m = 0;
    for (int m = 0; m < N; ++m) {
        const double cand = std::max(d5[m], phi2(v[m]));
        if (cand < minimax) {
            minimax = cand;
            best_m = m;
        }
    }
    const int i5 = best_m;
    const int i4 = back5[i5];
    const int i3 = back4[i4];
    const int i2 = back3[i3];
    const int i1 = back2[i2];

    LowerBoundReport rep;
    rep.resolution = 1.0 / K;
    rep.threshold = threshold;
    rep.minimax = minimax;
    rep.argmin_tuple = {v[i1], v[i2], v[i3], v[i4], v[i5]};
    rep.slack = kLipschitz * rep.resolution / 2.0;
    rep.pass = minimax >= threshold - rep.slack;
    rep.tuples_checked = 1.0;
    for (int i = 1; i <= 5; ++i)
        rep.tuples_checked *= static_cast<double>(K + i) / i;

    // Projected compass descent below the grid pitch: perturb one or two
    // coordinates, re-sort (the projection onto the monotone cone for these
    // moves), clamp to [0,1], keep strict improvements.
    std::array<double, 5> cur = rep.argmin_tuple;
    double cur_v = seven_max(cur);
    double step = rep.resolution / 2.0;
    while (step > 1e-10) {
        bool improved = false;
        for (int i = 0; i < 5 && !improved; ++i) {
            for (int si = -1; si <= 1 && !improved; si += 2) {
                for (int j = i; j < 5 && !improved; ++j) {
                    for (int sj = -1; sj <= 1 && !improved; sj += 2) {
                        if (j == i && sj != si) continue;
                        std::array<double, 5> cand = cur;
                        cand[i] += si * step;
                        if (j != i) cand[j] += sj * step;
                        std::sort(cand.begin(), cand.end());
                        cand[0] = std::clamp(cand[0], 0.0, 1.0);
                        cand[4] = std::clamp(cand[4], 0.0, 1.0);
                        for (int k = 1; k < 5; ++k)
                            cand[k] = std::clamp(cand[k], cand[k - 1], 1.0);
                        const double cv = seven_max(cand);
                        if (cv < cur_v) {
                            cur = cand;
                            cur_v = cv;
                            improved = true;
                        }
                    }
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    rep.refined_minimax = cur_v;
    rep.refined_tuple = cur;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

double lb_minimax_bruteforce(double resolution) {
    const int K = static_cast<int>(std::llround(1.0 / resolution));
    if (K > 40)
        throw std::domain_error("lb_minimax_bruteforce: grid too fine for the quintuple loop");
    const int N = K + 1;
    std::vector<double> v(N);
    for (int k = 0; k < N; ++k) v[k] = static_cast<double>(k) / K;
    double best = std::numeric_limits<double>::infinity();
    for (int i1 = 0; i1 < N; ++i1)
        for (int i2 = i1; i2 < N; ++i2)
            for (int i3 = i2; i3 < N; ++i3)
                for (int i4 = i3; i4 < N; ++i4)
                    for (int i5 = i4; i5 < N; ++i5) {
                        const double m = seven_max({v[i1], v[i2], v[i3], v[i4], v[i5]});
                        if (m < best) best = m;
                    }
    return best;
}

ChainReport replay_contradiction_chain(long long num_samples, std::uint64_t seed,
                                       double threshold) {
    if (num_samples < 1)
        throw std::domain_error("replay_contradiction_chain: need samples >= 1");
    const LambdaConstants l = lambda_constants();
    const double t = threshold;
    ChainReport rep;
    auto check = [&](bool hypothesis, bool conclusion) {
        if (!hypothesis) return;
        ++rep.step_checks;
        if (!conclusion) ++rep.step_violations;
    };
    for (long long s = 0; s < num_samples; ++s) {
        Rng g = substream(seed, static_cast<std::uint64_t>(s), 0xc4a1ULL);
        std::array<double, 5> f;
        for (double& fi : f) fi = g.u01();
        std::sort(f.begin(), f.end());
        const std::array<double, 7> p = phi_at_points(f);
        const double f1 = f[0], f2 = f[1], f3 = f[2], f4 = f[3], f5 = f[4];

        bool below = true;
        for (double pv : p) below = below && pv < t;
        if (below) ++rep.all_below;

        // The elimination chain, step by step. Every implication must hold
        // on its own; a tuple below the threshold everywhere would satisfy
        // all hypotheses, and the final two conclusions are incompatible.
        check(p[0] < t, 0.54 < f4 && f4 < 0.81);
        check(p[1] < t, f5 < l.l1);
        check(p[2] < t && f4 < 0.81 && f5 < l.l1, f4 < l.l2);
        check(p[3] < t && f4 > 0.5 && f4 < l.l2, f3 < l.l3);
        check(p[4] < t && f3 < l.l3, f3 > 0.324 && f2 < l.l4);
        const double cut6 = 8773.0 / 73500.0;
        if (p[5] < t && f2 < l.l4) {
            ++rep.step_checks;
            const bool lower_ok = f2 > cut6;
            bool upper_ok = true;
            if (lower_ok) {
                const double bound = 125.0 / 294.0 - (6525.3 - 1096625.0 / 294.0) /
                                                         (73500.0 * f2 - 8773.0);
                upper_ok = f1 < bound && bound < 0.1143;
            }
            if (!(lower_ok && upper_ok)) ++rep.step_violations;
        }
        check(p[6] < t, f1 > 117.0 / 500.0 - std::sqrt(154595269.0) / 105500.0);
        ++rep.tuples_tested;
    }
    rep.ok = rep.step_violations == 0 && rep.all_below == 0;
    return rep;
}

} // namespace copsched
