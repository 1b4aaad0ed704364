#pragma once
#include <array>
#include <cstdint>

#include "copsched/marginal.hpp"

namespace copsched {

// Abscissae of the seven-point certificate that no marginal F can push the
// independent-regime worst case below 1.5852.
inline constexpr double kCertAlpha = 169.0 / 125.0; // 1.352
inline constexpr double kCertBeta = 383.0 / 250.0;  // 1.532

struct CertificatePoint {
    double x, y;
    int branch; // +1: xy >= 1 at this point, -1: xy <= 1
};

// (alpha,alpha), (beta,beta), (alpha,beta), (1,alpha), (1/alpha,1),
// (1/beta,1/alpha), (1/beta,1/beta) — the order phi_at_points reports.
std::array<CertificatePoint, 7> certificate_points();

struct LambdaConstants {
    double l1, l2, l3, l4;
};

// Closed-form cut constants of the seven-point elimination chain:
//   l1 = 383/500 + sqrt(154595269)/105500
//   l2 = 169 (3830 l1 - 2367) / (2500 (294 l1 - 169))
//   l3 = 169/250 - (227/2500) / (2 l2 - 1)
//   l4 = 1/2 - 0.0908 / (2 l3 - 0.648)
LambdaConstants lambda_constants();

// F evaluated at the five certificate abscissae (1/beta, 1/alpha, 1, alpha,
// beta) — the only marginal information the seven phi values depend on.
std::array<double, 5> marginal_tuple(const Marginal& m);

// phi at the seven certificate points for the independent regime, written as
// quadratics in the five F-values. Requires 0 <= f1 <= ... <= f5 <= 1
// (monotone distribution values); throws std::domain_error otherwise.
std::array<double, 7> phi_at_points(const std::array<double, 5>& f);

struct LowerBoundReport {
    double resolution = 0.0; // actual grid pitch 1/K
    double threshold = 0.0;
    double minimax = 0.0;    // min over grid tuples of the seven-point max
    std::array<double, 5> argmin_tuple{};
    double slack = 0.0;      // Lipschitz allowance for off-grid tuples
    bool pass = false;       // minimax >= threshold - slack
    double refined_minimax = 0.0; // local descent from the best grid tuple
    std::array<double, 5> refined_tuple{};
    double tuples_checked = 0.0;  // count of monotone grid 5-tuples
    double wall_seconds = 0.0;
};

// Exact minimax over every monotone 5-tuple on the grid {0, 1/K, ..., 1},
// via stage-wise dynamic programming on the chain structure of the seven
// expressions (each couples at most adjacent F-values), then a projected
// local descent below grid pitch. Certifies: no monotone tuple keeps all
// seven values below threshold - slack.
LowerBoundReport verify_lower_bound(double resolution, double threshold = 1.5852,
                                    bool parallel = true);

// Plain quintuple loop over the same grid; feasible only for coarse
// resolutions, kept as the reference the DP is tested against.
double lb_minimax_bruteforce(double resolution);

struct ChainReport {
    long long tuples_tested = 0;
    long long step_checks = 0;     // implication instances whose hypothesis held
    long long step_violations = 0; // implication instances that failed
    long long all_below = 0;       // sampled tuples with all seven values < threshold
    bool ok = false;               // no violations and no surviving tuple
};

// Replays the elimination chain's implications on random monotone tuples:
// every step whose hypothesis holds must deliver its conclusion, and no
// tuple may keep all seven values below the threshold. The cut constants
// are specific to the canonical threshold 1.5852.
ChainReport replay_contradiction_chain(long long num_samples, std::uint64_t seed,
                                       double threshold = 1.5852);

} // namespace copsched
