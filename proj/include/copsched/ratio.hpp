#pragma once
#include "copsched/copula.hpp"

namespace copsched {

// Worst-case ratio surface
//   phi(x,y) = 1 + y - min{1, 1 - 1/x + y} F(x) - y F(y)
//              + min{1 + 1/x, 1 + y} H(x,y)
// with H supplied by the copula regime. x > 0 (or +inf), y >= 0 (or +inf);
// infinite inputs evaluate the corresponding limit (F(+inf) = 1, 1/inf = 0).
double eval_phi(const Copula& c, double x, double y);

// phi with evaluation internals exposed, for the CLI's debug output.
struct PhiParts {
    double value = 0.0;
    double h = 0.0;          // H(x,y)
    bool coef1_unit = false; // min{1, 1-1/x+y} resolved to the constant 1
    bool coef2_recip = false;// min{1+1/x, 1+y} resolved to 1+1/x
};
PhiParts eval_phi_parts(const Copula& c, double x, double y);

// Pairwise worst-case bound in probability form, for task time ratios
// r_j = t_{1j}/t_{2j} > 0:
//   P(X_j > r_j) + r_k P(X_k > r_k) + (1/r_j - r_k)^+ P(X_j <= r_j, X_k > r_k)
//   + (1 + 1/r_j) P(X_j <= r_j, X_k <= r_k).
// Identically equal to eval_phi(r_j, r_k); kept as an independent evaluation
// path because tests cross-check the two.
double eval_rho(const Copula& c, double r_j, double r_k);

// Two-task worst-case expression for the transcendental marginal
// F(x) = 1 - 2^(-x^2.3): with b1 = F(alpha1), b2 = F(1/alpha2),
//   (1+alpha2) b1 b2 + b1 (1-b2) + (1+alpha1)(1-b1)(1-b2)
//   + max{alpha1, alpha2} b2 (1-b1).
// Exceeding 1.5963 at a single point refutes that claimed ratio bound.
double eval_theta(double alpha1, double alpha2);

} // namespace copsched
