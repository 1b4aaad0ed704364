#pragma once
#include <string>
#include <utility>
#include <vector>

namespace copsched {

enum class MarginalKind { Piecewise, Transcendental, Tabulated };

// Marginal distribution function F with F(0) = 0 and F -> 1 at infinity.
//
//   Piecewise      six-piece algebraic family on knots 1/a, 2/(a+1), 1,
//                  (a+1)/2, a; each piece affine in x or in 1/x; satisfies
//                  the reflection identity F(x) + F(1/x) = 1 and F((a+1)/2)=b.
//   Transcendental F(x) = 1 - 2^(-x^2.3)  (not reflection-symmetric).
//   Tabulated      linear interpolation through (x, u) nodes.
struct Marginal {
    MarginalKind kind = MarginalKind::Piecewise;
    double a = 1.715;
    double b = 0.76;
    std::vector<std::pair<double, double>> table; // Tabulated nodes, x ascending
    // (a,b) accepted outside the analyzed box [1.7,3]x[0.7,1]; flagged so the
    // CLI can warn while still serving every instantiation used in practice.
    bool outside_box = false;
};

// Constructors validate and throw std::domain_error on unusable parameters
// (piecewise needs a > 1 and b in (0.5, 1) for all six pieces to be monotone).
Marginal make_piecewise(double a, double b);
Marginal make_transcendental();
Marginal make_tabulated(std::vector<std::pair<double, double>> pts);

// F(x); x must be >= 0 (or +infinity, which gives the limit value).
double eval_F(const Marginal& m, double x);

// Generalized inverse inf{x : F(x) >= u}, u in [0,1]; ties on flat pieces
// resolve toward the support, e.g. quantile(0) = 1/a for the piecewise family.
double quantile(const Marginal& m, double u);

// One-sided derivatives of F; equal away from piece knots.
struct FDeriv {
    double left;
    double right;
    bool at_knot;
};
FDeriv eval_F_derivative(const Marginal& m, double x);

// Finite abscissae where the definition of F changes piece (empty for the
// transcendental marginal, which is one smooth piece).
std::vector<double> marginal_knots(const Marginal& m);

} // namespace copsched
