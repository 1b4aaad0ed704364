#pragma once
#include <cstdint>
#include <vector>

#include "copsched/marginal.hpp"

namespace copsched {

enum class Regime { Independent, Clayton };

// Joint law of the threshold vector (X_1,...,X_n).
//
//   Clayton      G(x) = [(sum_i F(x_i)^{1/(n-1)} - n + 1)^+]^{n-1}  — the
//                Clayton family at its extreme negative-dependence parameter
//                -1/(n-1); pairwise margins have the same form with two terms.
//   Independent  G(x) = prod_i F(x_i).
struct Copula {
    Regime regime = Regime::Independent;
    long long n = 1;
    Marginal marginal;
};

Copula make_independent(long long n, Marginal m); // n >= 1
Copula make_clayton(long long n, Marginal m);     // n >= 2 (exponent n-1 >= 1)

// [(u^{1/m} + v^{1/m} - 1)^+]^m for u,v in [0,1], m >= 1. Evaluated through
// expm1/log1p so that m ~ 10^6 does not lose the O(log(u)/m) increments to
// cancellation.
double clayton_joint(double u, double v, long long m);

// Joint CDF at a full coordinate vector (length must equal c.n).
double eval_G(const Copula& c, const std::vector<double>& x);

// Pairwise joint CDF H(x,y); equals eval_G with every other coordinate +inf.
double eval_H(const Copula& c, double x, double y);

struct SampleBatch {
    std::uint64_t seed = 0;
    std::size_t count = 0; // rows (draws)
    std::size_t n = 0;     // columns (tasks)
    std::vector<double> x; // row-major, count*n entries

    double at(std::size_t row, std::size_t col) const { return x[row * n + col]; }
};

// `count` i.i.d. draws of (X_1,...,X_n) with joint CDF eval_G.
//
// Clayton draws map a uniform point S of the unit simplex through the survival
// transform U_i = (1 - S_i)^{n-1} (each U_i is uniform, and the joint law of U
// is exactly the Clayton form above, since P(S_1 > s_1,...,S_n > s_n) =
// (1 - sum s_i)_+^{n-1}); then X_i = quantile(U_i). At n = 2 this degenerates
// to the antithetic pair U, 1-U. Rows use independent substreams keyed by
// (seed, row), so output is bitwise identical for any thread count.
SampleBatch sample(const Copula& c, std::size_t count, std::uint64_t seed);

// Single-threaded reference with the identical row kernel.
SampleBatch sample_serial(const Copula& c, std::size_t count, std::uint64_t seed);

// Row `row` of the batch sample(c, count, seed) would produce, for any
// count > row; lets consumers stream draws without materializing a batch.
// `out` must have room for n doubles.
void sample_point(const Copula& c, std::uint64_t seed, std::size_t row, double* out);

} // namespace copsched
