#include "copsched/copula.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "copsched/rng.hpp"

namespace copsched {

Copula make_independent(long long n, Marginal m) {
    if (n < 1) throw std::domain_error("independent regime requires n >= 1");
    return Copula{Regime::Independent, n, std::move(m)};
}

Copula make_clayton(long long n, Marginal m) {
    if (n < 2) throw std::domain_error("clayton regime requires n >= 2");
    return Copula{Regime::Clayton, n, std::move(m)};
}

double clayton_joint(double u, double v, long long m) {
    if (!(u > 0.0) || !(v > 0.0)) return 0.0;
    if (u >= 1.0) return std::min(v, 1.0);
    if (v >= 1.0) return u;
    if (m == 1) return std::max(u + v - 1.0, 0.0);
    const double md = static_cast<double>(m);
    // u^{1/m} - 1 + v^{1/m} - 1, kept as increments near 0 for large m
    const double s = std::expm1(std::log(u) / md) + std::expm1(std::log(v) / md);
    if (s <= -1.0) return 0.0;
    return std::exp(md * std::log1p(s));
}

double eval_G(const Copula& c, const std::vector<double>& x) {
    if (static_cast<long long>(x.size()) != c.n)
        throw std::domain_error("eval_G: coordinate count differs from c.n");
    if (c.regime == Regime::Independent) {
        double p = 1.0;
        for (double xi : x) p *= eval_F(c.marginal, xi);
        return p;
    }
    const double md = static_cast<double>(c.n - 1);
    double s = 0.0;
    for (double xi : x) {
        const double u = eval_F(c.marginal, xi);
        if (u <= 0.0) return 0.0;
        if (u < 1.0) s += std::expm1(std::log(u) / md);
        if (s <= -1.0) return 0.0;
    }
    if (c.n == 2) { // exact countermonotonic form, no rounding through logs
        const double u = eval_F(c.marginal, x[0]);
        const double v = eval_F(c.marginal, x[1]);
        return std::max(u + v - 1.0, 0.0);
    }
    return std::exp(md * std::log1p(s));
}

double eval_H(const Copula& c, double x, double y) {
    const double u = eval_F(c.marginal, x);
    const double v = eval_F(c.marginal, y);
    if (c.regime == Regime::Independent) return u * v;
    return clayton_joint(u, v, c.n - 1);
}

void sample_point(const Copula& c, std::uint64_t seed, std::size_t row, double* out) {
    Rng g = substream(seed, row);
    const std::size_t n = static_cast<std::size_t>(c.n);
    if (c.regime == Regime::Independent) {
        for (std::size_t j = 0; j < n; ++j) out[j] = quantile(c.marginal, g.u01());
        return;
    }
    // uniform simplex point via normalized exponentials
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = g.exp1();
        sum += out[j];
    }
    if (sum <= 0.0) { // all-zero draw; probability ~2^-53n, but keep it defined
        for (std::size_t j = 0; j < n; ++j) out[j] = 1.0;
        sum = static_cast<double>(n);
    }
    const double md = static_cast<double>(c.n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double s_j = out[j] / sum;
        const double u_j = std::exp(md * std::log1p(-s_j)); // (1 - S_j)^{n-1}
        out[j] = quantile(c.marginal, u_j);
    }
}

namespace {

SampleBatch sample_impl(const Copula& c, std::size_t count, std::uint64_t seed, bool parallel) {
    if (count < 1) throw std::domain_error("sample: count must be >= 1");
    SampleBatch b;
    b.seed = seed;
    b.count = count;
    b.n = static_cast<std::size_t>(c.n);
    b.x.resize(count * b.n);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long r = 0; r < static_cast<long long>(count); ++r)
            sample_point(c, seed, static_cast<std::size_t>(r), &b.x[static_cast<std::size_t>(r) * b.n]);
    } else {
        for (std::size_t r = 0; r < count; ++r)
            sample_point(c, seed, r, &b.x[r * b.n]);
    }
    return b;
}

} // namespace

SampleBatch sample(const Copula& c, std::size_t count, std::uint64_t seed) {
    return sample_impl(c, count, seed, true);
}

SampleBatch sample_serial(const Copula& c, std::size_t count, std::uint64_t seed) {
    return sample_impl(c, count, seed, false);
}

} // namespace copsched
