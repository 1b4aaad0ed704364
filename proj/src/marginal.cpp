#include "copsched/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace copsched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExponent = 2.3; // transcendental family exponent
} // namespace

Marginal make_piecewise(double a, double b) {
    if (!(a > 1.0) || !std::isfinite(a))
        throw std::domain_error("piecewise marginal requires a > 1");
    if (!(b > 0.5) || !(b < 1.0))
        throw std::domain_error("piecewise marginal requires b in (0.5, 1)");
    Marginal m;
    m.kind = MarginalKind::Piecewise;
    m.a = a;
    m.b = b;
    m.outside_box = !(a >= 1.7 && a <= 3.0 && b >= 0.7 && b <= 1.0);
    return m;
}

Marginal make_transcendental() {
    Marginal m;
    m.kind = MarginalKind::Transcendental;
    return m;
}

Marginal make_tabulated(std::vector<std::pair<double, double>> pts) {
    if (pts.size() < 2)
        throw std::domain_error("tabulated marginal needs at least two nodes");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].first >= 0.0) || !std::isfinite(pts[i].first))
            throw std::domain_error("tabulated abscissae must be finite and >= 0");
        if (!(pts[i].second >= 0.0) || !(pts[i].second <= 1.0))
            throw std::domain_error("tabulated values must lie in [0,1]");
        if (i > 0 && !(pts[i].first > pts[i - 1].first))
            throw std::domain_error("tabulated abscissae must be strictly increasing");
        if (i > 0 && pts[i].second < pts[i - 1].second)
            throw std::domain_error("tabulated values must be non-decreasing");
    }
    Marginal m;
    m.kind = MarginalKind::Tabulated;
    m.table = std::move(pts);
    return m;
}

double eval_F(const Marginal& m, double x) {
    if (std::isnan(x) || x < 0.0)
        throw std::domain_error("eval_F: x must be >= 0");
    switch (m.kind) {
    case MarginalKind::Piecewise: {
        const double a = m.a, b = m.b;
        if (x >= a) return 1.0;
        if (x >= 0.5 * (a + 1.0)) return 1.0 - 2.0 * (1.0 - b) * (a - x) / (a - 1.0);
        if (x >= 1.0) return 0.5 + (2.0 * b - 1.0) * (x - 1.0) / (a - 1.0);
        if (x >= 2.0 / (a + 1.0)) return 0.5 - (2.0 * b - 1.0) * (1.0 / x - 1.0) / (a - 1.0);
        if (x > 1.0 / a) return 2.0 * (1.0 - b) * (a - 1.0 / x) / (a - 1.0);
        return 0.0;
    }
    case MarginalKind::Transcendental:
        if (std::isinf(x)) return 1.0;
        return 1.0 - std::exp2(-std::pow(x, kExponent));
    case MarginalKind::Tabulated: {
        const auto& t = m.table;
        if (x <= t.front().first) {
            // below the first node interpolate from the implicit origin (0,0),
            // keeping F(0) = 0 even for tables that start at x > 0
            if (x == t.front().first) return t.front().second;
            if (t.front().first == 0.0) return t.front().second;
            return t.front().second * (x / t.front().first);
        }
        if (x >= t.back().first) return t.back().second;
        auto it = std::upper_bound(t.begin(), t.end(), x,
                                   [](double v, const std::pair<double, double>& p) { return v < p.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (x - lo.first) / (hi.first - lo.first);
        return lo.second + w * (hi.second - lo.second);
    }
    }
    return 0.0;
}

double quantile(const Marginal& m, double u) {
    if (std::isnan(u) || u < 0.0 || u > 1.0)
        throw std::domain_error("quantile: u must lie in [0,1]");
    switch (m.kind) {
    case MarginalKind::Piecewise: {
        const double a = m.a, b = m.b;
        if (u <= 0.0) return 1.0 / a;
        if (u <= 1.0 - b) return 1.0 / (a - u * (a - 1.0) / (2.0 * (1.0 - b)));
        if (u <= 0.5) return 1.0 / (1.0 + (0.5 - u) * (a - 1.0) / (2.0 * b - 1.0));
        if (u <= b) return 1.0 + (u - 0.5) * (a - 1.0) / (2.0 * b - 1.0);
        return a - (1.0 - u) * (a - 1.0) / (2.0 * (1.0 - b));
    }
    case MarginalKind::Transcendental:
        if (u >= 1.0) return kInf;
        if (u <= 0.0) return 0.0;
        return std::pow(-std::log1p(-u) / std::log(2.0), 1.0 / kExponent);
    case MarginalKind::Tabulated: {
        const auto& t = m.table;
        if (u > t.back().second) return kInf;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i].second >= u) {
                if (i == 0 || t[i].second == u) {
                    // leftmost abscissa attaining u (flat runs resolve left)
                    std::size_t j = i;
                    while (j > 0 && t[j - 1].second >= u) --j;
                    if (j > 0 && t[j].second > u) {
                        const auto& lo = t[j - 1];
                        const auto& hi = t[j];
                        const double w = (u - lo.second) / (hi.second - lo.second);
                        return lo.first + w * (hi.first - lo.first);
                    }
                    return t[j].first;
                }
                const auto& lo = t[i - 1];
                const auto& hi = t[i];
                const double w = (u - lo.second) / (hi.second - lo.second);
                return lo.first + w * (hi.first - lo.first);
            }
        }
        return kInf;
    }
    }
    return 0.0;
}

namespace {

// derivative of the piecewise F, with the piece selected by `where` but the
// x-dependent factors evaluated at `x` (so a knot can ask for the exact slope
// of either adjacent piece)
double piecewise_slope_at(const Marginal& m, double where, double x) {
    const double a = m.a, b = m.b;
    if (where > a) return 0.0;
    if (where > 0.5 * (a + 1.0)) return 2.0 * (1.0 - b) / (a - 1.0);
    if (where > 1.0) return (2.0 * b - 1.0) / (a - 1.0);
    if (where > 2.0 / (a + 1.0)) return (2.0 * b - 1.0) / ((a - 1.0) * x * x);
    if (where > 1.0 / a) return 2.0 * (1.0 - b) / ((a - 1.0) * x * x);
    return 0.0;
}

double piecewise_slope(const Marginal& m, double x) {
    return piecewise_slope_at(m, x, x);
}

} // namespace

FDeriv eval_F_derivative(const Marginal& m, double x) {
    if (std::isnan(x) || x <= 0.0)
        throw std::domain_error("eval_F_derivative: x must be > 0");
    switch (m.kind) {
    case MarginalKind::Piecewise: {
        for (double k : marginal_knots(m)) {
            if (x == k) {
                // one piece ends where the next begins; report both slopes,
                // each piece's formula evaluated exactly at the knot
                const double eps = k * 1e-9;
                return {piecewise_slope_at(m, k - eps, k),
                        piecewise_slope_at(m, k + eps, k), true};
            }
        }
        const double s = piecewise_slope(m, x);
        return {s, s, false};
    }
    case MarginalKind::Transcendental: {
        if (std::isinf(x)) return {0.0, 0.0, false};
        const double d = std::log(2.0) * kExponent * std::pow(x, kExponent - 1.0) *
                         std::exp2(-std::pow(x, kExponent));
        return {d, d, false};
    }
    case MarginalKind::Tabulated: {
        const auto& t = m.table;
        auto slope = [&](std::size_t i) {
            return (t[i + 1].second - t[i].second) / (t[i + 1].first - t[i].first);
        };
        if (x <= t.front().first) {
            const double s = (x == t.front().first) ? slope(0) : 0.0;
            return {0.0, s, x == t.front().first};
        }
        if (x >= t.back().first) {
            const double s = (x == t.back().first) ? slope(t.size() - 2) : 0.0;
            return {s, 0.0, x == t.back().first};
        }
        for (std::size_t i = 1; i + 1 < t.size(); ++i)
            if (x == t[i].first) return {slope(i - 1), slope(i), true};
        auto it = std::upper_bound(t.begin(), t.end(), x,
                                   [](double v, const std::pair<double, double>& p) { return v < p.first; });
        const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
        const double s = slope(i);
        return {s, s, false};
    }
    }
    return {0.0, 0.0, false};
}

std::vector<double> marginal_knots(const Marginal& m) {
    switch (m.kind) {
    case MarginalKind::Piecewise:
        return {1.0 / m.a, 2.0 / (m.a + 1.0), 1.0, 0.5 * (m.a + 1.0), m.a};
    case MarginalKind::Transcendental:
        return {};
    case MarginalKind::Tabulated: {
        std::vector<double> k;
        k.reserve(m.table.size());
        for (const auto& p : m.table) k.push_back(p.first);
        return k;
    }
    }
    return {};
}

} // namespace copsched
