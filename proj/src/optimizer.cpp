#include "copsched/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include "copsched/io.hpp"
#include "copsched/rng.hpp"

namespace copsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tail compactification: s = x/(1+x) maps (0, +inf] onto (0, 1]; phi stays
// smooth in s across the tail because it depends on x only through 1/x and
// F(x), both smooth functions of s up to s = 1.
double to_s(double x) { return std::isinf(x) ? 1.0 : x / (1.0 + x); }
double to_x(double s) { return s >= 1.0 ? kInf : s / (1.0 - s); }

// Evaluation floor for the x coordinate: phi is constant in x on (0, 1/a]
// whenever F vanishes there, so clamping the open end costs nothing.
constexpr double kSMin = 1e-13;

struct Box {
    double s_lo, s_hi, t_lo, t_hi;
};

Box cell_box(const SearchCell& cell) {
    return Box{to_s(cell.x_lo), to_s(cell.x_hi), to_s(cell.y_lo), to_s(cell.y_hi)};
}

std::vector<double> axis_knots(const Marginal& m) {
    std::vector<double> ax;
    ax.push_back(0.0);
    ax.push_back(1.0);
    for (double v : marginal_knots(m))
        if (v > 0.0 && std::isfinite(v)) ax.push_back(v);
    ax.push_back(kInf);
    std::sort(ax.begin(), ax.end());
    ax.erase(std::unique(ax.begin(), ax.end()), ax.end());
    return ax;
}

// Sign of F(x)^{1/m} + F(y)^{1/m} - 1 at a cell corner (positive-part
// boundary of the pairwise joint CDF), evaluated as increments so that
// m ~ 10^6 keeps the O(log(u)/m) terms.
double boundary_gap(const Copula& c, double x, double y) {
    const double m = static_cast<double>(c.n - 1);
    auto term = [&](double z) {
        const double u = eval_F(c.marginal, z);
        if (u <= 0.0) return -1.0;
        if (u >= 1.0) return 0.0;
        return std::expm1(std::log(u) / m);
    };
    return term(x) + term(y) + 1.0;
}

int copula_side_of(const Copula& c, double x_lo, double x_hi, double y_lo, double y_hi) {
    if (c.regime == Regime::Independent) {
        // H = F(x)F(y) has no curve to search inside a knot-aligned cell: the
        // interior is either all zero or all positive, so probe the middle.
        const double px = std::isinf(x_hi) ? x_lo + 1.0 : 0.5 * (x_lo + x_hi);
        const double py = std::isinf(y_hi) ? y_lo + 1.0 : 0.5 * (y_lo + y_hi);
        return eval_H(c, px, py) > 0.0 ? +1 : -1;
    }
    if (boundary_gap(c, x_hi, y_hi) <= 0.0) return -1; // H == 0 up to the far corner
    if (boundary_gap(c, x_lo, y_lo) >= 0.0) return +1; // positive from the near corner on
    return 0;
}

int constraint_side_of(double x_lo, double x_hi, double y_lo, double y_hi) {
    if (x_lo * y_lo >= 1.0) return +1;
    if (x_hi * y_hi <= 1.0) return -1;
    return 0;
}

// y on the positive-part boundary for a given x: F(y) = (1 - F(x)^{1/m})^m.
double boundary_y(const Copula& c, double x) {
    const double m = static_cast<double>(c.n - 1);
    const double u = eval_F(c.marginal, x);
    if (u <= 0.0) return quantile(c.marginal, 1.0);
    if (u >= 1.0) return quantile(c.marginal, 0.0);
    const double w = -std::expm1(std::log(u) / m); // 1 - u^{1/m}, in (0,1)
    return quantile(c.marginal, std::exp(m * std::log(w)));
}

// Dense scan plus golden-section refinement of a scalar function on [lo, hi].
// Returns the best argument/value over every evaluation made.
struct LinePoint {
    double arg = 0.0;
    double value = -kInf;
};

template <typename F>
LinePoint line_max(F&& raw, double lo, double hi) {
    LinePoint best;
    auto f = [&](double z) {
        const double v = raw(z);
        if (v > best.value) {
            best.value = v;
            best.arg = z;
        }
        return v;
    };
    if (!(hi > lo)) {
        f(lo);
        return best;
    }
    constexpr int kScan = 64;
    int bi = 0;
    double bv = -kInf;
    for (int i = 0; i <= kScan; ++i) {
        const double z = lo + (hi - lo) * (static_cast<double>(i) / kScan);
        const double v = f(z);
        if (v > bv) {
            bv = v;
            bi = i;
        }
    }
    double a = lo + (hi - lo) * (static_cast<double>(std::max(0, bi - 1)) / kScan);
    double b = lo + (hi - lo) * (static_cast<double>(std::min(kScan, bi + 1)) / kScan);
    constexpr double kGolden = 0.6180339887498949;
    double c1 = b - kGolden * (b - a);
    double c2 = a + kGolden * (b - a);
    double f1 = f(c1);
    double f2 = f(c2);
    for (int it = 0; it < 220 && b - a > 1e-16; ++it) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + kGolden * (b - a);
            f2 = f(c2);
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - kGolden * (b - a);
            f1 = f(c1);
        }
    }
    return best;
}

struct CompassOut {
    double s, t, value;
    bool converged;
};

// Eight-direction pattern search with halving steps, clamped to the box.
template <typename F>
CompassOut compass(F&& f, const Box& box, double s0, double t0, int max_evals) {
    static const int kDir[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                   {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    const double ws = box.s_hi - box.s_lo;
    const double wt = box.t_hi - box.t_lo;
    double s = std::clamp(s0, box.s_lo, box.s_hi);
    double t = std::clamp(t0, box.t_lo, box.t_hi);
    double v = f(s, t);
    int evals = 1;
    double step = 0.25;
    while (step > 1e-12 && evals < max_evals) {
        bool improved = false;
        for (const auto& d : kDir) {
            const double ns = std::clamp(s + d[0] * step * ws, box.s_lo, box.s_hi);
            const double nt = std::clamp(t + d[1] * step * wt, box.t_lo, box.t_hi);
            if (ns == s && nt == t) continue;
            const double nv = f(ns, nt);
            ++evals;
            if (nv > v) {
                s = ns;
                t = nt;
                v = nv;
                improved = true;
                break;
            }
            if (evals >= max_evals) break;
        }
        if (!improved) step *= 0.5;
    }
    return CompassOut{s, t, v, step <= 1e-12};
}

// One-dimensional quadratic fits along each axis; a couple of rounds with a
// shrinking probe sharpen an interior maximum to near machine precision.
template <typename F>
void quad_polish(F&& f, const Box& box, double& s, double& t, double& v) {
    double h = 1e-4;
    for (int round = 0; round < 3; ++round, h *= 0.1) {
        for (int axis = 0; axis < 2; ++axis) {
            const double lo = axis == 0 ? box.s_lo : box.t_lo;
            const double hi = axis == 0 ? box.s_hi : box.t_hi;
            if (!(hi > lo)) continue;
            double p = axis == 0 ? s : t;
            const double hh = h * (hi - lo);
            if (p - hh < lo || p + hh > hi) continue;
            const double fm = axis == 0 ? f(p - hh, t) : f(s, p - hh);
            const double fp = axis == 0 ? f(p + hh, t) : f(s, p + hh);
            const double denom = fm - 2.0 * v + fp;
            if (!(denom < 0.0)) continue;
            const double cand = std::clamp(p + 0.5 * hh * (fm - fp) / denom, lo, hi);
            const double fc = axis == 0 ? f(cand, t) : f(s, cand);
            if (fc > v) {
                v = fc;
                (axis == 0 ? s : t) = cand;
            }
        }
    }
}

CellResult solve_cell(const Copula& c, const SearchCell& cell, std::uint64_t seed,
                      int run, int cell_idx) {
    const Box box = cell_box(cell);
    auto f = [&](double s, double t) {
        return eval_phi(c, to_x(std::max(s, kSMin)), to_x(t));
    };

    double bs = box.s_lo, bt = box.t_lo, bv = -kInf;
    auto consider = [&](double s, double t, double v) {
        if (v > bv) {
            bs = s;
            bt = t;
            bv = v;
        }
    };

    // Cell edges: boundary maxima (several published bottlenecks sit on knot
    // lines) fall to plain 1-D searches.
    for (double te : {box.t_lo, box.t_hi}) {
        const LinePoint p = line_max([&](double s) { return f(s, te); }, box.s_lo, box.s_hi);
        consider(p.arg, te, p.value);
    }
    for (double se : {box.s_lo, box.s_hi}) {
        const LinePoint p = line_max([&](double t) { return f(se, t); }, box.t_lo, box.t_hi);
        consider(se, p.arg, p.value);
    }

    // The xy = 1 curve (where both min branches switch) maps to s + t = 1.
    if (cell.constraint_side == 0) {
        const double lo = std::max(box.s_lo, 1.0 - box.t_hi);
        const double hi = std::min(box.s_hi, 1.0 - box.t_lo);
        if (hi > lo) {
            const LinePoint p = line_max([&](double s) { return f(s, 1.0 - s); }, lo, hi);
            consider(p.arg, 1.0 - p.arg, p.value);
        }
    }

    // The copula positive-part boundary, parametrized from either axis (the
    // curve can hug a cell edge when the exponent is large).
    if (c.regime == Regime::Clayton && cell.copula_side == 0) {
        auto on_curve_s = [&](double s) {
            const double y = boundary_y(c, to_x(std::max(s, kSMin)));
            return f(s, std::clamp(to_s(y), box.t_lo, box.t_hi));
        };
        auto on_curve_t = [&](double t) {
            const double x = boundary_y(c, to_x(std::max(t, kSMin)));
            return f(std::clamp(to_s(x), box.s_lo, box.s_hi), t);
        };
        LinePoint p = line_max(on_curve_s, box.s_lo, box.s_hi);
        {
            const double y = boundary_y(c, to_x(std::max(p.arg, kSMin)));
            consider(p.arg, std::clamp(to_s(y), box.t_lo, box.t_hi), p.value);
        }
        p = line_max(on_curve_t, box.t_lo, box.t_hi);
        {
            const double x = boundary_y(c, to_x(std::max(p.arg, kSMin)));
            consider(std::clamp(to_s(x), box.s_lo, box.s_hi), p.arg, p.value);
        }
    }

    // Multistart pattern search: corners, edge midpoints, center, and seeded
    // random interior points.
    const double ms = 0.5 * (box.s_lo + box.s_hi);
    const double mt = 0.5 * (box.t_lo + box.t_hi);
    double starts[15][2] = {
        {box.s_lo, box.t_lo}, {box.s_lo, box.t_hi}, {box.s_hi, box.t_lo},
        {box.s_hi, box.t_hi}, {ms, box.t_lo},       {ms, box.t_hi},
        {box.s_lo, mt},       {box.s_hi, mt},       {ms, mt},
    };
    Rng g = substream(seed, static_cast<std::uint64_t>(run),
                      static_cast<std::uint64_t>(cell_idx));
    for (int r = 9; r < 15; ++r) {
        starts[r][0] = box.s_lo + g.u01() * (box.s_hi - box.s_lo);
        starts[r][1] = box.t_lo + g.u01() * (box.t_hi - box.t_lo);
    }
    bool all_converged = true;
    for (const auto& st : starts) {
        const CompassOut out = compass(f, box, st[0], st[1], 1500);
        all_converged = all_converged && out.converged;
        consider(out.s, out.t, out.value);
    }

    quad_polish(f, box, bs, bt, bv);

    CellResult res;
    res.cell = cell;
    res.x = to_x(std::max(bs, kSMin));
    res.y = to_x(bt);
    res.value = bv;
    res.converged = all_converged;
    return res;
}

} // namespace

std::vector<SearchCell> make_cells(const Copula& c) {
    const std::vector<double> ax = axis_knots(c.marginal);
    std::vector<SearchCell> cells;
    cells.reserve((ax.size() - 1) * (ax.size() - 1));
    for (std::size_t i = 0; i + 1 < ax.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ax.size(); ++j) {
            SearchCell cell;
            cell.x_lo = ax[i];
            cell.x_hi = ax[i + 1];
            cell.y_lo = ax[j];
            cell.y_hi = ax[j + 1];
            cell.constraint_side = constraint_side_of(cell.x_lo, cell.x_hi, cell.y_lo, cell.y_hi);
            cell.copula_side = copula_side_of(c, cell.x_lo, cell.x_hi, cell.y_lo, cell.y_hi);
            cells.push_back(cell);
        }
    }
    return cells;
}

RatioReport maximize_phi(const Copula& c, int runs, std::uint64_t seed, bool parallel) {
    if (runs < 1) throw std::domain_error("maximize_phi: runs must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<SearchCell> cells = make_cells(c);
    const long long nc = static_cast<long long>(cells.size());
    const long long jobs = static_cast<long long>(runs) * nc;
    std::vector<CellResult> slots(static_cast<std::size_t>(jobs));

    // Every (run, cell) job is computed serially into its own slot, so the
    // reduce below sees identical numbers for any thread count.
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long job = 0; job < jobs; ++job)
            slots[static_cast<std::size_t>(job)] =
                solve_cell(c, cells[static_cast<std::size_t>(job % nc)], seed,
                           static_cast<int>(job / nc), static_cast<int>(job % nc));
    } else {
        for (long long job = 0; job < jobs; ++job)
            slots[static_cast<std::size_t>(job)] =
                solve_cell(c, cells[static_cast<std::size_t>(job % nc)], seed,
                           static_cast<int>(job / nc), static_cast<int>(job % nc));
    }

    RatioReport rep;
    rep.runs = runs;
    rep.per_cell.assign(slots.begin(), slots.begin() + nc);
    double spread_lo = kInf, spread_hi = -kInf;
    double best_v = -kInf;
    std::size_t best_slot = 0;
    for (int r = 0; r < runs; ++r) {
        double run_max = -kInf;
        for (long long ci = 0; ci < nc; ++ci) {
            const std::size_t idx = static_cast<std::size_t>(r) * nc + ci;
            const double v = slots[idx].value;
            if (v > run_max) run_max = v;
            if (v > best_v) {
                best_v = v;
                best_slot = idx;
            }
        }
        spread_lo = std::min(spread_lo, run_max);
        spread_hi = std::max(spread_hi, run_max);
    }
    rep.max_value = best_v;
    rep.argmax_x = slots[best_slot].x;
    rep.argmax_y = slots[best_slot].y;
    rep.spread_delta = spread_hi - spread_lo;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

namespace {

// Fixed-branch partial derivatives of phi for the independent regime with the
// piecewise marginal. sigma = +1 freezes the xy >= 1 branch
// (phi = 1 + y - F(x) - y F(y) + (1+1/x) F(x) F(y)), sigma = -1 the xy <= 1
// branch (phi = 1 + y - (1-1/x+y) F(x) - y F(y) + (1+y) F(x) F(y)).
double sided_slope(const Marginal& m, double v, double lo) {
    const FDeriv d = eval_F_derivative(m, v);
    if (!d.at_knot) return d.right;
    if (v <= lo) return d.right; // knot on the low edge: slope into the cell
    return d.left;               // knot on the high edge
}

struct Grad {
    double dx, dy;
};

Grad grad_phi_branch(const Marginal& m, const SearchCell& cell, int sigma,
                     double x, double y) {
    const double fx = eval_F(m, x);
    const double fy = eval_F(m, y);
    const double fpx = sided_slope(m, x, cell.x_lo);
    const double fpy = sided_slope(m, y, cell.y_lo);
    double a, ax, ay, b, bx, by;
    if (sigma > 0) {
        a = 1.0;
        ax = ay = 0.0;
        b = 1.0 + 1.0 / x;
        bx = -1.0 / (x * x);
        by = 0.0;
    } else {
        a = 1.0 - 1.0 / x + y;
        ax = 1.0 / (x * x);
        ay = 1.0;
        b = 1.0 + y;
        bx = 0.0;
        by = 1.0;
    }
    Grad g;
    g.dx = -ax * fx - a * fpx + bx * fx * fy + b * fpx * fy;
    g.dy = 1.0 - ay * fx - fy - y * fpy + by * fx * fy + b * fx * fpy;
    return g;
}

// Damped Newton on the stationarity system of one branch, with a
// finite-difference Jacobian of the analytic gradient.
bool newton2(const Marginal& m, const SearchCell& cell, int sigma, double& x, double& y) {
    const double wx = cell.x_hi - cell.x_lo;
    const double wy = cell.y_hi - cell.y_lo;
    const double pad_x = 1e-6 * wx;
    const double pad_y = 1e-6 * wy;
    for (int it = 0; it < 80; ++it) {
        const Grad g = grad_phi_branch(m, cell, sigma, x, y);
        if (std::max(std::fabs(g.dx), std::fabs(g.dy)) < 1e-11) return true;
        const double hx = 1e-7 * std::max(1.0, std::fabs(x));
        const double hy = 1e-7 * std::max(1.0, std::fabs(y));
        const Grad gxp = grad_phi_branch(m, cell, sigma, x + hx, y);
        const Grad gxm = grad_phi_branch(m, cell, sigma, x - hx, y);
        const Grad gyp = grad_phi_branch(m, cell, sigma, x, y + hy);
        const Grad gym = grad_phi_branch(m, cell, sigma, x, y - hy);
        const double j11 = (gxp.dx - gxm.dx) / (2.0 * hx);
        const double j21 = (gxp.dy - gxm.dy) / (2.0 * hx);
        const double j12 = (gyp.dx - gym.dx) / (2.0 * hy);
        const double j22 = (gyp.dy - gym.dy) / (2.0 * hy);
        const double det = j11 * j22 - j12 * j21;
        if (!(std::fabs(det) > 1e-14)) return false;
        const double step_x = -(j22 * g.dx - j12 * g.dy) / det;
        const double step_y = -(j11 * g.dy - j21 * g.dx) / det;
        x = std::clamp(x + step_x, cell.x_lo + pad_x, cell.x_hi - pad_x);
        y = std::clamp(y + step_y, cell.y_lo + pad_y, cell.y_hi - pad_y);
    }
    const Grad g = grad_phi_branch(m, cell, sigma, x, y);
    return std::max(std::fabs(g.dx), std::fabs(g.dy)) < 1e-9;
}

bool branch_valid(int sigma, double x, double y) {
    return sigma > 0 ? x * y >= 1.0 - 1e-10 : x * y <= 1.0 + 1e-10;
}

// Bisection roots of a scalar function over [lo, hi] via a dense sign scan.
template <typename F>
std::vector<double> scan_roots(F&& f, double lo, double hi) {
    std::vector<double> roots;
    constexpr int kScan = 256;
    double prev_z = lo;
    double prev_v = f(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double z = lo + (hi - lo) * (static_cast<double>(i) / kScan);
        const double v = f(z);
        if (prev_v == 0.0) roots.push_back(prev_z);
        if ((prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0)) {
            double a = prev_z, b = z, fa = prev_v;
            for (int it = 0; it < 120; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = f(mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_z = z;
        prev_v = v;
    }
    if (prev_v == 0.0) roots.push_back(prev_z);
    return roots;
}

} // namespace

std::vector<CriticalPoint> critical_points(const Copula& c, const SearchCell& cell) {
    if (c.regime != Regime::Independent || c.marginal.kind != MarginalKind::Piecewise)
        throw std::domain_error(
            "critical_points: closed-form derivatives exist only for the "
            "independent regime with the piecewise marginal");
    if (!(cell.x_lo <= cell.x_hi) || !(cell.y_lo <= cell.y_hi) ||
        !(cell.x_lo > 0.0) || !std::isfinite(cell.x_hi) || !std::isfinite(cell.y_hi))
        throw std::domain_error("critical_points: cell must be finite with x_lo > 0");
    const Marginal& m = c.marginal;

    // Branches with a nonempty validity region inside the cell.
    std::vector<int> sigmas;
    if (cell.x_hi * cell.y_hi >= 1.0) sigmas.push_back(+1);
    if (cell.x_lo * cell.y_lo <= 1.0) sigmas.push_back(-1);

    std::vector<CriticalPoint> out;
    auto accept = [&](double x, double y) {
        for (const CriticalPoint& p : out)
            if (std::fabs(p.x - x) <= 1e-8 && std::fabs(p.y - y) <= 1e-8) return;
        out.push_back(CriticalPoint{x, y, eval_phi(c, x, y)});
    };

    const bool deg_x = cell.x_lo == cell.x_hi;
    const bool deg_y = cell.y_lo == cell.y_hi;
    if (deg_x && deg_y) {
        accept(cell.x_lo, cell.y_lo);
    } else if (deg_x || deg_y) {
        // Stationarity along the one free coordinate.
        for (int sigma : sigmas) {
            if (deg_x) {
                const double x = cell.x_lo;
                auto dphi = [&](double y) {
                    return grad_phi_branch(m, cell, sigma, x, y).dy;
                };
                for (double y : scan_roots(dphi, cell.y_lo, cell.y_hi))
                    if (y > cell.y_lo && y < cell.y_hi && branch_valid(sigma, x, y))
                        accept(x, y);
            } else {
                const double y = cell.y_lo;
                auto dphi = [&](double x) {
                    return grad_phi_branch(m, cell, sigma, x, y).dx;
                };
                for (double x : scan_roots(dphi, cell.x_lo, cell.x_hi))
                    if (x > cell.x_lo && x < cell.x_hi && branch_valid(sigma, x, y))
                        accept(x, y);
            }
        }
    } else {
        const double pad_x = 1e-6 * (cell.x_hi - cell.x_lo);
        const double pad_y = 1e-6 * (cell.y_hi - cell.y_lo);
        for (int sigma : sigmas) {
            for (int i = 1; i <= 3; ++i) {
                for (int j = 1; j <= 3; ++j) {
                    double x = cell.x_lo + 0.25 * i * (cell.x_hi - cell.x_lo);
                    double y = cell.y_lo + 0.25 * j * (cell.y_hi - cell.y_lo);
                    if (!newton2(m, cell, sigma, x, y)) continue;
                    if (x <= cell.x_lo + pad_x || x >= cell.x_hi - pad_x) continue;
                    if (y <= cell.y_lo + pad_y || y >= cell.y_hi - pad_y) continue;
                    if (!branch_valid(sigma, x, y)) continue;
                    accept(x, y);
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint& p, const CriticalPoint& q) {
        return p.value > q.value;
    });
    return out;
}

namespace {

Copula regime_for(long long n, double a, double b) {
    Marginal m = make_piecewise(a, b);
    if (n >= 2) return make_clayton(n, std::move(m));
    return make_independent(1, std::move(m));
}

} // namespace

TuneResult tune_ab(long long n, GridRange a_grid, GridRange b_grid, int runs,
                   std::uint64_t seed, bool parallel) {
    if (!(a_grid.lo > 1.0) || !(a_grid.hi <= 3.0) || a_grid.lo > a_grid.hi ||
        a_grid.steps < 1)
        throw std::domain_error("tune_ab: a grid must lie in (1, 3]");
    if (!(b_grid.lo > 0.5) || !(b_grid.hi < 1.0) || b_grid.lo > b_grid.hi ||
        b_grid.steps < 1)
        throw std::domain_error("tune_ab: b grid must lie in (0.5, 1)");
    if (runs < 1) throw std::domain_error("tune_ab: runs must be >= 1");

    const std::uint64_t inner_seed = substream(seed, 0x7ab5eedULL).next();
    auto objective = [&](double a, double b) {
        a = std::clamp(a, 1.0001, 3.0);
        b = std::clamp(b, 0.5001, 0.9999);
        return maximize_phi(regime_for(n, a, b), 1, inner_seed, parallel).max_value;
    };

    double best_a = a_grid.lo, best_b = b_grid.lo, best_v = kInf;
    const double da = a_grid.steps > 1 ? (a_grid.hi - a_grid.lo) / (a_grid.steps - 1) : 0.0;
    const double db = b_grid.steps > 1 ? (b_grid.hi - b_grid.lo) / (b_grid.steps - 1) : 0.0;
    for (int i = 0; i < a_grid.steps; ++i) {
        for (int j = 0; j < b_grid.steps; ++j) {
            const double a = a_grid.lo + i * da;
            const double b = b_grid.lo + j * db;
            const double v = objective(a, b);
            if (v < best_v) {
                best_v = v;
                best_a = a;
                best_b = b;
            }
        }
    }

    // Nelder-Mead refinement around the best grid point (minimizing max phi).
    struct Vertex {
        double a, b, v;
    };
    const double step_a = std::max(da > 0.0 ? 0.5 * da : 0.0, 5e-3);
    const double step_b = std::max(db > 0.0 ? 0.5 * db : 0.0, 2.5e-3);
    Vertex simplex[3] = {
        {best_a, best_b, best_v},
        {best_a + step_a, best_b, objective(best_a + step_a, best_b)},
        {best_a, best_b + step_b, objective(best_a, best_b + step_b)},
    };
    auto order = [&] {
        std::sort(std::begin(simplex), std::end(simplex),
                  [](const Vertex& p, const Vertex& q) { return p.v < q.v; });
    };
    order();
    for (int it = 0; it < 80; ++it) {
        const double size = std::max(std::fabs(simplex[0].a - simplex[2].a) +
                                         std::fabs(simplex[1].a - simplex[2].a),
                                     std::fabs(simplex[0].b - simplex[2].b) +
                                         std::fabs(simplex[1].b - simplex[2].b));
        if (size < 1e-6) break;
        const double ca = 0.5 * (simplex[0].a + simplex[1].a);
        const double cb = 0.5 * (simplex[0].b + simplex[1].b);
        const double ra = ca + (ca - simplex[2].a);
        const double rb = cb + (cb - simplex[2].b);
        const double rv = objective(ra, rb);
        if (rv < simplex[0].v) {
            const double ea = ca + 2.0 * (ca - simplex[2].a);
            const double eb = cb + 2.0 * (cb - simplex[2].b);
            const double ev = objective(ea, eb);
            simplex[2] = ev < rv ? Vertex{ea, eb, ev} : Vertex{ra, rb, rv};
        } else if (rv < simplex[1].v) {
            simplex[2] = Vertex{ra, rb, rv};
        } else {
            const double ka = ca + 0.5 * (simplex[2].a - ca);
            const double kb = cb + 0.5 * (simplex[2].b - cb);
            const double kv = objective(ka, kb);
            if (kv < simplex[2].v) {
                simplex[2] = Vertex{ka, kb, kv};
            } else {
                for (int k = 1; k < 3; ++k) {
                    simplex[k].a = simplex[0].a + 0.5 * (simplex[k].a - simplex[0].a);
                    simplex[k].b = simplex[0].b + 0.5 * (simplex[k].b - simplex[0].b);
                    simplex[k].v = objective(simplex[k].a, simplex[k].b);
                }
            }
        }
        order();
    }

    TuneResult res;
    res.a = std::clamp(simplex[0].a, 1.0001, 3.0);
    res.b = std::clamp(simplex[0].b, 0.5001, 0.9999);
    res.report = maximize_phi(regime_for(n, res.a, res.b), runs, seed, parallel);
    return res;
}

void preset_ab(long long n, double* a, double* b) {
    struct Preset {
        long long n;
        double a, b;
    };
    static const Preset kPresets[] = {
        {2, 2.2468, 0.7607},      {3, 1.9328, 0.7418},   {4, 1.8442, 0.7453},
        {5, 1.8070, 0.7487},      {6, 1.7863, 0.7510},   {7, 1.7734, 0.7526},
        {8, 1.7646, 0.7536},      {9, 1.7581, 0.7543},   {10, 1.7530, 0.7548},
        {15, 1.7410, 0.7570},     {20, 1.7326, 0.7573},  {30, 1.7267, 0.7582},
        {45, 1.7225, 0.7587},     {70, 1.7199, 0.7592},  {100, 1.7183, 0.7594},
        {200, 1.7167, 0.7597},    {500, 1.7156, 0.7598}, {1000, 1.7153, 0.7599},
        {5000, 1.7150, 0.7599},   {10000, 1.7149, 0.7599},
        {100000, 1.7149, 0.7599}, {1000000, 1.7149, 0.7599},
    };
    if (n < 2) throw std::domain_error("preset_ab: n must be >= 2");
    const Preset* best = &kPresets[0];
    double best_d = kInf;
    for (const Preset& p : kPresets) {
        const double d = std::fabs(std::log(static_cast<double>(n)) -
                                   std::log(static_cast<double>(p.n)));
        if (d < best_d) {
            best_d = d;
            best = &p;
        }
    }
    *a = best->a;
    *b = best->b;
}

std::vector<CurveRow> ratio_curve(const std::vector<long long>& n_list, int runs,
                                  std::uint64_t seed, bool parallel) {
    std::vector<CurveRow> rows;
    rows.reserve(n_list.size());
    for (long long n : n_list) {
        if (n < 2) throw std::domain_error("ratio_curve: every n must be >= 2");
        CurveRow row;
        row.n = n;
        preset_ab(n, &row.a, &row.b);
        const std::uint64_t row_seed =
            substream(seed, static_cast<std::uint64_t>(n), 0xcu).next();
        const RatioReport rep =
            maximize_phi(make_clayton(n, make_piecewise(row.a, row.b)), runs,
                         row_seed, parallel);
        row.x_star = rep.argmax_x;
        row.y_star = rep.argmax_y;
        row.value = rep.max_value;
        row.delta = rep.spread_delta;
        rows.push_back(row);
    }
    return rows;
}

void export_ratio_curve(const std::vector<long long>& n_list, const std::string& out_path,
                        int runs, std::uint64_t seed, bool parallel) {
    const std::vector<CurveRow> rows = ratio_curve(n_list, runs, seed, parallel);
    std::string csv = "n,a,b,x_star,y_star,value,delta\n";
    for (const CurveRow& r : rows) {
        csv += std::to_string(r.n);
        csv += ',';
        csv += fmt17(r.a);
        csv += ',';
        csv += fmt17(r.b);
        csv += ',';
        csv += fmt17(r.x_star);
        csv += ',';
        csv += fmt17(r.y_star);
        csv += ',';
        csv += fmt17(r.value);
        csv += ',';
        csv += fmt17(r.delta);
        csv += '\n';
    }
    write_text_file(out_path, csv);
}

} // namespace copsched
