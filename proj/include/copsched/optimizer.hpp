#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "copsched/ratio.hpp"

namespace copsched {

// Axis-aligned search cell. Cell edges sit on the marginal's knot abscissae
// plus {0, 1, +inf}, so every min / piece / positive-part branch of phi is
// fixed on the cell interior except for the xy = 1 curve and the copula
// positive-part boundary, which are handled by dedicated line searches.
struct SearchCell {
    double x_lo = 0.0, x_hi = 0.0; // x_hi may be +inf
    double y_lo = 0.0, y_hi = 0.0;
    // +1: xy >= 1 on the whole cell; -1: xy <= 1; 0: the xy=1 curve crosses.
    int constraint_side = 0;
    // +1: pairwise H > 0 on the cell interior; -1: H == 0; 0: boundary crosses.
    int copula_side = 0;
};

struct CellResult {
    SearchCell cell;
    double x = 0.0, y = 0.0, value = 0.0; // local maximum found in the cell
    bool converged = true; // pattern search hit its step tolerance
};

struct RatioReport {
    double argmax_x = 0.0;
    double argmax_y = 0.0;
    double max_value = 0.0;
    int runs = 0;
    double spread_delta = 0.0;          // max - min of the per-run maxima
    std::vector<CellResult> per_cell;   // cells of the first run
    double wall_seconds = 0.0;
};

// The cell decomposition induced by the marginal's knots (plus {0,1,+inf}).
std::vector<SearchCell> make_cells(const Copula& c);

// Global maximization of phi over (0,inf)^2: per cell, deterministic line
// searches on every edge, the xy=1 segment and the copula boundary, plus
// multistart compass descent-ascent from corners, edge midpoints, the center
// and seeded random interior points, followed by a quadratic polish. Tails
// are searched through the compactification s = x/(1+x). `runs` independent
// repetitions differ only in their random starts; spread_delta is the spread
// of the per-run maxima. Deterministic for fixed (inputs, seed), whether or
// not OpenMP splits the (run, cell) jobs across threads.
RatioReport maximize_phi(const Copula& c, int runs, std::uint64_t seed,
                         bool parallel = true);

struct CriticalPoint {
    double x = 0.0, y = 0.0, value = 0.0;
};

// Interior stationary points of phi on one cell (independent regime with the
// piecewise algebraic marginal only — the case with closed-form derivatives).
// A degenerate cell (x_lo == x_hi or y_lo == y_hi) asks for stationarity
// along that edge, i.e. roots of the one remaining partial derivative.
// Returns points sorted by decreasing value; empty when the cell has none.
std::vector<CriticalPoint> critical_points(const Copula& c,
                                           const SearchCell& cell);

struct GridRange {
    double lo = 0.0, hi = 0.0;
    int steps = 1; // number of grid points (>= 1; 1 means just lo)
};

struct TuneResult {
    double a = 0.0, b = 0.0;
    RatioReport report; // maximize_phi at the tuned (a,b)
};

// Outer minimization of max phi over the marginal parameters (a,b):
// coarse grid, then a Nelder-Mead refinement around the best grid point,
// clamped to a in (1,3], b in (0.5,1). n < 2 selects the independent regime,
// n >= 2 the negative-dependence regime with that many tasks.
TuneResult tune_ab(long long n, GridRange a_grid, GridRange b_grid, int runs,
                   std::uint64_t seed, bool parallel = true);

struct CurveRow {
    long long n = 0;
    double a = 0.0, b = 0.0;
    double x_star = 0.0, y_star = 0.0;
    double value = 0.0;
    double delta = 0.0;
};

// Tuned marginal parameters for a given task count (published presets;
// nearest listed n when not listed exactly).
void preset_ab(long long n, double* a, double* b);

// One maximize_phi row per task count, at the preset (a,b).
std::vector<CurveRow> ratio_curve(const std::vector<long long>& n_list,
                                  int runs, std::uint64_t seed,
                                  bool parallel = true);

// CSV with columns n,a,b,x_star,y_star,value,delta (the ratio-vs-n and
// parameter-vs-n data series). Throws std::runtime_error on unwritable path.
void export_ratio_curve(const std::vector<long long>& n_list,
                        const std::string& out_path, int runs,
                        std::uint64_t seed, bool parallel = true);

} // namespace copsched
