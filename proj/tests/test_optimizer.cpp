// Global phi maximization: cell decomposition, the deterministic multistart
// search, closed-form interior critical points, (a,b) tuning, the preset
// table, and the ratio-vs-n curve (including its CSV export).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "copsched/copula.hpp"
#include "copsched/marginal.hpp"
#include "copsched/optimizer.hpp"
#include "copsched/ratio.hpp"
#include "oracles.hpp"

using namespace copsched;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Copula ind_default() { return make_independent(1, make_piecewise(1.715, 0.76)); }

// The knot abscissae that should bound every search cell, in axis order.
std::vector<double> expected_knots(double a) {
    return {0.0, 1.0 / a, 2.0 / (a + 1.0), 1.0, (a + 1.0) / 2.0, a, kInf};
}

double mid_probe(double lo, double hi) {
    return std::isinf(hi) ? lo + 1.0 : 0.5 * (lo + hi);
}

// Central finite difference of phi along one coordinate.
double fd_partial(const Copula& c, double x, double y, bool wrt_x, double h) {
    const double fp = wrt_x ? eval_phi(c, x + h, y) : eval_phi(c, x, y + h);
    const double fm = wrt_x ? eval_phi(c, x - h, y) : eval_phi(c, x, y - h);
    return (fp - fm) / (2.0 * h);
}

} // namespace

TEST_CASE("make_cells tiles (0,inf)^2 with knot-aligned cells") {
    for (bool clayton : {false, true}) {
        const Copula c = clayton ? make_clayton(2, make_piecewise(2.2468, 0.7607))
                                 : ind_default();
        const std::vector<SearchCell> cells = make_cells(c);
        REQUIRE(cells.size() == 36);

        const std::vector<double> ax = expected_knots(c.marginal.a);
        for (std::size_t i = 0; i + 1 < ax.size(); ++i) {
            for (std::size_t j = 0; j + 1 < ax.size(); ++j) {
                const SearchCell& cell = cells[i * 6 + j];
                CHECK(cell.x_lo == ax[i]);
                CHECK(cell.x_hi == ax[i + 1]);
                CHECK(cell.y_lo == ax[j]);
                CHECK(cell.y_hi == ax[j + 1]);
            }
        }
    }
}

TEST_CASE("cell side flags describe the xy=1 curve and the H > 0 region") {
    for (bool clayton : {false, true}) {
        const Copula c = clayton ? make_clayton(2, make_piecewise(2.2468, 0.7607))
                                 : ind_default();
        for (const SearchCell& cell : make_cells(c)) {
            CAPTURE(cell.x_lo);
            CAPTURE(cell.y_lo);

            // Constraint side: sign of xy - 1 over the cell, 0 when it flips.
            const double lo_prod = cell.x_lo * cell.y_lo;
            const double hi_prod = cell.x_hi * cell.y_hi; // inf when x_hi = inf
            if (cell.constraint_side == +1) {
                CHECK(lo_prod >= 1.0);
            } else if (cell.constraint_side == -1) {
                CHECK(hi_prod <= 1.0);
            } else {
                CHECK(lo_prod < 1.0);
                CHECK(hi_prod > 1.0);
            }

            // Copula side: H at an interior probe agrees with the flag; a 0
            // flag means the positive-part boundary separates the corners.
            const double px = mid_probe(cell.x_lo, cell.x_hi);
            const double py = mid_probe(cell.y_lo, cell.y_hi);
            if (cell.copula_side == +1) {
                CHECK(eval_H(c, px, py) > 0.0);
            } else if (cell.copula_side == -1) {
                CHECK(eval_H(c, px, py) == 0.0);
            } else {
                CHECK(eval_H(c, cell.x_lo, cell.y_lo) == 0.0);
                const double qx = std::isinf(cell.x_hi) ? 1e9 : cell.x_hi;
                const double qy = std::isinf(cell.y_hi) ? 1e9 : cell.y_hi;
                CHECK(eval_H(c, qx, qy) > 0.0);
            }
        }
    }
}

TEST_CASE("independent cells never need a copula boundary search") {
    int positive = 0;
    for (const SearchCell& cell : make_cells(ind_default())) {
        CHECK(cell.copula_side != 0); // F(x)F(y) has no crossing inside a cell
        if (cell.copula_side == +1) ++positive;
    }
    // H > 0 exactly when both coordinates can exceed 1/a: 5 of 6 bands each.
    CHECK(positive == 25);
}

TEST_CASE("maximize_phi reproduces the independent-regime optimum") {
    const RatioReport rep = maximize_phi(ind_default(), 6, 123);

    CHECK(std::abs(rep.max_value - 1.5860582220359943873) < 1e-9);
    CHECK(std::abs(rep.argmax_x - 1.3575) < 1e-5);
    CHECK(std::abs(rep.argmax_y - 1.5174263351749539595) < 1e-5);
    CHECK(rep.runs == 6);
    CHECK(rep.spread_delta >= 0.0);
    CHECK(rep.spread_delta <= 1e-8);
    CHECK(rep.per_cell.size() == 36);
    CHECK(rep.wall_seconds >= 0.0);

    // The global maximum dominates every per-cell local maximum, and each
    // recorded cell value is the objective at the recorded point.
    const Copula c = ind_default();
    for (const CellResult& cr : rep.per_cell) {
        CHECK(rep.max_value >= cr.value - 1e-12);
        CHECK(std::abs(cr.value - eval_phi(c, cr.x, cr.y)) < 1e-9);
        if (!std::isinf(cr.x)) {
            CHECK(cr.x >= cr.cell.x_lo - 1e-12);
            CHECK(cr.x <= (std::isinf(cr.cell.x_hi) ? kInf : cr.cell.x_hi + 1e-12));
        }
    }
}

TEST_CASE("maximize_phi reproduces the two-task negative-dependence optimum") {
    const Copula c2 = make_clayton(2, make_piecewise(2.2468, 0.7607));
    const RatioReport rep = maximize_phi(c2, 6, 123);
    CHECK(std::abs(rep.max_value - 1.506771096398094892) < 1e-9);
    CHECK(std::abs(rep.argmax_x - 1.6234) < 1e-4);
    CHECK(std::abs(rep.argmax_y - 1.9313955648638659603) < 1e-4);
    CHECK(rep.spread_delta <= 1e-8);
}

TEST_CASE("maximize_phi at the four-task preset") {
    const Copula c4 = make_clayton(4, make_piecewise(1.8442, 0.7453));
    const RatioReport rep = maximize_phi(c4, 4, 7);
    CHECK(std::abs(rep.max_value - 1.5559952304614046) < 1e-8);
}

TEST_CASE("maximize_phi is deterministic and thread-count independent") {
    const Copula c = make_clayton(2, make_piecewise(2.2468, 0.7607));
    const RatioReport r1 = maximize_phi(c, 3, 99, true);
    const RatioReport r2 = maximize_phi(c, 3, 99, true);
    const RatioReport r3 = maximize_phi(c, 3, 99, false); // serial path

    for (const RatioReport* r : {&r2, &r3}) {
        CHECK(r->max_value == r1.max_value);
        CHECK(r->argmax_x == r1.argmax_x);
        CHECK(r->argmax_y == r1.argmax_y);
        CHECK(r->spread_delta == r1.spread_delta);
        REQUIRE(r->per_cell.size() == r1.per_cell.size());
        for (std::size_t i = 0; i < r1.per_cell.size(); ++i) {
            CHECK(r->per_cell[i].value == r1.per_cell[i].value);
            CHECK(r->per_cell[i].x == r1.per_cell[i].x);
            CHECK(r->per_cell[i].y == r1.per_cell[i].y);
        }
    }

    // A different seed may move the random starts but not the optimum.
    const RatioReport r4 = maximize_phi(c, 3, 100);
    CHECK(std::abs(r4.max_value - r1.max_value) < 1e-9);

    CHECK_THROWS_AS(maximize_phi(c, 0, 1), std::domain_error);
}

TEST_CASE("reported maximum dominates phi on a dense grid") {
    const Copula c = ind_default();
    const double top = maximize_phi(c, 4, 11).max_value + 1e-9;

    const int n = 700;
    const double lo = std::log(0.02), hi = std::log(50.0);
    for (int i = 0; i <= n; ++i) {
        const double x = std::exp(lo + (hi - lo) * i / n);
        for (int j = 0; j <= n; ++j) {
            const double y = std::exp(lo + (hi - lo) * j / n);
            if (!(eval_phi(c, x, y) <= top)) {
                CAPTURE(x);
                CAPTURE(y);
                REQUIRE(eval_phi(c, x, y) <= top);
            }
        }
    }
    // Boundary rays: y = 0 and either coordinate at infinity.
    for (double t : {0.05, 0.3, 1.0, 1.3575, 2.0, 17.0}) {
        CHECK(eval_phi(c, t, 0.0) <= top);
        CHECK(eval_phi(c, t, kInf) <= top);
        CHECK(eval_phi(c, kInf, t) <= top);
    }
    CHECK(eval_phi(c, kInf, kInf) <= top);
}

TEST_CASE("argmax candidates are stationary where they sit in a cell interior") {
    const Copula c = ind_default();
    const double h = 1e-6;

    // Fully interior stationary points: both partials vanish.
    const double pts2d[][2] = {
        {1.2027121359278089907, 1.4503664411593589854},
        {0.98503501986004557612, 1.3364151839334675865},
    };
    for (const auto& p : pts2d) {
        CHECK(std::abs(fd_partial(c, p[0], p[1], true, h)) < 1e-5);
        CHECK(std::abs(fd_partial(c, p[0], p[1], false, h)) < 1e-5);
    }

    // Edge-pinned rows: only the free coordinate is stationary.
    CHECK(std::abs(fd_partial(c, 1.715, 1.6490451895043731778, false, h)) < 1e-5);
    CHECK(std::abs(fd_partial(c, 1.3575, 1.5174263351749539595, false, h)) < 1e-5);
    CHECK(std::abs(fd_partial(c, 608.0 / 609.0, 1.3575, true, h)) < 1e-5);
}

TEST_CASE("critical_points recovers the five closed-form local maxima") {
    const Copula c = ind_default();
    const double a = 1.715;
    const double half = (a + 1.0) / 2.0;
    const double inv = 2.0 / (a + 1.0);

    struct Row {
        SearchCell cell;
        double x, y, value;
    };
    const Row rows[] = {
        {{a, a, half, a, 0, 0}, 1.715, 1.6490451895043731778, 1.5860106835866578831},
        {{half, half, half, a, 0, 0}, 1.3575, 1.5174263351749539595, 1.5860582220359943873},
        {{1.0, half, half, a, 0, 0},
         1.2027121359278089907, 1.4503664411593589854, 1.5853196391586865997},
        {{inv, 1.0, half, half, 0, 0}, 608.0 / 609.0, 1.3575, 1.5858014952153110048},
        {{inv, 1.0, 1.0, half, 0, 0},
         0.98503501986004557612, 1.3364151839334675865, 1.5860233723582756213},
    };
    for (const Row& row : rows) {
        CAPTURE(row.x);
        const std::vector<CriticalPoint> pts = critical_points(c, row.cell);
        REQUIRE(!pts.empty());
        // A cell crossed by xy = 1 may also carry the reciprocal-symmetric
        // mirror of the listed point (same value, other branch), so locate
        // the listed point rather than assuming it sorts first.
        const CriticalPoint* best = &pts[0];
        for (const CriticalPoint& p : pts)
            if (std::abs(p.x - row.x) + std::abs(p.y - row.y) <
                std::abs(best->x - row.x) + std::abs(best->y - row.y))
                best = &p;
        CHECK(std::abs(best->x - row.x) < 1e-7);
        CHECK(std::abs(best->y - row.y) < 1e-7);
        CHECK(std::abs(best->value - row.value) < 1e-9);
        CHECK(pts[0].value >= best->value - 1e-12);
        // Sorted by decreasing value, every point inside the cell, value
        // consistent with a direct evaluation.
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i > 0) CHECK(pts[i].value <= pts[i - 1].value + 1e-15);
            CHECK(pts[i].x >= row.cell.x_lo - 1e-12);
            CHECK(pts[i].x <= row.cell.x_hi + 1e-12);
            CHECK(pts[i].y >= row.cell.y_lo - 1e-12);
            CHECK(pts[i].y <= row.cell.y_hi + 1e-12);
            CHECK(std::abs(pts[i].value - eval_phi(c, pts[i].x, pts[i].y)) < 1e-12);
        }
    }
}

TEST_CASE("critical_points: sub-optimal cell, empty cell, and guards") {
    const Copula c = ind_default();
    const double a = 1.715;
    const double half = (a + 1.0) / 2.0;
    const double inv = 2.0 / (a + 1.0);

    // Both coordinates in the top band: the interior stationary point stays
    // strictly below the global maximum.
    const SearchCell both_high{half, a, half, a, 0, 0};
    const std::vector<CriticalPoint> hi = critical_points(c, both_high);
    REQUIRE(!hi.empty());
    CHECK(std::abs(hi[0].x - 1.5419412254952502714) < 1e-7);
    CHECK(std::abs(hi[0].y - 1.5860038471424513203) < 1e-7);
    CHECK(std::abs(hi[0].value - 1.584357925528627033) < 1e-9);
    CHECK(hi[0].value < 1.585);

    // x above 1, y below 1: no interior stationary point at all.
    const SearchCell empty_cell{half, a, inv, 1.0, 0, 0};
    CHECK(critical_points(c, empty_cell).empty());

    const SearchCell unit{1.0, half, half, a, 0, 0};
    CHECK_THROWS_AS(
        critical_points(make_clayton(2, make_piecewise(2.2468, 0.7607)), unit),
        std::domain_error);
    CHECK_THROWS_AS(critical_points(make_independent(1, make_transcendental()), unit),
                    std::domain_error);
    const SearchCell inf_cell{a, kInf, half, a, 0, 0};
    CHECK_THROWS_AS(critical_points(c, inf_cell), std::domain_error);
    const SearchCell zero_lo{0.0, 1.0, half, a, 0, 0};
    CHECK_THROWS_AS(critical_points(c, zero_lo), std::domain_error);
}

TEST_CASE("tune_ab lands near the published independent-regime parameters") {
    const GridRange a_grid{1.70, 1.73, 2};
    const GridRange b_grid{0.75, 0.77, 2};
    const TuneResult t = tune_ab(1, a_grid, b_grid, 2, 5);

    CHECK(t.a > 1.0);
    CHECK(t.a <= 3.0);
    CHECK(t.b > 0.5);
    CHECK(t.b < 1.0);
    // The four-decimal published parameters are themselves rounded, so the
    // refinement may dip slightly below their objective — but never below
    // the certified floor, and it must improve on a detuned marginal.
    CHECK(t.report.max_value >= 1.5852);
    CHECK(t.report.max_value <= 1.58607);
    CHECK(t.report.max_value <=
          maximize_phi(make_independent(1, make_piecewise(1.70, 0.75)), 2, 5).max_value);

    const TuneResult again = tune_ab(1, a_grid, b_grid, 2, 5);
    CHECK(again.a == t.a);
    CHECK(again.b == t.b);
    CHECK(again.report.max_value == t.report.max_value);

    CHECK_THROWS_AS(tune_ab(1, GridRange{0.9, 2.0, 2}, b_grid, 2, 5), std::domain_error);
    CHECK_THROWS_AS(tune_ab(1, GridRange{1.7, 3.2, 2}, b_grid, 2, 5), std::domain_error);
    CHECK_THROWS_AS(tune_ab(1, a_grid, GridRange{0.5, 0.8, 2}, 2, 5), std::domain_error);
    CHECK_THROWS_AS(tune_ab(1, a_grid, GridRange{0.7, 1.0, 2}, 2, 5), std::domain_error);
    CHECK_THROWS_AS(tune_ab(1, GridRange{1.8, 1.7, 2}, b_grid, 2, 5), std::domain_error);
    CHECK_THROWS_AS(tune_ab(1, a_grid, b_grid, 0, 5), std::domain_error);
}

TEST_CASE("preset_ab returns the published parameter table") {
    double a = 0.0, b = 0.0;
    preset_ab(2, &a, &b);
    CHECK(a == 2.2468);
    CHECK(b == 0.7607);
    preset_ab(4, &a, &b);
    CHECK(a == 1.8442);
    CHECK(b == 0.7453);
    preset_ab(1000, &a, &b);
    CHECK(a == 1.7153);
    CHECK(b == 0.7599);
    // Unlisted n falls back to the nearest listed count on a log scale.
    preset_ab(12, &a, &b);
    CHECK(a == 1.7530);
    CHECK(b == 0.7548);
    preset_ab(3000000, &a, &b);
    CHECK(a == 1.7149);

    CHECK_THROWS_AS(preset_ab(1, &a, &b), std::domain_error);
    CHECK_THROWS_AS(preset_ab(0, &a, &b), std::domain_error);
}

TEST_CASE("ratio_curve rows match the presets and the frozen ratios") {
    const std::vector<long long> ns{2, 3};
    const std::vector<CurveRow> rows = ratio_curve(ns, 3, 21);
    REQUIRE(rows.size() == 2);

    const double expect[] = {1.5067710963980944, 1.5412707360547943};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].n == ns[i]);
        double a = 0.0, b = 0.0;
        preset_ab(ns[i], &a, &b);
        CHECK(rows[i].a == a);
        CHECK(rows[i].b == b);
        CHECK(std::abs(rows[i].value - expect[i]) < 1e-6);
        CHECK(rows[i].delta >= 0.0);
        CHECK(rows[i].delta <= 1e-6);
        const Copula c = make_clayton(ns[i], make_piecewise(a, b));
        CHECK(std::abs(eval_phi(c, rows[i].x_star, rows[i].y_star) - rows[i].value) < 1e-9);
    }

    CHECK_THROWS_AS(ratio_curve({1}, 2, 21), std::domain_error);
}

TEST_CASE("export_ratio_curve writes a parseable CSV") {
    const std::string path = "curve_test_tmp.csv";
    const std::vector<long long> ns{2, 3};
    export_ratio_curve(ns, path, 3, 21);

    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "n,a,b,x_star,y_star,value,delta");

    const std::vector<CurveRow> rows = ratio_curve(ns, 3, 21);
    std::size_t i = 0;
    while (std::getline(in, line)) {
        REQUIRE(i < rows.size());
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 7);
        CHECK(std::stoll(fields[0]) == rows[i].n);
        CHECK(std::stod(fields[1]) == rows[i].a);
        CHECK(std::stod(fields[2]) == rows[i].b);
        // Full 17-significant-digit round trip of the data columns.
        CHECK(std::stod(fields[3]) == rows[i].x_star);
        CHECK(std::stod(fields[4]) == rows[i].y_star);
        CHECK(std::stod(fields[5]) == rows[i].value);
        CHECK(std::stod(fields[6]) == rows[i].delta);
        ++i;
    }
    CHECK(i == rows.size());
    std::remove(path.c_str());

    CHECK_THROWS_AS(export_ratio_curve(ns, "/nonexistent_dir_zz/x.csv", 2, 21),
                    std::runtime_error);
}
