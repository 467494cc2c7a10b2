#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cylkam/diagnostics.hpp"
#include "support/test_helpers.hpp"

using namespace cylkam;
using testutil::default_grid;

namespace {

ManufacturedPair scaled_pair(double eps, const GridSpec& grid, const Interval& working) {
    const GridSpec hgrid(grid.nx, grid.ny, working.widened(0.2));
    const VectorFunction h_gen(
        CylinderFunction::fit([eps](double x, double) { return eps * std::sin(two_pi * x); },
                              hgrid),
        CylinderFunction::fit([eps](double x, double) { return eps * std::cos(two_pi * x); },
                              hgrid));
    return manufacture_commuting_pair(h_gen, golden_mean(), grid, working);
}

} // namespace

TEST_CASE("commutator_residual: the linear pair commutes exactly") {
    const GridSpec grid = default_grid();
    const auto r = commutator_residual(make_twist(), make_translation(golden_mean()), grid);
    REQUIRE(r.direct <= 1e-12);
    REQUIRE(r.operator_norm <= 1e-12);
}

TEST_CASE("commutator_residual: manufactured pairs commute to grid accuracy") {
    const Interval working(-0.6, 0.6);
    const GridSpec grid(64, 32, working);
    const auto pair = scaled_pair(1e-3, grid, working);
    const GridSpec probe(64, 32, Interval(-0.45, 0.45));
    const auto r = commutator_residual(pair.F, pair.K, probe);
    REQUIRE(r.direct <= 1e-9);
}

TEST_CASE("commutator_residual: direct and operator views agree in order") {
    // inject a perturbation defect well above the pair's intrinsic quadratic floor so
    // that both views measure the same commutation failure
    const Interval working(-0.6, 0.6);
    const GridSpec grid(64, 32, working);
    const auto pair = scaled_pair(1e-3, grid, working);
    const double defect = 1e-4;
    const CylinderFunction bump = CylinderFunction::fit(
        [defect](double x, double) { return defect * std::sin(two_pi * x); }, grid);
    const CylinderMap K_off{pair.K.base,
                            VectorFunction(pair.K.pert->c1, add(pair.K.pert->c2, bump))};
    const GridSpec probe(64, 32, Interval(-0.45, 0.45));
    const auto r = commutator_residual(pair.F, K_off, probe);
    REQUIRE(r.direct > 1e-13);
    REQUIRE(r.operator_norm > 1e-13);
    const double ratio = r.direct / r.operator_norm;
    REQUIRE(ratio >= 1.0 / 20.0);
    REQUIRE(ratio <= 20.0);
}

TEST_CASE("commutator_residual: quadratic scaling of the operator view") {
    const Interval working(-0.6, 0.6);
    const GridSpec grid(64, 32, working);
    std::vector<double> eps = {1e-2, 3e-3, 1e-3};
    std::vector<double> lnorm;
    for (double e : eps) {
        const auto pair = scaled_pair(e, grid, working);
        const GridSpec probe(64, 32, Interval(-0.45, 0.45));
        const auto r = commutator_residual(pair.F, pair.K, probe);
        lnorm.push_back(r.operator_norm);
    }
    // least-squares slope of log ||L|| vs log eps
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double lx = std::log(eps[i]), ly = std::log(lnorm[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(eps.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    REQUIRE(slope >= 1.8);
}

TEST_CASE("k2_average_probe: exact translation has zero average") {
    const GridSpec grid = default_grid();
    const auto p = k2_average_probe(make_twist(), make_translation(0.3), grid);
    REQUIRE(p.value == 0.0);
    REQUIRE(p.ratio == 0.0);
}

TEST_CASE("k2_average_probe: manufactured pair within the commutativity bound") {
    const Interval working(-0.6, 0.6);
    const GridSpec grid(64, 32, working);
    const auto pair = scaled_pair(1e-3, grid, working);
    const auto p = k2_average_probe(pair.F, pair.K, grid);
    REQUIRE(p.ratio <= 1.0 + 1e-6);
}

TEST_CASE("k2_average_probe: non-commuting pair reports raw values") {
    const GridSpec grid = default_grid();
    const double eps = 1e-3;
    const CylinderMap K{TranslationBase{0.3},
                        VectorFunction(CylinderFunction::zero(grid),
                                       CylinderFunction::fit(
                                           [eps](double, double) { return eps; }, grid))};
    const auto p = k2_average_probe(make_twist(), K, grid);
    REQUIRE(p.value == Catch::Approx(eps).margin(1e-12));
}

TEST_CASE("intersection_check: pure twist passes by the zero convention") {
    const GridSpec grid = default_grid();
    REQUIRE(intersection_check(make_twist(), grid).pass);
}

TEST_CASE("intersection_check: constant-sign vertical drift fails") {
    const GridSpec grid = default_grid();
    const CylinderMap F{TwistBase{},
                        VectorFunction(CylinderFunction::zero(grid),
                                       CylinderFunction::fit(
                                           [](double, double) { return 1e-3; }, grid))};
    REQUIRE_FALSE(intersection_check(F, grid).pass);
}

TEST_CASE("intersection_check: standard family passes with positive margin") {
    const GridSpec grid = default_grid();
    const auto s = standard_family(0.1, 3, 2, grid);
    const auto r = intersection_check(s, grid);
    REQUIRE(r.pass);
    REQUIRE(r.margin > 0.0);
}

TEST_CASE("intersection_check: pass status invariant under small conjugation") {
    const Interval working(-0.6, 0.6);
    const GridSpec grid(64, 32, working);
    const GridSpec hgrid(64, 32, Interval(-0.8, 0.8));
    const auto s = standard_family(0.1, 3, 2, grid);
    const VectorFunction gen(
        CylinderFunction::fit([](double x, double) { return 0.04 / two_pi * std::sin(two_pi * x); },
                              hgrid),
        CylinderFunction::fit([](double x, double y) { return 0.04 / two_pi * std::cos(two_pi * x) * (1.0 + 0.1 * y); },
                              hgrid));
    const auto H = make_conjugacy(gen);
    const auto conj = conjugate(s, H, grid, Interval(-0.45, 0.45));
    const GridSpec probe(64, 32, Interval(-0.45, 0.45));
    REQUIRE(intersection_check(s, grid).pass == intersection_check(conj, probe).pass);
}

TEST_CASE("semiconjugacy_residual: projection against a vertical perturbation") {
    const GridSpec grid = default_grid();
    const double alpha = golden_mean();
    const CylinderMap K{TranslationBase{alpha},
                        VectorFunction(CylinderFunction::zero(grid),
                                       CylinderFunction::fit(
                                           [](double x, double) {
                                               return 0.05 * std::sin(two_pi * x);
                                           },
                                           grid))};
    const GridSpec wgrid(64, 32, Interval(-2.0, 2.0)); // wide domain for the image
    const SemiConjugacy W(CylinderFunction::zero(wgrid), 1.5);
    const GridSpec probe(64, 32, Interval(-0.8, 0.8));
    const auto r = semiconjugacy_residual(W, K, alpha, probe);
    REQUIRE(r.residual <= 1e-12);
    REQUIRE(r.lipschitz_slope == 0.0);
}

TEST_CASE("semiconjugacy_residual: exact translation with trivial projection") {
    const GridSpec wgrid(64, 32, Interval(-1.0, 1.0));
    const SemiConjugacy W(CylinderFunction::zero(wgrid), 1.5);
    const GridSpec probe(64, 32, Interval(-0.9, 0.9));
    const auto r = semiconjugacy_residual(W, make_translation(0.37), 0.37, probe);
    REQUIRE(r.residual <= 1e-13);
}

TEST_CASE("semiconjugacy_residual: manufactured W_true") {
    const Interval working(-0.6, 0.6);
    const GridSpec grid(64, 32, working);
    const auto pair = scaled_pair(1e-3, grid, working);
    const GridSpec probe(64, 32, Interval(-0.45, 0.45));
    const auto r = semiconjugacy_residual(pair.W_true, pair.K, golden_mean(), probe);
    REQUIRE(r.residual <= 1e-9);
}

TEST_CASE("phase_portrait: twist keeps horizontal circles") {
    const auto p = phase_portrait(make_twist(), {{0.0, 0.5}}, 100);
    REQUIRE(p.points.size() == 100);
    for (const auto& pt : p.points) REQUIRE(pt.y == 0.5);
    REQUIRE(p.escaped_seeds.empty());
}

TEST_CASE("phase_portrait: translation orbits follow n alpha") {
    const double alpha = 0.3;
    const auto p = phase_portrait(make_translation(alpha), {{0.1, -0.2}}, 50);
    for (const auto& pt : p.points) {
        const double want = 0.1 + pt.n * alpha;
        REQUIRE(circle_distance(pt.x - want) <= 1e-12);
        REQUIRE(pt.y == -0.2);
    }
}

TEST_CASE("phase_portrait: deterministic across runs and escape flagging") {
    const GridSpec grid = default_grid();
    const auto s = standard_family(0.95, 3, 2, grid);
    std::vector<Point> seeds;
    for (int i = 0; i < 10; ++i) seeds.push_back({i / 10.0, -0.5 + i / 10.0});
    const auto a = phase_portrait(s, seeds, 500);
    const auto b = phase_portrait(s, seeds, 500);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        REQUIRE(a.points[i].x == b.points[i].x);
        REQUIRE(a.points[i].y == b.points[i].y);
    }
    // a seed outside the perturbation domain escapes immediately and is flagged
    const auto c = phase_portrait(s, {{0.0, 5.0}}, 10);
    REQUIRE(c.points.empty());
    REQUIRE(c.escaped_seeds == std::vector<int>{0});
}

TEST_CASE("counterexample_2d: spot values and positive gap") {
    const auto r = counterexample_2d(0.05, 100000);
    REQUIRE(r.h_at_zero == Catch::Approx(-2.0).margin(1e-12));
    REQUIRE(r.h_at_half == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(r.min_gap > 0.0);
    // g(0) = sin(pi) - 0 = 0
    const double g0 = std::sin(two_pi * (0.5 + 0.05 * std::sin(0.0))) - std::sin(0.0);
    REQUIRE(std::abs(g0) <= 1e-12);
    REQUIRE_THROWS_AS(counterexample_2d(0.2, 100), ContractError); // delta >= 1/(2 pi)
}
