#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cylkam/corpus.hpp"
#include "cylkam/maps.hpp"
#include "support/test_helpers.hpp"

using namespace cylkam;
using testutil::default_grid;

namespace {

double map_distance(const CylinderMap& a, const CylinderMap& b, const Interval& iv,
                    int nx = 128, int ny = 33) {
    double worst = 0.0;
    for (int k = 0; k < ny; ++k) {
        const double y = iv.lo + iv.width() * k / (ny - 1);
        for (int n = 0; n < nx; ++n) {
            const double x = static_cast<double>(n) / nx;
            const Point pa = a.apply(x, y);
            const Point pb = b.apply(x, y);
            worst = std::max(worst,
                             std::max(circle_distance(pa.x - pb.x), std::abs(pa.y - pb.y)));
        }
    }
    return worst;
}

VectorFunction small_h(const GridSpec& grid, double eps) {
    return VectorFunction(
        CylinderFunction::fit([eps](double x, double) { return eps * std::sin(two_pi * x); }, grid),
        CylinderFunction::fit([eps](double x, double) { return eps * std::cos(two_pi * x); }, grid));
}

} // namespace

TEST_CASE("standard_family: epsilon = 0 is the pure twist") {
    const auto s = standard_family(0.0, 3, 2, default_grid());
    REQUIRE(std::holds_alternative<TwistBase>(s.base));
    REQUIRE(s.pert->c1.coeff_abs_max() == 0.0);
    REQUIRE(s.pert->c2.coeff_abs_max() == 0.0);
}

TEST_CASE("standard_family: closed-form amplitude for q=3, r=2, eps=0.1") {
    const auto s = standard_family(0.1, 3, 2, default_grid());
    const double want = 0.1 / std::pow(6.0 * pi, 2.0);
    REQUIRE(c0_norm(s.pert->c1) == Catch::Approx(want).margin(1e-8));
}

TEST_CASE("standard_family: commutes with T_{1/3} for q=3") {
    const GridSpec grid = default_grid();
    const auto s = standard_family(0.1, 3, 2, grid);
    const auto t = make_translation(1.0 / 3.0);
    double worst = 0.0;
    for (int k = 0; k <= 16; ++k) {
        const double y = -0.9 + 1.8 * k / 16.0;
        for (int n = 0; n < 128; ++n) {
            const double x = n / 128.0;
            const Point a = s.apply(t.apply(x, y).x, y);
            const Point b = t.apply(s.apply(x, y).x, s.apply(x, y).y);
            worst = std::max(worst, std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)));
        }
    }
    REQUIRE(worst <= 1e-12);
}

TEST_CASE("compose: identity is neutral") {
    const GridSpec grid = default_grid();
    const auto f = standard_family(0.2, 2, 1, grid);
    const auto c = compose(make_identity(), f, grid, Interval(-0.8, 0.8));
    const auto f_ref = CylinderMap{f.base, f.pert};
    REQUIRE(map_distance(c, f_ref, Interval(-0.8, 0.8)) <= 1e-12);
}

TEST_CASE("compose: translations add exactly with zero perturbation") {
    const GridSpec grid = default_grid();
    const auto c = compose(make_translation(0.2), make_translation(0.3), grid, grid.interval);
    REQUIRE(std::holds_alternative<TranslationBase>(c.base));
    REQUIRE(std::get<TranslationBase>(c.base).alpha == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(c.pert->c1.coeff_abs_max() == 0.0);
    REQUIRE(c.pert->c2.coeff_abs_max() == 0.0);
}

TEST_CASE("compose: twist squared against the declared-base closed form") {
    const GridSpec grid = default_grid();
    const auto c = compose(make_twist(), make_twist(), grid, grid.interval, MapBase(TwistBase{}));
    // (x+2y, y) minus declared (x+y, y) leaves pert (y, 0)
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double x = ux(rng), y = uy(rng);
        REQUIRE(c.pert->c1.evaluate(x, y) == Catch::Approx(y).margin(1e-10));
        REQUIRE(std::abs(c.pert->c2.evaluate(x, y)) <= 1e-10);
    }
}

TEST_CASE("compose: ambiguous base must be declared") {
    const GridSpec grid = default_grid();
    REQUIRE_THROWS_AS(compose(make_twist(), make_translation(0.1), grid, grid.interval),
                      ContractError);
}

TEST_CASE("compose: escape of the outer domain raises a range error") {
    const GridSpec grid = default_grid();
    const GridSpec tight(64, 32, Interval(-0.05, 0.05));
    // g's pert lives on a tight interval; f shifts y by 0.2 outside it
    const auto g = CylinderMap{TwistBase{}, VectorFunction::zero(tight)};
    const auto f = CylinderMap{
        IdentityBase{},
        VectorFunction(CylinderFunction::zero(tight),
                       CylinderFunction::fit([](double, double) { return 0.2; }, tight))};
    REQUIRE_THROWS_AS(
        compose(g, f, grid, Interval(-0.05, 0.05), MapBase(TwistBase{})), DomainError);
}

TEST_CASE("invert_near_identity: zero generator inverts to the identity") {
    const GridSpec grid = default_grid();
    const auto H = make_conjugacy(VectorFunction::zero(grid));
    const auto inv = invert_near_identity(H, grid, Interval(-0.5, 0.5));
    REQUIRE(inv.gen.c1.coeff_abs_max() == 0.0);
    REQUIRE(inv.gen.c2.coeff_abs_max() == 0.0);
}

TEST_CASE("invert_near_identity: constant shift inverts to its negative") {
    const GridSpec grid = default_grid();
    const double c = 0.1;
    const VectorFunction gen(
        CylinderFunction::fit([c](double, double) { return c; }, grid),
        CylinderFunction::zero(grid));
    const auto inv = invert_near_identity(make_conjugacy(gen), grid, Interval(-0.5, 0.5));
    REQUIRE(inv.gen.c1.evaluate(0.3, 0.1) == Catch::Approx(-c).margin(1e-12));
    REQUIRE(c0_norm(inv.gen.c2) <= 1e-12);
}

TEST_CASE("invert_near_identity: trig generator residual below 1e-10") {
    const GridSpec grid = default_grid();
    const auto gen = small_h(grid, 0.1 / two_pi); // ||h||_1 = 0.1
    const auto H = make_conjugacy(gen);
    const auto inv = invert_near_identity(H, grid, Interval(-0.5, 0.5));
    // residual is enforced inside; double-check both orders on random points
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-0.4, 0.4);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = ux(rng), y = uy(rng);
        const Point z = inv.apply(x, y);
        const Point w = H.apply(z.x, z.y);
        worst = std::max(worst, std::max(circle_distance(w.x - x), std::abs(w.y - y)));
        const Point a = H.apply(x, y);
        const Point b = inv.apply(a.x, a.y);
        worst = std::max(worst, std::max(circle_distance(b.x - x), std::abs(b.y - y)));
    }
    REQUIRE(worst <= 1e-10);
    // Proposition-style bound: ||H^{-1} - id||_0 <= ||h||_0
    REQUIRE(c0_norm(inv.gen) <= c0_norm(gen) + 1e-12);
}

TEST_CASE("invert_near_identity: contract violation reported") {
    const GridSpec grid = default_grid();
    const auto gen = small_h(grid, 0.2 / two_pi); // c1 norm 0.2 > margin 0.1 below
    const auto H = make_conjugacy(gen);
    REQUIRE_THROWS_AS(invert_near_identity(H, grid, Interval(-0.9, 0.9)), ContractError);
}

TEST_CASE("conjugate: identity conjugacy leaves the map unchanged") {
    const GridSpec grid = default_grid();
    const auto F = standard_family(0.1, 2, 1, grid);
    const auto H = make_conjugacy(VectorFunction::zero(grid));
    const auto G = conjugate(F, H, grid, Interval(-0.5, 0.5));
    REQUIRE(map_distance(F, G, Interval(-0.5, 0.5)) <= 1e-12);
}

TEST_CASE("conjugate: y-only generator commutes with a pure translation") {
    const GridSpec grid = default_grid();
    const VectorFunction gen(
        CylinderFunction::fit([](double, double y) { return 0.05 * y; }, grid),
        CylinderFunction::fit([](double, double y) { return 0.03 * std::sin(y); }, grid));
    const auto H = make_conjugacy(gen);
    const auto G = conjugate(make_translation(0.3), H, grid, Interval(-0.5, 0.5));
    REQUIRE(std::holds_alternative<TranslationBase>(G.base));
    REQUIRE(c0_norm(G.pert->c2) <= 1e-10);
    REQUIRE(c0_norm(G.pert->c1) <= 1e-10);
}

TEST_CASE("conjugate: true conjugacy recovers zero perturbation") {
    const GridSpec hgrid(64, 32, Interval(-0.8, 0.8));
    const GridSpec grid(64, 32, Interval(-0.6, 0.6));
    const auto h_gen = small_h(hgrid, 1e-2 / two_pi);
    const auto pair =
        manufacture_commuting_pair(h_gen, golden_mean(), grid, Interval(-0.6, 0.6));
    const auto back = conjugate(pair.F, pair.H_true, grid, Interval(-0.45, 0.45));
    REQUIRE(c0_norm(*back.pert) <= 1e-8);
}

TEST_CASE("compose is associative up to refit error") {
    const GridSpec grid = default_grid();
    auto tiny_map = [&](double amp, int mode) {
        return CylinderMap{
            IdentityBase{},
            VectorFunction(CylinderFunction::fit(
                               [amp, mode](double x, double y) {
                                   return amp * std::sin(two_pi * mode * x) * (1.0 + 0.2 * y);
                               },
                               grid),
                           CylinderFunction::fit(
                               [amp, mode](double x, double) {
                                   return amp * std::cos(two_pi * mode * x);
                               },
                               grid))};
    };
    const auto A = tiny_map(0.02, 1);
    const auto B = tiny_map(0.015, 2);
    const auto C = tiny_map(0.01, 3);
    const Interval inner(-0.7, 0.7);
    const Interval mid(-0.85, 0.85);
    const auto AB = compose(A, B, grid, mid, MapBase(IdentityBase{}));
    const auto BC = compose(B, C, grid, mid, MapBase(IdentityBase{}));
    const auto left = compose(AB, C, grid, inner, MapBase(IdentityBase{}));
    const auto right = compose(A, BC, grid, inner, MapBase(IdentityBase{}));
    REQUIRE(map_distance(left, right, inner) <= 1e-9);
}

TEST_CASE("reduce_by_frequency: identity frequency map is neutral") {
    const GridSpec grid = default_grid();
    const auto pert = VectorFunction(
        CylinderFunction::fit([](double x, double y) { return 0.1 * std::sin(two_pi * x) * y; },
                              grid),
        CylinderFunction::fit([](double x, double) { return 0.05 * std::cos(two_pi * x); }, grid));
    const CylinderMap F{FrequencyTwistBase{[](double y) { return y; }, [](double y) { return y; },
                                           "y", "y"},
                        pert};
    const auto K = make_translation(golden_mean());
    const auto [f2, k2] = reduce_by_frequency(F, K, grid);
    REQUIRE(std::holds_alternative<TwistBase>(f2.base));
    REQUIRE(testutil::max_difference(f2.pert->c1, pert.c1) <= 1e-12);
    REQUIRE(testutil::max_difference(f2.pert->c2, pert.c2) <= 1e-12);
    REQUIRE(c0_norm(*k2.pert) <= 1e-12);
}

TEST_CASE("reduce_by_frequency: omega = 2y with zero perturbation") {
    const GridSpec grid = default_grid();
    const CylinderMap F{FrequencyTwistBase{[](double y) { return 2.0 * y; },
                                           [](double y) { return 0.5 * y; }, "2*y", "y/2"},
                        VectorFunction::zero(grid)};
    const auto [f2, k2] = reduce_by_frequency(F, make_translation(0.3), grid);
    REQUIRE(f2.pert->grid().interval == Interval(-2.0, 2.0));
    REQUIRE(c0_norm(*f2.pert) <= 1e-12);
}

TEST_CASE("reduce_by_frequency: omega = 2y chain rule on f2") {
    const GridSpec grid = default_grid();
    const Sampler f2_src = [](double x, double y) {
        return 0.08 * std::sin(two_pi * x) * (1.0 + 0.3 * y);
    };
    const CylinderMap F{FrequencyTwistBase{[](double y) { return 2.0 * y; },
                                           [](double y) { return 0.5 * y; }, "2*y", "y/2"},
                        VectorFunction(CylinderFunction::zero(grid),
                                       CylinderFunction::fit(f2_src, grid))};
    const auto [f2, k2] = reduce_by_frequency(F, make_translation(0.3), grid);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double x = ux(rng), ytil = uy(rng);
        REQUIRE(f2.pert->c2.evaluate(x, ytil) ==
                Catch::Approx(2.0 * f2_src(x, ytil / 2.0)).margin(1e-10));
    }
}

TEST_CASE("reduce_by_frequency: non-monotone omega rejected") {
    const GridSpec grid = default_grid();
    const CylinderMap F{FrequencyTwistBase{[](double y) { return y * y; },
                                           [](double y) { return std::sqrt(std::abs(y)); }, "", ""},
                        VectorFunction::zero(grid)};
    REQUIRE_THROWS_AS(reduce_by_frequency(F, make_translation(0.3), grid), ContractError);
}

TEST_CASE("manufacture_commuting_pair: zero generator gives the linear pair") {
    const GridSpec hgrid(64, 32, Interval(-0.8, 0.8));
    const GridSpec grid(64, 32, Interval(-0.6, 0.6));
    const auto pair = manufacture_commuting_pair(VectorFunction::zero(hgrid), golden_mean(), grid,
                                                 Interval(-0.6, 0.6));
    REQUIRE(c0_norm(*pair.F.pert) <= 1e-13);
    REQUIRE(c0_norm(*pair.K.pert) <= 1e-13);
}

TEST_CASE("manufacture_commuting_pair: commutator residual at grid accuracy") {
    const GridSpec hgrid(64, 32, Interval(-0.8, 0.8));
    const GridSpec grid(64, 32, Interval(-0.6, 0.6));
    const auto h_gen = small_h(hgrid, 1e-3 / two_pi);
    const auto pair =
        manufacture_commuting_pair(h_gen, golden_mean(), grid, Interval(-0.6, 0.6));
    // direct commutator on an interior lattice
    double worst = 0.0;
    for (int k = 0; k <= 20; ++k) {
        const double y = -0.4 + 0.8 * k / 20.0;
        for (int n = 0; n < 64; ++n) {
            const double x = n / 64.0;
            const Point fk = pair.F.apply(pair.K.apply(x, y).x, pair.K.apply(x, y).y);
            const Point kf = pair.K.apply(pair.F.apply(x, y).x, pair.F.apply(x, y).y);
            worst = std::max(worst,
                             std::max(circle_distance(fk.x - kf.x), std::abs(fk.y - kf.y)));
        }
    }
    REQUIRE(worst <= 1e-9);
    REQUIRE(pair.W_true.lipschitz > 1.0);
}

TEST_CASE("manufacture_commuting_pair: norm guard") {
    const GridSpec hgrid(64, 32, Interval(-0.8, 0.8));
    const GridSpec grid(64, 32, Interval(-0.5, 0.5));
    const auto h_gen = small_h(hgrid, 0.2 / two_pi); // ||h||_1 = 0.2 > 1/8
    REQUIRE_THROWS_AS(
        manufacture_commuting_pair(h_gen, golden_mean(), grid, Interval(-0.5, 0.5)),
        ContractError);
}
