#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <kdvlab/exact.hpp>

#include "oracles.hpp"

using namespace kdv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("soliton peak values", "[exact]") {
    // At the crest the squared secant is 1, so the bump is (k+2)/2 * c^2.
    CHECK(soliton(0.0, 0.0, SolitonParams{1, 1.0}) == 1.5);
    CHECK_THAT(soliton(0.0, 0.0, SolitonParams{2, 1.0}), WithinRel(std::sqrt(2.0), 1e-15));
    CHECK(soliton(0.0, 0.0, SolitonParams{1, 2.0}) == 6.0);
}

TEST_CASE("soliton translates with speed c^2", "[exact]") {
    const SolitonParams p{1, 1.3};
    for (double x : {-3.0, 0.7, 5.1}) {
        for (double t : {0.2, 1.0}) {
            CHECK_THAT(soliton(x, t, p),
                       WithinRel(soliton(x - p.c * p.c * t, 0.0, p), 1e-12));
        }
    }
    CHECK_THAT(soliton(2.0, 0.0, p), WithinRel(soliton(-2.0, 0.0, p), 1e-13));
}

TEST_CASE("soliton parameter validation", "[exact][errors]") {
    CHECK_THROWS_AS(soliton(0.0, 0.0, SolitonParams{3, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(soliton(0.0, 0.0, SolitonParams{1, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(soliton(0.0, 0.0, SolitonParams{1, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(soliton_residual(SolitonParams{}, 0.0, 0.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("soliton profile samples the closed form", "[exact]") {
    const Grid g = Grid::uniform(-10.0, 10.0, 64, BoundaryMode::Periodic);
    const SolitonParams p{2, 0.8};
    const GridFunction u = soliton_profile(g, p, 0.5);
    for (std::size_t j = 0; j < g.size(); ++j) REQUIRE(u[j] == soliton(g.x(j), 0.5, p));
}

TEST_CASE("soliton residual is at rounding level", "[exact][properties]") {
    for (int k : {1, 2}) {
        const SolitonParams p{k, 1.0};
        for (double x : {-5.0, -1.0, 0.0, 0.5, 2.0, 5.0}) {
            for (double t : {0.0, 0.5}) {
                CAPTURE(k, x, t);
                CHECK(std::abs(soliton_residual(p, x, t)) <= 1e-5);
            }
        }
        // A faster soliton stresses the transcription harder.
        const SolitonParams fast{k, 1.5};
        CHECK(std::abs(soliton_residual(fast, 0.3, 0.2)) <= 1e-4);
    }
}

TEST_CASE("tsutsumi parameter checks", "[exact][errors]") {
    CHECK_THROWS_AS(
        tsutsumi_data(Grid::uniform(-1.0, 1.0, 5, BoundaryMode::ZeroExtension),
                      TsutsumiParams{std::numeric_limits<double>::quiet_NaN(), 1.0}),
        std::invalid_argument);
    CHECK_THROWS_AS(delta_mass(TsutsumiParams{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("delta mass closed form", "[exact]") {
    CHECK(delta_mass(TsutsumiParams{-1.0, 1.0}) == 1.0);
    CHECK(delta_mass(TsutsumiParams{-2.0, 1.0}) == 1.0);
    CHECK(delta_mass(TsutsumiParams{-0.25, 0.25}) == 4.0);
    CHECK(delta_mass(TsutsumiParams{-1.0, -2.0}) == 4.0);
    CHECK(delta_mass(TsutsumiParams{-1.0, 3.0}) == -1.0);
}

TEST_CASE("tsutsumi data branches", "[exact]") {
    // Nodes at -2,-1.5,...,2; both sign branches and the node at zero.
    const Grid g(0.5, -2.0, 9, BoundaryMode::ZeroExtension);

    SECTION("degenerate upper branch of (-1, 1)") {
        const GridFunction u = tsutsumi_data(g, TsutsumiParams{-1.0, 1.0});
        CHECK_THAT(u[0], WithinRel(1.0 / (-3.0), 1e-15));   // x = -2: 1/(x-1)
        CHECK_THAT(u[2], WithinRel(1.0 / (-2.0), 1e-15));   // x = -1
        CHECK(u[4] == -0.5);                                 // node on x = 0
        CHECK(u[5] == 0.0);                                  // numerator c+eps = 0
        CHECK(u[8] == 0.0);
    }
    SECTION("generic pair (-2, 1)") {
        const GridFunction u = tsutsumi_data(g, TsutsumiParams{-2.0, 1.0});
        CHECK_THAT(u[2], WithinRel(1.0 / (-3.0), 1e-15));   // x = -1: 1/(x-2)
        CHECK_THAT(u[6], WithinRel(1.0 / 3.0, 1e-15));      // x = 1: 1/(x+2)
        CHECK(u[4] == 0.0);  // limits (c+eps)/c = 1/2 and 1/c = -1/2 average to 0
    }
    SECTION("denominator hitting a node is a domain error") {
        // c+eps = 1 makes the x > 0 branch singular at x = 1, which is a node.
        CHECK_THROWS_AS(tsutsumi_data(g, TsutsumiParams{-1.0, 2.0}), std::domain_error);
        // Positive c makes the x < 0 branch singular at x = -c.
        CHECK_THROWS_AS(tsutsumi_data(g, TsutsumiParams{2.0, 1.0}), std::domain_error);
    }
}

TEST_CASE("miura transform", "[exact]") {
    SECTION("constants map to their square") {
        const Grid g(0.5, -2.0, 12, BoundaryMode::Periodic);
        GridFunction u(g);
        for (std::size_t j = 0; j < u.size(); ++j) u[j] = -1.5;
        const GridFunction v = miura_transform(u);
        for (std::size_t j = 0; j < v.size(); ++j) CHECK(v[j] == 2.25);
    }
    SECTION("matches the defining stencil") {
        std::mt19937_64 rng(51);
        const Grid g(0.2, 0.0, 40, BoundaryMode::Periodic);
        const GridFunction u = oracle::random_grid_function(rng, g, 2.0);
        const GridFunction v = miura_transform(u);
        const GridFunction du = d0(u);
        for (std::size_t j = 0; j < v.size(); ++j)
            REQUIRE_THAT(v[j], WithinAbs(du[j] + u[j] * u[j], 1e-13));
    }
}
