#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace tclab;
using namespace tclab::testing;

TEST_SUITE_BEGIN("diffusion");

TEST_CASE("grid construction") {
    DiffusionModel model = make_diffusion(9);
    CHECK(model.grid(0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(model.grid(8) == doctest::Approx(0.9).epsilon(1e-14));
    CHECK_THROWS_AS(make_diffusion(2), BadParameters);
}

TEST_CASE("green kernel closed form") {
    // -(1/2) u'' = delta_{1/2} with Dirichlet ends gives u(1/2) = 1/2
    CHECK(bm_green(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bm_green(0.25, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    SplitMix64 rng(3);
    for (int i = 0; i < 50; ++i) {
        double x = rng.uniform01(), y = rng.uniform01();
        CHECK(bm_green(x, y) == bm_green(y, x));
        CHECK(bm_green(x, y) > 0.0);
    }
    CHECK_THROWS_AS(bm_green(0.0, 0.5), OutOfDomain);
    CHECK_THROWS_AS(bm_green(0.5, 1.0), OutOfDomain);
}

TEST_CASE("alpha-order kernel matches the killed-resolvent profile") {
    // closed form for R_alpha 1: (1 - cosh(s(x-1/2))/cosh(s/2))/alpha, s = sqrt(2 alpha)
    DiffusionModel model = make_diffusion(1000);
    const double alpha = 2.0;
    const double s = std::sqrt(2.0 * alpha);
    const double h = model.spacing();
    for (double x : {0.2, 0.5, 0.77}) {
        double quad = 0.0;
        for (int j = 0; j < model.grid_n; ++j) quad += h * bm_green_alpha(x, model.grid(j), alpha);
        double exact = (1.0 - std::cosh(s * (x - 0.5)) / std::cosh(s / 2.0)) / alpha;
        CHECK(std::abs(quad - exact) < 1e-5);
    }
    // alpha -> 0 recovers the green kernel
    CHECK(bm_green_alpha(0.3, 0.6, 1e-9) == doctest::Approx(bm_green(0.3, 0.6)).epsilon(1e-7));
    CHECK(bm_green_alpha(0.3, 0.6, 1.0) == bm_green_alpha(0.6, 0.3, 1.0));
    // large orders stay finite and decay like exp(-s |x-y|)/s
    double big = bm_green_alpha(0.3, 0.6, 1e4);  // s ~ 141
    CHECK(std::isfinite(big));
    CHECK(big == doctest::Approx(std::exp(-std::sqrt(2e4) * 0.3) / std::sqrt(2e4)).epsilon(1e-10));
    double huge = bm_green_alpha(0.3, 0.6, 1e8);  // true value underflows
    CHECK(std::isfinite(huge));
    CHECK(huge >= 0.0);
    CHECK(huge < 1e-300);
}

TEST_CASE("grid quadrature reproduces x(1-x) for the green kernel") {
    DiffusionModel model = make_diffusion(1000);
    for (int i : {0, 250, 499, 500, 777, 999}) {
        double x = model.grid(i);
        Vec row(model.grid_n);
        for (int j = 0; j < model.grid_n; ++j) row(j) = bm_green(x, model.grid(j));
        CHECK(std::abs(grid_quadrature(model, row) - x * (1.0 - x)) < 1e-12);
    }
}

TEST_CASE("grid interpolation") {
    DiffusionModel model = make_diffusion(9);
    Vec v(9);
    for (int i = 0; i < 9; ++i) v(i) = model.grid(i);  // samples of f(x) = x
    CHECK(grid_interp(model, v, 0.35) == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(grid_interp(model, v, 0.9) == doctest::Approx(0.9).epsilon(1e-14));
    // beyond the last node the interpolant decays to the 0 boundary value
    CHECK(grid_interp(model, v, 0.95) == doctest::Approx(0.45).epsilon(1e-12));
    CHECK_THROWS_AS(grid_interp(model, v, 1.0), OutOfDomain);
}

TEST_CASE("boundary vanishing witness") {
    DiffusionModel model = make_diffusion(500);
    Vec parabola(model.grid_n), flat = Vec::Ones(model.grid_n);
    for (int i = 0; i < model.grid_n; ++i) {
        double x = model.grid(i);
        parabola(i) = x * (1.0 - x);
    }
    CHECK(vanishes_at_boundary(model, parabola));
    CHECK(!vanishes_at_boundary(model, flat));
}

TEST_SUITE_END();
