#include <doctest.h>

#include <cmath>

#include "fracrd/errors.hpp"
#include "fracrd/fd_oracle.hpp"

using namespace fracrd;

namespace {

Scenario heat_delta() {
    Scenario sc;
    sc.orders = OrderParams{1.0, 1.0, 0.0, {SpaceOperator{2.0, 0.0, 1.0}}};
    sc.t_points = {1.0};
    sc.x_grid = {-3.0, -1.0, 0.0, 0.5, 2.0};
    return sc;
}

}  // namespace

TEST_CASE("fd heat run against the exact kernel") {
    const Scenario sc = heat_delta();
    const Field f = solve_fd(sc, FDGrid{20.0, 256, 1e-3, 0});
    for (std::size_t i = 0; i < sc.x_grid.size(); ++i) {
        const double x = sc.x_grid[i];
        CHECK(std::fabs(f.values[0][i] - std::exp(-x * x / 4.0) / std::sqrt(4.0 * kPi)) <= 1e-3);
    }
    CHECK(f.t_points[0] == doctest::Approx(1.0));
}

TEST_CASE("fd discrete mass is conserved") {
    Scenario sc = heat_delta();
    sc.orders = OrderParams{0.9, 0.5, 0.7, {SpaceOperator{1.5, 0.3, 1.0}}};
    sc.f = Profile::gaussian(1.0, 0.0, 1.0);
    const double L = 60.0;
    const std::size_t nx = 512;
    const double h = 2 * L / nx;
    sc.x_grid.clear();
    for (std::size_t j = 0; j < nx; ++j) sc.x_grid.push_back(-L + h * static_cast<double>(j));
    sc.t_points = {0.01, 0.02, 0.05};
    FDOptions o;
    o.boundary_tol = 1e-2;
    const Field f = solve_fd(sc, FDGrid{L, nx, 1e-2, 0}, o);
    for (const auto& row : f.values) {
        double mass = 0.0;
        for (double v : row) mass += v * h;
        CHECK(std::fabs(mass - std::sqrt(kPi)) < 1e-10);
    }
}

TEST_CASE("fd scheme is linear in the data") {
    Scenario a = heat_delta();
    a.orders = OrderParams{1.4, 0.6, 0.5, {SpaceOperator{1.8, 0.1, 1.0}}};
    a.f = Profile::gaussian(1.0, -0.5, 1.0);
    a.g = Profile::gaussian(0.3, 0.0, 0.8);
    a.t_points = {0.3};
    Scenario b = a;
    b.f = Profile::gaussian(2.0, 0.5, 1.0);
    b.g = Profile::zero_profile();
    Scenario sum = a;
    // linear combination expressed through a tabulated profile
    Profile tab;
    tab.kind = Profile::Kind::table;
    tab.table.x0 = -30.0;
    tab.table.dx = 0.01;
    for (int i = 0; i <= 6000; ++i) {
        const double x = -30.0 + 0.01 * i;
        tab.table.values.push_back(a.f.value(x) + b.f.value(x));
    }
    Profile tab_a = tab, tab_b = tab;
    for (int i = 0; i <= 6000; ++i) {
        const double x = -30.0 + 0.01 * i;
        tab_a.table.values[i] = a.f.value(x);
        tab_b.table.values[i] = b.f.value(x);
    }
    a.f = tab_a;
    b.f = tab_b;
    sum.f = tab;
    const FDGrid grid{30.0, 256, 5e-3, 0};
    FDOptions o;
    o.boundary_tol = 1e-3;  // algebraic tails of the gamma = 1.8 operator
    const Field fa = solve_fd(a, grid, o), fb = solve_fd(b, grid, o), fs = solve_fd(sum, grid, o);
    for (std::size_t i = 0; i < a.x_grid.size(); ++i)
        CHECK(std::fabs(fs.values[0][i] - fa.values[0][i] - fb.values[0][i]) < 1e-10);
}

TEST_CASE("fd output times snap to the grid and are reported") {
    Scenario sc = heat_delta();
    sc.t_points = {0.1234};
    const Field f = solve_fd(sc, FDGrid{20.0, 512, 0.01, 0});
    CHECK(f.t_points[0] == doctest::Approx(0.12));
    CHECK_FALSE(f.diagnostics.warnings.empty());
}

TEST_CASE("fd failure modes") {
    Scenario sc = heat_delta();
    sc.f = Profile::gaussian(1.0, 0.0, 1.0);
    CHECK_THROWS_AS(solve_fd(sc, FDGrid{4.0, 64, 0.01, 0}), BoundaryContamination);
    CHECK_THROWS_AS(solve_fd(sc, FDGrid{20.0, 100, 0.01, 0}), InvalidParameter);
    CHECK_THROWS_AS(solve_fd(sc, FDGrid{2.5, 64, 0.01, 0}), OutOfRange);
    FDOptions strict;
    strict.growth_limit = 0.5;
    CHECK_THROWS_AS(solve_fd(sc, FDGrid{20.0, 128, 0.01, 0}, strict), StabilityFailure);
}
