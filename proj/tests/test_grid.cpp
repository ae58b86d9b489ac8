#include <doctest.h>

#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/field.hpp"
#include "mfg/grid.hpp"

using namespace mfg;

TEST_CASE("time grid nodes and weights") {
    TimeGrid tg(2.0, 24);
    CHECK(tg.node(0) == 0.0);
    CHECK(tg.node(23) == 2.0);
    for (int i = 1; i < 24; ++i) CHECK(tg.node(i) > tg.node(i - 1));
    CHECK(tg.quad_weights().minCoeff() > 0.0);
    CHECK(std::abs(tg.quad_weights().sum() - 2.0) <= 1e-12 * 2.0);
}

TEST_CASE("time quadrature is exact on low-degree polynomials") {
    TimeGrid tg(1.0, 24);
    REQUIRE(tg.exact_degree() >= 8);
    for (int deg = 0; deg <= tg.exact_degree(); ++deg) {
        double acc = 0.0;
        for (int i = 0; i < tg.node_count(); ++i)
            acc += tg.quad_weights()[i] * std::pow(tg.node(i), deg);
        CHECK(acc == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-12));
    }
}

TEST_CASE("small grids fall back to a lower exact degree but stay positive") {
    TimeGrid tg(1.0, 8);
    CHECK(tg.quad_weights().minCoeff() > 0.0);
    CHECK(tg.exact_degree() >= 4);
    CHECK(std::abs(tg.quad_weights().sum() - 1.0) <= 1e-12);
}

TEST_CASE("torus grid invariants") {
    TorusGrid xg(1, 24);
    CHECK(xg.site_count() == 24);
    CHECK(xg.site(-1) == 23);
    CHECK(xg.site(24) == 0);
    CHECK(xg.site_weight() * xg.site_count() == doctest::Approx(1.0).epsilon(1e-14));

    TorusGrid xg2(2, 8);
    CHECK(xg2.site_count() == 64);
    CHECK(xg2.site(-1, 9) == xg2.site(7, 1));

    CHECK_THROWS_AS(TorusGrid(1, 7), ShapeError);
    CHECK_THROWS_AS(TorusGrid(3, 8), ShapeError);
    CHECK_THROWS_AS(TimeGrid(1.0, 4), ShapeError);
}

TEST_CASE("quadrature of fields: unit measure and orthogonality") {
    GridPtr grid = make_grid(1.0, 16, 1, 16);
    SpaceTimeField one = SpaceTimeField::constant(grid, 1.0);
    CHECK(inner(one, one) == doctest::Approx(1.0).epsilon(1e-12));

    auto sin1 = SpaceTimeField::sample(grid, [](double, double x, double) {
        return std::sin(2.0 * M_PI * x);
    });
    auto cos1 = SpaceTimeField::sample(grid, [](double, double x, double) {
        return std::cos(2.0 * M_PI * x);
    });
    CHECK(std::abs(inner(sin1, cos1)) <= 1e-12);

    GridPtr grid2 = make_grid(2.0, 16, 1, 16);
    auto sin2 = SpaceTimeField::sample(grid2, [](double, double x, double) {
        return std::sin(2.0 * M_PI * x);
    });
    CHECK(inner(sin2, sin2) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spatial means and slice masses") {
    GridPtr grid = make_grid(1.0, 16, 1, 16);
    auto u = SpaceTimeField::sample(grid, [](double t, double x, double) {
        return (1.0 - t) + std::sin(2.0 * M_PI * x);
    });
    Eigen::VectorXd mean = spatial_mean(u);
    for (int i = 0; i < 16; ++i)
        CHECK(mean[i] == doctest::Approx(1.0 - grid->time.node(i)).epsilon(1e-12));

    auto m = SpaceTimeField::sample(grid, [](double t, double x, double) {
        return (1.0 + t) * (1.0 + 0.5 * std::cos(2.0 * M_PI * x));
    });
    Eigen::VectorXd mass = mass_per_slice(m);
    for (int i = 0; i < 16; ++i)
        CHECK(mass[i] == doctest::Approx(1.0 + grid->time.node(i)).epsilon(1e-12));

    SpaceTimeField centered = remove_spatial_mean(u);
    CHECK(spatial_mean(centered).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("non-finite values abort operations") {
    GridPtr grid = make_grid(1.0, 8, 1, 8);
    SpaceTimeField f = SpaceTimeField::constant(grid, 1.0);
    f(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(f.ensure_finite("test"), NonFiniteError);
}
