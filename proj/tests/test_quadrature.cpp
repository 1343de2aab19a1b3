#include <fqmag/quadrature.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fqmag;

TEST(OrientationGrid, SmallestGridHasEightNodes) {
    const auto g = make_orientation_grid(2, 4);
    EXPECT_EQ(g.size(), 8u);
    double sum = 0.0;
    for (double w : g.weights())
        sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-14);
}

TEST(OrientationGrid, RejectsDegenerateSizes) {
    EXPECT_THROW(make_orientation_grid(1, 8), DomainError);
    EXPECT_THROW(make_orientation_grid(4, 3), DomainError);
}

TEST(OrientationGrid, ConstantIntegratesToOne) {
    for (int np : {2, 3, 8, 32})
        for (int na : {4, 7, 64})
            EXPECT_NEAR(make_orientation_grid(np, na).integrate([](const Orientation&) { return 1.0; }), 1.0, 1e-14);
}

TEST(OrientationGrid, CosSquaredIntegratesToOneThird) {
    for (int np = 2; np <= 40; ++np) {
        const auto g = make_orientation_grid(np, 4);
        const double v = g.integrate([](const Orientation& o) { return std::cos(o.polar) * std::cos(o.polar); });
        EXPECT_NEAR(v, 1.0 / 3.0, 1e-12) << "n_polar = " << np;
    }
}

TEST(OrientationGrid, SphericalHarmonicsAverageToZero) {
    const auto g = make_orientation_grid(8, 16);
    const double x2y2 = g.integrate([](const Orientation& o) {
        const double s = std::sin(o.polar);
        return s * s * std::cos(2.0 * o.azimuth);
    });
    const double z = g.integrate([](const Orientation& o) { return std::cos(o.polar); });
    EXPECT_NEAR(x2y2, 0.0, 1e-14);
    EXPECT_NEAR(z, 0.0, 1e-14);
}

TEST(OrientationGrid, WeightValidation) {
    EXPECT_THROW(OrientationGrid({{0, 0}, {1, 0}}, {0.5, 0.4}), DomainError);
    EXPECT_THROW(OrientationGrid({{0, 0}, {1, 0}}, {1.0, 0.0}), DomainError);
    EXPECT_THROW(OrientationGrid({{0, 0}}, {0.5, 0.5}), DomainError);
    EXPECT_NO_THROW(OrientationGrid::single());
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    const auto [x, w] = gauss_legendre(5);
    // Exact up to degree 9: integral of t^8 over [-1, 1] is 2/9.
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += w[i] * std::pow(x[i], 8);
    EXPECT_NEAR(s, 2.0 / 9.0, 1e-15);
    for (std::size_t i = 1; i < x.size(); ++i)
        EXPECT_LT(x[i - 1], x[i]);
}

TEST(OrientationGrid, DirectionsAreUnitVectors) {
    const auto g = make_orientation_grid(6, 9);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(g.direction(i).norm(), 1.0, 1e-15);
}
