#include <cmath>

#include <gtest/gtest.h>

#include "fractel/quadrature.hpp"

using namespace fractel;

TEST(GaussJacobi, IntegratesMomentsExactly) {
    // int_{-1}^{1} (1-x)^a (1+x)^b x^k dx against the Beta-function moments of (1+x)
    const double a = -0.4, b = 0.3;
    const quad::Rule& r = quad::gauss_jacobi(12, a, b);
    for (int k = 0; k < 20; ++k) {
        // moments of y = (1+x)/2 in [0,1]: 2^{a+b+1} B(b+k+1, a+1)
        double s = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(0.5 * (1.0 + r.nodes[i]), k);
        const double ref = std::pow(2.0, a + b + 1.0) * std::exp(std::lgamma(b + k + 1.0) + std::lgamma(a + 1.0) -
                                                                  std::lgamma(a + b + k + 2.0));
        EXPECT_NEAR(s / ref, 1.0, 1e-13) << k;
    }
}

TEST(GaussJacobi, LegendreNodesAreSymmetric) {
    const quad::Rule& r = quad::gauss_legendre(9);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(r.nodes[i], -r.nodes[8 - i], 4e-15);
    double s = 0.0;
    for (double w : r.weights) s += w;
    EXPECT_NEAR(s, 2.0, 1e-14);
}

TEST(GaussJacobi, RejectsBadExponents) {
    EXPECT_THROW(quad::gauss_jacobi(4, -1.0, 0.0), InvalidArgument);
    EXPECT_THROW(quad::gauss_jacobi(0, 0.0, 0.0), InvalidArgument);
    EXPECT_THROW(quad::product_rule(0.0, -1.5), InvalidArgument);
}

TEST(ProductRule, BetaIntegrals) {
    for (double a : {-0.7, -0.2, 0.0, 0.5}) {
        for (double b : {-0.9, -0.4, 0.0, 1.3}) {
            const double v = quad::integrate_singular([](double) { return 1.0; }, 1.0, a, b);
            const double ref = std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
            EXPECT_NEAR(v / ref, 1.0, 1e-13) << a << " " << b;
        }
    }
}

TEST(ProductRule, NonPolynomialInteriorFactor) {
    // int_0^t xi^a (t-xi)^b exp(-5 xi) dxi against a series in t
    const double a = -0.5, b = -0.3, t = 2.0;
    const double v = quad::integrate_singular([](double x) { return std::exp(-5.0 * x); }, t, a, b);
    double ref = 0.0, term = 1.0;
    for (int k = 0; k < 200; ++k) {
        // (-5)^k / k! * int_0^t xi^{a+k} (t-xi)^b dxi
        ref += term * std::pow(t, a + b + k + 1.0) *
               std::exp(std::lgamma(a + k + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + k + 2.0));
        term *= -5.0 / (k + 1);
    }
    EXPECT_NEAR(v / ref, 1.0, 1e-11);
}
