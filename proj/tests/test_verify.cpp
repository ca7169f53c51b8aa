#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fractel/verify.hpp"

using namespace fractel;

namespace {

constexpr double pi = std::numbers::pi;

ProblemSpec parabola_problem(int K = 32) {
    ProblemSpec s;
    s.rho = 0.5;
    s.alpha = 2.0;
    s.K = K;
    s.Nt = 64;
    s.Mx = 128;
    s.phi1 = SineData::from_function([](double x) { return x * (pi - x); }, K);
    return s;
}

}  // namespace

TEST(HolderDecay, SingleMode) {
    std::vector<double> c(32, 0.0);
    c[0] = 1.0;
    const HolderDecay h = holder_decay(c, 0.0);
    for (double s : h.partial_sums) EXPECT_EQ(s, 1.0);
    EXPECT_TRUE(h.bounded);
}

TEST(HolderDecay, ParabolaIsBounded) {
    const std::vector<double> c = sine_coefficients([](double x) { return x * (pi - x); }, 128);
    const HolderDecay h = holder_decay(c, 0.4);
    EXPECT_TRUE(h.bounded);
    for (std::size_t i = 1; i < h.partial_sums.size(); ++i) EXPECT_GE(h.partial_sums[i], h.partial_sums[i - 1]);
    // blocks of k^{0.4} * 8/(pi k^3) shrink by about 2^{-1.6}
    ASSERT_GE(h.block_sums.size(), 5u);
    for (std::size_t j = 2; j < h.block_sums.size(); ++j)
        EXPECT_NEAR(h.block_sums[j] / h.block_sums[j - 1], std::pow(2.0, -1.6), 0.05);
    double full = 0.0;
    for (int k = 1; k <= 128; k += 2) full += std::pow(k, 0.4) * 8.0 / (pi * k * k * k);
    EXPECT_NEAR(h.partial_sums.back(), full, 1e-9);
}

TEST(HolderDecay, SlowCoefficientsDiverge) {
    std::vector<double> c;
    for (int k = 1; k <= 256; ++k) c.push_back(1.0 / std::sqrt(k));
    const HolderDecay h = holder_decay(c, 0.0);
    EXPECT_FALSE(h.bounded);
    EXPECT_GT(h.block_ratio, 1.0);
    EXPECT_THROW(holder_decay(c, -0.1), InvalidArgument);
}

TEST(RegularitySpec, Validation) {
    EXPECT_NO_THROW((RegularitySpec{0.8, 0.2, 0.0}.validate()));
    EXPECT_THROW((RegularitySpec{0.5, 0.0, 0.0}.validate()), InvalidArgument);
    EXPECT_THROW((RegularitySpec{0.8, 0.35, 0.0}.validate()), InvalidArgument);
    EXPECT_THROW((RegularitySpec{0.8, -0.1, 0.0}.validate()), InvalidArgument);
}

TEST(HolderSeminorm, SineModulus) {
    // on [0, pi], omega_{sin}(delta) = sin(min(delta, pi / 2)), reached from x = 0
    const int M = 256;
    std::vector<double> g(M + 1);
    for (int i = 0; i <= M; ++i) g[i] = std::sin(pi * i / M);
    for (double a : {0.5, 0.75, 1.0}) {
        double expect = 0.0;
        for (int s = 1; s <= M; s *= 2) {
            const double d = pi * s / M;
            expect = std::max(expect, std::sin(std::min(d, pi / 2.0)) / std::pow(d, a));
        }
        EXPECT_NEAR(holder_seminorm(g, a), expect, 1e-12) << a;
    }
    for (int i = 0; i <= M; ++i) g[i] = std::sin(3.0 * pi * i / M);
    EXPECT_NEAR(holder_seminorm(g, 1.0), 3.0, 1e-3);
    EXPECT_THROW(holder_seminorm({0.0, 1.0}, 1.0), InvalidArgument);
    EXPECT_THROW(holder_seminorm(g, 1.5), InvalidArgument);
}

TEST(Stability, ZeroDataGivesZero) {
    ProblemSpec s;
    s.K = 8;
    s.Nt = 16;
    s.Mx = 32;
    SolutionField f = assemble_solution(s);
    const StabilityResult r = stability_ratio(s, f);
    EXPECT_EQ(r.ratio, 0.0);
    EXPECT_FALSE(r.violation);
}

TEST(Stability, ViolationFlag) {
    ProblemSpec s;
    s.K = 8;
    s.Nt = 16;
    s.Mx = 32;
    SolutionField f = assemble_solution(s);
    evaluate_derivatives(s, f);
    (*f.drho)(3, 3) = 1e-6;
    const StabilityResult r = stability_ratio(s, f);
    EXPECT_TRUE(r.violation);
    EXPECT_TRUE(std::isinf(r.ratio));
}

TEST(Stability, ScaleInvariant) {
    std::mt19937_64 rng(5);
    ProblemSpec s = admissible_problem(rng, 16, 32, 64);
    s.source.push_back({2, Source{{{0.7, s.rho}}, nullptr}});
    SolutionField f = assemble_solution(s);
    const StabilityResult a = stability_ratio(s, f);
    ProblemSpec d = s;
    for (double& c : d.phi0.coefficients) c *= 2.0;
    for (double& c : d.phi1.coefficients) c *= 2.0;
    for (ModeSource& m : d.source)
        for (PowerTerm& t : m.profile.terms) t.coeff *= 2.0;
    SolutionField g = assemble_solution(d);
    const StabilityResult b = stability_ratio(d, g);
    EXPECT_GT(a.ratio, 0.0);
    EXPECT_NEAR(b.ratio, a.ratio, 1e-12 * a.ratio);
    EXPECT_NEAR(b.lhs, 2.0 * a.lhs, 1e-12 * a.lhs);
}

TEST(Stability, AdmissibleDataHaveVanishingSecondDerivative) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 5; ++i) {
        const ProblemSpec s = admissible_problem(rng, 64, 32);
        for (const SineData* d : {&s.phi0, &s.phi1}) {
            const std::vector<double> xx = second_derivative_samples(*d, s.K, s.Mx);
            double scale = 0.0;
            for (double v : xx) scale = std::max(scale, std::abs(v));
            EXPECT_LE(std::abs(xx.front()), 1e-12 * (scale + 1.0));
            EXPECT_LE(std::abs(xx.back()), 1e-3 * (scale + 1.0));
            // series against a central difference of the closed form at a grid point
            const double h = 1e-4, x = pi * 45 / s.Mx;
            const double fd = (d->shape(x + h) - 2.0 * d->shape(x) + d->shape(x - h)) / (h * h);
            EXPECT_NEAR(xx[45], fd, 1e-4 * (scale + 1.0));
        }
    }
}

TEST(Stability, SweepIsBounded) {
    const StabilitySweep a = stability_sweep(10, 3, 16, 32);
    const StabilitySweep b = stability_sweep(10, 3, 32, 64);
    EXPECT_FALSE(a.any_violation);
    EXPECT_TRUE(std::isfinite(a.max_ratio));
    EXPECT_LE(a.max_ratio, 10.0 * a.median_ratio);
    EXPECT_NEAR(b.max_ratio, a.max_ratio, 0.2 * a.max_ratio);
    const StabilitySweep c = stability_sweep(10, 3, 16, 32, 3);
    EXPECT_EQ(c.ratios, a.ratios);
}

TEST(Convergence, SingleModeIsConstantInK) {
    ProblemSpec s;
    s.K = 4;
    s.Nt = 32;
    s.Mx = 64;
    s.phi1 = SineData::from_function([](double x) { return std::sin(x); }, 4);
    const ConvergenceStudy c = convergence_study(s, {4, 8, 16}, {32});
    ASSERT_EQ(c.rows.size(), 3u);
    for (const ConvergenceRow& r : c.rows) {
        EXPECT_NEAR(r.w_sup, c.rows.front().w_sup, 1e-12 * r.w_sup);
        EXPECT_LE(r.data_residual, 1e-12);
        EXPECT_LE(r.residual_sup, 1e-10);
    }
}

TEST(Convergence, ParabolaTruncationDecreases) {
    const ConvergenceStudy c = convergence_study(parabola_problem(), {8, 16, 32, 64}, {32, 64});
    ASSERT_EQ(c.rows.size(), 8u);
    double last = std::numeric_limits<double>::infinity();
    for (const ConvergenceRow& r : c.rows) {
        if (r.Nt != 32) continue;
        EXPECT_LT(r.data_residual, last) << r.K;
        last = r.data_residual;
        EXPECT_LE(r.residual_sup, 1e-10);
    }
    // coefficients ~ k^{-3}: the tail after K falls like K^{-2}
    EXPECT_NEAR(c.tail_decay_exponent, 2.0, 0.3);
    for (std::size_t i = 0; i + 1 < c.rows.size(); i += 2) EXPECT_LT(c.rows[i + 1].cross_residual, c.rows[i].cross_residual);
}

TEST(Convergence, Errors) {
    const ProblemSpec s = parabola_problem(8);
    EXPECT_THROW(convergence_study(s, {}, {32}), InvalidArgument);
    EXPECT_THROW(convergence_study(s, {16, 8}, {32}), InvalidArgument);
    EXPECT_THROW(convergence_study(s, {8}, {64, 32}), InvalidArgument);
}

TEST(OperatorSums, BoundedUnderDoubling) {
    ProblemSpec s = parabola_problem(32);
    s.phi0 = SineData::from_function([](double x) { return x * x * x * (pi - x) * (pi - x) * (pi - x); }, 32);
    const auto [e, r] = operator_sum_growth(s);
    EXPECT_GT(e.sup_K, 0.0);
    EXPECT_GT(r.sup_K, 0.0);
    EXPECT_LE(e.increase, 0.01);
    EXPECT_LE(r.increase, 0.01);
    const PartialSumGrowth c = convolution_sum_growth(s);
    EXPECT_GT(c.sup_K, 0.0);
    EXPECT_LE(c.increase, 0.01);
}

TEST(SectorBound, FittedConstantIsStable) {
    const SectorSweep a = sector_sweep(0.5, 0.5, 1);
    const SectorSweep b = sector_sweep(0.5, 0.5, 2, 0.25, 1.0, {0.5, 1.0, 2.0}, 2);
    EXPECT_LE(a.decay_constant, 10.0);
    EXPECT_GE(a.decay_constant, 1.0 / std::tgamma(0.5));  // value at z = 0
    EXPECT_NEAR(b.decay_constant, a.decay_constant, 0.1 * a.decay_constant);
    EXPECT_LE(a.worst_estimate_ratio, 1.0);
    EXPECT_LE(b.worst_estimate_ratio, 1.0);
    EXPECT_THROW(sector_sweep(0.5, 0.5, 0), InvalidArgument);
}
