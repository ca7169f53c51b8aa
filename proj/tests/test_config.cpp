#include <cmath>
#include <cstdlib>
#include <numbers>

#include <gtest/gtest.h>

#include "fractel/config.hpp"
#include "fractel/io.hpp"

using namespace fractel;

namespace {

constexpr double pi = std::numbers::pi;

// position of a ConfigError, or {-2, -2} if none was thrown
std::pair<int, int> error_position(const std::string& text, std::string* message = nullptr) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        if (message) *message = e.what();
        return {e.line(), e.column()};
    }
    return {-2, -2};
}

}  // namespace

TEST(Config, MinimalDefaults) {
    const RunConfig c = parse_config("rho: 0.3\nalpha: 1.25\nphi1: parabola\n");
    EXPECT_EQ(c.rho, 0.3);
    EXPECT_EQ(c.alpha, 1.25);
    EXPECT_EQ(c.K, 64);
    EXPECT_EQ(c.Nt, 128);
    EXPECT_EQ(c.Mx, 200);
    EXPECT_EQ(c.T, 1.0);
    EXPECT_EQ(c.phi0.preset, "zero");
    EXPECT_EQ(c.phi1.preset, "parabola");
    EXPECT_TRUE(c.source.empty());
    EXPECT_EQ(c.tolerances, Tolerances{});
}

TEST(Config, RhoOutOfRange) {
    std::string msg;
    const auto pos = error_position("alpha: 1\nrho: 1.5\n", &msg);
    EXPECT_NE(msg.find("rho must lie in (0,1)"), std::string::npos) << msg;
    EXPECT_EQ(pos, std::make_pair(1, 5));
    EXPECT_NE(msg.find("line 2, column 6"), std::string::npos) << msg;
    EXPECT_NE(error_position("rho: 0\nalpha: 1\n").first, -2);
}

TEST(Config, UnknownKeysRejected) {
    std::string msg;
    EXPECT_EQ(error_position("rho: 0.5\nalpha: 1\nbeta: 2\n", &msg), std::make_pair(2, 0));
    EXPECT_NE(msg.find("unknown key 'beta'"), std::string::npos) << msg;
    EXPECT_EQ(error_position("rho: 0.5\nalpha: 1\ntolerances:\n  residul: 1e-6\n", &msg), std::make_pair(3, 2));
    EXPECT_NE(msg.find("residul"), std::string::npos);
    EXPECT_EQ(error_position("rho: 0.5\nalpha: 1\nphi0: {preset: zero, colour: red}\n").first, 2);
}

TEST(Config, MalformedText) {
    std::string msg;
    const auto pos = error_position("rho: 0.5\nalpha: [1, 2\n", &msg);
    EXPECT_GE(pos.first, 1);
    EXPECT_NE(msg.find("line"), std::string::npos);
    EXPECT_NE(error_position("- 1\n- 2\n").first, -2);
    EXPECT_NE(error_position("rho: 0.5\n").first, -2);  // alpha missing
    EXPECT_NE(error_position("rho: abc\nalpha: 1\n").first, -2);
    EXPECT_NE(error_position("rho: 0.5\nalpha: 1\nK: 0\n").first, -2);
    EXPECT_NE(error_position("rho: 0.5\nalpha: 1\nN_t: 4\n").first, -2);
    EXPECT_NE(error_position("rho: 0.5\nalpha: 1\nconverge: {K: [16, 8]}\n").first, -2);
}

TEST(Config, DataPresets) {
    const RunConfig c = parse_config(
        "rho: 0.5\nalpha: 1\nphi0: sin:3\nphi1: {coefficients: [1, 0, 0.25], scale: 2}\n");
    EXPECT_EQ(c.phi0.preset, "sin");
    EXPECT_EQ(c.phi0.mode, 3);
    const SineData d0 = c.phi0.to_sine_data(8);
    for (int k = 1; k <= 8; ++k) EXPECT_EQ(d0.coefficient(k), k == 3 ? 1.0 : 0.0);
    const SineData d1 = c.phi1.to_sine_data(8);
    EXPECT_EQ(d1.coefficients, (std::vector<double>{2.0, 0.0, 0.5}));

    const SineData p = DataSpec{"parabola", 1, 1.0, {}}.to_sine_data(16);
    for (int k = 1; k <= 16; ++k) EXPECT_NEAR(p.coefficient(k), k % 2 ? 8.0 / (pi * k * k * k) : 0.0, 1e-12) << k;
    // sin^3 x = (3 sin x - sin 3x) / 4
    const SineData s3 = DataSpec{"sin3", 1, 1.0, {}}.to_sine_data(6);
    EXPECT_NEAR(s3.coefficient(1), 0.75, 1e-12);
    EXPECT_NEAR(s3.coefficient(3), -0.25, 1e-12);
    EXPECT_NEAR(s3.coefficient(2), 0.0, 1e-12);

    EXPECT_NE(error_position("rho: 0.5\nalpha: 1\nphi0: triangle\n").first, -2);
    EXPECT_NE(error_position("rho: 0.5\nalpha: 1\nphi0: sin:x\n").first, -2);
    EXPECT_NE(error_position("rho: 0.5\nalpha: 1\nphi0: sin:0\n").first, -2);
    EXPECT_NE(error_position("rho: 0.5\nalpha: 1\nphi0: {preset: sin, coefficients: [1]}\n").first, -2);
}

TEST(Config, Sources) {
    const RunConfig c = parse_config(
        "rho: 0.5\nalpha: 1\nsource:\n  - mode: 2\n    terms: [{coeff: 1.5, beta: 0.5}, {coeff: -1, beta: 2}]\n");
    ASSERT_EQ(c.source.size(), 1u);
    EXPECT_EQ(c.source[0].mode, 2);
    const ProblemSpec s = c.to_problem();
    const Source g = s.mode_source(2);
    EXPECT_NEAR(g(0.25), 1.5 * std::pow(0.25, -0.5) - 0.25, 1e-14);
    EXPECT_TRUE(s.mode_source(1).empty());
    std::string msg;
    error_position("rho: 0.5\nalpha: 1\nsource:\n  - mode: 1\n    terms: [{coeff: 1, beta: 0.25}]\n", &msg);
    EXPECT_NE(msg.find("beta must be >= rho"), std::string::npos) << msg;
    EXPECT_NE(error_position("rho: 0.5\nalpha: 1\nsource:\n  - mode: 1\n").first, -2);
}

TEST(Config, RoundTrip) {
    const std::string text = R"(
rho: 0.1
alpha: 0.3333333333333333
T: 2.5
K: 24
N_t: 40
M_x: 96
phi0: {preset: sin, mode: 5, scale: -0.7}
phi1: {coefficients: [0.1, 0.2, 1e-300, -3]}
source:
  - mode: 3
    terms: [{coeff: 0.30000000000000004, beta: 0.1}]
  - mode: 1
    terms: [{coeff: 1, beta: 1}, {coeff: 2, beta: 3.7}]
tolerances: {residual: 2.0e-7, spread: 4}
seed: 12345
threads: 3
output: "runs/a b"
oracle: {mode: 4}
verify: {sweep_count: 0, sector_density: 2}
converge: {K: [4, 8], N_t: [16]}
)";
    const RunConfig a = parse_config(text);
    const std::string e1 = emit_config(a);
    const RunConfig b = parse_config(e1);
    EXPECT_EQ(a, b);
    EXPECT_EQ(emit_config(b), e1);
    EXPECT_EQ(b.alpha, 0.3333333333333333);
    EXPECT_EQ(b.source[0].terms[0].coeff, 0.30000000000000004);
    EXPECT_EQ(b.output, "runs/a b");

    const RunConfig d = parse_config("rho: 0.5\nalpha: 1\n");
    EXPECT_EQ(parse_config(emit_config(d)), d);
}

TEST(Config, ToleranceScale) {
    RunConfig c = parse_config("rho: 0.5\nalpha: 1\n");
    scale_tolerances(c, 10.0);
    EXPECT_DOUBLE_EQ(c.tolerances.residual, 1e-5);
    EXPECT_DOUBLE_EQ(c.tolerances.realness, 1e-11);
    EXPECT_EQ(c.tolerances.spread, 10.0);
    EXPECT_THROW(scale_tolerances(c, 0.0), InvalidArgument);
}

TEST(Config, DemoConfigsParse) {
    for (const char* name : {"parabola.yaml", "forced.yaml", "zero.yaml"}) {
        const RunConfig c = load_config(std::string(FRACTEL_DEMO_DIR) + "/" + name);
        EXPECT_NO_THROW(c.to_problem()) << name;
    }
    EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST(Output, NumbersRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 1.0}) {
        const std::string s = format_number(v);
        EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
    }
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

TEST(Output, CsvLayout) {
    CsvWriter w({"a", "b"});
    w.row({1.0, 0.5});
    EXPECT_EQ(w.str(), "a,b\n1,0.5\n");
    EXPECT_THROW(w.row({1.0}), InvalidArgument);
    EXPECT_THROW(CsvWriter({}), InvalidArgument);
    const Check c = make_check("x", std::nan(""), 1.0);
    EXPECT_FALSE(c.passed);
    EXPECT_EQ(to_json(make_check("y", 0.5, 1.0))["verdict"], "pass");
}
