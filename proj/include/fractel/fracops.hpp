#pragma once

// Riemann-Liouville fractional integral J^sigma (sigma < 0), derivative
// d^rho = d/dt J^{rho-1}, the weighted initial limit lim J^{alpha-1} g, and a
// grid-based discrete derivative used as an independent oracle.
//
// Functions handled here are allowed a power singularity at t = 0: the caller
// passes the exponent nu such that t^{-nu} g(t) is continuous up to 0
// (nu = rho - 1 for the solutions of the telegraph problem).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <type_traits>
#include <vector>

#include "fractel/error.hpp"
#include "fractel/quadrature.hpp"

namespace fractel {

/// Samples of a function with a known power singularity at 0.
struct SingularFunctionSamples {
    std::vector<double> grid;    // strictly increasing, grid[0] > 0
    std::vector<double> values;  // g(grid[i])
    double singular_exponent = 0.0;  // nu: t^{-nu} g(t) continuous at 0
};

namespace detail {

inline void check_order_time(double t, const char* who) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument(std::string(who) + ": t must be positive");
}

inline void check_samples(const SingularFunctionSamples& s, std::size_t min_size, const char* who) {
    if (s.grid.size() != s.values.size())
        throw InvalidArgument(std::string(who) + ": grid and values differ in length");
    if (s.grid.size() < min_size)
        throw InvalidArgument(std::string(who) + ": need at least " + std::to_string(min_size) + " samples");
    if (!(s.grid.front() > 0.0)) throw InvalidArgument(std::string(who) + ": grid must start after 0");
    for (std::size_t i = 1; i < s.grid.size(); ++i)
        if (!(s.grid[i] > s.grid[i - 1]))
            throw InvalidArgument(std::string(who) + ": grid must be strictly increasing");
    if (!(s.singular_exponent > -1.0))
        throw InvalidArgument(std::string(who) + ": singular exponent must exceed -1");
}

// Piecewise-linear interpolant of h = t^{-nu} g, extended linearly to t = 0.
inline std::function<double(double)> regular_part(const SingularFunctionSamples& s) {
    std::vector<double> ts{0.0};
    std::vector<double> hs{0.0};
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        ts.push_back(s.grid[i]);
        hs.push_back(s.values[i] * std::pow(s.grid[i], -s.singular_exponent));
    }
    if (ts.size() >= 3)
        hs[0] = hs[1] - (hs[2] - hs[1]) * ts[1] / (ts[2] - ts[1]);
    else
        hs[0] = hs[1];
    return [ts = std::move(ts), hs = std::move(hs)](double t) {
        if (t >= ts.back()) return hs.back();
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
        const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
        return (1.0 - w) * hs[i] + w * hs[i + 1];
    };
}

// Central difference of f at t with two Richardson levels (steps d, d/2, d/4).
template <class F>
auto richardson_derivative(F&& f, double t, double d) {
    auto cd = [&](double hh) { return (f(t + hh) - f(t - hh)) / (2.0 * hh); };
    const auto a0 = cd(d);
    const auto a1 = cd(0.5 * d);
    const auto a2 = cd(0.25 * d);
    const auto b0 = (4.0 * a1 - a0) / 3.0;
    const auto b1 = (4.0 * a2 - a1) / 3.0;
    return (16.0 * b1 - b0) / 15.0;
}

}  // namespace detail

/// J^sigma g(t) = 1/Gamma(-sigma) int_0^t g(xi) (t - xi)^{-sigma-1} dxi, sigma < 0.
/// nu is the power of the singularity of g at 0 (g = xi^nu * continuous).
template <class G>
auto rl_integral(G&& g, double sigma, double t, double nu = 0.0, quad::ProductLayout layout = {}) {
    if (!(sigma < 0.0)) throw InvalidArgument("rl_integral: sigma must be negative");
    detail::check_order_time(t, "rl_integral");
    if (!(nu > -1.0)) throw InvalidArgument("rl_integral: singular exponent must exceed -1");
    auto h = [&](double xi) { return g(xi) * std::pow(xi, -nu); };
    return quad::integrate_singular(h, t, nu, -sigma - 1.0, layout) / std::tgamma(-sigma);
}

/// J^sigma applied to sampled data (piecewise-linear in t^{-nu} g).
inline double rl_integral(const SingularFunctionSamples& s, double sigma, double t) {
    detail::check_samples(s, 2, "rl_integral");
    const auto h = detail::regular_part(s);
    return rl_integral([&](double xi) { return h(xi) * std::pow(xi, s.singular_exponent); }, sigma, t,
                       s.singular_exponent);
}

/// d^rho g(t) = d/dt J^{rho-1} g(t), rho in (0, 1].
///
/// With the derivative gprime supplied, the quadrature representation
///   J^{rho-1} g(t) = t^c / Gamma(1-rho) int_0^1 x^nu (1-x)^{-rho} h(t x) dx,
///   h(xi) = xi^{-nu} g(xi),  c = 1 - rho + nu,
/// is differentiated analytically. Otherwise J^{rho-1} g, which is smooth for
/// t > 0, is differentiated by Richardson-extrapolated central differences.
template <class G, class GP = std::nullptr_t>
auto rl_derivative(G&& g, double rho, double t, double nu = 0.0, GP&& gprime = nullptr,
                   quad::ProductLayout layout = {}) {
    if (!(rho > 0.0) || !(rho <= 1.0)) throw InvalidArgument("rl_derivative: rho must lie in (0, 1]");
    detail::check_order_time(t, "rl_derivative");
    if (!(nu > -1.0)) throw InvalidArgument("rl_derivative: singular exponent must exceed -1");
    constexpr bool has_gp = !std::is_same_v<std::decay_t<GP>, std::nullptr_t>;

    if (rho == 1.0) {
        if constexpr (has_gp)
            return gprime(t);
        else
            return detail::richardson_derivative(g, t, 0.05 * t);
    }
    if constexpr (has_gp) {
        const double c = 1.0 - rho + nu;
        const quad::Rule& r = quad::product_rule(nu, -rho, layout);
        using R = decltype(g(t));
        R i0{}, i1{};
        for (std::size_t k = 0; k < r.nodes.size(); ++k) {
            const double xi = t * r.nodes[k];
            const double xn = std::pow(xi, -nu);
            const R gv = g(xi);
            const R hv = gv * xn;
            const R hp = gprime(xi) * xn - nu * gv * xn / xi;  // h'(xi)
            i0 += r.weights[k] * hv;
            i1 += r.weights[k] * (r.nodes[k] * hp);
        }
        return (c * std::pow(t, c - 1.0) * i0 + std::pow(t, c) * i1) / std::tgamma(1.0 - rho);
    } else {
        auto F = [&](double s) { return rl_integral(g, rho - 1.0, s, nu, layout); };
        return detail::richardson_derivative(F, t, 0.05 * t);
    }
}

/// Options for the limit extraction t -> 0+.
struct LimitOptions {
    double t0 = 1e-2;  // largest sample time; samples at t0 * 2^-k
    int levels = 7;
    double tolerance = 1e-3;  // consistency required between the last two estimates
};

namespace detail {

// Iterated Aitken delta-squared on geometrically spaced samples; exact for
// L + c t^p with unknown p. Returns {estimate, spread of the last round}.
template <class V>
std::pair<V, double> iterated_aitken(std::vector<V> v) {
    double spread = 0.0;
    while (v.size() >= 3) {
        std::vector<V> next;
        for (std::size_t k = 0; k + 2 < v.size(); ++k) {
            const V d1 = v[k + 1] - v[k];
            const V d2 = v[k + 2] - v[k + 1];
            const V den = d2 - d1;
            const double scale = std::max({std::abs(v[k]), std::abs(v[k + 1]), std::abs(v[k + 2])});
            if (std::abs(den) <= 1e-14 * std::max(scale, 1e-300))
                next.push_back(v[k + 2]);
            else
                next.push_back(v[k + 2] - d2 * d2 / den);
        }
        if (next.size() >= 2) spread = std::abs(next.back() - next[next.size() - 2]);
        v = std::move(next);
    }
    if (v.size() == 2) spread = std::abs(v[1] - v[0]);
    return {v.back(), spread};
}

}  // namespace detail

/// Regularized limit lim_{t->0+} t^{1-alpha} g(t), extrapolated from the
/// samples t0 * 2^-k, k = 0..levels-1. Throws NoLimit when the samples grow
/// or the extrapolants disagree.
template <class G>
auto regularized_limit(G&& g, double alpha, LimitOptions opt = {}) {
    if (!(opt.t0 > 0.0) || opt.levels < 3) throw InvalidArgument("rl_limit: need t0 > 0 and levels >= 3");
    using V = decltype(g(opt.t0) * 1.0);
    std::vector<V> v;
    for (int k = 0; k < opt.levels; ++k) {
        const double t = opt.t0 * std::ldexp(1.0, -k);
        const V gv = g(t);
        v.push_back(std::pow(t, 1.0 - alpha) * gv);
        if (!std::isfinite(std::abs(v.back()))) throw NoLimit("rl_limit: samples are not finite");
    }
    // differences must shrink for a limit to exist
    const std::size_t n = v.size();
    const double d_first = std::abs(v[1] - v[0]);
    const double d_last = std::abs(v[n - 1] - v[n - 2]);
    const double scale = std::max(std::abs(v[n - 1]), 1e-300);
    if (d_last > 1e-12 * scale && d_last >= d_first)
        throw NoLimit("rl_limit: regularized samples do not settle as t -> 0");
    const auto [est, spread] = detail::iterated_aitken(v);
    if (!std::isfinite(std::abs(est)) || spread > opt.tolerance * std::max(std::abs(est), 1.0))
        throw NoLimit("rl_limit: extrapolation did not converge");
    return est;
}

/// lim_{t->0+} J^{alpha-1} g(t) = Gamma(alpha) * lim t^{1-alpha} g(t).
template <class G>
auto rl_limit(G&& g, double alpha, LimitOptions opt = {}) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw InvalidArgument("rl_limit: order must lie in (0, 1)");
    return std::tgamma(alpha) * regularized_limit(g, alpha, opt);
}

/// Precomputed weights of the grid derivative oracle.
///
/// For a grid 0 < t_1 < ... < t_N the fractional integral
///   I_j = J^{rho-1} g(t_j) = 1/Gamma(1-rho) int_0^{t_j} (t_j - xi)^{-rho} xi^nu h(xi) dxi
/// is evaluated exactly for the piecewise-linear interpolant of h = t^{-nu} g
/// (nodes t_0 = 0, t_1, ..., h(0) extrapolated linearly), so I = W h with W
/// depending only on the grid, rho and nu. The derivative is then taken with
/// three-point nonuniform differences.
class GridDerivative {
public:
    GridDerivative(std::vector<double> grid, double rho, double nu)
        : grid_(std::move(grid)), rho_(rho), nu_(nu) {
        if (grid_.size() < 8) throw InvalidArgument("gl_derivative_grid: need at least 8 grid points");
        if (!(rho > 0.0) || !(rho <= 1.0))
            throw InvalidArgument("gl_derivative_grid: rho must lie in (0, 1]");
        detail::check_samples({grid_, std::vector<double>(grid_.size()), nu}, 8, "gl_derivative_grid");
        if (rho_ < 1.0) build_weights();
    }

    const std::vector<double>& grid() const { return grid_; }

    /// d^rho at every grid node from samples g(t_j).
    template <class V>
    std::vector<V> apply(const std::vector<V>& g) const {
        const std::size_t n = grid_.size();
        if (g.size() != n) throw InvalidArgument("gl_derivative_grid: sample count does not match grid");
        std::vector<V> integral(n);
        if (rho_ == 1.0) {
            integral = g;
        } else {
            // hat-function coefficients: h at t_0 = 0 (extrapolated) and at every node
            std::vector<V> h(n + 1);
            for (std::size_t i = 0; i < n; ++i) h[i + 1] = g[i] * std::pow(grid_[i], -nu_);
            h[0] = h[1] - (h[2] - h[1]) * grid_[0] / (grid_[1] - grid_[0]);
            for (std::size_t j = 0; j < n; ++j) {
                V acc{};
                const std::vector<double>& w = weights_[j];
                for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * h[i];
                integral[j] = acc;
            }
        }
        return differentiate(integral);
    }

private:
    template <class V>
    std::vector<V> differentiate(const std::vector<V>& f) const {
        const std::size_t n = grid_.size();
        std::vector<V> d(n);
        auto three = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t at) {
            // derivative at grid_[at] of the quadratic through a, b, c
            const double x = grid_[at];
            const double xa = grid_[a], xb = grid_[b], xc = grid_[c];
            const double la = ((x - xb) + (x - xc)) / ((xa - xb) * (xa - xc));
            const double lb = ((x - xa) + (x - xc)) / ((xb - xa) * (xb - xc));
            const double lc = ((x - xa) + (x - xb)) / ((xc - xa) * (xc - xb));
            return la * f[a] + lb * f[b] + lc * f[c];
        };
        d[0] = three(0, 1, 2, 0);
        for (std::size_t j = 1; j + 1 < n; ++j) d[j] = three(j - 1, j, j + 1, j);
        d[n - 1] = three(n - 3, n - 2, n - 1, n - 1);
        return d;
    }

    void build_weights() {
        const std::size_t n = grid_.size();
        std::vector<double> t(n + 1, 0.0);
        std::copy(grid_.begin(), grid_.end(), t.begin() + 1);
        const double a = -rho_;  // exponent at the evaluation point
        const double b = nu_;    // exponent at the origin
        const double g1 = 1.0 / std::tgamma(1.0 - rho_);
        const quad::Rule& gl8 = quad::gauss_legendre(8);
        const quad::Rule& gl16 = quad::gauss_legendre(16);
        const quad::Rule& right = quad::gauss_jacobi(16, a, 0.0);
        const quad::Rule& left = quad::gauss_jacobi(16, 0.0, b);
        const quad::Rule& both = quad::gauss_jacobi(16, a, b);

        weights_.assign(n, {});
        for (std::size_t j = 1; j <= n; ++j) {
            std::vector<double>& w = weights_[j - 1];
            w.assign(j + 1, 0.0);
            const double tj = t[j];
            // adds int_lo^hi (tj - xi)^a xi^b * hat functions of panel p
            auto piece = [&](std::size_t p, double lo, double hi, const quad::Rule& r, bool sing_lo, bool sing_hi) {
                const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
                const double plo = t[p], phi = t[p + 1];
                for (std::size_t k = 0; k < r.nodes.size(); ++k) {
                    const double xi = mid + half * r.nodes[k];
                    double f = r.weights[k] * half * g1;
                    // factors not absorbed by the Jacobi weight
                    f *= sing_hi ? std::pow(half, a) : std::pow(tj - xi, a);
                    f *= sing_lo ? std::pow(half, b) : std::pow(xi, b);
                    const double lam = (xi - plo) / (phi - plo);
                    w[p] += f * (1.0 - lam);
                    w[p + 1] += f * lam;
                }
            };
            for (std::size_t p = 0; p < j; ++p) {
                const double lo = t[p], hi = t[p + 1];
                const bool at_end = p + 1 == j;
                if (p == 0) {
                    piece(p, lo, hi, at_end ? both : left, true, at_end);
                    continue;
                }
                // keep hi/lo <= 2 on every piece so xi^b is resolved near the origin
                double s = lo;
                while (s < hi) {
                    const double e = std::min(2.0 * s, hi);
                    const bool last = e == hi;
                    if (last && at_end)
                        piece(p, s, e, right, false, true);
                    else if (e < hi || p + 2 >= j)
                        piece(p, s, e, gl16, false, false);
                    else
                        piece(p, s, e, gl8, false, false);
                    s = e;
                }
            }
        }
    }

    std::vector<double> grid_;
    double rho_;
    double nu_;
    std::vector<std::vector<double>> weights_;
};

/// Discrete d^rho on the sample grid (independent oracle, first order or better).
inline std::vector<double> gl_derivative_grid(const SingularFunctionSamples& s, double rho) {
    if (s.grid.size() < 8) throw InvalidArgument("gl_derivative_grid: need at least 8 grid points");
    GridDerivative d(s.grid, rho, s.singular_exponent);
    return d.apply(s.values);
}

/// Graded grid t_j = T (j/N)^{2/rho}, j = 1..N.
inline std::vector<double> graded_grid(double T, int N, double rho) {
    if (N < 1 || !(T > 0.0) || !(rho > 0.0)) throw InvalidArgument("graded_grid: invalid parameters");
    std::vector<double> t(N);
    for (int j = 1; j <= N; ++j) t[j - 1] = T * std::pow(static_cast<double>(j) / N, 2.0 / rho);
    return t;
}

}  // namespace fractel
