#pragma once

// Gauss-Jacobi rules and the graded product rule used for weakly singular
// integrals of the form  int_0^t xi^a (t - xi)^b h(xi) dxi.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fractel/error.hpp"

namespace fractel::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> complements;  // 1 - node without cancellation (product rules only)
};

namespace detail {

// Golub-Welsch for the weight (1-x)^a (1+x)^b on [-1, 1].
inline Rule golub_welsch_jacobi(int n, double a, double b) {
    if (n < 1) throw InvalidArgument("gauss_jacobi: need at least one node");
    if (!(a > -1.0) || !(b > -1.0))
        throw InvalidArgument("gauss_jacobi: exponents must exceed -1");

    const double ab = a + b;
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n > 1 ? n - 1 : 1);
    diag(0) = (b - a) / (ab + 2.0);
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        diag(k) = (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        double beta;
        if (k == 1) {
            // closed form with the (1 + a + b) factor cancelled
            beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        } else {
            const double s = 2.0 * k + ab;
            beta = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
        }
        sub(k - 1) = std::sqrt(beta);
    }
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                                std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));

    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    if (n == 1) {
        r.nodes[0] = diag(0);
        r.weights[0] = mu0;
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v0 * v0;
    }
    return r;
}

}  // namespace detail

/// Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^a (1+x)^b. Cached per (n, a, b).
inline const Rule& gauss_jacobi(int n, double a, double b) {
    static std::mutex mtx;
    static std::map<std::tuple<int, double, double>, Rule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(n, a, b);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, detail::golub_welsch_jacobi(n, a, b)).first;
    return it->second;
}

inline const Rule& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

/// Layout of the graded product rule.
struct ProductLayout {
    int nodes_per_panel = 16;
    int levels = 14;      // minimum number of geometric panels toward each endpoint
    double ratio = 0.2;   // size ratio between neighbouring panels
};

namespace detail {

// Panels toward an endpoint with exponent e. The end panel carries mass
// ~ size^{e+1} and the interior factor is only polynomial to leading order
// there, so it is pushed down until size^{e+1} ~ 1e-15.
inline int graded_levels(double e, const ProductLayout& layout) {
    const double per_level = (std::min(e, 0.0) + 1.0) * -std::log10(layout.ratio);
    const int need = static_cast<int>(std::ceil(15.0 / per_level));
    return std::clamp(need, layout.levels, 400);
}

}  // namespace detail

/// Rule on [0, 1] for int_0^1 xi^a (1 - xi)^b h(xi) dxi: the weights already
/// contain both power factors, so the caller only samples h.
///
/// Panels are graded geometrically toward both endpoints; the two end panels
/// use Gauss-Jacobi so the power singularities are integrated exactly, the
/// rest use Gauss-Legendre. Cached per (a, b, layout).
inline const Rule& product_rule(double a, double b, ProductLayout layout = {}) {
    static std::mutex mtx;
    static std::map<std::tuple<double, double, int, int, double>, Rule> cache;
    const auto key = std::make_tuple(a, b, layout.nodes_per_panel, layout.levels, layout.ratio);
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    if (!(a > -1.0) || !(b > -1.0))
        throw InvalidArgument("product_rule: exponents must exceed -1");

    const int n = layout.nodes_per_panel;
    const Rule& gl = gauss_legendre(n);
    Rule out;
    // e = exponent at the near end, f = exponent at the far end. Breakpoints on
    // [0, 1/2] are measured from the near end; the right half is built in
    // distance-to-1 coordinates so 1 - x never suffers cancellation.
    auto half_rule = [&](double e, double f, bool mirror) {
        const int levels = detail::graded_levels(e, layout);
        std::vector<double> d{0.0};
        for (int i = levels - 1; i >= 0; --i) d.push_back(0.5 * std::pow(layout.ratio, i));
        const Rule& jac = gauss_jacobi(n, 0.0, e);  // (1+x)^e, singular end at the panel start
        for (std::size_t i = 0; i + 1 < d.size(); ++i) {
            const double lo = d[i], hi = d[i + 1];
            const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            const bool end_panel = i == 0;
            const Rule& base = end_panel ? jac : gl;
            for (int k = 0; k < n; ++k) {
                const double y = mid + half * base.nodes[k];  // distance from the near end
                double w = base.weights[k];
                if (end_panel)
                    w *= std::pow(half, e + 1.0);
                else
                    w *= half * std::pow(y, e);
                w *= std::pow(1.0 - y, f);
                out.nodes.push_back(mirror ? 1.0 - y : y);
                out.complements.push_back(mirror ? y : 1.0 - y);
                out.weights.push_back(w);
            }
        }
    };
    half_rule(a, b, false);
    half_rule(b, a, true);

    std::lock_guard<std::mutex> lock(mtx);
    return cache.emplace(key, std::move(out)).first->second;
}

/// int_0^t xi^a (t - xi)^b h(xi) dxi with the graded product rule.
template <class H>
auto integrate_singular(H&& h, double t, double a, double b, ProductLayout layout = {}) {
    const Rule& r = product_rule(a, b, layout);
    using R = decltype(h(t));
    R acc{};
    // fixed node order keeps results bitwise reproducible
    for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * h(t * r.nodes[i]);
    return acc * std::pow(t, 1.0 + a + b);
}

}  // namespace fractel::quad
