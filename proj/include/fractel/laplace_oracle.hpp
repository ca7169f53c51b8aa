#pragma once

// Independent check of the closed forms: the Laplace transform of the scalar
// problem is rational in p^rho,
//   Y(p) = (G(p) + p^rho phi1 + phi0 + 2 alpha phi1) / (p^{2 rho} + 2 alpha p^rho + lambda),
// and is inverted numerically on a Talbot contour.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "fractel/error.hpp"
#include "fractel/mlf.hpp"
#include "fractel/scalar_cauchy.hpp"

namespace fractel {

/// Simple pole of a transform on the principal sheet.
struct SimplePole {
    cplx location;
    cplx residue;
};

/// A Laplace-domain function together with its poles off the branch cut.
struct LaplaceSymbol {
    std::function<cplx(cplx)> eval;
    std::vector<SimplePole> poles;
    double abscissa = 0.0;  // every singularity has real part <= abscissa

    cplx operator()(cplx p) const { return eval(p); }
};

/// Transform of the solution of the scalar problem; `order` = 0, 1, 2 gives the
/// transform of y, d^rho y or (d^rho)^2 y.
inline LaplaceSymbol laplace_symbol(const ModeParams& m, int order = 0) {
    validate(m);
    if (m.source.has_callable())
        throw UnsupportedInput("laplace_symbol: only power-law sources have a closed-form transform");
    if (order < 0 || order > 2) throw InvalidArgument("laplace_symbol: order must be 0, 1 or 2");

    const double rho = m.rho, alpha = m.alpha, lambda = m.lambda;
    const double phi0 = m.phi0, phi1 = m.phi1;
    std::vector<std::pair<double, double>> g;  // (coeff * Gamma(beta), beta)
    for (const PowerTerm& q : m.source.terms) g.emplace_back(q.coeff * std::tgamma(q.beta), q.beta);
    const BranchPair b = branch_pair(alpha, lambda);
    const bool degenerate = b.degenerate;

    auto numerator = [=](cplx p, cplx q) {
        cplx gh{};
        for (const auto& [c, beta] : g) gh += c * std::pow(p, -beta);
        return gh + q * phi1 + phi0 + 2.0 * alpha * phi1;
    };
    auto transform = [=](cplx p) {
        const cplx q = std::pow(p, rho);
        const cplx den = degenerate ? (q + alpha) * (q + alpha) : q * q + 2.0 * alpha * q + lambda;
        cplx y = numerator(p, q) / den;
        // L[d^rho f] = p^rho L[f] - lim J^{rho-1} f
        if (order >= 1) y = q * y - phi1;
        if (order >= 2) y = q * y - phi0;
        return y;
    };

    LaplaceSymbol sym;
    sym.eval = transform;
    if (!degenerate) {
        // q = p^rho = -S has a solution on the principal sheet iff |arg(-S)| < rho pi
        for (int branch = 0; branch < 2; ++branch) {
            const cplx s = branch == 0 ? b.s_minus : b.s_plus;
            const cplx other = branch == 0 ? b.s_plus : b.s_minus;
            const cplx q = -s;
            if (!(std::abs(std::arg(q)) < rho * std::numbers::pi)) continue;
            const cplx p = std::pow(q, 1.0 / rho);
            // d/dp (q + S)(q + S') = (S' - S) rho q / p at the root
            cplx res = numerator(p, q) * p / ((other - s) * rho * q);
            for (int k = 0; k < order; ++k) res *= q;
            sym.poles.push_back({p, res});
            sym.abscissa = std::max(sym.abscissa, p.real());
        }
    }
    return sym;
}

/// Options of the Talbot inversion.
struct TalbotOptions {
    int nodes = 64;
    double scale = 24.0;  // contour size in units of 1/t
};

namespace detail {

// Weideman-Trefethen cotangent contour z(theta) = (c/t) (a0 + a1 theta cot(a2 theta) + i a3 theta).
inline constexpr double kTa0 = -0.6122, kTa1 = 0.5017, kTa2 = 0.6407, kTa3 = 0.2645;

inline cplx talbot_point(double c, double t, double th) {
    if (th == 0.0) return (c / t) * cplx(kTa0 + kTa1 / kTa2, 0.0);
    return (c / t) * cplx(kTa0 + kTa1 * th / std::tan(kTa2 * th), kTa3 * th);
}

inline cplx talbot_slope(double c, double t, double th) {
    if (th == 0.0) return (c / t) * cplx(0.0, kTa3);
    const double s = std::sin(kTa2 * th);
    return (c / t) * cplx(kTa1 / std::tan(kTa2 * th) - kTa1 * kTa2 * th / (s * s), kTa3);
}

}  // namespace detail

/// Inverse Laplace transform at t > 0 by the midpoint rule on a Talbot contour
/// over theta in (-pi, pi). Simple poles of F are split off first,
///   F(p) = [F(p) - sum res / (p - p*)] + sum res / (p - p*),
/// so the contour only has to wrap the branch cut, and each pole contributes
/// res * exp(p* t) exactly.
inline double talbot_invert(const LaplaceSymbol& F, double t, TalbotOptions opt = {}) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("talbot_invert: t must be positive");
    if (opt.nodes < 8) throw InvalidArgument("talbot_invert: need at least 8 nodes");
    if (!(opt.scale > 0.0)) throw InvalidArgument("talbot_invert: contour scale must be positive");

    const int n = opt.nodes;
    const double h = 2.0 * std::numbers::pi / n;
    cplx acc{};
    for (int k = 0; k < n; ++k) {
        const double th = -std::numbers::pi + (k + 0.5) * h;
        const cplx z = detail::talbot_point(opt.scale, t, th);
        const cplx dz = detail::talbot_slope(opt.scale, t, th);
        cplx f = F(z);
        for (const SimplePole& pl : F.poles) f -= pl.residue / (z - pl.location);
        acc += std::exp(z * t) * f * dz;
    }
    acc *= h / (2.0 * std::numbers::pi * cplx(0.0, 1.0));
    for (const SimplePole& pl : F.poles) acc += pl.residue * std::exp(pl.location * t);
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
        throw AccuracyFailure("talbot_invert: contour sum overflowed", INFINITY);
    return acc.real();
}

}  // namespace fractel
