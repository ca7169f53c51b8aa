#pragma once

// Scalar fractional Cauchy problem
//   (d^rho)^2 y + 2 alpha d^rho y + lambda y = g(t),
//   lim J^{rho-1} d^rho y = phi0,  lim J^{rho-1} y = phi1,
// solved in closed form with Mittag-Leffler functions.
//
// A solution is kept as a linear combination of "atoms" (ML-type functions,
// powers of t, and convolutions of ML kernels with the source). Each atom has
// an exact rule for d^rho, so derivatives and residuals of the solution are
// available analytically.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "fractel/error.hpp"
#include "fractel/fracops.hpp"
#include "fractel/mlf.hpp"
#include "fractel/quadrature.hpp"

namespace fractel {

/// Relative width of the degenerate band: |alpha^2 - lambda| <= kDegeneracyRelTol * alpha^2.
inline constexpr double kDegeneracyRelTol = 1e-6;

/// Per-mode spectral quantities S-, S+ = alpha -/+ sqrt(alpha^2 - lambda), R^{-1}.
struct BranchPair {
    cplx s_minus;
    cplx s_plus;
    cplx r_inv;  // 1 / sqrt(alpha^2 - lambda); zero when degenerate
    bool degenerate = false;
};

/// Principal square root, sqrt(negative) = +i sqrt(|.|).
inline BranchPair branch_pair(double alpha, double lambda) {
    const double d = alpha * alpha - lambda;
    const cplx r = std::sqrt(cplx(d, 0.0));
    BranchPair b;
    b.s_minus = alpha - r;
    b.s_plus = alpha + r;
    b.degenerate = std::abs(d) <= kDegeneracyRelTol * alpha * alpha;
    b.r_inv = b.degenerate ? cplx{} : 1.0 / r;
    return b;
}

/// One power-law source term coeff * t^{beta-1}; beta >= rho keeps t^{1-rho} g bounded.
struct PowerTerm {
    double coeff = 0.0;
    double beta = 1.0;
};

/// Source g(t) = sum of power terms + an optional general callable.
/// The callable must make t^{1-rho} g continuous on [0, T].
struct Source {
    std::vector<PowerTerm> terms;
    std::function<double(double)> callable;

    bool has_callable() const { return static_cast<bool>(callable); }
    bool empty() const { return terms.empty() && !callable; }

    double operator()(double t) const {
        double v = 0.0;
        for (const PowerTerm& p : terms) v += p.coeff * std::pow(t, p.beta - 1.0);
        if (callable) v += callable(t);
        return v;
    }
};

/// Data of one scalar problem.
struct ModeParams {
    double rho = 0.5;
    double alpha = 1.0;
    double lambda = 0.0;
    double phi0 = 0.0;
    double phi1 = 0.0;
    Source source;
};

inline void validate(const ModeParams& p) {
    if (!(p.rho > 0.0) || !(p.rho < 1.0)) throw InvalidArgument("rho must lie in (0,1)");
    if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw InvalidArgument("alpha must be positive");
    if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) throw InvalidArgument("lambda must be non-negative");
    if (!std::isfinite(p.phi0) || !std::isfinite(p.phi1)) throw InvalidArgument("initial data must be finite");
    for (const PowerTerm& t : p.source.terms) {
        if (!std::isfinite(t.coeff)) throw InvalidArgument("source coefficient must be finite");
        if (!(t.beta >= p.rho)) throw InvalidArgument("source exponent beta must be >= rho");
    }
}

/// Kernel (t-tau)^{mu-1} E^gamma_{rho,mu}(rate (t-tau)^rho).
struct MLKernel {
    double rho = 0.5;
    double mu = 0.5;
    int gamma = 1;
    cplx rate{};
};

/// int_0^t (t-tau)^{mu-1} E^gamma_{rho,mu}(rate (t-tau)^rho) g(tau) dtau.
/// g may behave like tau^nu at 0 (nu > -1; default rho - 1).
template <class G>
cplx ml_convolve(const MLKernel& k, G&& g, double t, std::optional<double> nu = std::nullopt,
                 quad::ProductLayout layout = {}) {
    if (!(t > 0.0)) throw InvalidArgument("ml_convolve: t must be positive");
    if (!(k.mu > 0.0)) throw InvalidArgument("ml_convolve: mu must be positive");
    const double n = nu.value_or(k.rho - 1.0);
    if (!(n > -1.0)) throw InvalidArgument("ml_convolve: source is not integrable at 0");
    const quad::Rule& r = quad::product_rule(n, k.mu - 1.0, layout);
    cplx acc{};
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double x = r.nodes[i];
        const double tau = t * x;
        const double gv = g(tau);
        if (gv == 0.0) continue;
        if (!std::isfinite(gv)) throw InvalidArgument("ml_convolve: source is not finite on (0, t)");
        const double h = gv * std::pow(tau, -n);
        const double lag = t * r.complements[i];
        const cplx e = prabhakar(k.rho, k.mu, k.gamma, k.rate * std::pow(lag, k.rho));
        acc += r.weights[i] * h * e;
    }
    return acc * std::pow(t, n + k.mu);
}

/// Building blocks of closed-form solutions.
enum class AtomKind {
    ML,         // t^{mu-1} E_{rho,mu}(-s t^rho)
    Prabhakar,  // t^{mu-1} E^2_{rho,mu}(-s t^rho)
    Power,      // t^{mu-1}
    ConvML,     // (t^{rho-1} E_{rho,rho}(-s t^rho)) * g
    ConvPrab,   // (t^{2rho-1} E^2_{rho,2rho}(-s t^rho)) * g
    Source,     // g (callable part)
};

struct Atom {
    AtomKind kind;
    cplx coeff;
    cplx s{};
    double mu = 0.0;
};

/// Linear combination of atoms for a fixed rho and callable source.
class Expansion {
public:
    Expansion() = default;
    Expansion(double rho, std::function<double(double)> callable)
        : rho_(rho), callable_(std::move(callable)) {}

    double rho() const { return rho_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    /// Adds c * atom, merging with an existing atom of the same shape.
    void add(AtomKind kind, cplx c, cplx s = {}, double mu = 0.0) {
        if (c == cplx{}) return;
        if ((kind == AtomKind::ConvML || kind == AtomKind::ConvPrab || kind == AtomKind::Source) && !callable_)
            return;
        for (Atom& a : atoms_) {
            if (a.kind == kind && std::abs(a.s - s) <= 1e-14 * (1.0 + std::abs(s)) &&
                std::abs(a.mu - mu) <= 1e-12) {
                a.coeff += c;
                return;
            }
        }
        atoms_.push_back({kind, c, s, mu});
    }

    void add(const Expansion& other, cplx scale = 1.0) {
        for (const Atom& a : other.atoms_) add(a.kind, scale * a.coeff, a.s, a.mu);
    }

    /// d^rho of the combination, applied atom by atom.
    Expansion derivative() const {
        Expansion d(rho_, callable_);
        for (const Atom& a : atoms_) {
            if (a.coeff == cplx{}) continue;  // cancelled during merging
            switch (a.kind) {
                case AtomKind::ML:
                    d.add(AtomKind::Power, a.coeff * rgamma(a.mu - rho_), {}, a.mu - rho_);
                    d.add(AtomKind::ML, -a.s * a.coeff, a.s, a.mu);
                    break;
                case AtomKind::Prabhakar:
                    d.add(AtomKind::Power, a.coeff * rgamma(a.mu - rho_), {}, a.mu - rho_);
                    d.add(AtomKind::Prabhakar, -a.s * a.coeff, a.s, a.mu);
                    d.add(AtomKind::ML, -a.s * a.coeff, a.s, a.mu);
                    break;
                case AtomKind::Power:
                    if (!(a.mu > 0.0)) throw StateError("d^rho of a non-integrable power of t");
                    // d^rho t^{mu-1} = Gamma(mu)/Gamma(mu-rho) t^{mu-rho-1}
                    d.add(AtomKind::Power, a.coeff * std::tgamma(a.mu) * rgamma(a.mu - rho_), {}, a.mu - rho_);
                    break;
                case AtomKind::ConvML:
                    d.add(AtomKind::Source, a.coeff);
                    d.add(AtomKind::ConvML, -a.s * a.coeff, a.s);
                    break;
                case AtomKind::ConvPrab:
                    d.add(AtomKind::ConvML, a.coeff, a.s);
                    d.add(AtomKind::ConvPrab, -a.s * a.coeff, a.s);
                    break;
                case AtomKind::Source:
                    throw StateError("derivative of a general source term is not available");
            }
        }
        return d;
    }

    /// t^{1-rho} times the combination at t (complex; imaginary part is round-off for real data).
    cplx regularized(double t) const {
        cplx acc{};
        const double reg = std::pow(t, 1.0 - rho_);
        const double tr = std::pow(t, rho_);
        for (const Atom& a : atoms_) {
            switch (a.kind) {
                case AtomKind::ML:
                    acc += a.coeff * std::pow(t, a.mu - rho_) * mittag_leffler(rho_, a.mu, -a.s * tr);
                    break;
                case AtomKind::Prabhakar:
                    acc += a.coeff * std::pow(t, a.mu - rho_) * prabhakar(rho_, a.mu, 2, -a.s * tr);
                    break;
                case AtomKind::Power:
                    acc += a.coeff * std::pow(t, a.mu - rho_);
                    break;
                case AtomKind::ConvML:
                    acc += a.coeff * reg * ml_convolve({rho_, rho_, 1, -a.s}, callable_, t);
                    break;
                case AtomKind::ConvPrab:
                    acc += a.coeff * reg * ml_convolve({rho_, 2.0 * rho_, 2, -a.s}, callable_, t);
                    break;
                case AtomKind::Source:
                    acc += a.coeff * reg * callable_(t);
                    break;
            }
        }
        return acc;
    }

    /// The combination itself at t > 0.
    cplx operator()(double t) const { return regularized(t) * std::pow(t, rho_ - 1.0); }

private:
    double rho_ = 0.5;
    std::function<double(double)> callable_;
    std::vector<Atom> atoms_;
};

/// Closed-form solution of one scalar problem.
struct ScalarSolution {
    ModeParams params;
    BranchPair branches;
    Expansion y;

    /// Branch used: false for y1 (distinct roots), true for y2 (double root).
    bool degenerate_branch() const { return branches.degenerate; }
};

/// Builds the closed form: y1 when alpha^2 != lambda, y2 inside the degenerate band.
inline ScalarSolution solve_scalar(const ModeParams& p) {
    validate(p);
    const double rho = p.rho;
    ScalarSolution sol{p, branch_pair(p.alpha, p.lambda), Expansion(rho, p.source.callable)};
    Expansion& y = sol.y;
    const BranchPair& b = sol.branches;

    if (!b.degenerate) {
        const cplx r = 0.5 * (b.s_plus - b.s_minus);
        const cplx half_rinv = 0.5 * b.r_inv;
        const cplx a_minus = ((p.alpha + r) * p.phi1 + p.phi0) * half_rinv;
        const cplx a_plus = ((r - p.alpha) * p.phi1 - p.phi0) * half_rinv;
        y.add(AtomKind::ML, a_minus, b.s_minus, rho);
        y.add(AtomKind::ML, a_plus, b.s_plus, rho);
        // (1/2r) [e(S-) - e(S+)] * g
        for (const PowerTerm& q : p.source.terms) {
            const cplx c = half_rinv * q.coeff * std::tgamma(q.beta);
            y.add(AtomKind::ML, c, b.s_minus, rho + q.beta);
            y.add(AtomKind::ML, -c, b.s_plus, rho + q.beta);
        }
        y.add(AtomKind::ConvML, half_rinv, b.s_minus);
        y.add(AtomKind::ConvML, -half_rinv, b.s_plus);
    } else {
        // double root at p^rho = -alpha
        const double a = p.alpha;
        y.add(AtomKind::ML, p.phi1, a, rho);
        y.add(AtomKind::Prabhakar, a * p.phi1 + p.phi0, a, 2.0 * rho);
        for (const PowerTerm& q : p.source.terms)
            y.add(AtomKind::Prabhakar, q.coeff * std::tgamma(q.beta), a, 2.0 * rho + q.beta);
        y.add(AtomKind::ConvPrab, 1.0, a);
    }
    return sol;
}

/// Limit extraction options scaled to a mode: the samples start where
/// (alpha + sqrt(lambda)) t^rho is small, so the small-t expansion has settled.
inline LimitOptions limit_options(double rho, double rate, LimitOptions base = {}) {
    base.t0 = std::min(base.t0, std::pow(1e-3 / std::max(rate, 1.0), 1.0 / rho));
    return base;
}

inline LimitOptions limit_options(const ModeParams& p, LimitOptions base = {}) {
    return limit_options(p.rho, p.alpha + std::sqrt(p.lambda), base);
}

/// Samples of t^{1-rho} y(t) on a time grid.
struct ModeTrajectory {
    std::vector<double> grid;
    std::vector<double> w;       // t^{1-rho} y, real part
    double max_imag = 0.0;       // largest |imaginary part| discarded
    bool degenerate = false;
};

inline ModeTrajectory sample_regularized(const Expansion& e, const std::vector<double>& grid) {
    ModeTrajectory tr;
    tr.grid = grid;
    tr.w.reserve(grid.size());
    for (double t : grid) {
        if (!(t > 0.0)) throw InvalidArgument("time grid must lie in (0, T]");
        const cplx v = e.regularized(t);
        tr.w.push_back(v.real());
        tr.max_imag = std::max(tr.max_imag, std::abs(v.imag()));
    }
    return tr;
}

/// solve_scalar sampled on a grid: returns t^{1-rho} y(t).
inline ModeTrajectory solve_scalar(const ModeParams& p, const std::vector<double>& grid) {
    const ScalarSolution s = solve_scalar(p);
    ModeTrajectory tr = sample_regularized(s.y, grid);
    tr.degenerate = s.branches.degenerate;
    return tr;
}

/// t^{1-rho} times the residual (d^rho)^2 y + 2 alpha d^rho y + lambda y - g,
/// evaluated from the analytic derivative rules.
inline Expansion residual_expansion(const ScalarSolution& s) {
    const Expansion d1 = s.y.derivative();
    Expansion r = d1.derivative();
    r.add(d1, 2.0 * s.params.alpha);
    r.add(s.y, s.params.lambda);
    for (const PowerTerm& q : s.params.source.terms) r.add(AtomKind::Power, -q.coeff, {}, q.beta);
    r.add(AtomKind::Source, -1.0);
    return r;
}

}  // namespace fractel
