#pragma once

// Two-parameter Mittag-Leffler function E_{rho,mu}(z) and the three-parameter
// (Prabhakar) function E^gamma_{rho,mu}(z), gamma in {1, 2}.
//
// Evaluation paths:
//   * |z| <= 1: Taylor series, Neumaier-compensated.
//   * rho == 1 with integer mu <= 1: closed form z^{1-mu} e^z.
//   * otherwise: inversion of the Laplace transform s^{rho-mu} / (s^rho - z)
//     on an optimal parabolic contour, with the residues of the poles that
//     lie to the right of the contour added explicitly.
//
// E(conj z) = conj E(z) is enforced by evaluating in the upper half plane.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "fractel/error.hpp"

namespace fractel {

using cplx = std::complex<double>;

/// Parameter bundle for one Mittag-Leffler / Prabhakar evaluation.
struct MLQuery {
    double rho = 1.0;
    double mu = 1.0;
    int gamma = 1;
    cplx z{};
};

struct MLResult {
    cplx value;
    double error_estimate;  // absolute
};

/// 1/Gamma(x), with the value 0 at the poles x = 0, -1, -2, ...
inline double rgamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x > 171.0) return 0.0;
    return 1.0 / std::tgamma(x);
}

namespace detail {

struct Neumaier {
    cplx sum{};
    cplx comp{};
    void add(cplx v) {
        auto step = [](double& s, double& c, double x) {
            const double t = s + x;
            if (std::abs(s) >= std::abs(x))
                c += (s - t) + x;
            else
                c += (x - t) + s;
            s = t;
        };
        double sr = sum.real(), si = sum.imag(), cr = comp.real(), ci = comp.imag();
        step(sr, cr, v.real());
        step(si, ci, v.imag());
        sum = {sr, si};
        comp = {cr, ci};
    }
    cplx value() const { return sum + comp; }
};

inline MLResult ml_series(double rho, double mu, cplx z) {
    Neumaier acc;
    double abs_sum = 0.0;
    cplx zk{1.0, 0.0};
    int small_run = 0;
    constexpr int kMaxTerms = 20000;
    for (int k = 0; k < kMaxTerms; ++k) {
        const cplx term = zk * rgamma(rho * k + mu);
        acc.add(term);
        abs_sum += std::abs(term);
        const double mag = std::abs(term);
        // once Gamma is increasing the terms decay monotonically
        if (rho * k + mu > 2.0 && mag <= 1e-18 * std::abs(acc.value())) {
            if (++small_run >= 3) break;
        } else if (rho * k + mu > 2.0 && mag == 0.0) {
            if (++small_run >= 3) break;
        } else {
            small_run = 0;
        }
        zk *= z;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    return {acc.value(), 4.0 * eps * abs_sum};
}

struct ContourParams {
    double mu = 0.0;
    double h = 0.0;
    double N = std::numeric_limits<double>::infinity();
};

constexpr double kLogEps = -36.043653389117154;  // log(2^-52)

// Parameters for a region bounded on both sides by singularities.
inline ContourParams optimal_param_rb(double t, double phi_j, double phi_j1, double pj,
                                      double qj, double log_epsilon) {
    constexpr double fac = 1.01;
    const double f_max = std::exp(log_epsilon - kLogEps);
    const double sq_phi_j = std::sqrt(phi_j);
    const double threshold = 2.0 * std::sqrt((log_epsilon - kLogEps) / t);
    const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);

    double sq_bar_j = 0.0, sq_bar_j1 = 0.0, f_bar = 1.0;
    bool admissible = false;
    if (pj < 1e-14 && qj < 1e-14) {
        sq_bar_j = sq_phi_j;
        sq_bar_j1 = sq_phi_j1;
        admissible = true;
    } else if (pj < 1e-14) {
        sq_bar_j = sq_phi_j;
        const double f_min =
            sq_phi_j > 0.0 ? fac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), qj) : fac;
        if (f_min < f_max) {
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fq = std::pow(f_bar, -1.0 / qj);
            sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
            admissible = true;
        }
    } else if (qj < 1e-14) {
        sq_bar_j1 = sq_phi_j1;
        const double f_min = fac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), pj);
        if (f_min < f_max) {
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fp = std::pow(f_bar, -1.0 / pj);
            sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
            admissible = true;
        }
    } else {
        double f_min = fac * (sq_phi_j + sq_phi_j1) /
                       std::pow(sq_phi_j1 - sq_phi_j, std::max(pj, qj));
        if (f_min < f_max) {
            f_min = std::max(f_min, 1.5);
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fp = std::pow(f_bar, -1.0 / pj);
            const double fq = std::pow(f_bar, -1.0 / qj);
            const double w = -phi_j1 * t / log_epsilon;
            const double den = 2.0 + w - (1.0 + w) * fp + fq;
            sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
            sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
            admissible = true;
        }
    }
    ContourParams out;
    if (!admissible) return out;
    const double log_eps_eff = log_epsilon - std::log(f_bar);
    const double w = -sq_bar_j1 * sq_bar_j1 * t / log_eps_eff;
    const double num = (1.0 + w) * sq_bar_j + sq_bar_j1;
    out.mu = std::pow(num / (2.0 + w), 2);
    out.h = -2.0 * std::numbers::pi / log_eps_eff * (sq_bar_j1 - sq_bar_j) / num;
    out.N = std::ceil(std::sqrt(1.0 - log_eps_eff / t / out.mu) / out.h);
    if (!(out.h > 0.0) || !std::isfinite(out.N)) out.N = std::numeric_limits<double>::infinity();
    return out;
}

// Parameters for the unbounded region to the right of the last singularity.
inline ContourParams optimal_param_ru(double t, double phi_j, double pj, double log_epsilon) {
    const double sq_phi_j = std::sqrt(phi_j);
    double phibar = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
    double sq_phibar = std::sqrt(phibar);
    constexpr double f_min = 1.0, f_max = 10.0, f_tar = 5.0;

    double N = 0.0, A = 0.0, sq_mu = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double phi_t = phibar * t;
        const double log_eps_phi_t = log_epsilon / phi_t;
        N = std::ceil(phi_t / std::numbers::pi *
                      (1.0 - 1.5 * log_eps_phi_t + std::sqrt(1.0 - 2.0 * log_eps_phi_t)));
        A = std::numbers::pi * N / phi_t;
        sq_mu = sq_phibar * std::abs(4.0 - A) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * A));
        const double fbar = std::pow((sq_phibar - sq_phi_j) / sq_mu, -pj);
        if (pj < 1e-14 || (f_min < fbar && fbar < f_max)) break;
        sq_phibar = std::pow(f_tar, -1.0 / pj) * sq_mu + sq_phi_j;
        phibar = sq_phibar * sq_phibar;
    }
    ContourParams out;
    out.mu = sq_mu * sq_mu;
    out.h = (-3.0 * A - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * A)) / (4.0 - A) / N;
    out.N = N;

    // keep round-off under control
    const double threshold = (log_epsilon - kLogEps) / t;
    if (out.mu > threshold) {
        const double Q = std::abs(pj) < 1e-14 ? 0.0 : std::pow(f_tar, -1.0 / pj) * std::sqrt(out.mu);
        phibar = std::pow(Q + sq_phi_j, 2);
        if (phibar < threshold) {
            const double w = std::sqrt(kLogEps / (kLogEps - log_epsilon));
            const double u = std::sqrt(-phibar * t / kLogEps);
            out.mu = threshold;
            out.N = std::ceil(w * log_epsilon / 2.0 / std::numbers::pi / (u * w - 1.0));
            out.h = std::sqrt(kLogEps / (kLogEps - log_epsilon)) / out.N;
        } else {
            out.N = std::numeric_limits<double>::infinity();
            out.h = 0.0;
        }
    }
    return out;
}

// E_{rho,mu}(z) as the inverse Laplace transform of s^{rho-mu}/(s^rho - z) at t = 1.
inline MLResult ml_contour(double rho, double mu, cplx z) {
    constexpr double t = 1.0;
    const double pi = std::numbers::pi;
    double log_epsilon = std::log(1e-15);
    const double log_epsilon0 = log_epsilon;

    const double theta = std::arg(z);
    const int kmin = static_cast<int>(std::ceil(-rho / 2.0 - theta / (2.0 * pi)));
    const int kmax = static_cast<int>(std::floor(rho / 2.0 - theta / (2.0 * pi)));
    std::vector<cplx> poles;
    for (int k = kmin; k <= kmax; ++k)
        poles.push_back(std::pow(std::abs(z), 1.0 / rho) *
                        std::exp(cplx(0.0, (theta + 2.0 * k * pi) / rho)));
    auto phi_of = [](cplx s) { return 0.5 * (s.real() + std::abs(s)); };
    std::sort(poles.begin(), poles.end(),
              [&](cplx a, cplx b) { return phi_of(a) < phi_of(b); });
    // poles on the negative real axis sit on the branch cut and are enclosed
    std::erase_if(poles, [&](cplx s) { return !(phi_of(s) > 1e-15); });

    std::vector<cplx> sing{cplx{0.0, 0.0}};
    sing.insert(sing.end(), poles.begin(), poles.end());
    const std::size_t J1 = sing.size();
    std::vector<double> phi(J1 + 1);
    for (std::size_t j = 0; j < J1; ++j) phi[j] = phi_of(sing[j]);
    phi[J1] = std::numeric_limits<double>::infinity();
    std::vector<double> p(J1, 1.0), q(J1, 1.0);
    p[0] = std::max(0.0, -2.0 * (rho - mu + 1.0));
    q[J1 - 1] = std::numeric_limits<double>::infinity();

    ContourParams best;
    std::size_t best_region = 0;
    for (int relax = 0; relax < 12; ++relax) {
        best = ContourParams{};
        for (std::size_t j = 0; j < J1; ++j) {
            if (!(phi[j] < (log_epsilon - kLogEps) / t) || !(phi[j] < phi[j + 1])) continue;
            const ContourParams c = j + 1 < J1
                                        ? optimal_param_rb(t, phi[j], phi[j + 1], p[j], q[j], log_epsilon)
                                        : optimal_param_ru(t, phi[j], p[j], log_epsilon);
            if (c.N < best.N) {
                best = c;
                best_region = j;
            }
        }
        if (best.N <= 200.0) break;
        log_epsilon += std::log(10.0);
    }
    if (!(best.N <= 200.0))
        throw AccuracyFailure("mittag_leffler: no admissible integration contour",
                              std::exp(log_epsilon));

    const int N = static_cast<int>(best.N);
    cplx integral{};
    double abs_sum = 0.0;
    for (int k = -N; k <= N; ++k) {
        const double u = best.h * k;
        const cplx zc = best.mu * cplx(1.0 - u * u, 2.0 * u);  // mu (i u + 1)^2
        const cplx zd{-2.0 * best.mu * u, 2.0 * best.mu};
        const cplx F = std::pow(zc, rho - mu) / (std::pow(zc, rho) - z) * zd;
        const cplx S = std::exp(zc * t) * F;
        integral += S;
        abs_sum += std::abs(S);
    }
    integral *= best.h / (2.0 * pi * cplx(0.0, 1.0));
    abs_sum *= best.h / (2.0 * pi);

    cplx residues{};
    for (std::size_t j = best_region + 1; j < J1; ++j)
        residues += std::pow(sing[j], 1.0 - mu) * std::exp(t * sing[j]) / rho;

    const double eps = std::numeric_limits<double>::epsilon();
    const double err = 8.0 * eps * (abs_sum + std::abs(residues)) +
                       (log_epsilon > log_epsilon0 ? std::exp(log_epsilon) : 0.0);
    const cplx value = integral + residues;
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
        throw AccuracyFailure("mittag_leffler: value overflows double precision", err);
    return {value, err};
}

inline void check_query(double rho, cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw InvalidArgument("mittag_leffler: argument must be finite");
    if (!(rho > 0.0) || !(rho <= 1.0))
        throw InvalidArgument("mittag_leffler: rho must lie in (0, 1]");
}

inline MLResult ml_upper(double rho, double mu, cplx z) {
    if (z == cplx{}) return {rgamma(mu), 0.0};
    if (rho == 1.0 && mu <= 1.0 && mu == std::floor(mu)) {
        // E_{1,mu}(z) = z^{1-mu} e^z for mu = 1, 0, -1, ...
        const int m = static_cast<int>(1.0 - mu);
        cplx zp{1.0, 0.0};
        for (int i = 0; i < m; ++i) zp *= z;
        const cplx v = zp * std::exp(z);
        return {v, 2.0 * std::numeric_limits<double>::epsilon() * std::abs(v) * (1 + m)};
    }
    if (std::abs(z) <= 1.0) return ml_series(rho, mu, z);
    return ml_contour(rho, mu, z);
}

}  // namespace detail

/// E_{rho,mu}(z) for rho in (0, 1] and real mu. Requires q.gamma == 1.
inline MLResult ml_eval(const MLQuery& q) {
    if (q.gamma != 1) throw InvalidArgument("ml_eval: gamma must be 1 (use prabhakar_eval)");
    detail::check_query(q.rho, q.z);
    if (q.z.imag() < 0.0) {
        MLResult r = detail::ml_upper(q.rho, q.mu, std::conj(q.z));
        r.value = std::conj(r.value);
        return r;
    }
    MLResult r = detail::ml_upper(q.rho, q.mu, q.z);
    if (q.z.imag() == 0.0) r.value = {r.value.real(), 0.0};
    return r;
}

/// E^gamma_{rho,mu}(z), gamma in {1, 2}. For gamma = 2 the reduction
///   E^2_{rho,mu}(z) = ( E_{rho,mu-1}(z) + (1 + rho - mu) E_{rho,mu}(z) ) / rho
/// is applied to two two-parameter evaluations.
inline MLResult prabhakar_eval(const MLQuery& q) {
    if (q.gamma == 1) return ml_eval(q);
    if (q.gamma != 2) throw InvalidArgument("prabhakar_eval: gamma must be 1 or 2");
    detail::check_query(q.rho, q.z);
    const MLResult lo = ml_eval({q.rho, q.mu - 1.0, 1, q.z});
    const MLResult hi = ml_eval({q.rho, q.mu, 1, q.z});
    const double c = 1.0 + q.rho - q.mu;
    return {(lo.value + c * hi.value) / q.rho,
            (lo.error_estimate + std::abs(c) * hi.error_estimate) / q.rho};
}

inline cplx mittag_leffler(double rho, double mu, cplx z) { return ml_eval({rho, mu, 1, z}).value; }

inline cplx prabhakar(double rho, double mu, int gamma, cplx z) {
    return prabhakar_eval({rho, mu, gamma, z}).value;
}

/// Leading terms of the large-|z| expansion valid in the sector
/// beta <= |arg z| <= pi, pi rho / 2 < beta < pi rho:
///   E_{rho,mu}(z) ~ - sum_{k=1}^{terms} z^{-k} / Gamma(mu - rho k).
/// Used as a cross-check only.
inline cplx ml_asymptotic(double rho, double mu, cplx z, int terms = 1) {
    cplx acc{};
    cplx zk = 1.0 / z;
    for (int k = 1; k <= terms; ++k) {
        acc -= zk * rgamma(mu - rho * k);
        zk /= z;
    }
    return acc;
}

}  // namespace fractel
