#pragma once

// Test-only reference values: direct summation of
//   sum_k c_k z^k / Gamma(rho k + mu),  c_k = (gamma)_k / k!,
// in MPFR arithmetic with enough bits to absorb the cancellation of the
// alternating terms. rho must be a rational p/q so that Gamma(rho k + mu) can be
// propagated with the recurrence Gamma(x + 1) = x Gamma(x) along residue classes.

#include <cmath>
#include <complex>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

namespace fractel::test {

struct Rational {
    int p;
    int q;
    double value() const { return static_cast<double>(p) / q; }
};

inline std::complex<double> prabhakar_series_mp(Rational rho, double mu, int gamma,
                                                std::complex<double> z) {
    namespace mp = boost::multiprecision;
    using mpf = mp::mpfr_float;

    const double r = rho.value();
    const double absz = std::abs(z);
    // log of the largest term, to size the working precision
    double log_max = 0.0;
    int k_stop = 50;
    if (absz > 0.0) {
        for (int k = 0; k < 200000; ++k) {
            const double x = r * k + mu;
            if (x <= 0.0) continue;
            const double lt = k * std::log(absz) - std::lgamma(x) + std::log(k + 1.0);
            log_max = std::max(log_max, lt);
            // the sum itself can be far smaller than the largest term, so stop on an
            // absolute threshold
            if (x > 2.0 && lt < -120.0) {
                k_stop = k + 1;
                break;
            }
        }
    }
    const unsigned digits = static_cast<unsigned>(log_max / std::log(10.0)) + 60;
    mpf::default_precision(digits);

    const mpf rr = mpf(rho.p) / rho.q;
    const mpf mm(mu);
    const mpf zr(z.real()), zi(z.imag());

    auto rgamma_mp = [](const mpf& x) -> mpf {
        if (x <= 0 && x == floor(x)) return mpf(0);
        return 1 / tgamma(x);
    };

    // reciprocal gamma per residue class, advanced by p each time k grows by q
    std::vector<mpf> rg(rho.q);
    std::vector<bool> have(rho.q, false);
    mpf sr(0), si(0);
    mpf pr(1), pi(0);  // z^k
    mpf coeff(1);      // (gamma)_k / k!
    for (int k = 0; k < k_stop; ++k) {
        const int res = k % rho.q;
        const mpf x = rr * k + mm;
        mpf inv;
        if (!have[res] || (x - rho.p) <= 0) {
            inv = rgamma_mp(x);
        } else {
            mpf prod(1);
            const mpf x0 = x - rho.p;
            for (int j = 0; j < rho.p; ++j) prod *= (x0 + j);
            inv = rg[res] / prod;
        }
        rg[res] = inv;
        have[res] = true;

        const mpf c = coeff * inv;
        sr += c * pr;
        si += c * pi;

        const mpf npr = pr * zr - pi * zi;
        const mpf npi = pr * zi + pi * zr;
        pr = npr;
        pi = npi;
        coeff = coeff * (gamma + k) / (k + 1);
    }
    return {sr.convert_to<double>(), si.convert_to<double>()};
}

inline std::complex<double> ml_series_mp(Rational rho, double mu, std::complex<double> z) {
    return prabhakar_series_mp(rho, mu, 1, z);
}

}  // namespace fractel::test
