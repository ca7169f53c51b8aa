#pragma once

// Empirical checks of the stability estimate and of the coefficient-decay and
// operator bounds behind the Fourier construction.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fractel/error.hpp"
#include "fractel/mlf.hpp"
#include "fractel/parallel.hpp"
#include "fractel/scalar_cauchy.hpp"
#include "fractel/spectral.hpp"

namespace fractel {

/// Hölder exponent a and decay exponent sigma with 0 <= sigma < a - 1/2.
struct RegularitySpec {
    double holder_exponent = 1.0;
    double decay_exponent = 0.0;
    double seminorm = 0.0;  // estimated ||g||_{C^a}

    void validate() const {
        if (!(holder_exponent > 0.5)) throw InvalidArgument("Hölder exponent must exceed 1/2");
        if (!(decay_exponent >= 0.0) || !(decay_exponent < holder_exponent - 0.5))
            throw InvalidArgument("decay exponent must lie in [0, a - 1/2)");
    }
};

/// Partial sums of sum k^sigma |g_k| with a verdict from dyadic blocks.
struct HolderDecay {
    std::vector<double> partial_sums;
    std::vector<double> block_sums;  // sum over 2^j <= k < 2^{j+1}
    double block_ratio = 0.0;        // largest ratio of consecutive blocks over the last three
    bool bounded = false;
};

inline HolderDecay holder_decay(const std::vector<double>& coefficients, double sigma) {
    if (!(sigma >= 0.0)) throw InvalidArgument("holder_decay: sigma must be >= 0");
    HolderDecay r;
    double acc = 0.0;
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        acc += std::pow(k, sigma) * std::abs(coefficients[i]);
        r.partial_sums.push_back(acc);
    }
    for (std::size_t lo = 1; lo <= coefficients.size(); lo *= 2) {
        const std::size_t hi = std::min(2 * lo - 1, coefficients.size());
        double b = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) b += std::pow(static_cast<double>(k), sigma) * std::abs(coefficients[k - 1]);
        if (hi == 2 * lo - 1) r.block_sums.push_back(b);  // complete blocks only
    }
    const std::size_t n = r.block_sums.size();
    if (n < 3) {
        r.bounded = true;  // too few blocks to see a trend; the sum is finite
        return r;
    }
    const double total = r.partial_sums.empty() ? 0.0 : r.partial_sums.back();
    for (std::size_t j = n - 3; j + 1 < n; ++j) {
        const double a = r.block_sums[j], b = r.block_sums[j + 1];
        if (b <= 1e-15 * std::max(total, 1e-300)) continue;  // exhausted: nothing left to add
        r.block_ratio = std::max(r.block_ratio, a > 0.0 ? b / a : std::numeric_limits<double>::infinity());
    }
    r.bounded = r.block_ratio < 0.9;
    return r;
}

/// Estimate of the smallest C with omega_g(delta) <= C delta^a from samples on
/// the uniform grid x_i = i pi / M, over the dyadic spacings delta = 2^m pi / M.
inline double holder_seminorm(const std::vector<double>& g, double a) {
    const std::size_t n = g.size();
    if (n < 3) throw InvalidArgument("holder_seminorm: need at least 3 samples");
    if (!(a > 0.0) || !(a <= 1.0)) throw InvalidArgument("holder_seminorm: exponent must lie in (0, 1]");
    const double h = std::numbers::pi / static_cast<double>(n - 1);
    double omega = 0.0, best = 0.0;
    std::size_t next = 1;
    for (std::size_t s = 1; s < n; ++s) {
        for (std::size_t i = 0; i + s < n; ++i) omega = std::max(omega, std::abs(g[i + s] - g[i]));
        if (s == next || s == n - 1) {
            best = std::max(best, omega / std::pow(s * h, a));
            next *= 2;
        }
    }
    return best;
}

/// phi_xx = -sum k^2 c_k sin kx on the uniform grid with M intervals.
inline std::vector<double> second_derivative_samples(const SineData& d, int K, int M) {
    const Matrix s = sine_table(M, K);
    std::vector<double> out(M + 1, 0.0);
    for (int i = 0; i <= M; ++i)
        for (int k = 1; k <= K; ++k) out[i] -= static_cast<double>(k) * k * d.coefficient(k) * s(i, k - 1);
    return out;
}

/// Left and right sides of the stability estimate.
struct StabilityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool violation = false;
    double holder_exponent = 1.0;
};

/// LHS = sup|t^{1-rho}(d^rho)^2 u| + sup|t^{1-rho} d^rho u| + sup|t^{1-rho} u_xx|
/// over the grid; RHS = ||phi0||_{C^a_2} + ||phi1||_{C^a_2} + ||t^{1-rho} f||_{C^a_x}
/// (Hölder seminorm estimates of phi_xx and of f(., t)).
inline StabilityResult stability_ratio(const ProblemSpec& spec, SolutionField& field, double a = 1.0) {
    if (!field.has_derivatives()) evaluate_derivatives(spec, field);
    StabilityResult r;
    r.holder_exponent = a;
    r.lhs = field.drho2->cwiseAbs().maxCoeff() + field.drho->cwiseAbs().maxCoeff() + field.dxx->cwiseAbs().maxCoeff();
    const double n0 = holder_seminorm(second_derivative_samples(spec.phi0, spec.K, spec.Mx), a);
    const double n1 = holder_seminorm(second_derivative_samples(spec.phi1, spec.K, spec.Mx), a);
    double nf = 0.0;
    for (Eigen::Index j = 0; j < field.f->cols(); ++j) {
        const Eigen::VectorXd c = field.f->col(j);
        nf = std::max(nf, holder_seminorm(std::vector<double>(c.data(), c.data() + c.size()), a));
    }
    r.rhs = n0 + n1 + nf;
    if (r.rhs == 0.0) {
        r.violation = r.lhs > 1e-10;
        r.ratio = r.violation ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
        r.ratio = r.lhs / r.rhs;
    }
    return r;
}

/// Random problem with phi0, phi1, f in the admissible classes: data built
/// from sine polynomials and x^3 (pi - x)^3, whose second derivatives vanish
/// at both ends; sources are power laws in a few low modes.
inline ProblemSpec admissible_problem(std::mt19937_64& rng, int K, int Nt, int Mx = 128) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ProblemSpec s;
    s.rho = 0.3 + 0.6 * u(rng);
    s.alpha = 0.3 + 3.0 * u(rng);
    s.K = K;
    s.Nt = Nt;
    s.Mx = Mx;
    constexpr double pi = std::numbers::pi;
    auto datum = [&]() {
        const double a1 = 2.0 * u(rng) - 1.0, a2 = 2.0 * u(rng) - 1.0, a3 = 2.0 * u(rng) - 1.0;
        const int m = 1 + static_cast<int>(4.0 * u(rng));
        return [=](double x) {
            const double b = x * x * x * (pi - x) * (pi - x) * (pi - x) / 30.0;
            return a1 * std::sin(x) + a2 * std::sin(m * x) + a3 * b;
        };
    };
    s.phi0 = SineData::from_function(datum(), K);
    s.phi1 = SineData::from_function(datum(), K);
    const int nsrc = static_cast<int>(3.0 * u(rng));
    for (int i = 0; i < nsrc; ++i) {
        ModeSource m;
        m.k = 1 + static_cast<int>(4.0 * u(rng));
        m.profile.terms.push_back({2.0 * u(rng) - 1.0, s.rho + std::floor(2.0 * u(rng))});
        s.source.push_back(m);
    }
    return s;
}

/// Stability ratio over a sweep of admissible problems.
struct StabilitySweep {
    std::vector<double> ratios;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    bool any_violation = false;
};

inline StabilitySweep stability_sweep(int count, unsigned seed, int K, int Nt, int threads = 1, int Mx = 128) {
    std::mt19937_64 rng(seed);
    std::vector<ProblemSpec> specs;
    for (int i = 0; i < count; ++i) specs.push_back(admissible_problem(rng, K, Nt, Mx));
    StabilitySweep r;
    r.ratios.assign(count, 0.0);
    std::vector<char> viol(count, 0);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
        SolutionField f = assemble_solution(specs[i]);
        const StabilityResult s = stability_ratio(specs[i], f);
        r.ratios[i] = s.ratio;
        viol[i] = s.violation;
    });
    r.any_violation = std::any_of(viol.begin(), viol.end(), [](char v) { return v != 0; });
    std::vector<double> sorted = r.ratios;
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty()) {
        r.max_ratio = sorted.back();
        r.median_ratio = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                          : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    }
    return r;
}

/// One row of a convergence study.
struct ConvergenceRow {
    int K = 0;
    int Nt = 0;
    double w_sup = 0.0;
    double residual_sup = 0.0;
    double residual_l2 = 0.0;
    double data_residual = 0.0;   // sup_x |sum_{k<=K} phi1_k sin kx - phi1(x)| (needs a closed-form phi1)
    double tail_bound = 0.0;
    double cross_residual = 0.0;  // grid-oracle residual on t >= 0.1
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double tail_decay_exponent = 0.0;  // slope of log(tail bound) against log K
};

inline ConvergenceStudy convergence_study(const ProblemSpec& base, const std::vector<int>& Ks,
                                          const std::vector<int>& Nts) {
    if (Ks.empty() || Nts.empty()) throw InvalidArgument("convergence_study: empty K or grid list");
    if (!std::is_sorted(Ks.begin(), Ks.end()) || !std::is_sorted(Nts.begin(), Nts.end()))
        throw InvalidArgument("convergence_study: K and grid lists must be increasing");
    ConvergenceStudy out;
    auto refit = [](SineData d, int K) {
        if (d.shape) d.coefficients = sine_coefficients(d.shape, K);
        return d;
    };
    for (int K : Ks) {
        for (int Nt : Nts) {
            ProblemSpec s = base;
            s.K = K;
            s.Nt = Nt;
            s.phi0 = refit(base.phi0, K);
            s.phi1 = refit(base.phi1, K);
            SolutionField f = assemble_solution(s);
            const ResidualNorms n = residual(s, f);
            ConvergenceRow row;
            row.K = K;
            row.Nt = Nt;
            row.w_sup = f.scale();
            row.residual_sup = n.sup;
            row.residual_l2 = n.l2;
            row.tail_bound = f.tail.bound;
            row.cross_residual = grid_cross_residual(s, f);
            if (s.phi1.shape) {
                const Matrix tab = sine_table(s.Mx, K);
                for (int i = 0; i <= s.Mx; ++i) {
                    double v = 0.0;
                    for (int k = 1; k <= K; ++k) v += s.phi1.coefficient(k) * tab(i, k - 1);
                    row.data_residual = std::max(row.data_residual, std::abs(v - s.phi1.shape(f.x[i])));
                }
            }
            out.rows.push_back(row);
        }
    }
    // least-squares slope over the first grid column
    std::vector<double> lx, ly;
    for (const ConvergenceRow& r : out.rows)
        if (r.Nt == Nts.front() && r.tail_bound > 0.0 && std::isfinite(r.tail_bound)) {
            lx.push_back(std::log(static_cast<double>(r.K)));
            ly.push_back(std::log(r.tail_bound));
        }
    if (lx.size() >= 2) {
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        out.tail_decay_exponent = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return out;
}

/// Sup-norms of a family of partial sums at K and 2K.
struct PartialSumGrowth {
    double sup_K = 0.0;
    double sup_2K = 0.0;
    double increase = 0.0;  // (sup_2K - sup_K) / sup_K
};

namespace detail {

inline PartialSumGrowth growth(double a, double b) {
    return {a, b, a > 0.0 ? (b - a) / a : 0.0};
}

// sup over the space-time grid of |sum_{k<=K} mode(k, t) sin kx|
template <class ModeFn>
double partial_sum_sup(int K, int M, const std::vector<double>& grid, ModeFn&& mode) {
    const Matrix s = sine_table(M, K);
    Matrix v(K, static_cast<Eigen::Index>(grid.size()));
    for (int k = 1; k <= K; ++k)
        for (std::size_t j = 0; j < grid.size(); ++j) v(k - 1, static_cast<Eigen::Index>(j)) = mode(k, grid[j]);
    return (s * v).cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Regularized sums of the E-type terms of the solution,
///   (1/2) sum [E(-S- t^rho) + E(-S+ t^rho)] phi1_k sin kx   and
///   (1/2) sum R^{-1} [E(-S- t^rho) - E(-S+ t^rho)] phi0_k sin kx
/// (non-degenerate modes), at K and 2K. Returns {E-type, R^{-1}E-type}.
inline std::pair<PartialSumGrowth, PartialSumGrowth> operator_sum_growth(const ProblemSpec& spec) {
    const std::vector<double> grid = time_grid(spec);
    auto coeffs = [&](const SineData& d, int K) {
        return d.shape ? sine_coefficients(d.shape, K) : d.coefficients;
    };
    auto term = [&](int k, double t, double c, bool resolvent) {
        const BranchPair b = branch_pair(spec.alpha, static_cast<double>(k) * k);
        if (b.degenerate || c == 0.0) return 0.0;
        const double tr = std::pow(t, spec.rho);
        const cplx em = mittag_leffler(spec.rho, spec.rho, -b.s_minus * tr);
        const cplx ep = mittag_leffler(spec.rho, spec.rho, -b.s_plus * tr);
        const cplx v = resolvent ? 0.5 * b.r_inv * (em - ep) : 0.5 * (em + ep);
        return v.real() * c;
    };
    double e[2], r[2];
    for (int i = 0; i < 2; ++i) {
        const int K = spec.K << i;
        const std::vector<double> c1 = coeffs(spec.phi1, K), c0 = coeffs(spec.phi0, K);
        auto at = [](const std::vector<double>& c, int k) { return k <= static_cast<int>(c.size()) ? c[k - 1] : 0.0; };
        e[i] = detail::partial_sum_sup(K, spec.Mx, grid, [&](int k, double t) { return term(k, t, at(c1, k), false); });
        r[i] = detail::partial_sum_sup(K, spec.Mx, grid, [&](int k, double t) { return term(k, t, at(c0, k), true); });
    }
    return {detail::growth(e[0], e[1]), detail::growth(r[0], r[1])};
}

/// Regularized sums of the source convolutions
///   sum (1/2) R^{-1} int (t-tau)^{rho-1} [E(-S-(t-tau)^rho) - E(-S+(t-tau)^rho)] f_k(tau) dtau sin kx
/// for the source f_k(t) = k^{-2} t^{rho-1} in every mode, at K and 2K
/// (closed form: Gamma(rho) t^{2rho-1} E_{rho,2rho}).
inline PartialSumGrowth convolution_sum_growth(const ProblemSpec& spec) {
    const std::vector<double> grid = time_grid(spec);
    auto term = [&](int k, double t) {
        const BranchPair b = branch_pair(spec.alpha, static_cast<double>(k) * k);
        const double tr = std::pow(t, spec.rho);
        const double c = std::tgamma(spec.rho) / (static_cast<double>(k) * k);
        if (b.degenerate) return c * tr * prabhakar(spec.rho, 3.0 * spec.rho, 2, -spec.alpha * tr).real();
        const cplx em = mittag_leffler(spec.rho, 2.0 * spec.rho, -b.s_minus * tr);
        const cplx ep = mittag_leffler(spec.rho, 2.0 * spec.rho, -b.s_plus * tr);
        return (0.5 * b.r_inv * (em - ep)).real() * c * tr;  // t^{1-rho} t^{2rho-1} = t^rho
    };
    const double a = detail::partial_sum_sup(spec.K, spec.Mx, grid, term);
    const double b = detail::partial_sum_sup(2 * spec.K, spec.Mx, grid, term);
    return detail::growth(a, b);
}

/// Sweep of the mode arguments z = -(alpha -+ sqrt(alpha^2 - lambda)) t^rho over
/// alpha in `alphas`, lambda = 1 + j / density up to 400 and 64 * density
/// log-spaced t in (0, T]. Reports the fitted M = max (1 + |z|) |E_{rho,mu}(z)|
/// and the worst ratio of |t^{rho-1} E_{rho,mu}(-S- t^rho)| to
/// M lambda^{eps-1/2} t^{2 eps rho - 1} (<= 1 means the bound holds).
struct SectorSweep {
    double decay_constant = 0.0;
    double worst_estimate_ratio = 0.0;
    double worst_lambda = 0.0;  // where the estimate ratio peaks
    double worst_alpha = 0.0;
    std::size_t points = 0;
};

inline SectorSweep sector_sweep(double rho, double mu, int density = 1, double eps = 0.25, double T = 1.0,
                                std::vector<double> alphas = {0.5, 1.0, 2.0}, int threads = 1) {
    if (density < 1 || !(T > 0.0) || !(eps > 0.0) || !(eps < 1.0))
        throw InvalidArgument("sector_sweep: invalid parameters");
    const int nt = 64 * density;
    std::vector<double> ts(nt);
    for (int j = 0; j < nt; ++j) ts[j] = T * std::pow(10.0, -8.0 * (nt - 1 - j) / (nt - 1));
    std::vector<double> lambdas;
    for (int j = 0; j <= 399 * density; ++j) lambdas.push_back(1.0 + static_cast<double>(j) / density);

    struct Row {
        double m = 0.0;
        std::vector<double> ratio_minus;  // |t^{rho-1} E(-S- t^rho)| / (lambda^{eps-1/2} t^{2 eps rho - 1})
    };
    std::vector<Row> rows(alphas.size() * lambdas.size());
    parallel_for(rows.size(), threads, [&](std::size_t idx) {
        const double alpha = alphas[idx / lambdas.size()], lambda = lambdas[idx % lambdas.size()];
        const BranchPair b = branch_pair(alpha, lambda);
        Row& r = rows[idx];
        for (double t : ts) {
            const double tr = std::pow(t, rho);
            for (int side = 0; side < 2; ++side) {
                const cplx z = -(side ? b.s_plus : b.s_minus) * tr;
                const double e = std::abs(mittag_leffler(rho, mu, z));
                r.m = std::max(r.m, (1.0 + std::abs(z)) * e);
                if (side == 0)
                    r.ratio_minus.push_back(std::pow(t, rho - 1.0) * e /
                                            (std::pow(lambda, eps - 0.5) * std::pow(t, 2.0 * eps * rho - 1.0)));
            }
        }
    });
    SectorSweep out;
    out.points = rows.size() * ts.size() * 2;
    for (const Row& r : rows) out.decay_constant = std::max(out.decay_constant, r.m);
    for (std::size_t idx = 0; idx < rows.size(); ++idx)
        for (double q : rows[idx].ratio_minus)
            if (q / out.decay_constant > out.worst_estimate_ratio) {
                out.worst_estimate_ratio = q / out.decay_constant;
                out.worst_alpha = alphas[idx / lambdas.size()];
                out.worst_lambda = lambdas[idx % lambdas.size()];
            }
    return out;
}

}  // namespace fractel
