#pragma once

// Fourier sine assembly of
//   (d^rho)^2 u + 2 alpha d^rho u - u_xx = f   on (0, pi) x (0, T],
//   u(0, t) = u(pi, t) = 0,
//   lim J^{rho-1} d^rho u = phi0(x),  lim J^{rho-1} u = phi1(x),
// from the scalar mode solutions T_k with lambda_k = k^2, v_k = sin kx.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fractel/error.hpp"
#include "fractel/fracops.hpp"
#include "fractel/mlf.hpp"
#include "fractel/parallel.hpp"
#include "fractel/quadrature.hpp"
#include "fractel/scalar_cauchy.hpp"

namespace fractel {

using Matrix = Eigen::MatrixXd;  // rows: space points, columns: time points

/// Boundary values beyond this are not representable by the sine basis.
inline constexpr double kBoundaryTol = 1e-8;

namespace detail {

inline void check_boundary(double left, double right) {
    if (!(std::abs(left) <= kBoundaryTol) || !(std::abs(right) <= kBoundaryTol))
        throw InvalidArgument("sine_coefficients: data must vanish at x = 0 and x = pi");
}

}  // namespace detail

/// c_k = (2/pi) int_0^pi g(x) sin(kx) dx, k = 1..K, by composite Gauss-Legendre.
inline std::vector<double> sine_coefficients(const std::function<double(double)>& g, int K) {
    if (K < 1) throw InvalidArgument("sine_coefficients: K must be >= 1");
    detail::check_boundary(g(0.0), g(std::numbers::pi));
    const quad::Rule& gl = quad::gauss_legendre(16);
    const int panels = std::max(16, K);
    const double h = std::numbers::pi / panels;
    std::vector<double> xs, ws;
    for (int p = 0; p < panels; ++p) {
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            xs.push_back(h * (p + 0.5 * (1.0 + gl.nodes[q])));
            ws.push_back(0.5 * h * gl.weights[q]);
        }
    }
    std::vector<double> gv(xs.size());
    for (std::size_t q = 0; q < xs.size(); ++q) {
        gv[q] = g(xs[q]);
        if (!std::isfinite(gv[q])) throw InvalidArgument("sine_coefficients: data is not finite");
    }
    std::vector<double> c(K);
    for (int k = 1; k <= K; ++k) {
        double acc = 0.0;
        for (std::size_t q = 0; q < xs.size(); ++q) acc += ws[q] * gv[q] * std::sin(k * xs[q]);
        c[k - 1] = 2.0 / std::numbers::pi * acc;
    }
    return c;
}

/// Same from samples on the uniform grid x_i = i pi / M, i = 0..M (trapezoid
/// rule, exact for sine polynomials of degree < M). Requires K < M.
inline std::vector<double> sine_coefficients(const std::vector<double>& samples, int K) {
    const int M = static_cast<int>(samples.size()) - 1;
    if (M < 2) throw InvalidArgument("sine_coefficients: need at least 3 samples");
    if (K < 1 || K >= M) throw InvalidArgument("sine_coefficients: need 1 <= K < number of intervals");
    detail::check_boundary(samples.front(), samples.back());
    std::vector<double> c(K);
    for (int k = 1; k <= K; ++k) {
        double acc = 0.0;
        for (int i = 1; i < M; ++i) acc += samples[i] * std::sin(std::numbers::pi * ((1LL * k * i) % (2 * M)) / M);
        c[k - 1] = 2.0 / M * acc;
    }
    return c;
}

/// sin(k x_i) on x_i = i pi / M with exact zeros where k i is a multiple of M.
inline Matrix sine_table(int M, int K) {
    Matrix s(M + 1, K);
    for (int i = 0; i <= M; ++i) {
        for (int k = 1; k <= K; ++k) {
            const long long m = (1LL * k * i) % (2LL * M);
            s(i, k - 1) = (m == 0 || m == M) ? 0.0 : std::sin(std::numbers::pi * static_cast<double>(m) / M);
        }
    }
    return s;
}

inline std::vector<double> space_grid(int M) {
    std::vector<double> x(M + 1);
    for (int i = 0; i <= M; ++i) x[i] = std::numbers::pi * i / M;
    x[M] = std::numbers::pi;
    return x;
}

/// Initial datum on [0, pi]: sine coefficients, optionally with the function
/// they came from (used for tail estimates and Hölder norms).
struct SineData {
    std::vector<double> coefficients;        // c_1, c_2, ...
    std::function<double(double)> shape;     // optional closed form

    double coefficient(int k) const {
        return k >= 1 && k <= static_cast<int>(coefficients.size()) ? coefficients[k - 1] : 0.0;
    }
    bool zero() const {
        return std::all_of(coefficients.begin(), coefficients.end(), [](double c) { return c == 0.0; });
    }

    /// Datum given by a function; K coefficients are computed now.
    static SineData from_function(std::function<double(double)> f, int K) {
        SineData d;
        d.coefficients = sine_coefficients(f, K);
        d.shape = std::move(f);
        return d;
    }
};

/// Time profile of the source in one mode: f(x, t) contains f_k(t) sin kx.
struct ModeSource {
    int k = 1;
    Source profile;
};

/// Reduces a general source f(x, t) to K mode profiles; every profile call
/// projects f(., t) with sine_coefficients (the K coefficients at one t are
/// shared between modes through a cache).
inline std::vector<ModeSource> project_source(std::function<double(double, double)> f, int K) {
    struct Cache {
        std::mutex mtx;
        std::map<double, std::vector<double>> values;
    };
    auto cache = std::make_shared<Cache>();
    auto fn = std::make_shared<std::function<double(double, double)>>(std::move(f));
    std::vector<ModeSource> out;
    for (int k = 1; k <= K; ++k) {
        ModeSource m;
        m.k = k;
        m.profile.callable = [cache, fn, k, K](double t) {
            {
                std::lock_guard<std::mutex> lock(cache->mtx);
                auto it = cache->values.find(t);
                if (it != cache->values.end()) return it->second[k - 1];
            }
            std::vector<double> c = sine_coefficients([&](double x) { return (*fn)(x, t); }, K);
            std::lock_guard<std::mutex> lock(cache->mtx);
            return cache->values.emplace(t, std::move(c)).first->second[k - 1];
        };
        out.push_back(std::move(m));
    }
    return out;
}

/// Full problem description.
struct ProblemSpec {
    double rho = 0.5;
    double alpha = 1.0;
    double T = 1.0;
    SineData phi0;
    SineData phi1;
    std::vector<ModeSource> source;
    int K = 64;     // modes kept
    int Mx = 200;   // space intervals
    int Nt = 128;   // time points of the graded grid
    double tail_tolerance = 1e-3;
    int threads = 1;

    /// f_k as one Source (entries for the same k are added).
    Source mode_source(int k) const {
        Source s;
        std::vector<std::function<double(double)>> calls;
        for (const ModeSource& m : source) {
            if (m.k != k) continue;
            s.terms.insert(s.terms.end(), m.profile.terms.begin(), m.profile.terms.end());
            if (m.profile.callable) calls.push_back(m.profile.callable);
        }
        if (calls.size() == 1) {
            s.callable = calls.front();
        } else if (!calls.empty()) {
            s.callable = [calls](double t) {
                double v = 0.0;
                for (const auto& c : calls) v += c(t);
                return v;
            };
        }
        return s;
    }

    ModeParams mode(int k) const {
        ModeParams p;
        p.rho = rho;
        p.alpha = alpha;
        p.lambda = static_cast<double>(k) * k;
        p.phi0 = phi0.coefficient(k);
        p.phi1 = phi1.coefficient(k);
        p.source = mode_source(k);
        return p;
    }
};

inline void validate(const ProblemSpec& s) {
    if (!(s.rho > 0.0) || !(s.rho < 1.0)) throw InvalidArgument("rho must lie in (0,1)");
    if (!(s.alpha > 0.0) || !std::isfinite(s.alpha)) throw InvalidArgument("alpha must be positive");
    if (!(s.T > 0.0) || !std::isfinite(s.T)) throw InvalidArgument("T must be positive");
    if (s.K < 1) throw InvalidArgument("K must be >= 1");
    if (s.Mx < 2) throw InvalidArgument("M_x must be >= 2");
    if (s.Nt < 8) throw InvalidArgument("N_t must be >= 8");
    if (!(s.tail_tolerance > 0.0)) throw InvalidArgument("tail tolerance must be positive");
    for (const ModeSource& m : s.source) {
        if (m.k < 1) throw InvalidArgument("source mode index must be >= 1");
        for (const PowerTerm& t : m.profile.terms)
            if (!(t.beta >= s.rho)) throw InvalidArgument("source exponent beta must be >= rho");
    }
    for (const SineData* d : {&s.phi0, &s.phi1})
        for (double c : d->coefficients)
            if (!std::isfinite(c)) throw InvalidArgument("initial data coefficients must be finite");
}

/// Sup of (1 + |z|) |E_{rho,mu}(z)| over pi/2 <= |arg z| <= pi, sampled.
/// This is the constant of the decay bound |E(z)| <= M / (1 + |z|) in the
/// sector swept by the mode arguments -S t^rho.
inline double ml_decay_constant(double rho, double mu) {
    static std::mutex mtx;
    static std::map<std::pair<double, double>, double> cache;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find({rho, mu});
        if (it != cache.end()) return it->second;
    }
    double m = 0.0;
    for (int a = 0; a <= 8; ++a) {
        const double arg = std::numbers::pi * (0.5 + a / 16.0);
        for (int j = 0; j <= 80; ++j) {
            const double r = std::pow(10.0, -3.0 + j * 0.1);
            m = std::max(m, (1.0 + r) * std::abs(mittag_leffler(rho, mu, std::polar(r, arg))));
        }
    }
    std::lock_guard<std::mutex> lock(mtx);
    cache[{rho, mu}] = m;
    return m;
}

/// Bound on sup_t t^{1-rho} |T_k(t)| from the decay constant M.
/// src_sup = sup_t t^{1-rho} |f_k(t)|.
inline double mode_amplitude_bound(double rho, double alpha, double lambda, double phi0, double phi1, double src_sup,
                                   double T, double M) {
    const BranchPair b = branch_pair(alpha, lambda);
    const double tr = std::pow(T, rho);
    if (b.degenerate) {
        return (M + 3.0 * M * alpha * tr / rho) * std::abs(phi1) + 3.0 * M * tr / rho * std::abs(phi0) +
               M * tr * tr * (2.0 + rho) * std::tgamma(rho) * std::tgamma(2.0 * rho) / (rho * std::tgamma(3.0 * rho)) *
                   src_sup;
    }
    const cplx r = 0.5 * (b.s_plus - b.s_minus);
    const double am = std::abs(((alpha + r) * phi1 + phi0) * 0.5 * b.r_inv);
    const double ap = std::abs(((r - alpha) * phi1 - phi0) * 0.5 * b.r_inv);
    const double conv = tr * std::tgamma(rho) * std::tgamma(rho) / std::tgamma(2.0 * rho) * std::abs(b.r_inv);
    return M * (am + ap + conv * src_sup);
}

/// Estimated sup_{x,t} t^{1-rho} |u - u_K| from the modes beyond K.
struct TailReport {
    double bound = 0.0;
    double decay_constant = 0.0;  // fitted M
    int modes_summed = 0;         // last mode summed explicitly
    double decay_exponent = 0.0;  // fitted coefficient decay beyond that (0 if not needed)
    bool warning = false;
    std::string message;
};

/// One mode of the assembled solution.
struct ModeData {
    int k = 0;
    double lambda = 0.0;
    bool degenerate = false;
    bool active = false;                  // false when all data of the mode vanish
    std::shared_ptr<const ScalarSolution> sol;
    double scale = 1.0;                   // factor applied to the stored trajectory (corruption probe)
    std::vector<double> w;                // t^{1-rho} T_k
    std::vector<double> drho;             // t^{1-rho} d^rho T_k
    std::vector<double> drho2;            // t^{1-rho} (d^rho)^2 T_k
    std::vector<double> f;                // t^{1-rho} f_k
    double max_imag = 0.0;
};

struct ResidualNorms {
    double sup = 0.0;
    double l2 = 0.0;
};

/// Regularized fields t^{1-rho}(.) on the space-time grid.
struct SolutionField {
    std::vector<double> x;
    std::vector<double> t;
    Matrix w;
    std::optional<Matrix> drho;
    std::optional<Matrix> drho2;
    std::optional<Matrix> dxx;
    std::optional<Matrix> f;
    std::optional<Matrix> residual;
    std::vector<ModeData> modes;
    double max_imag = 0.0;
    TailReport tail;

    double scale() const { return w.size() ? w.cwiseAbs().maxCoeff() : 0.0; }
    bool has_derivatives() const { return drho && drho2 && dxx && f; }
};

namespace detail {

inline Matrix synthesize(const Matrix& sines, const std::vector<ModeData>& modes,
                         std::vector<double> ModeData::*member, std::size_t nt, bool lambda_weight = false) {
    const Eigen::Index nx = sines.rows();
    Matrix out = Matrix::Zero(nx, static_cast<Eigen::Index>(nt));
    // fixed k order per entry
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < modes.size(); ++k) {
                const ModeData& m = modes[k];
                if (!m.active) continue;
                const double v = (m.*member)[j];
                acc += sines(i, static_cast<Eigen::Index>(k)) * (lambda_weight ? -m.lambda * v : v);
            }
            out(i, static_cast<Eigen::Index>(j)) = acc;
        }
    }
    return out;
}

inline std::vector<double> sample_real(const Expansion& e, const std::vector<double>& grid, double& max_imag) {
    const ModeTrajectory tr = sample_regularized(e, grid);
    max_imag = std::max(max_imag, tr.max_imag);
    return tr.w;
}

inline double source_sup(const Source& s, double rho, const std::vector<double>& grid) {
    double m = 0.0;
    if (s.empty()) return 0.0;
    for (double t : grid) m = std::max(m, std::pow(t, 1.0 - rho) * std::abs(s(t)));
    return m;
}

inline TailReport tail_report(const ProblemSpec& spec, const std::vector<double>& grid) {
    TailReport r;
    const double M = ml_decay_constant(spec.rho, spec.rho);
    r.decay_constant = M;
    // coefficients beyond K: from the closed forms when available
    const int extra = 8 * spec.K;
    auto extended = [&](const SineData& d) {
        std::vector<double> c = d.coefficients;
        if (d.shape && static_cast<int>(c.size()) < extra) c = sine_coefficients(d.shape, extra);
        return c;
    };
    const std::vector<double> c0 = extended(spec.phi0), c1 = extended(spec.phi1);
    int kmax = std::max<int>(static_cast<int>(std::max(c0.size(), c1.size())), spec.K);
    for (const ModeSource& m : spec.source) kmax = std::max(kmax, m.k);
    r.modes_summed = kmax;
    auto coef = [](const std::vector<double>& c, int k) {
        return k <= static_cast<int>(c.size()) ? c[k - 1] : 0.0;
    };
    double bound = 0.0;
    for (int k = spec.K + 1; k <= kmax; ++k) {
        const double lambda = static_cast<double>(k) * k;
        const double ssup = source_sup(spec.mode_source(k), spec.rho, grid);
        const double p0 = coef(c0, k), p1 = coef(c1, k);
        if (p0 == 0.0 && p1 == 0.0 && ssup == 0.0) continue;
        bound += mode_amplitude_bound(spec.rho, spec.alpha, lambda, p0, p1, ssup, spec.T, M);
    }
    // remainder past the computed coefficients: power-law envelope of the last two octaves
    const bool open_ended = (spec.phi0.shape && !spec.phi0.zero()) || (spec.phi1.shape && !spec.phi1.zero());
    if (open_ended && kmax >= 8) {
        auto env = [&](int lo, int hi) {
            double e = 0.0;
            for (int k = lo; k <= hi; ++k) e = std::max({e, std::abs(coef(c0, k)), std::abs(coef(c1, k))});
            return e;
        };
        const double e1 = env(kmax / 4 + 1, kmax / 2), e2 = env(kmax / 2 + 1, kmax);
        if (e2 > 1e-15 * std::max(e1, 1e-300)) {
            const double p = std::log(e1 / e2) / std::log(2.0);
            r.decay_exponent = p;
            if (p > 1.05) {
                const double amp = M * (2.0 + (spec.alpha + 1.0) / kmax);
                bound += amp * e2 * kmax / (p - 1.0);
            } else {
                bound = std::numeric_limits<double>::infinity();
            }
        }
    }
    r.bound = bound;
    if (!(bound <= spec.tail_tolerance)) {
        r.warning = true;
        r.message = "truncation: tail bound " + std::to_string(bound) + " exceeds tolerance " +
                    std::to_string(spec.tail_tolerance) + " at K = " + std::to_string(spec.K);
    }
    return r;
}

}  // namespace detail

inline std::vector<double> time_grid(const ProblemSpec& spec) { return graded_grid(spec.T, spec.Nt, spec.rho); }

/// Builds every mode trajectory and the regularized field t^{1-rho} u.
inline SolutionField assemble_solution(const ProblemSpec& spec) {
    validate(spec);
    SolutionField field;
    field.x = space_grid(spec.Mx);
    field.t = time_grid(spec);
    field.modes.resize(spec.K);
    parallel_for(static_cast<std::size_t>(spec.K), spec.threads, [&](std::size_t idx) {
        const int k = static_cast<int>(idx) + 1;
        ModeData& m = field.modes[idx];
        const ModeParams p = spec.mode(k);
        m.k = k;
        m.lambda = p.lambda;
        m.degenerate = branch_pair(p.alpha, p.lambda).degenerate;
        m.active = p.phi0 != 0.0 || p.phi1 != 0.0 || !p.source.empty();
        m.sol = std::make_shared<const ScalarSolution>(solve_scalar(p));
        if (m.active) {
            m.w = detail::sample_real(m.sol->y, field.t, m.max_imag);
        } else {
            m.w.assign(field.t.size(), 0.0);
        }
    });
    const Matrix sines = sine_table(spec.Mx, spec.K);
    field.w = detail::synthesize(sines, field.modes, &ModeData::w, field.t.size());
    for (const ModeData& m : field.modes) field.max_imag = std::max(field.max_imag, m.max_imag);
    field.tail = detail::tail_report(spec, field.t);
    return field;
}

/// t^{1-rho} d^rho u, t^{1-rho} (d^rho)^2 u from the analytic mode rules,
/// t^{1-rho} u_xx = -sum lambda_k (stored t^{1-rho} T_k) sin kx, and t^{1-rho} f.
inline void evaluate_derivatives(const ProblemSpec& spec, SolutionField& field) {
    if (field.modes.size() != static_cast<std::size_t>(spec.K) || field.t.empty())
        throw StateError("evaluate_derivatives: field has no mode data; run assemble_solution first");
    for (const ModeData& m : field.modes)
        if (!m.sol || m.w.size() != field.t.size())
            throw StateError("evaluate_derivatives: mode " + std::to_string(m.k) + " is missing its trajectory");
    parallel_for(field.modes.size(), spec.threads, [&](std::size_t idx) {
        ModeData& m = field.modes[idx];
        if (!m.active) {
            m.drho.assign(field.t.size(), 0.0);
            m.drho2.assign(field.t.size(), 0.0);
            m.f.assign(field.t.size(), 0.0);
            return;
        }
        const Expansion d1 = m.sol->y.derivative();
        const Expansion d2 = d1.derivative();
        m.drho = detail::sample_real(d1, field.t, m.max_imag);
        m.drho2 = detail::sample_real(d2, field.t, m.max_imag);
        m.f.resize(field.t.size());
        const Source& src = m.sol->params.source;
        for (std::size_t j = 0; j < field.t.size(); ++j)
            m.f[j] = src.empty() ? 0.0 : std::pow(field.t[j], 1.0 - spec.rho) * src(field.t[j]);
    });
    const Matrix sines = sine_table(spec.Mx, spec.K);
    const std::size_t nt = field.t.size();
    field.drho = detail::synthesize(sines, field.modes, &ModeData::drho, nt);
    field.drho2 = detail::synthesize(sines, field.modes, &ModeData::drho2, nt);
    field.dxx = detail::synthesize(sines, field.modes, &ModeData::w, nt, true);
    field.f = detail::synthesize(sines, field.modes, &ModeData::f, nt);
    for (const ModeData& m : field.modes) field.max_imag = std::max(field.max_imag, m.max_imag);
}

namespace detail {

// sup and L2 (trapezoid in x and t) of a field
inline ResidualNorms norms(const Matrix& r, const std::vector<double>& x, const std::vector<double>& t) {
    ResidualNorms n;
    n.sup = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        const double dt = j == 0 ? 0.5 * t[1] : (j + 1 == t.size() ? 0.5 * (t[j] - t[j - 1]) : 0.5 * (t[j + 1] - t[j - 1]));
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double dx = (i == 0 || i + 1 == x.size() ? 0.5 : 1.0) * (x[1] - x[0]);
            const double v = r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            acc += v * v * dx * dt;
        }
    }
    n.l2 = std::sqrt(acc);
    return n;
}

}  // namespace detail

/// t^{1-rho} r with r = (d^rho)^2 u + 2 alpha d^rho u - u_xx - f; stored in
/// field.residual. Derived fields are evaluated first when missing.
inline ResidualNorms residual(const ProblemSpec& spec, SolutionField& field) {
    if (!field.has_derivatives()) evaluate_derivatives(spec, field);
    field.residual = *field.drho2 + 2.0 * spec.alpha * *field.drho - *field.dxx - *field.f;
    return detail::norms(*field.residual, field.x, field.t);
}

/// Sensitivity probe: scales the stored trajectory of mode k by `factor` and
/// resynthesizes w. Derived fields are dropped; the fractional derivatives are
/// recomputed from the closed form, u_xx from the stored trajectories.
inline void inject_corruption(const ProblemSpec& spec, SolutionField& field, int k, double factor) {
    if (k < 1 || k > static_cast<int>(field.modes.size())) throw InvalidArgument("inject_corruption: no such mode");
    ModeData& m = field.modes[k - 1];
    for (double& v : m.w) v *= factor;
    m.scale *= factor;
    m.active = true;
    field.w = detail::synthesize(sine_table(spec.Mx, spec.K), field.modes, &ModeData::w, field.t.size());
    field.drho.reset();
    field.drho2.reset();
    field.dxx.reset();
    field.f.reset();
    field.residual.reset();
}

/// Residual with both fractional derivatives of every mode taken by the grid
/// oracle instead of the analytic rules; sup of t^{1-rho} r over t >= t_min.
inline double grid_cross_residual(const ProblemSpec& spec, const SolutionField& field, double t_min = 0.1) {
    if (field.modes.size() != static_cast<std::size_t>(spec.K))
        throw StateError("grid_cross_residual: field has no mode data");
    const std::size_t nt = field.t.size();
    const GridDerivative d(field.t, spec.rho, spec.rho - 1.0);
    std::vector<ModeData> res(field.modes.size());
    parallel_for(field.modes.size(), spec.threads, [&](std::size_t idx) {
        const ModeData& m = field.modes[idx];
        ModeData& r = res[idx];
        r.active = m.active;
        r.w.assign(nt, 0.0);
        if (!m.active) return;
        std::vector<double> y(nt);
        for (std::size_t j = 0; j < nt; ++j) y[j] = m.w[j] * std::pow(field.t[j], spec.rho - 1.0);
        const auto d1 = d.apply(y);
        const auto d2 = d.apply(d1);
        const Source& src = m.sol->params.source;
        for (std::size_t j = 0; j < nt; ++j) {
            const double g = src.empty() ? 0.0 : src(field.t[j]);
            r.w[j] = std::pow(field.t[j], 1.0 - spec.rho) * (d2[j] + 2.0 * spec.alpha * d1[j] + m.lambda * y[j] - g);
        }
    });
    const Matrix rf = detail::synthesize(sine_table(spec.Mx, spec.K), res, &ModeData::w, nt);
    double sup = 0.0;
    for (std::size_t j = 0; j < nt; ++j)
        if (field.t[j] >= t_min) sup = std::max(sup, rf.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff());
    return sup;
}

/// u (order 0), d^rho u (1) or (d^rho)^2 u (2) at an arbitrary point, from the
/// mode closed forms (the corruption factor of a mode is applied to order 0).
inline double field_value(const SolutionField& field, double x, double t, int order = 0) {
    if (order < 0 || order > 2) throw InvalidArgument("field_value: order must be 0, 1 or 2");
    if (!(t > 0.0)) throw InvalidArgument("field_value: t must be positive");
    double acc = 0.0;
    for (const ModeData& m : field.modes) {
        if (!m.active) continue;
        if (!m.sol) throw StateError("field_value: mode data missing");
        Expansion e = m.sol->y;
        for (int o = 0; o < order; ++o) e = e.derivative();
        const double v = e(t).real() * (order == 0 ? m.scale : 1.0);
        acc += v * std::sin(m.k * x);
    }
    return acc;
}

}  // namespace fractel
