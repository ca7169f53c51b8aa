#pragma once

// The operations behind the command-line tool. Each writes its files into an
// output directory and returns the report with an exit status
// (0: every check passed, 1: some check failed).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "fractel/config.hpp"
#include "fractel/io.hpp"
#include "fractel/laplace_oracle.hpp"
#include "fractel/spectral.hpp"
#include "fractel/verify.hpp"

namespace fractel {

namespace fs = std::filesystem;

struct CommandResult {
    int exit_code = 0;
    nlohmann::ordered_json report;
};

/// Corruption probe for `verify`: scale mode k by factor before checking.
struct Corruption {
    bool enabled = false;
    int mode = 1;
    double factor = 1.5;
};

namespace detail {

inline CommandResult finish(nlohmann::ordered_json report, const std::vector<Check>& checks) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    bool ok = true;
    for (const Check& c : checks) {
        arr.push_back(to_json(c));
        ok = ok && c.passed;
    }
    report["checks"] = arr;
    report["passed"] = ok;
    report["complete"] = true;
    return {ok ? 0 : 1, std::move(report)};
}

inline nlohmann::ordered_json tail_json(const TailReport& t) {
    nlohmann::ordered_json j;
    j["bound"] = t.bound;
    j["decay_constant"] = t.decay_constant;
    j["modes_summed"] = t.modes_summed;
    j["decay_exponent"] = t.decay_exponent;
    j["warning"] = t.warning;
    if (!t.message.empty()) j["message"] = t.message;
    return j;
}

// residual, realness and truncation checks of an assembled field
inline std::vector<Check> field_checks(const RunConfig& c, const ResidualNorms& r, const SolutionField& f) {
    const double scale = f.scale();
    return {make_check("residual", r.sup, c.tolerances.residual * std::max(1.0, scale), "sup |t^(1-rho) residual|"),
            make_check("realness", f.max_imag, c.tolerances.realness * scale, "max imaginary residue"),
            make_check("tail", f.tail.bound, c.tolerances.tail, "truncation bound beyond K")};
}

}  // namespace detail

/// solution.csv (x,t,w,u,dxx,drho,drho2,residual), solution.json, config.yaml.
inline CommandResult run_solve(const RunConfig& c, const fs::path& out) {
    const ProblemSpec spec = c.to_problem();
    SolutionField f = assemble_solution(spec);
    const ResidualNorms r = residual(spec, f);

    CsvWriter csv({"x", "t", "w", "u", "dxx", "drho", "drho2", "residual"});
    for (std::size_t j = 0; j < f.t.size(); ++j) {
        const double tp = std::pow(f.t[j], spec.rho - 1.0);
        const auto J = static_cast<Eigen::Index>(j);
        for (std::size_t i = 0; i < f.x.size(); ++i) {
            const auto I = static_cast<Eigen::Index>(i);
            csv.row({f.x[i], f.t[j], f.w(I, J), tp * f.w(I, J), (*f.dxx)(I, J), (*f.drho)(I, J), (*f.drho2)(I, J),
                     (*f.residual)(I, J)});
        }
    }
    csv.save(out / "solution.csv");
    CsvWriter::write_file(out / "config.yaml", emit_config(c));

    nlohmann::ordered_json rep = report_header("solve");
    rep["field_scale"] = f.scale();
    rep["residual"] = {{"sup", r.sup}, {"l2", r.l2}};
    rep["max_imag"] = f.max_imag;
    rep["tail"] = detail::tail_json(f.tail);
    nlohmann::ordered_json deg = nlohmann::ordered_json::array();
    for (const ModeData& m : f.modes)
        if (m.degenerate) deg.push_back(m.k);
    rep["degenerate_modes"] = deg;
    rep["grid"] = {{"K", spec.K}, {"N_t", spec.Nt}, {"M_x", spec.Mx}};
    CommandResult res = detail::finish(std::move(rep), detail::field_checks(c, r, f));
    write_json(out / "solution.json", res.report);
    return res;
}

/// oracle.csv (t, y_solver, y_oracle, relerr) for mode `oracle_mode` on
/// t in [0.1, T]; relerr is floored at 1e-3 of the trajectory scale.
inline CommandResult run_oracle(const RunConfig& c, const fs::path& out) {
    const ProblemSpec spec = c.to_problem();
    if (!(spec.T > 0.1)) throw InvalidArgument("oracle: T must exceed 0.1");
    const ModeParams p = spec.mode(c.oracle_mode);
    const ScalarSolution s = solve_scalar(p);
    const LaplaceSymbol F = laplace_symbol(p);
    const int n = 19;
    std::vector<double> ts(n), ys(n), yo(n);
    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
        ts[j] = 0.1 + (spec.T - 0.1) * j / (n - 1);
        ys[j] = s.y(ts[j]).real();
        yo[j] = talbot_invert(F, ts[j]);
        scale = std::max(scale, std::abs(ys[j]));
    }
    CsvWriter csv({"t", "y_solver", "y_oracle", "relerr"});
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        const double den = std::max(std::abs(yo[j]), 1e-3 * scale);
        const double e = den > 0.0 ? std::abs(ys[j] - yo[j]) / den : std::abs(ys[j] - yo[j]);
        worst = std::max(worst, e);
        csv.row({ts[j], ys[j], yo[j], e});
    }
    csv.save(out / "oracle.csv");
    nlohmann::ordered_json rep = report_header("oracle");
    rep["mode"] = c.oracle_mode;
    rep["lambda"] = p.lambda;
    rep["degenerate"] = s.degenerate_branch();
    rep["poles"] = F.poles.size();
    CommandResult res = detail::finish(std::move(rep), {make_check("oracle_agreement", worst, c.tolerances.oracle)});
    write_json(out / "oracle.json", res.report);
    return res;
}

/// verify.json: field checks, stability ratio, coefficient decay, partial-sum
/// growth, sector bound and a stability sweep over admissible problems.
inline CommandResult run_verify(const RunConfig& c, const fs::path& out, const Corruption& probe = {}) {
    const ProblemSpec spec = c.to_problem();
    SolutionField f = assemble_solution(spec);
    if (probe.enabled) inject_corruption(spec, f, probe.mode, probe.factor);
    const ResidualNorms r = residual(spec, f);
    std::vector<Check> checks = detail::field_checks(c, r, f);
    nlohmann::ordered_json fitted;

    const StabilityResult st = stability_ratio(spec, f);
    checks.push_back({"stability", !st.violation && std::isfinite(st.ratio), st.ratio, 0.0,
                      "LHS/RHS of the stability estimate; fails only on a zero-data violation"});
    fitted["stability_lhs"] = st.lhs;
    fitted["stability_rhs"] = st.rhs;

    for (const auto& [name, d] : {std::pair{"decay_phi0", &spec.phi0}, std::pair{"decay_phi1", &spec.phi1}}) {
        const HolderDecay h = holder_decay(d->coefficients, 0.25);
        checks.push_back({name, h.bounded, h.block_ratio, 0.9, "dyadic block ratio of sum k^0.25 |c_k|"});
    }

    const auto [eg, rg] = operator_sum_growth(spec);
    const PartialSumGrowth cg = convolution_sum_growth(spec);
    checks.push_back(make_check("growth_E", eg.increase, c.tolerances.growth, "E-type partial sums, K to 2K"));
    checks.push_back(make_check("growth_RE", rg.increase, c.tolerances.growth, "R^-1 E-type partial sums, K to 2K"));
    checks.push_back(make_check("growth_convolution", cg.increase, c.tolerances.growth, "convolution sums, K to 2K"));

    const SectorSweep sw = sector_sweep(spec.rho, spec.rho, c.sector_density, 0.25, spec.T, {0.5, 1.0, 2.0}, c.threads);
    checks.push_back(make_check("sector_constant", sw.decay_constant, 10.0, "fitted M in |E| <= M/(1+|z|)"));
    checks.push_back(make_check("decay_estimate", sw.worst_estimate_ratio, 1.0, "eps = 0.25, fitted M"));
    fitted["sector"] = {{"M", sw.decay_constant}, {"points", sw.points}, {"density", c.sector_density}};

    if (c.sweep_count > 0) {
        const StabilitySweep sweep = stability_sweep(c.sweep_count, c.seed, spec.K, spec.Nt, c.threads);
        const double spread = sweep.median_ratio > 0.0 ? sweep.max_ratio / sweep.median_ratio : 0.0;
        checks.push_back(make_check("stability_sweep", sweep.any_violation ? INFINITY : spread, c.tolerances.spread,
                                    "max ratio over median"));
        fitted["stability_sweep"] = {{"count", c.sweep_count},
                                     {"seed", c.seed},
                                     {"max_ratio", sweep.max_ratio},
                                     {"median_ratio", sweep.median_ratio}};
    }

    nlohmann::ordered_json rep = report_header("verify");
    rep["corruption"] = probe.enabled ? nlohmann::ordered_json{{"mode", probe.mode}, {"factor", probe.factor}}
                                      : nlohmann::ordered_json(nullptr);
    rep["field_scale"] = f.scale();
    rep["residual"] = {{"sup", r.sup}, {"l2", r.l2}};
    rep["tail"] = detail::tail_json(f.tail);
    rep["fitted_constants"] = fitted;
    CommandResult res = detail::finish(std::move(rep), checks);
    write_json(out / "verify.json", res.report);
    return res;
}

/// converge.csv with one row per (K, N_t) and converge.json with the fitted
/// tail exponent. Checks: residual at every row, truncation error of phi1
/// non-increasing in K.
inline CommandResult run_converge(const RunConfig& c, const fs::path& out) {
    const ProblemSpec spec = c.to_problem();
    const ConvergenceStudy st = convergence_study(spec, c.converge_K, c.converge_Nt);
    CsvWriter csv({"K", "N_t", "w_sup", "residual_sup", "residual_l2", "data_residual", "tail_bound", "cross_residual"});
    double worst_res = 0.0;
    int increases = 0;
    for (std::size_t i = 0; i < st.rows.size(); ++i) {
        const ConvergenceRow& r = st.rows[i];
        csv.row({double(r.K), double(r.Nt), r.w_sup, r.residual_sup, r.residual_l2, r.data_residual, r.tail_bound,
                 r.cross_residual});
        worst_res = std::max(worst_res, r.residual_sup / std::max(1.0, r.w_sup));
        const std::size_t prev = i >= c.converge_Nt.size() ? i - c.converge_Nt.size() : i;
        if (prev != i && r.data_residual > st.rows[prev].data_residual * (1.0 + 1e-12) + 1e-15) ++increases;
    }
    csv.save(out / "converge.csv");
    nlohmann::ordered_json rep = report_header("converge");
    rep["tail_decay_exponent"] = st.tail_decay_exponent;
    rep["rows"] = st.rows.size();
    CommandResult res = detail::finish(std::move(rep), {make_check("residual", worst_res, c.tolerances.residual),
                                                        make_check("truncation_monotone", increases, 0.0)});
    write_json(out / "converge.json", res.report);
    return res;
}

}  // namespace fractel
