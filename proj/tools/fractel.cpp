// Command-line front end: ml, solve, oracle, verify, converge.
// Exit codes: 0 ok, 1 a check failed or a computation aborted, 2 usage or configuration error.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "fractel/commands.hpp"
#include "fractel/mlf.hpp"

namespace {

constexpr int kUsage = 2;

void print_checks(const nlohmann::ordered_json& report) {
    for (const auto& c : report["checks"])
        std::cout << c["name"].get<std::string>() << ": " << c["verdict"].get<std::string>() << " (measured "
                  << fractel::format_number(c["measured"].get<double>()) << ", tolerance "
                  << fractel::format_number(c["tolerance"].get<double>()) << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-fractional telegraph-type equation on (0, pi): solver and checks"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    int threads = 0;
    double tolerance_scale = 1.0;
    app.add_option("--config", config_path, "YAML run configuration")->envname("FRACTEL_CONFIG");
    app.add_option("--out", out_dir, "output directory (default: the config's output)")->envname("FRACTEL_OUT");
    app.add_option("--threads", threads, "worker threads")->envname("FRACTEL_THREADS")->check(CLI::Range(1, 256));
    app.add_option("--tolerance-scale", tolerance_scale, "multiplies every error tolerance")
        ->envname("FRACTEL_TOLERANCE_SCALE")
        ->check(CLI::PositiveNumber);

    double rho = 0.5, mu = 1.0, re = 0.0, im = 0.0;
    int gamma = 1;
    CLI::App* ml = app.add_subcommand("ml", "evaluate E^gamma_{rho,mu}(z); prints re,im,err_estimate");
    ml->add_option("--rho", rho)->required();
    ml->add_option("--mu", mu)->required();
    ml->add_option("--gamma", gamma)->check(CLI::IsMember({1, 2}));
    ml->add_option("--re", re);
    ml->add_option("--im", im);

    app.add_subcommand("solve", "assemble the series solution; writes solution.csv and solution.json");
    app.add_subcommand("oracle", "compare one mode with Laplace inversion; writes oracle.csv");
    CLI::App* verify = app.add_subcommand("verify", "run the property checks; writes verify.json");
    fractel::Corruption probe;
    verify->add_flag("--inject-corruption", probe.enabled, "scale one mode before checking");
    verify->add_option("--corrupt-mode", probe.mode, "mode to scale")->check(CLI::PositiveNumber);
    verify->add_option("--corrupt-factor", probe.factor, "scale factor");
    app.add_subcommand("converge", "refinement study over K and N_t; writes converge.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    if (ml->parsed()) {
        try {
            const fractel::MLResult r = fractel::prabhakar_eval({rho, mu, gamma, fractel::cplx(re, im)});
            std::cout << fractel::format_number(r.value.real()) << ',' << fractel::format_number(r.value.imag()) << ','
                      << fractel::format_number(r.error_estimate) << '\n';
            return 0;
        } catch (const fractel::InvalidArgument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kUsage;
        } catch (const fractel::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }

    const std::string command = app.get_subcommands().front()->get_name();
    if (config_path.empty()) {
        std::cerr << "error: " << command << " needs --config (or FRACTEL_CONFIG)\n";
        return kUsage;
    }
    fractel::RunConfig cfg;
    try {
        cfg = fractel::load_config(config_path);
        if (threads > 0) cfg.threads = threads;
        fractel::scale_tolerances(cfg, tolerance_scale);
        cfg.to_problem();  // validates the assembled problem
    } catch (const fractel::InvalidArgument& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << '\n';
        return kUsage;
    }
    const fractel::fs::path out = out_dir.empty() ? fractel::fs::path(cfg.output) : fractel::fs::path(out_dir);

    try {
        fractel::CommandResult r;
        if (command == "solve") r = fractel::run_solve(cfg, out);
        else if (command == "oracle") r = fractel::run_oracle(cfg, out);
        else if (command == "verify") r = fractel::run_verify(cfg, out, probe);
        else r = fractel::run_converge(cfg, out);
        print_checks(r.report);
        std::cout << command << ": " << (r.exit_code == 0 ? "ok" : "check failed") << '\n';
        return r.exit_code;
    } catch (const std::exception& e) {
        // flag the run as partial; files written before the failure are kept
        nlohmann::ordered_json rep = fractel::report_header(command);
        rep["complete"] = false;
        rep["error"] = e.what();
        try {
            fractel::write_json(out / (command + ".partial.json"), rep);
        } catch (const std::exception&) {
        }
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
