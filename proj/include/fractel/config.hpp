#pragma once

// Run configuration: YAML schema, validation with line/column diagnostics,
// canonical emission.

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "fractel/error.hpp"
#include "fractel/spectral.hpp"

namespace fractel {

/// Malformed or out-of-range configuration; the message carries the position.
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& what, int line, int column)
        : InvalidArgument(line >= 0 ? "line " + std::to_string(line + 1) + ", column " + std::to_string(column + 1) +
                                          ": " + what
                                    : what),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }      // 0-based, -1 when unknown
    int column() const noexcept { return column_; }  // 0-based

private:
    int line_;
    int column_;
};

/// Initial datum: a named shape times `scale`, or explicit sine coefficients.
///   zero, parabola = x(pi - x), sin (sin(mode x)), sin3 = sin^3 x, cubic = x^3 (pi - x)^3
struct DataSpec {
    std::string preset = "zero";
    int mode = 1;
    double scale = 1.0;
    std::vector<double> coefficients;  // preset "coefficients"

    bool operator==(const DataSpec&) const = default;

    SineData to_sine_data(int K) const {
        constexpr double pi = std::numbers::pi;
        const double a = scale;
        if (preset == "zero") return SineData{std::vector<double>(K, 0.0), [](double) { return 0.0; }};
        if (preset == "coefficients") {
            SineData d;
            for (double c : coefficients) d.coefficients.push_back(a * c);
            return d;
        }
        if (preset == "parabola") return SineData::from_function([a](double x) { return a * x * (pi - x); }, K);
        if (preset == "sin3") return SineData::from_function([a](double x) { return a * std::pow(std::sin(x), 3); }, K);
        if (preset == "cubic")
            return SineData::from_function([a](double x) { return a * std::pow(x * (pi - x), 3); }, K);
        if (preset == "sin") {
            // exact coefficients: a single mode
            SineData d;
            d.coefficients.assign(std::max(K, mode), 0.0);
            d.coefficients[mode - 1] = a;
            const int m = mode;
            d.shape = [a, m](double x) { return a * std::sin(m * x); };
            return d;
        }
        throw InvalidArgument("unknown data preset '" + preset + "'");
    }
};

struct SourceSpec {
    int mode = 1;
    std::vector<PowerTerm> terms;

    bool operator==(const SourceSpec& o) const {
        if (mode != o.mode || terms.size() != o.terms.size()) return false;
        for (std::size_t i = 0; i < terms.size(); ++i)
            if (terms[i].coeff != o.terms[i].coeff || terms[i].beta != o.terms[i].beta) return false;
        return true;
    }
};

struct Tolerances {
    double residual = 1e-6;   // sup |t^{1-rho} residual|, relative to the field scale
    double oracle = 1e-6;     // solver against Laplace inversion
    double realness = 1e-12;  // imaginary residue, relative to the field scale
    double tail = 1e-3;       // truncation bound
    double growth = 1e-2;     // partial-sum increase under doubling K
    double spread = 10.0;     // max stability ratio over median

    bool operator==(const Tolerances&) const = default;
};

struct RunConfig {
    double rho = 0.5;
    double alpha = 1.0;
    double T = 1.0;
    int K = 64;
    int Nt = 128;
    int Mx = 200;
    DataSpec phi0;
    DataSpec phi1;
    std::vector<SourceSpec> source;
    Tolerances tolerances;
    unsigned seed = 1;
    int threads = 1;
    std::string output = "out";
    // command specific
    int oracle_mode = 1;
    int sweep_count = 10;
    int sector_density = 1;
    std::vector<int> converge_K{8, 16, 32, 64};
    std::vector<int> converge_Nt{64, 128};

    bool operator==(const RunConfig&) const = default;

    ProblemSpec to_problem() const {
        ProblemSpec s;
        s.rho = rho;
        s.alpha = alpha;
        s.T = T;
        s.K = K;
        s.Nt = Nt;
        s.Mx = Mx;
        s.phi0 = phi0.to_sine_data(K);
        s.phi1 = phi1.to_sine_data(K);
        for (const SourceSpec& m : source) s.source.push_back({m.mode, Source{m.terms, nullptr}});
        s.tail_tolerance = tolerances.tail;
        s.threads = threads;
        validate(s);
        return s;
    }
};

namespace detail {

[[noreturn]] inline void config_fail(const YAML::Node& n, const std::string& what) {
    const YAML::Mark m = n.Mark();
    throw ConfigError(what, m.is_null() ? -1 : m.line, m.is_null() ? -1 : m.column);
}

inline void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
    if (!map.IsMap()) config_fail(map, where + " must be a mapping");
    for (const auto& kv : map) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) config_fail(kv.first, "unknown key '" + key + "' in " + where);
    }
}

template <class T>
T read(const YAML::Node& n, const std::string& name) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        config_fail(n, name + " has the wrong type");
    }
}

inline DataSpec parse_data(const YAML::Node& n, const std::string& name) {
    DataSpec d;
    auto set_preset = [&](const std::string& p, const YAML::Node& at) {
        if (p.rfind("sin:", 0) == 0) {
            d.preset = "sin";
            try {
                std::size_t used = 0;
                d.mode = std::stoi(p.substr(4), &used);
                if (used != p.size() - 4) throw std::invalid_argument(p);
            } catch (const std::exception&) {
                config_fail(at, name + ": bad mode in '" + p + "'");
            }
        } else {
            d.preset = p;
        }
        static const std::set<std::string> known{"zero", "parabola", "sin", "sin3", "cubic"};
        if (!known.count(d.preset)) config_fail(at, name + ": unknown preset '" + p + "'");
    };
    if (n.IsScalar()) {
        set_preset(n.as<std::string>(), n);
    } else if (n.IsMap()) {
        check_keys(n, {"preset", "mode", "scale", "coefficients"}, name);
        if (n["coefficients"]) {
            if (n["preset"] || n["mode"]) config_fail(n, name + ": coefficients exclude preset and mode");
            d.preset = "coefficients";
            d.coefficients = read<std::vector<double>>(n["coefficients"], name + ".coefficients");
            for (double c : d.coefficients)
                if (!std::isfinite(c)) config_fail(n["coefficients"], name + ": coefficients must be finite");
        } else if (n["preset"]) {
            set_preset(read<std::string>(n["preset"], name + ".preset"), n["preset"]);
        } else {
            config_fail(n, name + " needs a preset or coefficients");
        }
        if (n["mode"]) d.mode = read<int>(n["mode"], name + ".mode");
        if (n["scale"]) d.scale = read<double>(n["scale"], name + ".scale");
        if (!std::isfinite(d.scale)) config_fail(n["scale"], name + ".scale must be finite");
    } else {
        config_fail(n, name + " must be a preset name or a mapping");
    }
    if (d.mode < 1) config_fail(n, name + ": mode must be >= 1");
    return d;
}

inline std::vector<int> read_increasing(const YAML::Node& n, const std::string& name) {
    std::vector<int> v = read<std::vector<int>>(n, name);
    if (v.empty()) config_fail(n, name + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] < 1 || (i && v[i] <= v[i - 1])) config_fail(n, name + " must be positive and increasing");
    return v;
}

}  // namespace detail

/// Parses a YAML configuration. `rho` and `alpha` are required; other keys
/// take the defaults above. Unknown keys and out-of-range values are errors.
inline RunConfig parse_config(const std::string& text) {
    using detail::config_fail;
    using detail::read;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line, e.mark.column);
    }
    if (!root.IsMap()) throw ConfigError("configuration must be a mapping", 0, 0);
    detail::check_keys(root,
                       {"rho", "alpha", "T", "K", "N_t", "M_x", "phi0", "phi1", "source", "tolerances", "seed",
                        "threads", "output", "oracle", "verify", "converge"},
                       "configuration");
    RunConfig c;
    for (const char* req : {"rho", "alpha"})
        if (!root[req]) throw ConfigError(std::string("missing required key '") + req + "'", 0, 0);

    c.rho = read<double>(root["rho"], "rho");
    if (!(c.rho > 0.0) || !(c.rho < 1.0)) config_fail(root["rho"], "rho must lie in (0,1)");
    c.alpha = read<double>(root["alpha"], "alpha");
    if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) config_fail(root["alpha"], "alpha must be positive");
    if (root["T"]) {
        c.T = read<double>(root["T"], "T");
        if (!(c.T > 0.0) || !std::isfinite(c.T)) config_fail(root["T"], "T must be positive");
    }
    if (root["K"]) {
        c.K = read<int>(root["K"], "K");
        if (c.K < 1 || c.K > 4096) config_fail(root["K"], "K must lie in [1, 4096]");
    }
    if (root["N_t"]) {
        c.Nt = read<int>(root["N_t"], "N_t");
        if (c.Nt < 8 || c.Nt > 65536) config_fail(root["N_t"], "N_t must lie in [8, 65536]");
    }
    if (root["M_x"]) {
        c.Mx = read<int>(root["M_x"], "M_x");
        if (c.Mx < 2 || c.Mx > 65536) config_fail(root["M_x"], "M_x must lie in [2, 65536]");
    }
    if (root["phi0"]) c.phi0 = detail::parse_data(root["phi0"], "phi0");
    if (root["phi1"]) c.phi1 = detail::parse_data(root["phi1"], "phi1");
    if (root["source"]) {
        const YAML::Node s = root["source"];
        if (!s.IsSequence()) config_fail(s, "source must be a list");
        for (const YAML::Node& e : s) {
            detail::check_keys(e, {"mode", "terms"}, "source entry");
            SourceSpec m;
            if (e["mode"]) m.mode = read<int>(e["mode"], "source.mode");
            if (m.mode < 1) config_fail(e["mode"], "source mode must be >= 1");
            if (!e["terms"] || !e["terms"].IsSequence()) config_fail(e, "source entry needs a list of terms");
            for (const YAML::Node& t : e["terms"]) {
                detail::check_keys(t, {"coeff", "beta"}, "source term");
                if (!t["coeff"] || !t["beta"]) config_fail(t, "source term needs coeff and beta");
                PowerTerm p{read<double>(t["coeff"], "coeff"), read<double>(t["beta"], "beta")};
                if (!std::isfinite(p.coeff)) config_fail(t["coeff"], "coeff must be finite");
                if (!(p.beta >= c.rho) || !std::isfinite(p.beta)) config_fail(t["beta"], "beta must be >= rho");
                m.terms.push_back(p);
            }
            c.source.push_back(m);
        }
    }
    if (root["tolerances"]) {
        const YAML::Node t = root["tolerances"];
        detail::check_keys(t, {"residual", "oracle", "realness", "tail", "growth", "spread"}, "tolerances");
        auto tol = [&](const char* key, double& dst) {
            if (!t[key]) return;
            dst = read<double>(t[key], key);
            if (!(dst > 0.0) || !std::isfinite(dst)) config_fail(t[key], std::string(key) + " tolerance must be positive");
        };
        tol("residual", c.tolerances.residual);
        tol("oracle", c.tolerances.oracle);
        tol("realness", c.tolerances.realness);
        tol("tail", c.tolerances.tail);
        tol("growth", c.tolerances.growth);
        tol("spread", c.tolerances.spread);
    }
    if (root["seed"]) c.seed = read<unsigned>(root["seed"], "seed");
    if (root["threads"]) {
        c.threads = read<int>(root["threads"], "threads");
        if (c.threads < 1 || c.threads > 256) config_fail(root["threads"], "threads must lie in [1, 256]");
    }
    if (root["output"]) c.output = read<std::string>(root["output"], "output");
    if (root["oracle"]) {
        const YAML::Node o = root["oracle"];
        detail::check_keys(o, {"mode"}, "oracle");
        if (o["mode"]) c.oracle_mode = read<int>(o["mode"], "oracle.mode");
        if (c.oracle_mode < 1) config_fail(o["mode"], "oracle.mode must be >= 1");
    }
    if (root["verify"]) {
        const YAML::Node v = root["verify"];
        detail::check_keys(v, {"sweep_count", "sector_density"}, "verify");
        if (v["sweep_count"]) c.sweep_count = read<int>(v["sweep_count"], "verify.sweep_count");
        if (c.sweep_count < 0) config_fail(v["sweep_count"], "verify.sweep_count must be >= 0");
        if (v["sector_density"]) c.sector_density = read<int>(v["sector_density"], "verify.sector_density");
        if (c.sector_density < 1) config_fail(v["sector_density"], "verify.sector_density must be >= 1");
    }
    if (root["converge"]) {
        const YAML::Node v = root["converge"];
        detail::check_keys(v, {"K", "N_t"}, "converge");
        if (v["K"]) c.converge_K = detail::read_increasing(v["K"], "converge.K");
        if (v["N_t"]) c.converge_Nt = detail::read_increasing(v["N_t"], "converge.N_t");
        for (int n : c.converge_Nt)
            if (n < 8) config_fail(v["N_t"], "converge.N_t entries must be >= 8");
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'", -1, -1);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Canonical YAML for a configuration; parse_config(emit_config(c)) == c.
inline std::string emit_config(const RunConfig& c) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    auto data = [&](const char* key, const DataSpec& d) {
        e << YAML::Key << key << YAML::Value << YAML::BeginMap;
        if (d.preset == "coefficients") {
            e << YAML::Key << "coefficients" << YAML::Value << YAML::Flow << d.coefficients;
        } else {
            e << YAML::Key << "preset" << YAML::Value << d.preset;
            e << YAML::Key << "mode" << YAML::Value << d.mode;
        }
        e << YAML::Key << "scale" << YAML::Value << d.scale << YAML::EndMap;
    };
    e << YAML::BeginMap;
    e << YAML::Key << "rho" << YAML::Value << c.rho;
    e << YAML::Key << "alpha" << YAML::Value << c.alpha;
    e << YAML::Key << "T" << YAML::Value << c.T;
    e << YAML::Key << "K" << YAML::Value << c.K;
    e << YAML::Key << "N_t" << YAML::Value << c.Nt;
    e << YAML::Key << "M_x" << YAML::Value << c.Mx;
    data("phi0", c.phi0);
    data("phi1", c.phi1);
    e << YAML::Key << "source" << YAML::Value << YAML::BeginSeq;
    for (const SourceSpec& m : c.source) {
        e << YAML::BeginMap << YAML::Key << "mode" << YAML::Value << m.mode;
        e << YAML::Key << "terms" << YAML::Value << YAML::BeginSeq;
        for (const PowerTerm& t : m.terms)
            e << YAML::Flow << YAML::BeginMap << YAML::Key << "coeff" << YAML::Value << t.coeff << YAML::Key << "beta"
              << YAML::Value << t.beta << YAML::EndMap;
        e << YAML::EndSeq << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "residual" << YAML::Value << c.tolerances.residual;
    e << YAML::Key << "oracle" << YAML::Value << c.tolerances.oracle;
    e << YAML::Key << "realness" << YAML::Value << c.tolerances.realness;
    e << YAML::Key << "tail" << YAML::Value << c.tolerances.tail;
    e << YAML::Key << "growth" << YAML::Value << c.tolerances.growth;
    e << YAML::Key << "spread" << YAML::Value << c.tolerances.spread;
    e << YAML::EndMap;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "threads" << YAML::Value << c.threads;
    e << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << c.output;
    e << YAML::Key << "oracle" << YAML::Value << YAML::BeginMap << YAML::Key << "mode" << YAML::Value << c.oracle_mode
      << YAML::EndMap;
    e << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "sweep_count" << YAML::Value << c.sweep_count;
    e << YAML::Key << "sector_density" << YAML::Value << c.sector_density << YAML::EndMap;
    e << YAML::Key << "converge" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "K" << YAML::Value << YAML::Flow << c.converge_K;
    e << YAML::Key << "N_t" << YAML::Value << YAML::Flow << c.converge_Nt << YAML::EndMap;
    e << YAML::EndMap;
    if (!e.good()) throw Error("emit_config: " + e.GetLastError());
    return std::string(e.c_str()) + "\n";
}

/// Multiplies every error tolerance (not the spread bound) by `factor`.
inline void scale_tolerances(RunConfig& c, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidArgument("tolerance scale must be positive");
    c.tolerances.residual *= factor;
    c.tolerances.oracle *= factor;
    c.tolerances.realness *= factor;
    c.tolerances.tail *= factor;
    c.tolerances.growth *= factor;
}

}  // namespace fractel
