#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "cbl/fock.hpp"
#include "cbl/params.hpp"

namespace cbl {

struct SweepAxis {
    std::string variable;  // one of eta, theta, Omega, kappa
    double start = 0.0;
    double stop = 0.0;
    int steps = 0;  // >= 2
};

struct SweepSpec {
    SweepAxis primary;
    std::optional<SweepAxis> secondary;
};

struct McSpec {
    long n_traj = 0;
    std::uint64_t seed = 0;
    double dt = 0.01;
};

struct IntegrationSpec {
    double t_final = 20.0;
    double dt = 0.01;
};

/// One run = one JSON document. All physical inputs are in units of gamma
/// unless a "units" block gives the actual gamma scale, in which case every
/// rate is divided by it on load.
struct RunConfig {
    PhysicalParams params;
    std::optional<FockConfig> fock;
    IntegrationSpec integration;
    std::optional<SweepSpec> sweep;
    std::optional<McSpec> mc;
    std::string out_path = "-";  // "-" = stdout
    std::string format = "csv";
};

namespace detail {

inline SweepAxis parse_axis(const nlohmann::json& j) {
    SweepAxis ax;
    ax.variable = j.at("variable").get<std::string>();
    if (ax.variable != "eta" && ax.variable != "theta" && ax.variable != "Omega" &&
        ax.variable != "kappa")
        throw InvalidParams("sweep variable must be eta, theta, Omega or kappa");
    ax.start = j.at("start").get<double>();
    ax.stop = j.at("stop").get<double>();
    ax.steps = j.at("steps").get<int>();
    if (ax.steps < 2) throw InvalidParams("sweep steps must be >= 2");
    return ax;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    RunConfig c;
    const auto& jp = j.at("params");
    double unit = 1.0;
    if (j.contains("units") && j["units"].contains("gamma"))
        unit = j["units"]["gamma"].get<double>();
    if (!(unit > 0.0)) throw InvalidParams("units.gamma must be > 0");

    auto rate = [&](const char* key, double dflt, bool required = false) {
        if (!jp.contains(key)) {
            if (required) throw InvalidParams(std::string("missing params.") + key);
            return dflt;
        }
        return jp[key].get<double>() / unit;
    };
    c.params.g = rate("g", 1.0, true);
    c.params.r_a = rate("r_a", 1.0, true);
    c.params.gamma = rate("gamma", 1.0);
    c.params.Gamma = rate("Gamma", 1.0, true);
    c.params.Omega = rate("Omega", 0.0);
    c.params.kappa = rate("kappa", 1.0, true);
    c.params.eta = jp.value("eta", 0.0);
    if (jp.contains("phase")) {
        const auto& ph = jp["phase"];
        const std::string mode = ph.value("mode", "averaged");
        if (mode == "averaged")
            c.params.phase = GaussianAveraged{ph.value("theta", 0.0)};
        else if (mode == "fixed")
            c.params.phase = FixedPhase{ph.value("phi", 0.0)};
        else
            throw InvalidParams("phase.mode must be 'averaged' or 'fixed'");
    }
    c.params.validate();

    if (j.contains("fock")) {
        FockConfig fc;
        fc.n_max_a = j["fock"].value("n_max_a", 8);
        fc.n_max_b = j["fock"].value("n_max_b", 8);
        fc.boundary_tol = j["fock"].value("boundary_tol", 1e-3);
        fc.validate();
        c.fock = fc;
    }
    if (j.contains("integration")) {
        c.integration.t_final = j["integration"].value("t_final", 20.0);
        c.integration.dt = j["integration"].value("dt", 0.01);
        if (!(c.integration.dt > 0.0) || !(c.integration.t_final >= 0.0))
            throw InvalidParams("integration requires dt > 0 and t_final >= 0");
    }
    if (j.contains("sweep")) {
        SweepSpec sw;
        sw.primary = detail::parse_axis(j["sweep"]);
        if (j["sweep"].contains("second"))
            sw.secondary = detail::parse_axis(j["sweep"]["second"]);
        c.sweep = sw;
    }
    if (j.contains("mc")) {
        McSpec mc;
        mc.n_traj = j["mc"].at("n_traj").get<long>();
        mc.seed = j["mc"].value("seed", std::uint64_t{0});
        mc.dt = j["mc"].value("dt", 0.01);
        if (mc.n_traj < 100) throw InvalidParams("mc.n_traj must be >= 100");
        if (!(mc.dt > 0.0)) throw InvalidParams("mc.dt must be > 0");
        c.mc = mc;
    }
    if (j.contains("output")) {
        c.out_path = j["output"].value("path", std::string{"-"});
        c.format = j["output"].value("format", std::string{"csv"});
        if (c.format != "csv" && c.format != "json")
            throw InvalidParams("output.format must be csv or json");
    }
    return c;
}

/// theta (averaged) or phi (fixed); the value reported in the phase column.
inline double phase_parameter(const PhaseMode& m) {
    if (const auto* ga = std::get_if<GaussianAveraged>(&m)) return ga->theta;
    return std::get<FixedPhase>(m).phi;
}

inline void set_swept(PhysicalParams& p, const std::string& var, double value) {
    if (var == "eta")
        p.eta = value;
    else if (var == "Omega")
        p.Omega = value;
    else if (var == "kappa")
        p.kappa = value;
    else if (var == "theta") {
        if (auto* ga = std::get_if<GaussianAveraged>(&p.phase))
            ga->theta = value;
        else
            std::get<FixedPhase>(p.phase).phi = value;
    } else
        throw InvalidParams("unknown sweep variable: " + var);
}

}  // namespace cbl
