// Command-line front end: coefficient tables, steady-state and transient
// observables, parameter sweeps, Monte-Carlo verification and the Fock
// oracle cross-check, all driven by a single JSON config.

#include <CLI11.hpp>
#include <atomic>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>
#include <vector>

#include "cbl/analytic.hpp"
#include "cbl/coeffs.hpp"
#include "cbl/config.hpp"
#include "cbl/csv.hpp"
#include "cbl/fock.hpp"
#include "cbl/langevin.hpp"
#include "cbl/moments.hpp"
#include "cbl/quant.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitInternal = 3;

json to_json(cbl::cplx z) {
    if (std::abs(z.imag()) < 1e-14) return z.real();
    return json{{"re", z.real()}, {"im", z.imag()}};
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (path != "-") {
            file.open(path);
            if (!file) throw cbl::InvalidParams("cannot open output path: " + path);
            os = &file;
        }
    }
};

const std::vector<std::string> kSteadyColumns = {
    "eta", "theta", "Omega", "kappa", "stable", "n_a", "n_b", "re_m", "im_m",
    "var_minus", "var_plus", "S_dgcz", "log_neg", "g2_cross", "cs_ratio"};

struct SteadyRow {
    cbl::PhysicalParams params;
    bool stable = false;
    cbl::SecondMoments ss{};
    cbl::NonclassicalityReport rep{};
};

SteadyRow compute_steady(const cbl::PhysicalParams& p) {
    SteadyRow row;
    row.params = p;
    const auto k = cbl::derive_coeffs(p);
    try {
        row.ss = cbl::steady_state(k);
        row.rep = cbl::nonclassicality(row.ss, {0.0, 0.0});
        row.stable = true;
    } catch (const cbl::Unstable&) {
        row.stable = false;
    }
    return row;
}

std::vector<std::string> steady_cells(const SteadyRow& r) {
    using cbl::csv_num;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> c = {
        csv_num(r.params.eta), csv_num(cbl::phase_parameter(r.params.phase)),
        csv_num(r.params.Omega), csv_num(r.params.kappa),
        r.stable ? "1" : "0"};
    auto push = [&](double v) { c.push_back(csv_num(r.stable ? v : nan)); };
    push(r.ss.n_a);
    push(r.ss.n_b);
    push(r.ss.m.real());
    push(r.ss.m.imag());
    push(r.rep.var_minus);
    push(r.rep.var_plus);
    push(r.rep.dgcz);
    push(r.rep.log_neg);
    push(r.rep.g2_cross);
    push(r.rep.cs_ratio);
    return c;
}

json steady_json(const SteadyRow& r) {
    json j;
    const auto cols = steady_cells(r);
    for (std::size_t i = 0; i < kSteadyColumns.size(); ++i) {
        if (kSteadyColumns[i] == "stable")
            j["stable"] = r.stable;
        else
            j[kSteadyColumns[i]] = json::parse(cols[i], nullptr, false).is_discarded()
                                       ? json()
                                       : json::parse(cols[i]);
    }
    return j;
}

int cmd_derive(const cbl::RunConfig& cfg, std::ostream& os) {
    const auto k = cbl::derive_coeffs(cfg.params);
    const auto nd = cbl::noise_diffusion(k);
    json j;
    j["zeta"] = k.zeta;
    j["zetap"] = k.zetap;
    j["chi"] = k.chi;
    j["A"] = k.A;
    j["B"] = k.B;
    j["Theta_p"] = to_json(k.Theta_p);
    j["Theta_m"] = to_json(k.Theta_m);
    j["C_plus"] = k.C_plus;
    j["C_minus"] = k.C_minus;
    j["D_plus"] = to_json(k.D_plus);
    j["D_minus"] = to_json(k.D_minus);
    j["E_plus"] = to_json(k.E_plus);
    j["E_minus"] = to_json(k.E_minus);
    j["drive"] = k.drive;
    j["a_plus"] = to_json(k.a_plus);
    j["a_minus"] = to_json(k.a_minus);
    j["b_plus"] = to_json(k.b_plus);
    j["b_minus"] = to_json(k.b_minus);
    j["lambda"] = to_json(k.lambda);
    j["epsilon"] = to_json(k.epsilon);
    j["Z"] = to_json(k.Z);
    j["p"] = to_json(k.p);
    j["q_plus"] = to_json(k.q_plus);
    j["q_minus"] = to_json(k.q_minus);
    j["D_aa"] = to_json(nd.D_aa);
    j["D_ba"] = to_json(nd.D_ba);
    j["margin"] = cbl::threshold_margin(k);
    os << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_steady(const cbl::RunConfig& cfg, std::ostream& os) {
    const SteadyRow row = compute_steady(cfg.params);
    if (cfg.format == "json") {
        os << steady_json(row).dump(2) << '\n';
    } else {
        cbl::CsvWriter w(os);
        w.header(kSteadyColumns);
        w.row(steady_cells(row));
    }
    return row.stable ? kExitOk : kExitNumerical;
}

int cmd_transient(const cbl::RunConfig& cfg, std::ostream& os, bool with_fock) {
    const auto k = cbl::derive_coeffs(cfg.params);
    const double dt = cfg.integration.dt;
    const double t_final = cfg.integration.t_final;

    const auto traj = cbl::integrate(k, cbl::MomentState{}, t_final, dt);

    cbl::FockConfig fc = cfg.fock.value_or(cbl::FockConfig{});
    cbl::DensityMatrix rho;
    if (with_fock) rho = cbl::DensityMatrix::vacuum(fc.n_max_a, fc.n_max_b);

    std::vector<std::string> cols = {"t",        "ode_n_a",  "ode_n_b",
                                     "ode_re_m", "ode_im_m", "an_n_a",
                                     "an_n_b",   "an_re_m",  "an_im_m"};
    if (with_fock)
        for (const char* c : {"fock_n_a", "fock_n_b", "fock_re_m", "fock_im_m",
                              "trace_dev", "min_eig", "boundary_pop"})
            cols.push_back(c);
    cbl::CsvWriter w(os);
    w.header(cols);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& st : traj) {
        std::vector<std::string> cells = {
            cbl::csv_num(st.t), cbl::csv_num(st.second.n_a),
            cbl::csv_num(st.second.n_b), cbl::csv_num(st.second.m.real()),
            cbl::csv_num(st.second.m.imag())};
        if (k.averaged) {
            const auto an = cbl::second_moments_closed(k, cbl::SecondMoments{}, st.t);
            cells.push_back(cbl::csv_num(an.n_a));
            cells.push_back(cbl::csv_num(an.n_b));
            cells.push_back(cbl::csv_num(an.m.real()));
            cells.push_back(cbl::csv_num(an.m.imag()));
        } else {
            for (int i = 0; i < 4; ++i) cells.push_back(cbl::csv_num(nan));
        }
        if (with_fock) {
            if (st.t > rho.time)
                rho = cbl::evolve(k, fc, rho, st.t - rho.time, 0.0);
            const auto fm = cbl::moments_of(rho);
            const auto diag = cbl::diagnostics(rho);
            cells.push_back(cbl::csv_num(fm.second.n_a));
            cells.push_back(cbl::csv_num(fm.second.n_b));
            cells.push_back(cbl::csv_num(fm.second.m.real()));
            cells.push_back(cbl::csv_num(fm.second.m.imag()));
            cells.push_back(cbl::csv_num(diag.trace_dev));
            cells.push_back(cbl::csv_num(diag.min_eigenvalue));
            cells.push_back(cbl::csv_num(diag.boundary_pop));
        }
        w.row(cells);
    }
    return kExitOk;
}

int cmd_sweep(const cbl::RunConfig& cfg, std::ostream& os) {
    if (!cfg.sweep) throw cbl::InvalidParams("sweep section required");
    const auto& sw = *cfg.sweep;
    auto grid_value = [](const cbl::SweepAxis& ax, int i) {
        return ax.start + (ax.stop - ax.start) * double(i) / double(ax.steps - 1);
    };

    std::vector<cbl::PhysicalParams> points;
    for (int i = 0; i < sw.primary.steps; ++i) {
        cbl::PhysicalParams p = cfg.params;
        cbl::set_swept(p, sw.primary.variable, grid_value(sw.primary, i));
        if (sw.secondary) {
            for (int j = 0; j < sw.secondary->steps; ++j) {
                cbl::PhysicalParams q = p;
                cbl::set_swept(q, sw.secondary->variable, grid_value(*sw.secondary, j));
                points.push_back(q);
            }
        } else {
            points.push_back(p);
        }
    }
    for (const auto& p : points) p.validate();  // fail before any work

    // points run concurrently; output ordering stays by grid index
    std::vector<SteadyRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            rows[i] = compute_steady(points[i]);
        }
    };
    const unsigned n_threads =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()),
                              points.size());
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (cfg.format == "json") {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(steady_json(r));
        os << arr.dump(2) << '\n';
    } else {
        cbl::CsvWriter w(os);
        w.header(kSteadyColumns);
        for (const auto& r : rows) w.row(steady_cells(r));
    }
    return kExitOk;
}

int cmd_mc(const cbl::RunConfig& cfg, std::ostream& os) {
    if (!cfg.mc) throw cbl::InvalidParams("mc section required");
    const auto k = cbl::derive_coeffs(cfg.params);
    const auto est = cbl::simulate_ensemble(k, cfg.mc->n_traj,
                                            cfg.integration.t_final, cfg.mc->dt,
                                            cfg.mc->seed);
    const auto ode =
        cbl::propagate_expm(k, cbl::MomentState{}, cfg.integration.t_final);

    cbl::CsvWriter w(os);
    w.header({"observable", "mc", "stderr", "ode", "abs_z"});
    auto row = [&](const char* name, double mc, double se, double ref) {
        const double z = se > 0.0 ? std::abs(mc - ref) / se : 0.0;
        w.row({name, cbl::csv_num(mc), cbl::csv_num(se), cbl::csv_num(ref),
               cbl::csv_num(z)});
    };
    row("n_a", est.n_a, est.se_n_a, ode.second.n_a);
    row("n_b", est.n_b, est.se_n_b, ode.second.n_b);
    row("re_m", est.m.real(), est.se_m_re, ode.second.m.real());
    row("im_m", est.m.imag(), est.se_m_im, ode.second.m.imag());
    return kExitOk;
}

int cmd_oracle_check(const cbl::RunConfig& cfg, std::ostream& os) {
    const auto k = cbl::derive_coeffs(cfg.params);
    const cbl::FockConfig fc = cfg.fock.value_or(cbl::FockConfig{});
    const double t_final = cfg.integration.t_final;

    double max_ode_vs_an = 0.0, max_ode_vs_fock = 0.0;
    cbl::DensityMatrix rho = cbl::DensityMatrix::vacuum(fc.n_max_a, fc.n_max_b);
    cbl::EvolveStats stats{};
    const std::vector<double> checkpoints = {t_final / 4.0, t_final / 2.0, t_final};
    for (double t : checkpoints) {
        const auto ode = cbl::propagate_expm(k, cbl::MomentState{}, t);
        if (k.averaged) {
            const auto an = cbl::second_moments_closed(k, cbl::SecondMoments{}, t);
            max_ode_vs_an = std::max(
                {max_ode_vs_an, std::abs(an.n_a - ode.second.n_a),
                 std::abs(an.n_b - ode.second.n_b), std::abs(an.m - ode.second.m)});
        }
        cbl::EvolveStats st;
        rho = cbl::evolve(k, fc, rho, t - rho.time, 0.0, &st);
        stats.max_herm_correction =
            std::max(stats.max_herm_correction, st.max_herm_correction);
        const auto fm = cbl::moments_of(rho);
        max_ode_vs_fock = std::max(
            {max_ode_vs_fock, std::abs(fm.second.n_a - ode.second.n_a),
             std::abs(fm.second.n_b - ode.second.n_b),
             std::abs(fm.second.m - ode.second.m)});
    }
    const auto diag = cbl::diagnostics(rho);
    const double fock_tol = std::max(1e-3, 10.0 * diag.boundary_pop);
    const bool pass = (!k.averaged || max_ode_vs_an < 1e-8) &&
                      max_ode_vs_fock < fock_tol && diag.trace_dev < 1e-9;

    json j;
    j["t_final"] = t_final;
    j["n_max_a"] = fc.n_max_a;
    j["n_max_b"] = fc.n_max_b;
    j["max_ode_vs_analytic"] = max_ode_vs_an;
    j["max_ode_vs_fock"] = max_ode_vs_fock;
    j["fock_tolerance"] = fock_tol;
    j["trace_dev"] = diag.trace_dev;
    j["herm_correction_max"] = stats.max_herm_correction;
    j["min_eigenvalue"] = diag.min_eigenvalue;
    j["boundary_pop"] = diag.boundary_pop;
    j["pass"] = pass;
    os << j.dump(2) << '\n';
    return pass ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-photon coherent beat laser simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags remain valid after the subcommand

    std::string config_path = "-";
    std::string out_path;
    std::string format;
    bool with_fock = false;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON config path ('-' = stdin)");
    app.add_option("--out", out_path, "output path (overrides config)");
    app.add_option("--format", format, "csv|json (overrides config)");
    app.add_flag("--fock", with_fock, "enable Fock-oracle columns (transient)");
    app.add_flag("--quiet", quiet, "suppress informational messages");

    auto* derive = app.add_subcommand("derive", "emit the derived coefficient table");
    auto* steady = app.add_subcommand("steady", "steady-state moments and report");
    auto* transient =
        app.add_subcommand("transient", "time series (ODE, analytic, optional Fock)");
    auto* sweep = app.add_subcommand("sweep", "steady-state grid sweep");
    auto* mc = app.add_subcommand("mc", "Monte-Carlo Langevin verification");
    auto* oracle =
        app.add_subcommand("oracle-check", "three-route equivalence check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        json j;
        if (config_path == "-") {
            j = json::parse(std::cin);
        } else {
            std::ifstream f(config_path);
            if (!f) {
                std::cerr << "error: cannot open config: " << config_path << '\n';
                return kExitConfig;
            }
            j = json::parse(f);
        }
        cbl::RunConfig cfg = cbl::parse_config(j);
        if (!out_path.empty()) cfg.out_path = out_path;
        if (!format.empty()) cfg.format = format;

        Output out(cfg.out_path);
        if (derive->parsed()) return cmd_derive(cfg, *out.os);
        if (steady->parsed()) return cmd_steady(cfg, *out.os);
        if (transient->parsed())
            return cmd_transient(cfg, *out.os, with_fock || cfg.fock.has_value());
        if (sweep->parsed()) return cmd_sweep(cfg, *out.os);
        if (mc->parsed()) return cmd_mc(cfg, *out.os);
        if (oracle->parsed()) return cmd_oracle_check(cfg, *out.os);
        return kExitInternal;
    } catch (const cbl::InvalidParams& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cbl::Unstable& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const cbl::NonFinite& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const cbl::TruncationOverflow& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
