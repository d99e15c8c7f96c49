// Command-line front end for the optomech scans.
//
// Detunings on the command line are in units of omega_m; powers in watts; times in seconds.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "optomech/optomech.hpp"

using namespace optomech;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Common {
    std::string config;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON configuration file")->required();
    sub->add_option("--set", c.overrides, "override a config entry, key=value (repeatable)");
}

SystemConfig load(const Common& c) {
    const LoadedConfig lc = load_config(c.config, c.overrides);
    for (const auto& w : lc.warnings) std::cerr << "warning: " << w << "\n";
    return lc.config;
}

FollowMode parse_follow(const std::string& s) { return s == "dynamic" ? FollowMode::dynamic : FollowMode::static_outer; }

nlohmann::json complex_json(complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

int run_steady(const Common& c, double delta, std::optional<double> power) {
    SystemConfig cfg = load(c);
    cfg.Delta_A = delta * cfg.omega_m;
    if (power) cfg.P_in = *power;
    validate(cfg);
    const DerivedParams d = derive(cfg);
    const FeedbackTerm fb = feedback_term(cfg, d);
    auto branches = solve_branches(cfg, d, fb);

    nlohmann::json out;
    out["Delta_A"] = cfg.Delta_A;
    out["P_in"] = cfg.P_in;
    out["feedback_enabled"] = cfg.feedback_enabled;
    out["derived"] = {{"omega_L", d.omega_L}, {"g_OM", d.g_OM}, {"chi", d.chi},
                      {"gamma_m", d.gamma_m}, {"J", d.J},       {"eps_A", d.eps_A}};
    out["sigma"] = complex_json(fb.sigma);
    out["branches"] = nlohmann::json::array();
    for (std::size_t k = 0; k < branches.size(); ++k) {
        auto& b = branches[k];
        const StabilityVerdict v = classify(b, cfg, d);
        nlohmann::json eig = nlohmann::json::array();
        for (const auto& z : v.eigen.eigenvalues) eig.push_back(complex_json(z));
        nlohmann::json jb = {{"index", k},
                             {"I", b.I},
                             {"a_S", complex_json(b.a_S)},
                             {"Q_S", b.Q_S},
                             {"chi_Q_S", d.chi * b.Q_S},
                             {"Delta_eff", b.Delta_eff},
                             {"residual", b.residual},
                             {"tangent", b.tangent},
                             {"static_stable", b.static_stable},
                             {"stability", to_string(b.stable)},
                             {"routh_hurwitz", v.rh_pass},
                             {"eigenvalues", eig},
                             {"margin", v.eigen.margin}};
        try {
            const CoolingReport r = cooling_report(b, cfg, d, fb, k);
            jb["cooling"] = {{"gamma_OM", r.gamma_OM},         {"K_OM", r.K_OM},
                             {"omega_eff", r.omega_eff},       {"gamma_stokes", r.gamma_Stokes},
                             {"gamma_antistokes", r.gamma_antiStokes}, {"n_bath", r.n_bath},
                             {"n_min", r.n_min},               {"unstable_spring", r.unstable_spring},
                             {"heating", r.heating}};
        } catch (const NumericalError& e) {
            jb["cooling"] = {{"error", e.what()}};
        }
        out["branches"].push_back(jb);
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady states, stability, cooling and scans of a feedback-coupled optomechanical cavity"};
    app.require_subcommand(1);

    Common common;
    double delta = 1.0, from = 0.0, to = 2.0, p_from = 1e-7, p_to = 5e-5, duration = 1e-4, dt = 0.0;
    std::optional<double> power;
    std::size_t points = kDefaultGridPoints, stride = 100;
    std::string out, follow = "static", feedback = "both", branch = "lower", axis = "drive";
    unsigned workers = 0;

    auto* steady = app.add_subcommand("steady", "branch report as JSON on stdout");
    add_common(steady, common);
    steady->add_option("--delta-a", delta, "Delta_A / omega_m")->required();
    steady->add_option("--power", power, "drive power [W]");

    auto* scan = app.add_subcommand("scan-detuning", "all branches along a Delta_A grid");
    add_common(scan, common);
    scan->add_option("--power", power, "drive power [W]");
    scan->add_option("--from", from, "first Delta_A / omega_m");
    scan->add_option("--to", to, "last Delta_A / omega_m");
    scan->add_option("--points", points);
    scan->add_option("--out", out)->required();
    scan->add_option("--workers", workers);

    auto* hyst = app.add_subcommand("hysteresis", "up and down power scans with branch following");
    add_common(hyst, common);
    hyst->add_option("--delta-a", delta, "Delta_A / omega_m")->required();
    hyst->add_option("--p-from", p_from, "first power [W]");
    hyst->add_option("--p-to", p_to, "last power [W]");
    hyst->add_option("--points", points);
    hyst->add_option("--follow", follow, "stability used to follow branches")
        ->check(CLI::IsMember({"static", "dynamic"}));
    hyst->add_option("--out", out)->required();
    hyst->add_option("--workers", workers);

    auto* cool = app.add_subcommand("cooling", "optical spring, damping and phonon number along Delta_A");
    add_common(cool, common);
    cool->add_option("--from", from, "first detuning / omega_m");
    cool->add_option("--to", to, "last detuning / omega_m");
    cool->add_option("--points", points);
    cool->add_option("--feedback", feedback)->check(CLI::IsMember({"on", "off", "both"}));
    cool->add_option("--branch", branch)->check(CLI::IsMember({"lower", "upper", "follow"}));
    cool->add_option("--follow", follow, "stability used to select branches")
        ->check(CLI::IsMember({"static", "dynamic"}));
    cool->add_option("--axis", axis, "grid values are drive or effective detunings")
        ->check(CLI::IsMember({"drive", "effective"}));
    cool->add_option("--out", out)->required();
    cool->add_option("--workers", workers);

    auto* dyn = app.add_subcommand("dynamics", "integrate the mean-field equations from the empty cavity");
    add_common(dyn, common);
    dyn->add_option("--delta-a", delta, "Delta_A / omega_m")->required();
    dyn->add_option("--power", power, "drive power [W]");
    dyn->add_option("--duration", duration, "[s]");
    dyn->add_option("--dt", dt, "step [s], default 0.05 / fastest rate");
    dyn->add_option("--stride", stride, "record every n-th step");
    dyn->add_option("--out", out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*steady) return run_steady(common, delta, power);

        SystemConfig cfg = load(common);
        if (power) cfg.P_in = *power;

        if (*scan) {
            const auto rows = detuning_scan(cfg, cfg.P_in, linspace(from * cfg.omega_m, to * cfg.omega_m, points), workers);
            write_csv(detuning_table(rows, cfg), out);
            std::size_t failed = 0;
            for (const auto& r : rows) failed += !r.error.empty();
            if (failed) std::cerr << failed << " grid points failed to solve\n";
            return kOk;
        }
        if (*hyst) {
            const auto h = hysteresis_scan(cfg, delta * cfg.omega_m, linspace(p_from, p_to, points),
                                           parse_follow(follow), workers);
            write_csv(hysteresis_table(h, cfg), out);
            std::printf("P1 = %s\nP2 = %s\n", h.P1 ? format_double(*h.P1).c_str() : "none",
                        h.P2 ? format_double(*h.P2).c_str() : "none");
            return kOk;
        }
        if (*cool) {
            CoolingScanOptions opt;
            opt.policy = branch == "upper" ? BranchPolicy::upper : branch == "follow" ? BranchPolicy::follow
                                                                                      : BranchPolicy::lower;
            opt.feedback = feedback == "on" ? FeedbackMode::on : feedback == "off" ? FeedbackMode::off
                                                                                   : FeedbackMode::both;
            opt.axis = axis == "effective" ? DetuningAxis::effective : DetuningAxis::drive;
            opt.selection = parse_follow(follow);
            opt.workers = workers;
            const auto rows = cooling_scan(cfg, linspace(from * cfg.omega_m, to * cfg.omega_m, points), opt);
            write_csv(cooling_table(rows), out);
            return kOk;
        }
        if (*dyn) {
            cfg.Delta_A = delta * cfg.omega_m;
            validate(cfg);
            const DerivedParams d = derive(cfg);
            const MeanFieldModel m = MeanFieldModel::from(cfg, d, feedback_term(cfg, d));
            const double h = dt > 0.0 ? dt : kMaxStepFraction / m.max_rate();
            const Trajectory tr = integrate(m, MeanFieldState{}, duration, h, stride);
            CsvTable t{{"t", "Q", "P", "Re_a", "Im_a", "photon_number"}, {}};
            for (std::size_t k = 0; k < tr.samples.size(); ++k) {
                const auto& s = tr.samples[k];
                t.rows.push_back({format_double(s.t), format_double(s.Q), format_double(s.P),
                                  format_double(s.a.real()), format_double(s.a.imag()),
                                  format_double(tr.photon_number[k])});
            }
            write_csv(t, out);
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    }
    return kOk;
}
