#pragma once

/**
 * @file cooling.hpp
 * @brief Radiation-pressure backaction on the mirror: optical spring, optomechanical
 *        damping, sideband rates and the minimum phonon number.
 *
 * With S = i Delta_eff - sigma + kappa_A and R = 1/(S - i w_m) - 1/(S* - i w_m):
 *
 *     gamma_OM = hbar (g_OM |a_S|)^2 Re R / (m w_m)
 *     K_OM     = hbar (g_OM |a_S|)^2 Im R
 *     gamma_antiStokes - gamma_Stokes = gamma_OM
 *     n_min    = (gamma_Stokes + gamma_m n_bath) / (gamma_OM + gamma_m)
 */

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>

#include "optomech/atomic_feedback.hpp"
#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/params.hpp"
#include "optomech/steady_state.hpp"

namespace optomech {

struct ResponseFactor {
    complex S{0.0, 0.0};
    complex R{0.0, 0.0};
};

struct DampingAndSpring {
    double gamma_OM = 0.0;
    double K_OM = 0.0;
    double omega_eff = 0.0;       ///< NaN when the spring is unstable
    bool unstable_spring = false; ///< omega_m^2 + K_OM/m < 0
};

struct SidebandRates {
    double gamma_Stokes = 0.0;
    double gamma_antiStokes = 0.0;
};

struct PhononNumber {
    double n_bath = 0.0;
    double n_min = 0.0;   ///< +inf in the heating regime
    bool heating = false; ///< gamma_OM + gamma_m <= 0
};

struct CoolingReport {
    complex S{0.0, 0.0};
    complex R{0.0, 0.0};
    double gamma_OM = 0.0;
    double K_OM = 0.0;
    double omega_eff = 0.0;
    double gamma_Stokes = 0.0;
    double gamma_antiStokes = 0.0;
    double n_bath = 0.0;
    double n_min = 0.0;
    bool unstable_spring = false;
    bool heating = false;
    std::optional<std::size_t> branch_index;
};

namespace detail {

inline void check_pole(complex z, double omega_m) {
    if (!(std::abs(z) >= 1e-30 * omega_m))
        throw NumericalError("mechanical frequency sits on a pole of the cavity response");
}

/// hbar (g_OM |a_S|)^2 / (m omega_m)
inline double rate_prefactor(const SteadyStateBranch& b, const SystemConfig& cfg, const DerivedParams& d) {
    return constants::hbar * d.g_OM * d.g_OM * b.I / (cfg.m * cfg.omega_m);
}

}  // namespace detail

/// S and R at the mechanical frequency; Delta inside S is the branch's self-consistent Delta_eff.
inline ResponseFactor response_factor(const SteadyStateBranch& b, const SystemConfig& cfg, const FeedbackTerm& fb) {
    ResponseFactor r;
    r.S = complex(0.0, b.Delta_eff) - fb.sigma + cfg.kappa_A;
    const complex anti = r.S - complex(0.0, cfg.omega_m);
    const complex stokes = std::conj(r.S) - complex(0.0, cfg.omega_m);
    detail::check_pole(anti, cfg.omega_m);
    detail::check_pole(stokes, cfg.omega_m);
    r.R = 1.0 / anti - 1.0 / stokes;
    return r;
}

inline DampingAndSpring damping_and_spring(const ResponseFactor& rf, const SteadyStateBranch& b,
                                           const SystemConfig& cfg, const DerivedParams& d) {
    DampingAndSpring out;
    const double pref = detail::rate_prefactor(b, cfg, d);
    out.gamma_OM = pref * rf.R.real();
    out.K_OM = constants::hbar * d.g_OM * d.g_OM * b.I * rf.R.imag();
    const double w2 = cfg.omega_m * cfg.omega_m + out.K_OM / cfg.m;
    out.unstable_spring = w2 < 0.0;
    out.omega_eff = out.unstable_spring ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(w2);
    return out;
}

inline SidebandRates sideband_rates(const ResponseFactor& rf, const SteadyStateBranch& b, const SystemConfig& cfg,
                                    const DerivedParams& d) {
    const double pref = detail::rate_prefactor(b, cfg, d);
    const complex w(0.0, cfg.omega_m);
    return {pref * (1.0 / (std::conj(rf.S) - w)).real(), pref * (1.0 / (rf.S - w)).real()};
}

inline double bath_occupancy(double T_bath, double omega_m) {
    return constants::k_B * T_bath / (constants::hbar * omega_m);
}

inline PhononNumber phonon_number(double gamma_Stokes, double gamma_OM, const SystemConfig& cfg,
                                  const DerivedParams& d) {
    PhononNumber out;
    out.n_bath = bath_occupancy(cfg.T_bath, cfg.omega_m);
    const double total = gamma_OM + d.gamma_m;
    out.heating = !(total > 0.0);
    out.n_min = out.heating ? std::numeric_limits<double>::infinity()
                            : (gamma_Stokes + d.gamma_m * out.n_bath) / total;
    return out;
}

inline CoolingReport cooling_report(const SteadyStateBranch& b, const SystemConfig& cfg, const DerivedParams& d,
                                    const FeedbackTerm& fb, std::optional<std::size_t> branch_index = {}) {
    CoolingReport r;
    const ResponseFactor rf = response_factor(b, cfg, fb);
    const DampingAndSpring ds = damping_and_spring(rf, b, cfg, d);
    const SidebandRates sb = sideband_rates(rf, b, cfg, d);
    const PhononNumber pn = phonon_number(sb.gamma_Stokes, ds.gamma_OM, cfg, d);
    r.S = rf.S;
    r.R = rf.R;
    r.gamma_OM = ds.gamma_OM;
    r.K_OM = ds.K_OM;
    r.omega_eff = ds.omega_eff;
    r.unstable_spring = ds.unstable_spring;
    r.gamma_Stokes = sb.gamma_Stokes;
    r.gamma_antiStokes = sb.gamma_antiStokes;
    r.n_bath = pn.n_bath;
    r.n_min = pn.n_min;
    r.heating = pn.heating;
    r.branch_index = branch_index;
    return r;
}

}  // namespace optomech
