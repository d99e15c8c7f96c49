#pragma once

// Adiabatically eliminated atomic cavity C. All atoms are taken to sit in the ground
// state (population N in the lower level, none in the upper), so there is no saturation.

#include <cmath>
#include <complex>

#include "optomech/errors.hpp"
#include "optomech/params.hpp"

namespace optomech {

using complex = std::complex<double>;

/// The term J^2 / (kappa_C + i Delta_C + g_at^2 N / (gamma_at + i Delta_at)) that the
/// feedback cavity adds to cavity A's equation of motion.
struct FeedbackTerm {
    complex sigma{0.0, 0.0};
};

/// Steady state of cavity C for a given input amplitude. Diagnostic only.
struct CavityCState {
    complex c_S{0.0, 0.0};
    complex sigma12_S{0.0, 0.0};
};

/// g_at^2 N / (gamma_at + i Delta_at).
inline complex atomic_susceptibility(double g_at, double N_atoms, double gamma_at, double Delta_at) {
    return complex(g_at * g_at * N_atoms, 0.0) / complex(gamma_at, Delta_at);
}

namespace detail {

inline complex cavity_c_denominator(double kappa_C, double Delta_C, complex susceptibility) {
    const complex den = complex(kappa_C, Delta_C) + susceptibility;
    if (!(std::abs(den) >= 1e-30 * kappa_C))
        throw NumericalError("degenerate cavity-C denominator: |kappa_C + i Delta_C + chi_at| vanishes");
    return den;
}

}  // namespace detail

inline FeedbackTerm feedback_term(double J, double kappa_C, double Delta_C, complex susceptibility) {
    const complex den = detail::cavity_c_denominator(kappa_C, Delta_C, susceptibility);
    if (J == 0.0) return {};
    return {complex(J * J, 0.0) / den};
}

/// Convenience overload pulling every input from the configuration.
inline FeedbackTerm feedback_term(const SystemConfig& cfg, const DerivedParams& d) {
    return feedback_term(d.J, cfg.kappa_C, cfg.Delta_C,
                         atomic_susceptibility(cfg.g_at, cfg.N_atoms, cfg.gamma_at, cfg.Delta_at));
}

/// c_S = eps_C / (kappa_C + i Delta_C + chi_at),  sigma12_S = -i g_at c_S N / (gamma_at + i Delta_at).
inline CavityCState cavity_c_steady_state(complex eps_C, double kappa_C, double Delta_C, complex susceptibility,
                                          double g_at, double N_atoms, double gamma_at, double Delta_at) {
    const complex den = detail::cavity_c_denominator(kappa_C, Delta_C, susceptibility);
    CavityCState s;
    s.c_S = eps_C / den;
    s.sigma12_S = complex(0.0, -g_at) * s.c_S * N_atoms / complex(gamma_at, Delta_at);
    return s;
}

/// Cavity C driven by the output of cavity A: eps_C = i J a_S.
inline CavityCState cavity_c_from_cavity_a(complex a_S, const SystemConfig& cfg, const DerivedParams& d) {
    return cavity_c_steady_state(complex(0.0, d.J) * a_S, cfg.kappa_C, cfg.Delta_C,
                                 atomic_susceptibility(cfg.g_at, cfg.N_atoms, cfg.gamma_at, cfg.Delta_at),
                                 cfg.g_at, cfg.N_atoms, cfg.gamma_at, cfg.Delta_at);
}

}  // namespace optomech
