#pragma once

// Classical mean-field equations of motion for cavity A and the mirror (noise dropped),
// with the feedback cavity entering through the adiabatically eliminated term sigma:
//
//   dQ/dt = w_m P
//   dP/dt = w_m chi |a|^2 - w_m Q - g_m P
//   da/dt = [-i (Delta_A - w_m chi Q) + sigma - kappa_A] a + eps_A
//
// Fixed-step classical Runge-Kutta; results are reproducible bit for bit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "optomech/atomic_feedback.hpp"
#include "optomech/errors.hpp"
#include "optomech/params.hpp"

namespace optomech {

struct MeanFieldState {
    double Q = 0.0;
    double P = 0.0;
    complex a{0.0, 0.0};
    double t = 0.0;
};

/// Coefficients of the equations of motion. Built from a configuration, or directly.
struct MeanFieldModel {
    double omega_m = 0.0;
    double gamma_m = 0.0;
    double chi = 0.0;
    double Delta_A = 0.0;
    double kappa_A = 0.0;
    complex sigma{0.0, 0.0};
    double eps_A = 0.0;

    static MeanFieldModel from(const SystemConfig& cfg, const DerivedParams& d, const FeedbackTerm& fb) {
        return {cfg.omega_m, d.gamma_m, d.chi, cfg.Delta_A, cfg.kappa_A, fb.sigma, d.eps_A};
    }

    /// Largest rate the step size has to resolve.
    double max_rate() const {
        return std::max({omega_m, kappa_A, std::abs(Delta_A), std::abs(sigma)});
    }
};

struct Derivative {
    double dQ = 0.0;
    double dP = 0.0;
    complex da{0.0, 0.0};
};

inline Derivative rhs(const MeanFieldState& s, const MeanFieldModel& m) {
    Derivative d;
    d.dQ = m.omega_m * s.P;
    d.dP = m.omega_m * m.chi * std::norm(s.a) - m.omega_m * s.Q - m.gamma_m * s.P;
    d.da = (complex(-m.kappa_A, -(m.Delta_A - m.omega_m * m.chi * s.Q)) + m.sigma) * s.a + m.eps_A;
    return d;
}

class DivergenceError : public NumericalError {
public:
    DivergenceError(const MeanFieldState& last_good)
        : NumericalError("mean-field integration diverged at t = " + std::to_string(last_good.t)),
          last_(last_good) {}
    const MeanFieldState& last_good() const noexcept { return last_; }

private:
    MeanFieldState last_;
};

inline constexpr double kMaxStepFraction = 0.05;

inline MeanFieldState rk4_step(const MeanFieldState& s, const MeanFieldModel& m, double h) {
    auto shifted = [&](const Derivative& k, double f) {
        MeanFieldState x = s;
        x.Q += f * k.dQ;
        x.P += f * k.dP;
        x.a += f * k.da;
        return x;
    };
    const Derivative k1 = rhs(s, m);
    const Derivative k2 = rhs(shifted(k1, 0.5 * h), m);
    const Derivative k3 = rhs(shifted(k2, 0.5 * h), m);
    const Derivative k4 = rhs(shifted(k3, h), m);
    MeanFieldState out = s;
    out.Q += h / 6.0 * (k1.dQ + 2.0 * k2.dQ + 2.0 * k3.dQ + k4.dQ);
    out.P += h / 6.0 * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    out.a += h / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
    out.t = s.t + h;
    return out;
}

inline bool finite(const MeanFieldState& s) {
    return std::isfinite(s.Q) && std::isfinite(s.P) && std::isfinite(s.a.real()) && std::isfinite(s.a.imag());
}

struct Trajectory {
    std::vector<MeanFieldState> samples;
    std::vector<double> mechanical_energy;  ///< Q^2 + P^2 per sample
    std::vector<double> photon_number;      ///< |a|^2 per sample
};

/// Integrates for `duration` seconds, recording every `stride`-th step plus the final state.
inline Trajectory integrate(const MeanFieldModel& m, MeanFieldState state, double duration, double dt,
                            std::size_t stride = 1) {
    if (!(dt > 0.0) || !(duration >= 0.0) || stride == 0) throw ConfigError("dt", "step, duration and stride must be positive");
    if (dt > kMaxStepFraction / m.max_rate() * (1.0 + 1e-12))
        throw ConfigError("dt", "step exceeds 0.05 / max(omega_m, kappa_A, |Delta_A|, |sigma|)");
    Trajectory tr;
    auto record = [&](const MeanFieldState& s) {
        tr.samples.push_back(s);
        tr.mechanical_energy.push_back(s.Q * s.Q + s.P * s.P);
        tr.photon_number.push_back(std::norm(s.a));
    };
    const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
    const double t0 = state.t;
    record(state);
    for (std::size_t k = 1; k <= steps; ++k) {
        MeanFieldState next = rk4_step(state, m, dt);
        next.t = t0 + static_cast<double>(k) * dt;
        if (!finite(next)) throw DivergenceError(state);
        state = next;
        if (k % stride == 0 || k == steps) record(state);
    }
    return tr;
}

enum class SettleOutcome { converged, not_converged, diverged };

inline const char* to_string(SettleOutcome o) {
    switch (o) {
        case SettleOutcome::converged: return "converged";
        case SettleOutcome::not_converged: return "not_converged";
        case SettleOutcome::diverged: return "diverged";
    }
    return "unknown";
}

struct SettleResult {
    MeanFieldState state;
    SettleOutcome outcome = SettleOutcome::not_converged;
    std::size_t steps = 0;
    double last_change = 0.0;  ///< relative change over the final mechanical period
};

struct SettleOptions {
    double tolerance = 1e-10;
    std::size_t max_steps = 1'000'000;
    double step_fraction = kMaxStepFraction;
};

/// Relative change between two states. Floors of one zero-point unit keep states near the
/// origin from reading as permanently unconverged.
inline double relative_change(const MeanFieldState& a, const MeanFieldState& b) {
    const double dq = std::abs(a.Q - b.Q) / std::max(std::abs(b.Q), 1.0);
    const double dp = std::abs(a.P - b.P) / std::max(std::abs(b.P), 1.0);
    const double da = std::abs(a.a - b.a) / std::max(std::abs(b.a), 1.0);
    return std::max({dq, dp, da});
}

/// Integrates from `guess` until the state moves by less than `tolerance` over one mechanical
/// period. Limit cycles and divergence are reported in the outcome, not thrown.
///
/// The step is re-chosen every period from the largest rate met so far, including the shifted
/// detuning Delta_A - w_m chi Q. A period whose excursion outruns its step is repeated.
inline SettleResult settle(const MeanFieldModel& m, MeanFieldState guess, const SettleOptions& opt = {}) {
    const double period = 2.0 * std::numbers::pi / m.omega_m;
    auto local_rate = [&](const MeanFieldState& s) {
        return std::max(m.max_rate(), std::abs(m.Delta_A - m.omega_m * m.chi * s.Q));
    };

    SettleResult r;
    r.state = guess;
    double rate = local_rate(guess);
    bool blew_up = false;
    while (r.steps < opt.max_steps) {
        const double n = std::ceil(period * rate / opt.step_fraction);
        if (n > static_cast<double>(opt.max_steps)) {
            r.outcome = blew_up ? SettleOutcome::diverged : SettleOutcome::not_converged;
            return r;
        }
        const auto per_period = static_cast<std::size_t>(n);
        const double h = period / n;
        MeanFieldState s = r.state;
        double seen = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k < per_period; ++k) {
            if (r.steps == opt.max_steps) {
                r.state = s;
                r.outcome = SettleOutcome::not_converged;
                return r;
            }
            s = rk4_step(s, m, h);
            ++r.steps;
            if (!finite(s)) {
                ok = false;
                break;
            }
            seen = std::max(seen, local_rate(s));
        }
        blew_up = !ok;
        if (!ok || seen > 1.5 * rate) {
            rate = ok ? seen : 4.0 * rate;
            continue;
        }
        rate = seen;
        r.last_change = relative_change(s, r.state);
        r.state = s;
        if (r.last_change < opt.tolerance) {
            r.outcome = SettleOutcome::converged;
            return r;
        }
    }
    r.outcome = SettleOutcome::not_converged;
    return r;
}

}  // namespace optomech
