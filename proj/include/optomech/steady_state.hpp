#pragma once

/**
 * @file steady_state.hpp
 * @brief Mean-field steady states of the optomechanical cavity.
 *
 * With u = kappa_A - Re(sigma), v = Delta_A - Im(sigma) and w = omega_m chi^2 the intracavity
 * photon number I obeys
 *
 *     I * (u^2 + (v - w I)^2) = eps_A^2,
 *
 * i.e. a3 I^3 + a2 I^2 + a1 I + a0 = 0 with a3 = w^2, a2 = -2 w v, a1 = u^2 + v^2, a0 = -eps_A^2.
 * The factored form is used for every evaluation: on the upper branch the expanded
 * monomials are many orders of magnitude larger than eps_A^2 and cancel.
 */

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "optomech/atomic_feedback.hpp"
#include "optomech/errors.hpp"
#include "optomech/params.hpp"

namespace optomech {

enum class Stability { unclassified, stable, unstable, marginal };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::marginal: return "marginal";
        case Stability::unclassified: break;
    }
    return "unclassified";
}

struct SteadyStateBranch {
    double I = 0.0;             ///< |a_S|^2
    complex a_S{0.0, 0.0};
    double Q_S = 0.0;           ///< chi * I
    double P_S = 0.0;
    double Delta_eff = 0.0;     ///< Delta_A - omega_m chi^2 I
    double residual = 0.0;      ///< |cubic(I)| / eps_A^2
    bool tangent = false;       ///< sits on a double root of the cubic
    bool static_stable = true;  ///< positive slope of the cubic (outer root)
    Stability stable = Stability::unclassified;
};

struct IntensityCubic {
    double u = 0.0;      ///< kappa_A - Re sigma
    double v = 0.0;      ///< Delta_A - Im sigma
    double w = 0.0;      ///< omega_m chi^2
    double drive = 0.0;  ///< eps_A^2

    std::array<double, 4> coefficients() const { return {w * w, -2.0 * w * v, u * u + v * v, -drive}; }

    double operator()(double I) const {
        const double F = v - w * I;
        return I * (u * u + F * F) - drive;
    }

    double derivative(double I) const {
        const double F = v - w * I;
        return u * u + F * F - 2.0 * w * I * F;
    }
};

inline IntensityCubic intensity_cubic(const SystemConfig& cfg, const DerivedParams& d, const FeedbackTerm& fb) {
    return {cfg.kappa_A - fb.sigma.real(), cfg.Delta_A - fb.sigma.imag(), cfg.omega_m * d.chi * d.chi,
            d.eps_A * d.eps_A};
}

/// Coefficients (a3, a2, a1, a0) of the intensity cubic.
inline std::array<double, 4> cubic_coefficients(const SystemConfig& cfg, const DerivedParams& d,
                                                const FeedbackTerm& fb) {
    return intensity_cubic(cfg, d, fb).coefficients();
}

struct CubicRoots {
    std::vector<double> I;          ///< ascending, all >= 0
    std::vector<bool> double_root;  ///< parallel to I
    /// -27 a3^2 f(I-) f(I+) / eps_A^4: > 0 three real roots, < 0 one. Zero when there are
    /// no positive critical points.
    double discriminant = 0.0;
    bool tangency = false;
};

namespace detail {

inline constexpr double kTangencyTol = 1e-12;
inline constexpr int kMaxPolishIterations = 200;

/// Safeguarded Newton inside a sign-changing bracket.
inline double polish_root(const IntensityCubic& f, double lo, double hi) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if (f(hi) == 0.0) return hi;
    const bool rising = flo < 0.0;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxPolishIterations; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx < 0.0) == rising) lo = x; else hi = x;
        const double width = hi - lo;
        if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
            return std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
        const double df = f.derivative(x);
        double next = (df != 0.0) ? x - fx / df : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return next;
        x = next;
    }
    throw RootPolishError(lo, hi);
}

inline double upper_bracket(const IntensityCubic& f, double start) {
    double hi = std::max(start, 1.0);
    for (int i = 0; i < 2100 && f(hi) <= 0.0; ++i) hi *= 2.0;
    if (!(f(hi) > 0.0)) throw NumericalError("could not bracket the largest intensity root");
    return hi;
}

}  // namespace detail

/// All physical (I >= 0) roots of the intensity cubic.
inline CubicRoots solve_intensity_roots(const IntensityCubic& f) {
    CubicRoots out;
    auto push = [&](double I, bool dbl) {
        out.I.push_back(I);
        out.double_root.push_back(dbl);
    };
    if (f.drive == 0.0) {
        push(0.0, false);
        return out;
    }
    const double uu = f.u * f.u;
    const double vv = f.v * f.v;
    const bool has_turning_points = f.w > 0.0 && f.v > 0.0 && vv > 3.0 * uu;
    if (!has_turning_points) {
        const double hi = detail::upper_bracket(f, f.drive / std::max(uu + vv, std::numeric_limits<double>::min()));
        push(detail::polish_root(f, 0.0, hi), false);
        return out;
    }
    // Critical points of f, written to avoid cancellation when u << v.
    const double I_plus = (2.0 * f.v + std::sqrt(vv - 3.0 * uu)) / (3.0 * f.w);
    const double I_minus = (uu + vv) / (3.0 * f.w * f.w * I_plus);
    const double f_max = f(I_minus);
    const double f_min = f(I_plus);
    out.discriminant = -27.0 * (f.w * f.w) * (f.w * f.w) * (f_max / f.drive) * (f_min / f.drive);
    const double tol = detail::kTangencyTol * f.drive;

    const bool max_touches = std::abs(f_max) <= tol;
    const bool min_touches = std::abs(f_min) <= tol;
    if (max_touches && min_touches) {
        push(I_minus, true);
        out.tangency = true;
        return out;
    }
    if (max_touches) {
        push(I_minus, true);
        push(detail::polish_root(f, I_plus, detail::upper_bracket(f, 2.0 * I_plus)), false);
        out.tangency = true;
        return out;
    }
    if (min_touches) {
        push(detail::polish_root(f, 0.0, I_minus), false);
        push(I_plus, true);
        out.tangency = true;
        return out;
    }
    if (f_min > 0.0) {
        push(detail::polish_root(f, 0.0, I_minus), false);
    } else if (f_max < 0.0) {
        push(detail::polish_root(f, I_plus, detail::upper_bracket(f, 2.0 * I_plus)), false);
    } else {
        push(detail::polish_root(f, 0.0, I_minus), false);
        push(detail::polish_root(f, I_minus, I_plus), false);
        push(detail::polish_root(f, I_plus, detail::upper_bracket(f, 2.0 * I_plus)), false);
    }
    return out;
}

/// a_S = eps_A / ((kappa_A - sigma) + i Delta_eff) for a solved root I.
inline complex mean_field(double I, const SystemConfig& cfg, const DerivedParams& d, const FeedbackTerm& fb) {
    const double Delta_eff = cfg.Delta_A - cfg.omega_m * d.chi * d.chi * I;
    const complex a_S = d.eps_A / (complex(cfg.kappa_A, 0.0) - fb.sigma + complex(0.0, Delta_eff));
    const double back = std::norm(a_S);
    if (std::abs(back - I) > 1e-8 * std::max(I, std::numeric_limits<double>::min()))
        throw NumericalError("mean field |a_S|^2 does not reproduce the intensity root");
    return a_S;
}

namespace detail {

inline SteadyStateBranch make_branch(double I, bool tangent, const IntensityCubic& f, const SystemConfig& cfg,
                                     const DerivedParams& d, const FeedbackTerm& fb) {
    SteadyStateBranch b;
    b.I = I;
    b.a_S = mean_field(I, cfg, d, fb);
    b.Q_S = d.chi * I;
    b.P_S = 0.0;
    b.Delta_eff = cfg.Delta_A - cfg.omega_m * d.chi * d.chi * I;
    b.residual = f.drive > 0.0 ? std::abs(f(I)) / f.drive : 0.0;
    b.tangent = tangent;
    b.static_stable = !tangent && f.derivative(I) > 0.0;
    return b;
}

}  // namespace detail

/// Every physical steady state at the configuration's Delta_A and P_in, ascending in I.
inline std::vector<SteadyStateBranch> solve_branches(const SystemConfig& cfg, const DerivedParams& d,
                                                     const FeedbackTerm& fb) {
    const IntensityCubic f = intensity_cubic(cfg, d, fb);
    const CubicRoots roots = solve_intensity_roots(f);
    std::vector<SteadyStateBranch> out;
    out.reserve(roots.I.size());
    for (std::size_t k = 0; k < roots.I.size(); ++k)
        out.push_back(detail::make_branch(roots.I[k], roots.double_root[k], f, cfg, d, fb));
    return out;
}

/// The steady state whose effective detuning equals `Delta_eff`; unique for any Delta_eff.
/// Returns the drive detuning Delta_A that produces it together with the branch.
inline std::pair<double, SteadyStateBranch> branch_at_effective_detuning(const SystemConfig& cfg,
                                                                         const DerivedParams& d,
                                                                         const FeedbackTerm& fb, double Delta_eff) {
    const double u = cfg.kappa_A - fb.sigma.real();
    const double F = Delta_eff - fb.sigma.imag();
    const double I = d.eps_A * d.eps_A / (u * u + F * F);
    const double Delta_A = Delta_eff + cfg.omega_m * d.chi * d.chi * I;
    const SystemConfig at = with_detuning(cfg, Delta_A);
    const IntensityCubic f = intensity_cubic(at, d, fb);
    SteadyStateBranch b;
    b.I = I;
    b.a_S = d.eps_A / complex(u, F);
    b.Q_S = d.chi * I;
    b.Delta_eff = Delta_eff;
    b.residual = f.drive > 0.0 ? std::abs(f(I)) / f.drive : 0.0;
    b.static_stable = f.derivative(I) > 0.0;
    return {Delta_A, b};
}

}  // namespace optomech
