#pragma once

/**
 * @file stability.hpp
 * @brief Linearised fluctuation dynamics around a steady state and its stability.
 *
 * Fluctuations f = (dQ, dP, dX, dY) obey df/dt = A f with
 *
 *         |  0      w_m     0    0 |
 *     A = | -w_m   -g_m     G    0 |      G = sqrt(2) w_m chi |a_S|
 *         |  0      0       E    F |
 *         |  G      0      -F    E |
 *
 * The mean field is rotated to be real, so only |a_S| enters. Two independent routes decide
 * stability: the Routh-Hurwitz inequalities on the closed-form characteristic quartic, and
 * the roots of the numerically expanded det(lambda I - A). The eigenvalue route is authoritative.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "optomech/errors.hpp"
#include "optomech/params.hpp"
#include "optomech/polynomial.hpp"
#include "optomech/steady_state.hpp"

namespace optomech {

struct DriftMatrix {
    poly::Matrix<4> A{};
    double E = 0.0;
    double F = 0.0;
    double D = 0.0;
    double omega_m = 0.0;
    double gamma_m = 0.0;
    double coupling = 0.0;  ///< sqrt(2) omega_m chi |a_S|

    /// Assembles A from its independent entries.
    static DriftMatrix from_components(double omega_m, double gamma_m, double E, double F, double coupling) {
        DriftMatrix m;
        m.E = E;
        m.F = F;
        m.omega_m = omega_m;
        m.gamma_m = gamma_m;
        m.coupling = coupling;
        m.A = {{{0.0, omega_m, 0.0, 0.0},
                {-omega_m, -gamma_m, coupling, 0.0},
                {0.0, 0.0, E, F},
                {coupling, 0.0, -F, E}}};
        return m;
    }

    /// chi^2 |a_S|^2, recovered from the coupling entry.
    double chi2_I() const { return coupling * coupling / (2.0 * omega_m * omega_m); }
};

/// E and F evaluated term by term, with the denominator D shared by both.
inline DriftMatrix build_drift(const SteadyStateBranch& branch, const SystemConfig& cfg, const DerivedParams& d) {
    const double gat = cfg.gamma_at;
    const double dat = cfg.Delta_at;
    const double g2N = cfg.g_at * cfg.g_at * cfg.N_atoms;
    const double re = gat * cfg.kappa_C - dat * cfg.Delta_C + g2N;
    const double im = dat * cfg.kappa_C + gat * cfg.Delta_C;
    const double D = re * re + im * im;
    const double re_scale = std::abs(gat * cfg.kappa_C) + std::abs(dat * cfg.Delta_C) + g2N;
    const double im_scale = std::abs(dat * cfg.kappa_C) + std::abs(gat * cfg.Delta_C);
    if (!(D > 1e-30 * (re_scale * re_scale + im_scale * im_scale)))
        throw NumericalError("degenerate drift-matrix denominator D");

    const double J2 = d.J * d.J;
    const double lor = gat * gat + dat * dat;
    const double E = -cfg.kappa_A + J2 * (lor * cfg.kappa_C + g2N * gat) / D;
    const double F = cfg.Delta_A - cfg.omega_m * d.chi * d.chi * branch.I + J2 * (lor * cfg.Delta_C - g2N * dat) / D;
    const double G = std::sqrt(2.0) * cfg.omega_m * d.chi * std::sqrt(branch.I);

    DriftMatrix m = DriftMatrix::from_components(cfg.omega_m, d.gamma_m, E, F, G);
    m.D = D;
    return m;
}

/// Monic characteristic quartic {1, c1, c2, c3, c4} in closed form.
inline std::array<double, 5> characteristic_quartic(const DriftMatrix& m) {
    const double g = m.gamma_m, w = m.omega_m, E = m.E, F = m.F;
    const double EF = E * E + F * F;
    return {1.0, g - 2.0 * E, EF + w * w - 2.0 * g * E, g * EF - 2.0 * E * w * w,
            w * w * EF - w * F * m.coupling * m.coupling};
}

/// The four Routh-Hurwitz inequalities: c1 > 0, c1 c2 - c3 > 0, c1 (c2 c3 - c1 c4) - c3^2 > 0, c4 > 0.
inline std::array<bool, 4> routh_hurwitz(const DriftMatrix& m) {
    const auto c = characteristic_quartic(m);
    return {c[1] > 0.0, c[1] * c[2] - c[3] > 0.0, c[1] * (c[2] * c[3] - c[1] * c[4]) - c[3] * c[3] > 0.0,
            c[4] > 0.0};
}

/// The inequalities with the third one exactly as it is usually printed, where the factor
/// multiplying (-2 g E + E^2 + F^2 + w^2) reads (w^2 E^2 + w^2 F^2 - 2 E w^2) instead of c3.
/// That factor is dimensionally inconsistent; kept only to document the discrepancy.
inline std::array<bool, 4> routh_hurwitz_as_printed(const DriftMatrix& m) {
    const auto c = characteristic_quartic(m);
    const double w = m.omega_m, E = m.E, F = m.F;
    const double misprint = w * w * E * E + w * w * F * F - 2.0 * E * w * w;
    auto rh = routh_hurwitz(m);
    rh[2] = c[1] * (c[2] * misprint - c[4] * c[1]) - c[3] * c[3] > 0.0;
    return rh;
}

struct EigenAnalysis {
    std::array<std::complex<double>, 4> eigenvalues{};
    bool eig_pass = false;
    double margin = 0.0;  ///< min |Re lambda|
};

inline EigenAnalysis eigenvalue_stability(const DriftMatrix& m) {
    for (const auto& row : m.A)
        for (double x : row)
            if (!std::isfinite(x)) throw NumericalError("drift matrix has non-finite entries");
    EigenAnalysis out;
    out.eigenvalues = poly::roots<4>(poly::characteristic_polynomial<4>(m.A));
    out.eig_pass = true;
    out.margin = std::numeric_limits<double>::infinity();
    for (const auto& z : out.eigenvalues) {
        if (!(z.real() < 0.0)) out.eig_pass = false;
        out.margin = std::min(out.margin, std::abs(z.real()));
    }
    return out;
}

/// Margins below this fraction of omega_m are reported as marginal.
inline constexpr double kMarginalFraction = 1e-9;

struct StabilityVerdict {
    std::array<bool, 4> rh_pass{};
    EigenAnalysis eigen;
    Stability verdict = Stability::unclassified;

    bool rh_all() const { return rh_pass[0] && rh_pass[1] && rh_pass[2] && rh_pass[3]; }
    bool static_stable() const { return rh_pass[3]; }
    bool paths_agree() const { return rh_all() == eigen.eig_pass; }
};

inline StabilityVerdict classify(const DriftMatrix& m) {
    StabilityVerdict v;
    v.rh_pass = routh_hurwitz(m);
    v.eigen = eigenvalue_stability(m);
    if (v.eigen.margin < kMarginalFraction * m.omega_m)
        v.verdict = Stability::marginal;
    else
        v.verdict = (v.eigen.eig_pass && v.rh_all()) ? Stability::stable : Stability::unstable;
    return v;
}

inline StabilityVerdict classify(SteadyStateBranch& branch, const SystemConfig& cfg, const DerivedParams& d) {
    StabilityVerdict v = classify(build_drift(branch, cfg, d));
    branch.stable = v.verdict;
    return v;
}

}  // namespace optomech
