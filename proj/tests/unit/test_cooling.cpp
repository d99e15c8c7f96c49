#include "helpers.hpp"

using namespace optomech;

namespace {

SteadyStateBranch branch_with(double I, double Delta_eff) {
    SteadyStateBranch b;
    b.I = I;
    b.a_S = std::sqrt(I);
    b.Delta_eff = Delta_eff;
    return b;
}

/// Two-pole response of a bare cavity: Re R and Im R.
std::pair<double, double> two_pole(double k, double D, double w) {
    const double re = k / (k * k + (D - w) * (D - w)) - k / (k * k + (D + w) * (D + w));
    const double im = (D - w) / (k * k + (D - w) * (D - w)) + (D + w) / (k * k + (D + w) * (D + w));
    return {re, -im};
}

}  // namespace

TEST_CASE("zero detuning without feedback gives no damping") {
    const SystemConfig c = with_feedback(th::preset("fig5_6"), false);
    const DerivedParams d = derive(c);
    const SteadyStateBranch b = branch_with(1e6, 0.0);
    const ResponseFactor rf = response_factor(b, c, {});
    CHECK(rf.S == complex(c.kappa_A, 0.0));
    CHECK(rf.R == complex(0.0, 0.0));
    const SidebandRates sb = sideband_rates(rf, b, c, d);
    CHECK(sb.gamma_Stokes == sb.gamma_antiStokes);
    CHECK(damping_and_spring(rf, b, c, d).gamma_OM == 0.0);
}

TEST_CASE("resolved sideband without feedback") {
    const SystemConfig c = with_feedback(th::preset("fig5_6"), false);
    const DerivedParams d = derive(c);
    SystemConfig good = c;
    good.kappa_A = 1e-2 * c.omega_m;
    const SteadyStateBranch b = branch_with(1e6, c.omega_m);
    const ResponseFactor rf = response_factor(b, good, {});
    const auto [re, im] = two_pole(good.kappa_A, c.omega_m, c.omega_m);
    CHECK(th::rel(rf.R.real(), re) < 1e-12);
    CHECK(th::rel(rf.R.imag(), im) < 1e-12);
    CHECK(th::rel(rf.R.real(), 1.0 / good.kappa_A) < 1e-3);
    const SidebandRates sb = sideband_rates(rf, b, good, d);
    CHECK(sb.gamma_antiStokes > 1e3 * sb.gamma_Stokes);
}

TEST_CASE("fig5 lowest branch against the oracle") {
    const SystemConfig c = th::preset("fig5_6");
    const DerivedParams d = derive(c);
    const FeedbackTerm fb = feedback_term(c, d);
    const auto br = solve_branches(c, d, fb);
    REQUIRE(br.size() == 1);
    const CoolingReport r = cooling_report(br[0], c, d, fb, 0);
    // S nearly cancels in its real part; compare on the kappa_A scale.
    CHECK(std::abs(r.S.real() - th::gold("fig5_lowest_S", 0)) < 1e-10 * c.kappa_A);
    CHECK(th::rel(r.S.imag(), th::gold("fig5_lowest_S", 1)) < 1e-10);
    CHECK(th::rel(r.R.real(), th::gold("fig5_lowest_R", 0)) < 1e-8);
    CHECK(th::rel(r.R.imag(), th::gold("fig5_lowest_R", 1)) < 1e-9);
    CHECK(th::rel(r.gamma_OM, th::gold("fig5_lowest_gamma_OM")) < 1e-8);
    CHECK(th::rel(r.K_OM, th::gold("fig5_lowest_K_OM")) < 1e-9);
    REQUIRE(r.branch_index);
    CHECK(*r.branch_index == 0);
}

TEST_CASE("no light, no back-action") {
    const SystemConfig c = th::preset("fig5_6");
    const DerivedParams d = derive(c);
    const FeedbackTerm fb = feedback_term(c, d);
    const CoolingReport r = cooling_report(branch_with(0.0, c.Delta_A), c, d, fb);
    CHECK(r.gamma_OM == 0.0);
    CHECK(r.K_OM == 0.0);
    CHECK(r.omega_eff == c.omega_m);
    CHECK(r.n_min == r.n_bath);
    CHECK_FALSE(r.heating);
    CHECK_FALSE(r.unstable_spring);
}

TEST_CASE("purely imaginary response only shifts the spring") {
    const SystemConfig c = th::preset("fig5_6");
    const DerivedParams d = derive(c);
    ResponseFactor rf;
    rf.R = complex(0.0, 2e-7);
    const DampingAndSpring ds = damping_and_spring(rf, branch_with(1e6, 0.0), c, d);
    CHECK(ds.gamma_OM == 0.0);
    CHECK(ds.K_OM != 0.0);
}

TEST_CASE("unstable spring and heating are flags") {
    const SystemConfig c = with_feedback(th::preset("fig5_6"), false);
    const DerivedParams d = derive(c);
    // Blue of the cavity (Delta_eff < 0 in this convention) the light anti-damps and softens.
    const CoolingReport r = cooling_report(branch_with(1e12, -0.3 * c.omega_m), c, d, {});
    CHECK(r.heating);
    CHECK(std::isinf(r.n_min));
    CHECK(r.unstable_spring);
    CHECK(std::isnan(r.omega_eff));
}

TEST_CASE("pole proximity is an error") {
    CHECK_THROWS_AS(detail::check_pole(complex(0.0, 0.0), 1e6), NumericalError);
    CHECK_NOTHROW(detail::check_pole(complex(1e-20, 0.0), 1e6));
}

TEST_CASE("n_bath spot value") {
    CHECK(th::rel(bath_occupancy(300.0, 2.0 * M_PI * 3.5e5), th::gold("n_bath_300K_350kHz")) < 1e-14);
}

TEST_CASE("cooling identities on random draws") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 3000; ++k) {
        const SystemConfig c = th::random_config(rng);
        const DerivedParams d = derive(c);
        const FeedbackTerm fb = feedback_term(c, d);
        for (const auto& b : solve_branches(c, d, fb)) {
            const CoolingReport r = cooling_report(b, c, d, fb);
            const double scale = std::max(std::abs(r.gamma_antiStokes), std::abs(r.gamma_Stokes));
            CHECK(std::abs(r.gamma_OM - (r.gamma_antiStokes - r.gamma_Stokes)) <= 1e-10 * scale);
            if (!r.heating) CHECK(r.n_min >= 0.0);

            // Linear in |a_S|^2 at fixed Delta_eff.
            SteadyStateBranch twice = b;
            twice.I = 2.0 * b.I;
            const CoolingReport r2 = cooling_report(twice, c, d, fb);
            CHECK(th::rel(r2.gamma_OM, 2.0 * r.gamma_OM) < 1e-14);
            CHECK(th::rel(r2.K_OM, 2.0 * r.K_OM) < 1e-14);
            CHECK(th::rel(r2.gamma_Stokes, 2.0 * r.gamma_Stokes) < 1e-14);
            CHECK(th::rel(r2.gamma_antiStokes, 2.0 * r.gamma_antiStokes) < 1e-14);
        }
    }
}

TEST_CASE("n_min falls as the optical damping grows") {
    const SystemConfig c = th::preset("fig5_6");
    const DerivedParams d = derive(c);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 50; ++k) {
        const double gOM = d.gamma_m * std::pow(10.0, 0.1 * k);
        const PhononNumber p = phonon_number(5.0, gOM, c, d);
        CHECK(p.n_min < prev);
        prev = p.n_min;
    }
    const PhononNumber eq = phonon_number(0.0, 0.0, c, d);
    CHECK(eq.n_min == eq.n_bath);
}

TEST_CASE("feedback off reduces to the single-cavity expressions") {
    const SystemConfig c = with_feedback(th::preset("fig7_8"), false);
    const DerivedParams d = derive(c);
    for (double x : {-1.5, -0.2, 0.3, 0.9, 1.7}) {
        const SystemConfig at = with_detuning(c, x * c.omega_m);
        for (const auto& b : solve_branches(at, d, {})) {
            const CoolingReport r = cooling_report(b, at, d, {});
            const auto [re, im] = two_pole(c.kappa_A, b.Delta_eff, c.omega_m);
            const double n = constants::hbar * d.g_OM * d.g_OM * b.I;
            CHECK(th::rel(r.gamma_OM, n * re / (c.m * c.omega_m)) < 1e-10);
            CHECK(th::rel(r.K_OM, n * im) < 1e-10);
        }
    }
}
