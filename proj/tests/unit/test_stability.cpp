#include <Eigen/Eigenvalues>

#include "helpers.hpp"

using namespace optomech;

namespace {

std::vector<std::complex<double>> eigen_oracle(const poly::Matrix<4>& A) {
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = A[i][j];
    Eigen::EigenSolver<Eigen::Matrix4d> es(M, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); });
    return ev;
}

/// Each eigenvalue matched to its nearest oracle partner.
double worst_match(const std::array<std::complex<double>, 4>& got, const std::vector<std::complex<double>>& ref,
                   double scale) {
    double worst = 0.0;
    for (const auto& z : got) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : ref) best = std::min(best, std::abs(z - r));
        worst = std::max(worst, best / scale);
    }
    return worst;
}

DriftMatrix random_drift(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double w = th::log_uniform(rng, 1e4, 1e8);
    const double g = w * th::log_uniform(rng, 1e-7, 1.0);
    const double E = w * u(rng) * th::log_uniform(rng, 1e-3, 10.0);
    const double F = w * u(rng) * th::log_uniform(rng, 1e-3, 10.0);
    const double G = w * th::log_uniform(rng, 1e-3, 3.0);
    return DriftMatrix::from_components(w, g, E, F, G);
}

}  // namespace

TEST_CASE("drift matrix layout") {
    const DriftMatrix m = DriftMatrix::from_components(2.0, 0.1, -3.0, 5.0, 0.7);
    CHECK(m.A[0][1] == 2.0);
    CHECK(m.A[1][0] == -2.0);
    CHECK(m.A[1][1] == -0.1);
    CHECK(m.A[1][2] == 0.7);
    CHECK(m.A[3][0] == 0.7);
    CHECK(m.A[2][2] == -3.0);
    CHECK(m.A[3][3] == -3.0);
    CHECK(m.A[2][3] == 5.0);
    CHECK(m.A[3][2] == -5.0);
    for (auto [i, j] : {std::pair{0, 0}, {0, 2}, {0, 3}, {2, 0}, {2, 1}, {3, 1}}) CHECK(m.A[i][j] == 0.0);
}

TEST_CASE("no feedback: E and F reduce to the bare cavity") {
    const SystemConfig c = with_power(th::preset("fig2"), 7e-6);
    const DerivedParams d = derive(c);
    for (const auto& b : solve_branches(c, d, {})) {
        const DriftMatrix m = build_drift(b, c, d);
        CHECK(m.E == -c.kappa_A);
        CHECK(th::rel(m.F, b.Delta_eff) < 1e-15);
        CHECK(th::rel(m.coupling, std::sqrt(2.0) * c.omega_m * d.chi * std::abs(b.a_S)) < 1e-12);
    }
}

TEST_CASE("fig3a middle root E and F against the oracle") {
    const SystemConfig c = th::preset("fig3a");
    const DerivedParams d = derive(c);
    const auto br = solve_branches(c, d, feedback_term(c, d));
    REQUIRE(br.size() == 3);
    const DriftMatrix m = build_drift(br[1], c, d);
    // E is a near-cancellation of kappa_A against the feedback; compare on the kappa_A scale.
    CHECK(std::abs(m.E - th::gold("fig3a_middle_E")) < 1e-12 * c.kappa_A);
    CHECK(th::rel(m.F, th::gold("fig3a_middle_F")) < 1e-9);
    // E and F are the same numbers as -kappa_A + Re sigma and Delta_eff - Im sigma.
    const FeedbackTerm fb = feedback_term(c, d);
    CHECK(std::abs(m.E - (-c.kappa_A + fb.sigma.real())) < 1e-12 * c.kappa_A);
    CHECK(th::rel(m.F, br[1].Delta_eff - fb.sigma.imag()) < 1e-12);
}

TEST_CASE("empty cavity and free oscillator decouple") {
    const double w = 1e7, g = 1e3, k = 2e6, Da = 3e6;
    const DriftMatrix m = DriftMatrix::from_components(w, g, -k, Da, 0.0);
    const auto rh = routh_hurwitz(m);
    CHECK((rh[0] && rh[1] && rh[2] && rh[3]));
    const EigenAnalysis e = eigenvalue_stability(m);
    CHECK(e.eig_pass);
    const std::vector<std::complex<double>> expect{{-k, Da}, {-k, -Da},
                                                   0.5 * (-g + std::sqrt(std::complex<double>(g * g - 4 * w * w))),
                                                   0.5 * (-g - std::sqrt(std::complex<double>(g * g - 4 * w * w)))};
    CHECK(worst_match(e.eigenvalues, expect, w) < 1e-12);

    for (double D : {-5e7, -1e7, 0.0, 1e6, 4e7}) {
        const auto r = routh_hurwitz(DriftMatrix::from_components(w, g, -k, D, 0.0));
        CHECK((r[0] && r[1] && r[2] && r[3]));
    }
}

TEST_CASE("diagonal test matrix") {
    DriftMatrix m;
    m.omega_m = 1.0;
    m.A = {{{-1, 0, 0, 0}, {0, -2, 0, 0}, {0, 0, -3, 0}, {0, 0, 0, 4}}};
    const EigenAnalysis e = eigenvalue_stability(m);
    CHECK_FALSE(e.eig_pass);
    CHECK(e.margin == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(e.eigenvalues[3].real() == Catch::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("non-finite drift matrix is rejected") {
    DriftMatrix m = DriftMatrix::from_components(1.0, 0.1, -1.0, std::nan(""), 0.1);
    CHECK_THROWS_AS(eigenvalue_stability(m), NumericalError);
}

TEST_CASE("closed-form quartic matches the numerical expansion") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 2000; ++k) {
        const DriftMatrix m = random_drift(rng);
        const auto closed = characteristic_quartic(m);
        const auto numeric = poly::characteristic_polynomial<4>(m.A);
        const double s = m.omega_m + std::abs(m.E) + std::abs(m.F) + m.coupling + m.gamma_m;
        for (int i = 1; i <= 4; ++i) CHECK(std::abs(closed[i] - numeric[i]) <= 1e-10 * std::pow(s, i));
    }
}

TEST_CASE("eigenvalues against Eigen") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 2000; ++k) {
        const DriftMatrix m = random_drift(rng);
        const EigenAnalysis e = eigenvalue_stability(m);
        const double s = m.omega_m + std::abs(m.E) + std::abs(m.F) + m.coupling;
        CHECK(worst_match(e.eigenvalues, eigen_oracle(m.A), s) < 1e-6);
    }
}

TEST_CASE("Routh-Hurwitz agrees with eigenvalues away from the margin") {
    std::mt19937_64 rng(5);
    int stable = 0, unstable = 0;
    for (int k = 0; k < 1000; ++k) {
        const DriftMatrix m = random_drift(rng);
        const StabilityVerdict v = classify(m);
        if (v.verdict == Stability::marginal) continue;
        INFO("w=" << m.omega_m << " g=" << m.gamma_m << " E=" << m.E << " F=" << m.F << " G=" << m.coupling);
        CHECK(v.paths_agree());
        (v.verdict == Stability::stable ? stable : unstable)++;
    }
    CHECK(stable > 50);
    CHECK(unstable > 50);
}

TEST_CASE("the printed third inequality disagrees with the eigenvalues") {
    // Blue side at low power: the optical anti-damping wins, the eigenvalues say unstable,
    // and only the corrected inequality notices.
    const SystemConfig c = with_detuning(with_power(th::preset("fig2"), 1e-7), -2e7);
    const DerivedParams d = derive(c);
    const auto br = solve_branches(c, d, {});
    REQUIRE(br.size() == 1);
    const DriftMatrix m = build_drift(br[0], c, d);
    const StabilityVerdict v = classify(m);
    CHECK_FALSE(v.eigen.eig_pass);
    CHECK_FALSE(v.rh_pass[2]);
    CHECK(v.paths_agree());
    const auto printed = routh_hurwitz_as_printed(m);
    CHECK((printed[0] && printed[1] && printed[2] && printed[3]));
}

TEST_CASE("fig2 three-root point") {
    const SystemConfig c = with_detuning(with_power(th::preset("fig2"), 7e-6), 1.5e7);
    const DerivedParams d = derive(c);
    auto br = solve_branches(c, d, {});
    REQUIRE(br.size() == 3);
    std::vector<StabilityVerdict> v;
    for (auto& b : br) v.push_back(classify(b, c, d));
    // Lowest root is stable by both paths.
    CHECK(v[0].rh_all());
    CHECK(v[0].eigen.eig_pass);
    CHECK(br[0].stable == Stability::stable);
    // Middle root fails the constant-term inequality: a saddle.
    CHECK_FALSE(v[1].rh_pass[3]);
    CHECK_FALSE(v[1].eigen.eig_pass);
    CHECK(br[1].stable == Stability::unstable);
    // Highest root is statically stable (c4 > 0) but on the blue side of the shifted
    // resonance, where the optical anti-damping makes it oscillate.
    CHECK(v[2].rh_pass[3]);
    CHECK(br[2].Delta_eff < 0.0);
    CHECK(br[2].stable == Stability::unstable);
    CHECK(v[2].paths_agree());
}

TEST_CASE("static stability is the sign of c4") {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 2000; ++k) {
        const SystemConfig c = th::random_config(rng);
        const DerivedParams d = derive(c);
        auto br = solve_branches(c, d, feedback_term(c, d));
        for (auto& b : br) {
            if (b.tangent) continue;
            const StabilityVerdict v = classify(b, c, d);
            CHECK(v.rh_pass[3] == b.static_stable);
        }
    }
}
