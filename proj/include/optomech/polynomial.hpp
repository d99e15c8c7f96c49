#pragma once

// Characteristic polynomials of small dense matrices and their roots.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>

#include "optomech/errors.hpp"

namespace optomech::poly {

template <std::size_t N>
using Matrix = std::array<std::array<double, N>, N>;

/// Monic coefficients {1, b1, ..., bN} of det(lambda I - A), Faddeev-LeVerrier recursion.
template <std::size_t N>
std::array<double, N + 1> characteristic_polynomial(const Matrix<N>& A) {
    std::array<double, N + 1> b{};
    b[0] = 1.0;
    Matrix<N> M{};
    for (std::size_t i = 0; i < N; ++i) M[i][i] = 1.0;
    for (std::size_t k = 1; k <= N; ++k) {
        Matrix<N> AM{};
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < N; ++l) s += A[i][l] * M[l][j];
                AM[i][j] = s;
            }
        double trace = 0.0;
        for (std::size_t i = 0; i < N; ++i) trace += AM[i][i];
        b[k] = -trace / static_cast<double>(k);
        M = AM;
        for (std::size_t i = 0; i < N; ++i) M[i][i] += b[k];
    }
    return b;
}

inline constexpr int kMaxAberthIterations = 500;

/// Roots of the monic polynomial z^N + b[1] z^(N-1) + ... + b[N] by Aberth-Ehrlich iteration
/// on a rescaled variable, followed by Newton polishing. Sorted by (real, imag).
template <std::size_t N>
std::array<std::complex<double>, N> roots(const std::array<double, N + 1>& b) {
    using cd = std::complex<double>;
    static_assert(N >= 1);

    // Fujiwara bound: every root lies within 2 max |b_k|^(1/k).
    double scale = 0.0;
    for (std::size_t k = 1; k <= N; ++k) scale = std::max(scale, std::pow(std::abs(b[k]), 1.0 / double(k)));
    if (scale == 0.0) return {};  // z^N
    scale *= 2.0;

    std::array<double, N + 1> c{};
    double sk = 1.0;
    for (std::size_t k = 0; k <= N; ++k) {
        c[k] = b[k] / sk;
        sk *= scale;
    }
    auto eval = [&](cd z, cd& dp) {
        cd p = c[0];
        dp = 0.0;
        for (std::size_t k = 1; k <= N; ++k) {
            dp = dp * z + p;
            p = p * z + c[k];
        }
        return p;
    };
    // Rounding-error bound of Horner's scheme at |z|; below it p(z) is noise.
    auto noise = [&](double r) {
        double s = std::abs(c[0]);
        for (std::size_t k = 1; k <= N; ++k) s = s * r + std::abs(c[k]);
        return 8.0 * double(N) * std::numeric_limits<double>::epsilon() * s;
    };

    std::array<cd, N> z;
    for (std::size_t k = 0; k < N; ++k)
        z[k] = std::polar(0.5, 2.0 * std::numbers::pi * double(k) / double(N) + 0.4);

    std::array<bool, N> done{};
    bool converged = false;
    for (int it = 0; it < kMaxAberthIterations && !converged; ++it) {
        converged = true;
        for (std::size_t k = 0; k < N; ++k) {
            if (done[k]) continue;
            cd dp;
            const cd p = eval(z[k], dp);
            if (std::abs(p) <= noise(std::abs(z[k]))) {
                done[k] = true;
                continue;
            }
            const cd ratio = p / dp;
            cd sum = 0.0;
            for (std::size_t j = 0; j < N; ++j)
                if (j != k) sum += 1.0 / (z[k] - z[j]);
            const cd step = ratio / (1.0 - ratio * sum);
            z[k] -= step;
            if (std::abs(step) <= 1e-15 * std::abs(z[k])) done[k] = true;
            else converged = false;
        }
    }
    for (const auto& zk : z)
        if (!std::isfinite(zk.real()) || !std::isfinite(zk.imag()))
            throw NumericalError("characteristic-polynomial root iteration diverged");
    if (!converged) throw NumericalError("characteristic-polynomial root iteration did not converge in 500 steps");

    for (auto& zk : z) {
        for (int it = 0; it < 3; ++it) {
            cd dp;
            const cd p = eval(zk, dp);
            if (dp == cd(0.0)) break;
            const cd next = zk - p / dp;
            cd dq;
            if (std::abs(eval(next, dq)) < std::abs(p)) zk = next; else break;
        }
        zk *= scale;
    }
    std::sort(z.begin(), z.end(), [](const cd& a, const cd& b2) {
        return a.real() < b2.real() || (a.real() == b2.real() && a.imag() < b2.imag());
    });
    return z;
}

}  // namespace optomech::poly
