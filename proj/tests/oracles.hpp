// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, deliberately independent of the library's
// implementation paths: p-values by direct numerical integration of the
// densities, Spearman's rho by O(n^2) rank counting.
#ifndef PROMPT_ELITES_TEST_ORACLES_HPP
#define PROMPT_ELITES_TEST_ORACLES_HPP

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

/// Composite Simpson with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Integrates f from a to +infinity with doubling chunks until the
/// contribution vanishes.
inline double integrate_to_inf(const std::function<double(double)>& f, double a) {
    double total = 0.0;
    double x = a;
    double width = 1.0;
    for (int k = 0; k < 70; ++k) {
        const double chunk = simpson(f, x, x + width, 4096);
        total += chunk;
        x += width;
        width *= 2.0;
        if (k > 8 && chunk < 1e-18 * std::max(total, 1e-300)) break;
    }
    return total;
}

inline double normal_pdf(double t) {
    return std::exp(-t * t / 2.0) / std::sqrt(2.0 * std::acos(-1.0));
}

/// Two-sided normal p-value by integration.
inline double normal_two_sided_p(double z) {
    return 2.0 * integrate_to_inf(normal_pdf, std::fabs(z));
}

/// 1-dof chi-square survival function: P(Z^2 > x) = 2 P(Z > sqrt(x)).
inline double chi_square_sf_1df(double x) {
    if (x <= 0.0) return 1.0;
    return 2.0 * integrate_to_inf(normal_pdf, std::sqrt(x));
}

/// Two-sided Student-t p-value by integration of the t density.
inline double student_t_two_sided_p(double t, int dof) {
    const double v = dof;
    const double log_norm = std::lgamma((v + 1.0) / 2.0) - std::lgamma(v / 2.0) -
                            0.5 * std::log(v * std::acos(-1.0));
    auto pdf = [&](double u) {
        return std::exp(log_norm - (v + 1.0) / 2.0 * std::log1p(u * u / v));
    };
    return 2.0 * integrate_to_inf(pdf, std::fabs(t));
}

/// Average ranks by O(n^2) counting (independent of the sort-based path).
inline std::vector<double> counting_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (values[j] < values[i]) ++less;
            if (values[j] == values[i]) ++equal;
        }
        ranks[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return ranks;
}

/// Spearman's rho via counting ranks and long-double Pearson.
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
    const auto rx = counting_ranks(x);
    const auto ry = counting_ranks(y);
    const std::size_t n = x.size();
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += rx[i]; my += ry[i]; }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

}  // namespace oracles

#endif
