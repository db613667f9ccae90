#pragma once

// Reference computations used only by tests. None of these call the code
// paths they are used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace mineco::testing {

/// Central finite differences of f at x with step h.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h = 1e-4) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// ||a - b|| / max(||a||, ||b||), or the absolute difference norm when both are ~0.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::sqrt(std::max(na, nb));
    return scale < 1e-12 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

/// Plain log(mean(exp(t))) without any shift, for moderate inputs.
inline double naive_log_mean_exp(const std::vector<double>& t) {
    double s = 0.0;
    for (double v : t) s += std::exp(v);
    return std::log(s / static_cast<double>(t.size()));
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// x plus small deterministic noise. Freshly initialised networks have zero
/// biases, which can park a pre-activation exactly on a relu kink where a
/// central difference averages the two one-sided slopes.
inline std::vector<double> jittered(std::vector<double> x, std::uint64_t seed, double scale = 0.1) {
    std::uint64_t state = seed * 0x9E3779B97F4A7C15ULL + 1;
    for (auto& v : x) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        v += scale * (static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5);
    }
    return x;
}

/// Standard normal tail by composite Simpson integration of the density on [x, x + 40].
inline double q_by_quadrature(double x) {
    const int n = 200000;
    const double a = x, b = x + 40.0, h = (b - a) / n;
    auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * 3.14159265358979323846); };
    double s = phi(a) + phi(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * phi(a + i * h);
    return s * h / 3.0;
}

}  // namespace mineco::testing
