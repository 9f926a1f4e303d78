#pragma once

// Test-only oracles, independent of the library's evaluation paths.

#include <cmath>
#include <stdexcept>

namespace oracles {

/// Regularized lower incomplete gamma P(a, x): series for x < a+1,
/// continued fraction (modified Lentz) otherwise.
inline double gammp(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammp domain");
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-17) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    const double q = std::exp(-x + a * std::log(x) - gln) * h;
    return 1.0 - q;
}

/// k-branch MRC average BER for coherent BPSK at per-branch average SNR g0.
inline double bpsk_mrc_avg_ber(int k, double g0) {
    const double mu = std::sqrt(g0 / (1.0 + g0));
    double sum = 0.0;
    double binom = 1.0;  // C(k-1+i, i)
    for (int i = 0; i < k; ++i) {
        if (i > 0) binom = binom * (k - 1 + i) / i;
        sum += binom * std::pow(0.5 * (1.0 + mu), i);
    }
    return std::pow(0.5 * (1.0 - mu), k) * sum;
}

/// k-branch MRC average BER for noncoherent orthogonal BFSK.
inline double bfsk_mrc_avg_ber(int k, double g0) {
    return 0.5 * std::pow(1.0 + 0.5 * g0, -static_cast<double>(k));
}

}  // namespace oracles
