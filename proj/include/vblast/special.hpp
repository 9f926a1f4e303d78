#pragma once

#include <cmath>
#include <stdexcept>

namespace vblast {

/// Outage probability of order-n MRC at normalized SNR threshold x:
///   F(x) = 1 - e^{-x} sum_{i=0}^{n-1} x^i / i!
/// (the regularized lower incomplete gamma P(n, x)).
inline double mrc_outage(int order_n, double x) {
    if (order_n < 1) throw std::invalid_argument("mrc_outage: order must be >= 1");
    if (!(x >= 0.0)) throw std::invalid_argument("mrc_outage: x must be >= 0");
    if (x == 0.0) return 0.0;
    // exp(-x) underflows past ~745; the series argument is clamped so the
    // integrand F(x/sin^2 phi) -> 1 without 0*inf noise.
    if (x > 700.0) return 1.0;
    long double term = 1.0L;  // x^i / i!
    long double sum = 1.0L;
    for (int i = 1; i < order_n; ++i) {
        term *= static_cast<long double>(x) / i;
        sum += term;
    }
    const long double v = 1.0L - expl(-static_cast<long double>(x)) * sum;
    if (v < 0.0L) return 0.0;
    if (v > 1.0L) return 1.0;
    return static_cast<double>(v);
}

}  // namespace vblast
