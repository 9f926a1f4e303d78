#pragma once

#include <cmath>
#include <stdexcept>

#include "vblast/types.hpp"

namespace vblast {

/// Gaussian tail Q(x) = P{N(0,1) > x}.
inline double q_function(double x) {
    return 0.5 * std::erfc(x * 0.7071067811865475244);
}

/// Conditional bit error rate at instantaneous SNR gamma.
/// BPSK (coherent): Q(sqrt(2 gamma)); BFSK (noncoherent orthogonal): exp(-gamma/2)/2.
inline double ber_conditional(Modulation mod, double gamma) {
    if (!(gamma >= 0.0))
        throw std::invalid_argument("ber_conditional: gamma must be >= 0");
    switch (mod) {
        case Modulation::BpskCoherent:
            return q_function(std::sqrt(2.0 * gamma));
        case Modulation::BfskNoncoherentOrthogonal:
            return 0.5 * std::exp(-0.5 * gamma);
    }
    throw std::logic_error("ber_conditional: bad modulation");
}

inline double bpsk_symbol(int bit) { return bit ? -1.0 : 1.0; }
inline int bpsk_demap(double re) { return re >= 0.0 ? 0 : 1; }

}  // namespace vblast
