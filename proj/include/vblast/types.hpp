#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vblast {

// Antenna-count cap keeps the factorials/binomials of the closed-form bound
// coefficients in safe numeric range.
inline constexpr int kMaxAntennas = 16;

using cplx = std::complex<double>;

// Fixed-capacity matrices: dynamic size up to kMaxAntennas, stack storage,
// so Monte-Carlo inner loops never touch the heap.
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::ColMajor, kMaxAntennas, kMaxAntennas>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1,
                           Eigen::ColMajor, kMaxAntennas, 1>;

/// n receive x m transmit antennas, n >= m. Ordering analysis needs m >= 2;
/// m = 1 is admitted for the degenerate single-stream (MRC) reductions and
/// checked where the angle-geometry formulas require m >= 2.
struct SystemDims {
    int n_rx = 0;
    int m_tx = 0;

    void validate() const {
        if (m_tx < 1)
            throw std::invalid_argument("dims: m (" + std::to_string(m_tx) +
                                        ") must be >= 1");
        if (n_rx < m_tx)
            throw std::invalid_argument("dims: n (" + std::to_string(n_rx) +
                                        ") must be >= m (" + std::to_string(m_tx) + ")");
        if (n_rx > kMaxAntennas)
            throw std::invalid_argument("dims: n (" + std::to_string(n_rx) +
                                        ") exceeds cap " + std::to_string(kMaxAntennas));
    }

    int diversity_order() const { return n_rx - m_tx + 1; }

    friend bool operator==(const SystemDims&, const SystemDims&) = default;
};

enum class Modulation {
    BpskCoherent,
    BfskNoncoherentOrthogonal,
};

/// AWGN with per-branch variance sigma0^2; average SNR gamma0 = 1/sigma0^2.
struct NoiseModel {
    double sigma0_sq = 1.0;

    double gamma0() const { return 1.0 / sigma0_sq; }

    static NoiseModel from_gamma0(double gamma0) {
        if (!(gamma0 > 0.0))
            throw std::invalid_argument("gamma0 must be positive");
        return NoiseModel{1.0 / gamma0};
    }

    void validate() const {
        if (!(sigma0_sq > 0.0))
            throw std::invalid_argument("sigma0_sq must be positive");
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace vblast
