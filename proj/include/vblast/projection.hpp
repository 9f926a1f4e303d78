#pragma once

#include <span>

#include "vblast/channel.hpp"
#include "vblast/types.hpp"

namespace vblast {

// Relative residual-norm threshold below which a column is treated as
// linearly dependent and dropped from the basis. Sampled Gaussian matrices
// are full rank almost surely; this guards constructed inputs.
inline constexpr double kRankDropTol = 1e-12;

/// Orthonormal basis of the column span via modified Gram-Schmidt with one
/// re-orthogonalization pass. Returns n x r with r = detected rank.
CMat orthonormal_basis(const CMat& cols);

/// v minus its projection onto span(span_cols). Empty span returns v.
/// Throws std::invalid_argument on length mismatch.
CVec project_orthogonal(const CVec& v, const CMat& span_cols);

/// ||h_i - P_S h_i||^2 where S = columns of `h` listed in `excluded`.
double after_projection_norm2(const CMat& h, int col, std::span<const int> excluded);

struct AfterProjectionSnr {
    double snr;           // gamma_i = ||h_perp||^2 / sigma0^2
    double norm2;         // x_i = ||h_perp||^2 (SNR normalized to gamma0)
};

/// Per-step SNR with optimum ZF nulling of the yet-to-be-detected columns.
AfterProjectionSnr after_projection_snr(const ChannelMatrix& ch, int col,
                                        std::span<const int> excluded,
                                        const NoiseModel& noise);

}  // namespace vblast
