#pragma once

#include <span>
#include <vector>

#include "vblast/channel.hpp"
#include "vblast/projection.hpp"
#include "vblast/types.hpp"

namespace vblast {

enum class OrderingStrategy {
    Optimal,     // per step: argmax after-projection norm w.r.t. remaining columns
    Suboptimal,  // once: descending raw column norm
    None,        // fixed order 1..m
};

enum class ReceiverKind {
    ZfSic,
    LinearZf,
    LinearMmse,
    DblastCycled,
};

struct DetectionResult {
    std::vector<int> order;          // order[step] = original column detected at step
    std::vector<double> step_snr;    // gamma_i, from channel geometry
    std::vector<double> step_norm;   // x_i = ||h'_perp||^2
    std::vector<int> detected_bits;  // indexed by original transmit stream
    std::vector<bool> step_errors;   // indexed by step
    bool block_error = false;
};

struct OrderingResult {
    std::vector<int> order;
    std::vector<double> step_norm;  // x_i evaluated in that order
};

/// Detection order per strategy; ties break toward the lowest original index.
/// Throws std::domain_error on (numerically) rank-deficient H.
OrderingResult choose_order(const ChannelMatrix& ch, OrderingStrategy strategy);

/// Geometry precomputation shared by every noise draw on one channel:
/// detection order, unit ZF weight per step, per-step norms.
struct SicPlan {
    std::vector<int> order;
    std::vector<double> step_norm;
    CMat weights;  // column s = unit weight for detection step s
};

SicPlan make_sic_plan(const ChannelMatrix& ch, OrderingStrategy strategy);

/// ZF-SIC detection of r = H s + xi, BPSK. Cancellation subtracts the
/// *detected* symbol, so error propagation is physical; step_snr/step_norm
/// come from the channel geometry, not the noisy decisions.
DetectionResult zf_sic_detect(const ChannelMatrix& ch, const CVec& r,
                              OrderingStrategy strategy, Modulation mod,
                              const NoiseModel& noise, std::span<const int> tx_bits);

DetectionResult sic_detect_with_plan(const SicPlan& plan, const ChannelMatrix& ch,
                                     const CVec& r, Modulation mod,
                                     const NoiseModel& noise,
                                     std::span<const int> tx_bits);

/// Purely linear interfaces: r'_ZF = (H^+ H)^{-1} H^+ r,
/// r'_MMSE = (H^+ H + sigma0^2 I)^{-1} H^+ r, component-wise demodulation.
/// MMSE step_snr records the standard post-MMSE SINR (diagnostic only).
DetectionResult linear_detect(const ChannelMatrix& ch, const CVec& r, ReceiverKind kind,
                              Modulation mod, const NoiseModel& noise,
                              std::span<const int> tx_bits);

/// Uncoded D-BLAST as symbol cycling: at channel use t, transmit symbol i
/// rides antenna (i + t) mod m. Error statistics match plain V-BLAST.
std::vector<DetectionResult> dblast_cycle_detect(
    const ChannelMatrix& ch, std::span<const CVec> r_sequence, OrderingStrategy strategy,
    Modulation mod, const NoiseModel& noise,
    std::span<const std::vector<int>> tx_bits_sequence);

/// Effective channel for D-BLAST use t (column i = h_{(i+t) mod m}).
ChannelMatrix dblast_effective_channel(const ChannelMatrix& ch, int use_index);

}  // namespace vblast
