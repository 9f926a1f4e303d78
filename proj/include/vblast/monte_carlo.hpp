#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vblast/curves.hpp"
#include "vblast/receivers.hpp"
#include "vblast/types.hpp"

namespace vblast {

enum class EstimatorKind {
    SymbolLevel,   // full detection with error propagation + noise draws
    SemiAnalytic,  // P_B = 1 - prod(1 - P_e(gamma_i)) from step geometry (BLER only)
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    SystemDims dims{};
    ReceiverKind receiver = ReceiverKind::ZfSic;
    OrderingStrategy ordering = OrderingStrategy::Optimal;
    Modulation mod = Modulation::BpskCoherent;
    std::vector<double> snr_grid_db;  // error-rate abscissa (gamma0, dB)
    std::vector<double> x_grid;       // outage abscissa (normalized, linear)
    uint64_t channel_trials = 1'000'000;  // footnote-8 MC protocol defaults
    int noise_trials_per_channel = 100;
    uint64_t seed = 1;
    EstimatorKind estimator = EstimatorKind::SymbolLevel;
    int threads = 1;
    double ci_rel_target = 0.0;  // >0: stop early once all CI half-widths are below it

    void validate() const;  // throws ConfigError naming the offending field
};

/// Per-step outage curves (step i = fraction of trials with x_i <= x).
/// Geometry only, no noise. Steps beyond the first are the
/// conditional-on-correct-cancellation quantities.
std::vector<EstimatedCurve> estimate_step_outage(const ExperimentConfig& config);

struct ErrorRateCurves {
    EstimatedCurve bler;
    EstimatedCurve tber;                       // symbol-level only
    std::vector<EstimatedCurve> per_step_ber;  // conditional on earlier steps correct
};

ErrorRateCurves estimate_error_rates(const ExperimentConfig& config);

struct OrderingGainOffsets {
    double level;
    double optimal_vs_unordered_db;
    double suboptimal_vs_unordered_db;
    double optimal_vs_suboptimal_db;
};

struct OrderingGainReport {
    EstimatedCurve f1_optimal;
    EstimatedCurve f1_suboptimal;
    EstimatedCurve f1_unordered;
    std::vector<OrderingGainOffsets> offsets;
};

/// First-step outage of the three ordering strategies on a shared channel
/// stream (common random numbers), plus horizontal dB offsets at the given
/// outage levels.
OrderingGainReport estimate_ordering_gain(const SystemDims& dims,
                                          const std::vector<double>& x_grid,
                                          uint64_t trials, uint64_t seed, int threads,
                                          const std::vector<double>& levels = {1e-2, 1e-3});

}  // namespace vblast
