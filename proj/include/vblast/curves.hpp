#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vblast {

struct WilsonInterval {
    double low = 0.0;
    double high = 1.0;
};

/// 95% Wilson score interval for `successes` out of `trials`.
WilsonInterval wilson_interval(uint64_t successes, uint64_t trials, double z = 1.959963984540054);

/// Closed-form curve on a strictly increasing grid.
struct AnalyticCurve {
    std::vector<double> grid;   // normalized x (linear) or gamma0 in dB, per unit
    std::vector<double> value;
    std::string label;
    std::string abscissa_unit;  // "x" or "gamma0_db"
};

/// Monte-Carlo curve with 95% CIs.
struct EstimatedCurve {
    std::vector<double> grid;
    std::vector<double> value;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    std::vector<uint64_t> trials_used;
    std::string label;
    std::string abscissa_unit;
};

/// log10-spaced grid over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int points);
/// linear grid over [lo, hi] (dB axes).
std::vector<double> linear_grid(double lo, double hi, int points);

/// Abscissa (in dB) where a monotone curve crosses `level`, interpolating
/// linearly in (dB, log10 value). Returns nullopt outside the curve range.
/// For unit "x" the abscissa is converted via 10 log10(x).
std::optional<double> crossing_db(std::span<const double> grid,
                                  std::span<const double> value,
                                  const std::string& abscissa_unit, double level);

struct OffsetRow {
    double level;
    std::optional<double> offset_db;  // a_db - b_db at this level
};

/// Horizontal dB offsets curve_a minus curve_b at the given probability levels.
std::vector<OffsetRow> curve_offsets_db(const AnalyticCurve& a, const AnalyticCurve& b,
                                        std::span<const double> levels);

}  // namespace vblast
