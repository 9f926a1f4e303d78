#include "vblast/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vblast {

WilsonInterval wilson_interval(uint64_t successes, uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double rad = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - rad), std::min(1.0, center + rad)};
}

std::vector<double> log_grid(double lo, double hi, int points) {
    if (!(lo > 0.0 && hi > lo && points >= 2))
        throw std::invalid_argument("log_grid: need 0 < lo < hi, points >= 2");
    std::vector<double> g(points);
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < points; ++i)
        g[i] = std::pow(10.0, llo + (lhi - llo) * i / (points - 1));
    return g;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
    if (!(hi > lo && points >= 2))
        throw std::invalid_argument("linear_grid: need lo < hi, points >= 2");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
    return g;
}

std::optional<double> crossing_db(std::span<const double> grid,
                                  std::span<const double> value,
                                  const std::string& abscissa_unit, double level) {
    if (grid.size() != value.size() || grid.size() < 2) return std::nullopt;
    const bool in_db = abscissa_unit == "gamma0_db";
    const auto to_db = [&](double g) { return in_db ? g : 10.0 * std::log10(g); };
    const double logl = std::log10(level);
    for (size_t i = 1; i < grid.size(); ++i) {
        const double v0 = value[i - 1], v1 = value[i];
        if (v0 <= 0.0 || v1 <= 0.0) continue;
        const double l0 = std::log10(v0), l1 = std::log10(v1);
        const bool between = (l0 - logl) * (l1 - logl) <= 0.0 && l0 != l1;
        if (!between) continue;
        const double t = (logl - l0) / (l1 - l0);
        return to_db(grid[i - 1]) + t * (to_db(grid[i]) - to_db(grid[i - 1]));
    }
    return std::nullopt;
}

std::vector<OffsetRow> curve_offsets_db(const AnalyticCurve& a, const AnalyticCurve& b,
                                        std::span<const double> levels) {
    std::vector<OffsetRow> rows;
    for (double level : levels) {
        const auto da = crossing_db(a.grid, a.value, a.abscissa_unit, level);
        const auto db = crossing_db(b.grid, b.value, b.abscissa_unit, level);
        OffsetRow row{level, std::nullopt};
        if (da && db) row.offset_db = *da - *db;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace vblast
