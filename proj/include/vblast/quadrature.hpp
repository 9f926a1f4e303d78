#pragma once

#include <functional>

namespace vblast {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod (7-15 pair) on [a, b]. Bisects the interval with
/// the largest error estimate until
///   sum(err) <= max(abs_tol, rel_tol * |sum(value)|)
/// or max_subdiv splits are spent.
QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-10, double rel_tol = 1e-12,
                        int max_subdiv = 4000);

}  // namespace vblast
