#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vblast/types.hpp"

namespace vblast {

/// Numeric coefficients of the exponential-polynomial form of the
/// suboptimal-ordering outage bound
///   B1(x) = (-1)^{m-2} (m-1) C(n-1, m-1)
///           { sum_{l=0}^m alpha_l (J3_l + J4_l) e^{-lx}
///             + sum_{l=2}^m alpha_l J2_l e^{-lx} },  alpha_l = (-1)^l C(m, l),
/// with J2/J3/J4 polynomials built from the a_pl, b_p, d_p tables and
/// c_{i,l} = [t^i] (sum_{j=0}^{n-1} t^j/j!)^l.
///
/// Everything is computed in exact rational arithmetic; `poly` holds the fully
/// assembled per-l polynomial coefficients of e^{-l x} (ascending powers of x),
/// converted once to long double.
struct CoefficientTable {
    SystemDims dims;

    std::map<std::pair<int, int>, double> a;   // (p, l), l >= 2
    std::vector<double> b;                     // p = 0 .. m-3
    std::vector<double> d;                     // p = 0 .. n-2
    std::vector<std::vector<double>> c;        // c[l][i], i <= l(n-1)
    std::vector<double> alpha;                 // l = 0 .. m

    std::vector<std::vector<long double>> poly;  // poly[l] = P_l coeffs, B1 = sum P_l e^{-lx}

    // Set by certify_table(): closed form vs quadrature agreement.
    bool certified = false;
    std::string certification_note;
};

/// Exact-rational build of all coefficient tables for (n, m). Throws on
/// invalid dims. Does not certify.
CoefficientTable build_coefficient_table(const SystemDims& dims);

/// Evaluate the assembled exponential-polynomial at x >= 0 (compensated
/// long-double accumulation; the alternating l-sum cancels catastrophically
/// at small x, which is why callers switch to the small-x asymptote there).
double eval_b1_polynomials(const CoefficientTable& table, double x);

/// Cross-checks the closed form against the defining quadrature on a log grid
/// over x in [1e-3, 20] at 1e-8 relative tolerance; fills `certified` and the
/// note, and appends any discrepancy to the formula-integrity log.
void certify_table(CoefficientTable& table);

/// Cached, certified table per dims (thread-safe).
const CoefficientTable& coefficient_table(const SystemDims& dims);

/// Process-wide formula-integrity diagnostics (populated when a table fails
/// certification and evaluation falls back to quadrature).
std::vector<std::string> formula_integrity_events();
void clear_formula_integrity_events();
void record_formula_integrity_event(const std::string& what);

}  // namespace vblast
