#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vblast/coeff_table.hpp"
#include "vblast/special.hpp"
#include "vblast/types.hpp"

namespace vblast {

/// Marginal pdf of the angle between one column and the span of the others:
///   f(phi) = 2 (m-1) C(n-1, m-1) sin^{2(n-m)+1}(phi) cos^{2m-3}(phi),
/// phi in [0, pi/2].
double marginal_pdf_phi(const SystemDims& dims, double phi);

/// Inner (suboptimal-ordering) upper bound on the 1st-step outage,
/// evaluated by adaptive quadrature of  int f(phi) [F_MRC^(n)(x/sin^2 phi)]^m dphi.
double f1_bound_suboptimal_quadrature(const SystemDims& dims, double x);

/// 1st-step outage of the unordered system (rightmost bound):
/// quadrature of  int f(phi) F_MRC^(n)(x/sin^2 phi) dphi  == F_MRC^(n-m+1)(x).
double f1_unordered(const SystemDims& dims, double x);

/// Exchangeability lower bound (f1_unordered)^m <= F1.
double f1_lower_exchangeable(const SystemDims& dims, double x);

// Below this threshold the closed form switches to the small-x asymptote:
// the alternating exponential-polynomial sum cancels catastrophically.
inline constexpr double kB1AsymptoteSwitch = 1e-3;

/// Small-x asymptote of the bound: (1/(n-m+1)!) (x/2)^{n-m+1}.
double f1_bound_asymptote(const SystemDims& dims, double x);

/// Closed-form evaluation of the suboptimal-ordering bound from the
/// coefficient table. Falls back to quadrature (and logs a formula-integrity
/// event) if the table failed certification.
double f1_bound_closedform(const SystemDims& dims, double x);
double f1_bound_closedform(const CoefficientTable& table, double x);

/// High-SNR approximation of the true ordered 1st-step outage:
/// (1/(n-m+1)!) (x/m)^{n-m+1}, clamped to [0, 1].
double f1_approx_highsnr(const SystemDims& dims, double x);

/// Approximate joint distribution of the m after-projection powers:
/// (1/(n-m+1)!) (sum_i 1/x_i)^{-(n-m+1)}. Diagonal equals f1_approx_highsnr.
double joint_norm_distribution_approx(const SystemDims& dims, std::span<const double> xs);

struct StepOutageValue {
    double value;      // printed formula
    double asymptote;  // companion small-x power law
};

/// Conditional outage of steps 2 and 3 of the 3x3 system:
///   F2(x) = 1 - 2e^{-x}(1+x) + e^{-2x}(1 + 2x + 9x^2/8 + x^3/4)  (~ x^2/8)
///   F3(x) = F_MRC^(3)(x) [2 - F_MRC^(3)(x)]                      (~ x^3/3)
StepOutageValue step_outage_3x3(int step, double x);

/// Average BER of order-k MRC at per-branch average SNR gamma0, i.e. the
/// fading average of ber_conditional over the Gamma(k, gamma0) density of the
/// combined SNR. Adaptive quadrature, absolute error <= 1e-10.
double mrc_avg_ber(int order_k, double gamma0, Modulation mod);

enum class BlerVariant {
    Eq11,  // P_MRC^(n-m+1)(m gamma0)
    Eq12,  // printed high-SNR forms per modulation
    Eq13,  // Eq11 + P_MRC^(n-m+2)(gamma0)
};

double bler_approx(const SystemDims& dims, double gamma0, Modulation mod, BlerVariant v);

struct TberApprox {
    double value;                       // bler_approx(Eq11) / m
    std::optional<double> square_form;  // a/(m^2 gamma0) shape, only for n == m
};

TberApprox tber_approx(const SystemDims& dims, double gamma0, Modulation mod);

struct LinearBlerReport {
    double per_stream_ber;          // unordered 1st-step average BER at gamma0
    double exact_product;           // 1 - (1 - per_stream_ber)^m
    double m_fold_approx;           // m * per_stream_ber
    double bler_unordered;          // ~ per_stream_ber (high-SNR reading)
    double bler_ordered;            // bler_approx(Eq11)
    double ratio_linear_unordered;  // exact_product / bler_unordered
    double ratio_linear_ordered;
    double snr_offset_vs_unordered_db;  // solved on the approximation curves
    double snr_offset_vs_ordered_db;
};

LinearBlerReport linear_bler_approx(const SystemDims& dims, double gamma0, Modulation mod);

struct GenieChainEntry {
    int k_tx;                         // genie-reduced transmitter count
    double analytic;                  // closed-form bound / approximation
    bool analytic_is_sharp;           // true for k = 2 (bound exact)
    bool needs_mc;                    // true entries have no exact closed form
};

/// Genie-assisted lower-bound chain for k = m down to 2. In outage mode the
/// analytic entry is the closed-form bound B1 of the (n x k) system at x;
/// in BLER mode it is the Eq. (13) approximation at gamma0.
std::vector<GenieChainEntry> genie_chain_outage(const SystemDims& dims, double x);
std::vector<GenieChainEntry> genie_chain_bler(const SystemDims& dims, double gamma0,
                                              Modulation mod);

/// Solves curve(gamma0) = target on a log-domain-monotone scalar curve by
/// bisection over gamma0 in [lo, hi]; tolerance 0.01 dB. Returns dB.
double solve_snr_for_level(const std::function<double(double)>& curve_of_gamma0,
                           double target, double lo_db, double hi_db);

}  // namespace vblast
