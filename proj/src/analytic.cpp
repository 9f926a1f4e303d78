#include "vblast/analytic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vblast/modulation.hpp"
#include "vblast/quadrature.hpp"

namespace vblast {
namespace {

double binom_d(int a, int k) {
    if (k < 0 || k > a) return 0.0;
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (a - i) / (i + 1);
    return v;
}

double factorial_d(int k) {
    double v = 1.0;
    for (int i = 2; i <= k; ++i) v *= i;
    return v;
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double f1_integral(const SystemDims& dims, double x, int power) {
    // int_0^{pi/2} f_phi(phi) [F_MRC^(n)(x / sin^2 phi)]^power dphi.
    // Near phi = 0 the MRC factor saturates at 1 and f_phi vanishes like
    // sin^{2(n-m)+1}; the integrand is smooth and non-negative throughout.
    dims.validate();
    if (!(x >= 0.0)) throw std::invalid_argument("f1 integral: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (dims.m_tx == 1) return mrc_outage(dims.n_rx, x);  // degenerate single stream
    const int n = dims.n_rx;
    const auto f = [&](double phi) {
        const double s2 = std::sin(phi) * std::sin(phi);
        const double arg = s2 > 0.0 ? x / s2 : 1e9;
        double g = mrc_outage(n, arg);
        double gp = 1.0;
        for (int i = 0; i < power; ++i) gp *= g;
        return marginal_pdf_phi(dims, phi) * gp;
    };
    const QuadResult q = integrate_gk(f, 0.0, std::asin(1.0), 1e-12, 1e-12);
    return clamp01(q.value);
}

}  // namespace

double marginal_pdf_phi(const SystemDims& dims, double phi) {
    dims.validate();
    if (dims.m_tx < 2)
        throw std::invalid_argument("marginal_pdf_phi: angle geometry needs m >= 2");
    constexpr double half_pi = 1.5707963267948966192;
    if (!(phi >= 0.0 && phi <= half_pi + 1e-12))
        throw std::invalid_argument("marginal_pdf_phi: phi outside [0, pi/2]");
    const int n = dims.n_rx, m = dims.m_tx;
    const double s = std::sin(phi), c = std::cos(phi);
    return 2.0 * (m - 1) * binom_d(n - 1, m - 1) *
           std::pow(s, 2 * (n - m) + 1) * std::pow(c, 2 * m - 3);
}

double f1_bound_suboptimal_quadrature(const SystemDims& dims, double x) {
    return f1_integral(dims, x, dims.m_tx);
}

double f1_unordered(const SystemDims& dims, double x) {
    return f1_integral(dims, x, 1);
}

double f1_lower_exchangeable(const SystemDims& dims, double x) {
    const double u = f1_unordered(dims, x);
    double v = 1.0;
    for (int i = 0; i < dims.m_tx; ++i) v *= u;
    return v;
}

double f1_bound_asymptote(const SystemDims& dims, double x) {
    const int k = dims.diversity_order();
    return clamp01(std::pow(0.5 * x, k) / factorial_d(k));
}

double f1_bound_closedform(const CoefficientTable& table, double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("f1_bound_closedform: x must be >= 0");
    if (x < kB1AsymptoteSwitch) return f1_bound_asymptote(table.dims, x);
    return eval_b1_polynomials(table, x);
}

double f1_bound_closedform(const SystemDims& dims, double x) {
    if (dims.m_tx == 1) return mrc_outage(dims.n_rx, x);
    const CoefficientTable& table = coefficient_table(dims);
    if (!table.certified) {
        // Printed coefficients failed their integrity check; the defining
        // quadrature is the ground truth and is shipped instead.
        return f1_bound_suboptimal_quadrature(dims, x);
    }
    return f1_bound_closedform(table, x);
}

double f1_approx_highsnr(const SystemDims& dims, double x) {
    dims.validate();
    if (!(x >= 0.0)) throw std::invalid_argument("f1_approx_highsnr: x must be >= 0");
    const int k = dims.diversity_order();
    return clamp01(std::pow(x / dims.m_tx, k) / factorial_d(k));
}

double joint_norm_distribution_approx(const SystemDims& dims, std::span<const double> xs) {
    dims.validate();
    if (static_cast<int>(xs.size()) != dims.m_tx)
        throw std::invalid_argument("joint_norm_distribution_approx: expected m thresholds");
    double inv_sum = 0.0;
    for (double xi : xs) {
        if (!(xi > 0.0))
            throw std::invalid_argument("joint_norm_distribution_approx: thresholds must be > 0");
        inv_sum += 1.0 / xi;
    }
    const int k = dims.diversity_order();
    return clamp01(std::pow(inv_sum, -k) / factorial_d(k));
}

StepOutageValue step_outage_3x3(int step, double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("step_outage_3x3: x must be >= 0");
    if (step == 2) {
        const double e1 = std::exp(-x), e2 = std::exp(-2.0 * x);
        const double v = 1.0 - 2.0 * e1 * (1.0 + x) +
                         e2 * (1.0 + 2.0 * x + 9.0 / 8.0 * x * x + 0.25 * x * x * x);
        return {clamp01(v), x * x / 8.0};
    }
    if (step == 3) {
        const double f = mrc_outage(3, x);
        return {clamp01(f * (2.0 - f)), x * x * x / 3.0};
    }
    throw std::invalid_argument("step_outage_3x3: step must be 2 or 3");
}

double mrc_avg_ber(int order_k, double gamma0, Modulation mod) {
    if (order_k < 1) throw std::invalid_argument("mrc_avg_ber: order must be >= 1");
    if (!(gamma0 > 0.0)) throw std::invalid_argument("mrc_avg_ber: gamma0 must be > 0");
    const double k = order_k;
    const double lg = std::lgamma(k);
    const double log_scale = std::log(gamma0);
    const auto integrand = [&](double g) {
        if (g <= 0.0) return 0.0;
        // Gamma(k, theta = gamma0) pdf in log space to dodge overflow
        const double logpdf =
            (k - 1.0) * std::log(g) - g / gamma0 - lg - k * log_scale;
        return ber_conditional(mod, g) * std::exp(logpdf);
    };
    // The product of the fading pdf (scale ~ gamma0 k) and the conditional BER
    // (unit scale) can be a boundary layer far narrower than the full range;
    // log-spaced breakpoints guarantee the adaptive rule samples every scale.
    const double upper = gamma0 * (k + 45.0 + 10.0 * std::sqrt(k));
    double sum = 0.0, comp = 0.0;
    double lo = 0.0;
    for (int j = 14; j >= 0; --j) {
        const double hi = upper * std::pow(10.0, -j);
        const QuadResult q = integrate_gk(integrand, lo, hi, 1e-13, 1e-11);
        const double t = sum + q.value;
        comp += std::abs(sum) >= std::abs(q.value) ? (sum - t) + q.value
                                                   : (q.value - t) + sum;
        sum = t;
        lo = hi;
    }
    return clamp01(sum + comp);
}

double bler_approx(const SystemDims& dims, double gamma0, Modulation mod, BlerVariant v) {
    dims.validate();
    if (!(gamma0 > 0.0)) throw std::invalid_argument("bler_approx: gamma0 must be > 0");
    const int m = dims.m_tx;
    const int k = dims.diversity_order();
    switch (v) {
        case BlerVariant::Eq11:
            return mrc_avg_ber(k, m * gamma0, mod);
        case BlerVariant::Eq12: {
            if (mod == Modulation::BfskNoncoherentOrthogonal)
                return clamp01(0.5 * std::pow(2.0 / (m * gamma0), k));
            return clamp01(binom_d(2 * (dims.n_rx - m) + 1, k) /
                           std::pow(4.0 * m * gamma0, k));
        }
        case BlerVariant::Eq13:
            return clamp01(mrc_avg_ber(k, m * gamma0, mod) +
                           mrc_avg_ber(k + 1, gamma0, mod));
    }
    throw std::logic_error("bler_approx: bad variant");
}

TberApprox tber_approx(const SystemDims& dims, double gamma0, Modulation mod) {
    TberApprox out;
    out.value = bler_approx(dims, gamma0, mod, BlerVariant::Eq11) / dims.m_tx;
    if (dims.n_rx == dims.m_tx) out.square_form = out.value;
    return out;
}

double solve_snr_for_level(const std::function<double(double)>& curve_of_gamma0,
                           double target, double lo_db, double hi_db) {
    // bisection in dB on a curve monotone non-increasing in gamma0
    double lo = lo_db, hi = hi_db;
    const double flo = curve_of_gamma0(db_to_linear(lo));
    const double fhi = curve_of_gamma0(db_to_linear(hi));
    if (!(flo >= target && fhi <= target))
        throw std::domain_error("solve_snr_for_level: target " + std::to_string(target) +
                                " not bracketed in [" + std::to_string(lo_db) + ", " +
                                std::to_string(hi_db) + "] dB");
    while (hi - lo > 0.01) {
        const double mid = 0.5 * (lo + hi);
        if (curve_of_gamma0(db_to_linear(mid)) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

LinearBlerReport linear_bler_approx(const SystemDims& dims, double gamma0, Modulation mod) {
    dims.validate();
    if (!(gamma0 > 0.0)) throw std::invalid_argument("linear_bler_approx: gamma0 must be > 0");
    const int m = dims.m_tx;
    const int k = dims.diversity_order();
    LinearBlerReport r{};
    r.per_stream_ber = mrc_avg_ber(k, gamma0, mod);
    double keep = 1.0;
    for (int i = 0; i < m; ++i) keep *= 1.0 - r.per_stream_ber;
    r.exact_product = 1.0 - keep;
    r.m_fold_approx = clamp01(m * r.per_stream_ber);
    r.bler_unordered = r.per_stream_ber;
    r.bler_ordered = bler_approx(dims, gamma0, mod, BlerVariant::Eq11);
    r.ratio_linear_unordered = r.exact_product / r.bler_unordered;
    r.ratio_linear_ordered = r.exact_product / r.bler_ordered;

    const double target = r.exact_product;
    const auto linear_curve = [&](double g) {
        const double p = mrc_avg_ber(k, g, mod);
        double kp = 1.0;
        for (int i = 0; i < m; ++i) kp *= 1.0 - p;
        return 1.0 - kp;
    };
    const auto unordered_curve = [&](double g) { return mrc_avg_ber(k, g, mod); };
    const auto ordered_curve = [&](double g) { return mrc_avg_ber(k, m * g, mod); };
    // positive = extra SNR the linear interface needs at the same BLER
    const double here_db = linear_to_db(gamma0);
    const double lo = here_db - 40.0, hi = here_db + 40.0;
    const double linear_at = solve_snr_for_level(linear_curve, target, lo, hi);
    r.snr_offset_vs_unordered_db =
        linear_at - solve_snr_for_level(unordered_curve, target, lo, hi);
    r.snr_offset_vs_ordered_db =
        linear_at - solve_snr_for_level(ordered_curve, target, lo, hi);
    return r;
}

std::vector<GenieChainEntry> genie_chain_outage(const SystemDims& dims, double x) {
    dims.validate();
    std::vector<GenieChainEntry> chain;
    for (int k = dims.m_tx; k >= 2; --k) {
        const SystemDims sub{dims.n_rx, k};
        GenieChainEntry e;
        e.k_tx = k;
        e.analytic = f1_bound_closedform(sub, x);
        e.analytic_is_sharp = (k == 2);
        e.needs_mc = (k > 2);  // bound only; true F1 needs MC for k >= 3
        chain.push_back(e);
    }
    return chain;
}

std::vector<GenieChainEntry> genie_chain_bler(const SystemDims& dims, double gamma0,
                                              Modulation mod) {
    dims.validate();
    std::vector<GenieChainEntry> chain;
    for (int k = dims.m_tx; k >= 2; --k) {
        const SystemDims sub{dims.n_rx, k};
        GenieChainEntry e;
        e.k_tx = k;
        e.analytic = bler_approx(sub, gamma0, mod, BlerVariant::Eq13);
        e.analytic_is_sharp = false;
        e.needs_mc = true;
        chain.push_back(e);
    }
    return chain;
}

}  // namespace vblast
