#include "vblast/receivers.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "vblast/modulation.hpp"

namespace vblast {
namespace {

void require_bpsk(Modulation mod, const char* where) {
    if (mod != Modulation::BpskCoherent)
        throw std::invalid_argument(std::string(where) +
                                    ": symbol-level detection supports BPSK only; "
                                    "noncoherent BFSK is served by the semi-analytic "
                                    "estimator (it needs a second signalling dimension "
                                    "per stream that the baseband model lacks)");
}

/// Residual of column `col` against the span of `active` columns of h,
/// via MGS-orthonormalized basis of the span.
CVec residual_against(const CMat& h, int col, std::span<const int> active) {
    CMat span(h.rows(), static_cast<Eigen::Index>(active.size()));
    Eigen::Index k = 0;
    for (int idx : active) span.col(k++) = h.col(idx);
    return project_orthogonal(h.col(col), span);
}

}  // namespace

OrderingResult choose_order(const ChannelMatrix& ch, OrderingStrategy strategy) {
    const int m = ch.dims.m_tx;
    OrderingResult out;
    out.order.reserve(m);
    out.step_norm.reserve(m);

    std::vector<int> remaining(m);
    std::iota(remaining.begin(), remaining.end(), 0);

    const double scale = ch.h.squaredNorm();
    const double rank_tol = 1e-24 * std::max(scale, 1e-300);

    if (strategy == OrderingStrategy::Suboptimal) {
        // one shot, descending raw column norm, stable toward lower index
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> norms(m);
        for (int k = 0; k < m; ++k) norms[k] = ch.h.col(k).squaredNorm();
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return norms[a] > norms[b]; });
        remaining = order;
    }

    for (int step = 0; step < m; ++step) {
        int pick_pos = 0;
        if (strategy == OrderingStrategy::Optimal) {
            // remaining stays ascending, so strict > breaks ties toward the
            // lowest original index
            double best = -1.0;
            for (size_t j = 0; j < remaining.size(); ++j) {
                std::vector<int> others;
                others.reserve(remaining.size() - 1);
                for (size_t i = 0; i < remaining.size(); ++i)
                    if (i != j) others.push_back(remaining[i]);
                const double cand = residual_against(ch.h, remaining[j], others).squaredNorm();
                if (cand > best) {
                    best = cand;
                    pick_pos = static_cast<int>(j);
                }
            }
        }
        const int col = remaining[pick_pos];
        std::vector<int> others;
        others.reserve(remaining.size() - 1);
        for (size_t i = 0; i < remaining.size(); ++i)
            if (static_cast<int>(i) != pick_pos) others.push_back(remaining[i]);
        const double x = residual_against(ch.h, col, others).squaredNorm();
        if (x <= rank_tol)
            throw std::domain_error("choose_order: rank-deficient channel matrix");
        out.order.push_back(col);
        out.step_norm.push_back(x);
        remaining.erase(remaining.begin() + pick_pos);
    }
    return out;
}

SicPlan make_sic_plan(const ChannelMatrix& ch, OrderingStrategy strategy) {
    const int m = ch.dims.m_tx;
    SicPlan plan;
    OrderingResult ord = choose_order(ch, strategy);
    plan.order = std::move(ord.order);
    plan.step_norm = std::move(ord.step_norm);
    plan.weights = CMat(ch.dims.n_rx, m);
    for (int step = 0; step < m; ++step) {
        std::vector<int> not_yet(plan.order.begin() + step + 1, plan.order.end());
        const CVec hp = residual_against(ch.h, plan.order[step], not_yet);
        plan.weights.col(step) = hp / hp.norm();
    }
    return plan;
}

DetectionResult sic_detect_with_plan(const SicPlan& plan, const ChannelMatrix& ch,
                                     const CVec& r, Modulation mod,
                                     const NoiseModel& noise,
                                     std::span<const int> tx_bits) {
    require_bpsk(mod, "zf_sic_detect");
    noise.validate();
    const int m = ch.dims.m_tx;
    if (r.size() != ch.dims.n_rx)
        throw std::invalid_argument("zf_sic_detect: r length mismatch");
    if (static_cast<int>(tx_bits.size()) != m)
        throw std::invalid_argument("zf_sic_detect: tx_bits length mismatch");

    DetectionResult res;
    res.order = plan.order;
    res.step_norm = plan.step_norm;
    res.step_snr.resize(m);
    res.detected_bits.assign(m, 0);
    res.step_errors.assign(m, false);

    CVec work = r;
    for (int step = 0; step < m; ++step) {
        res.step_snr[step] = plan.step_norm[step] * noise.gamma0();
        const int col = plan.order[step];
        const cplx z = plan.weights.col(step).dot(work);
        const int bit = bpsk_demap(z.real());
        res.detected_bits[col] = bit;
        res.step_errors[step] = bit != tx_bits[col];
        // subtract the detected symbol's contribution (wrong decisions propagate)
        work -= ch.h.col(col) * bpsk_symbol(bit);
    }
    res.block_error = std::any_of(res.step_errors.begin(), res.step_errors.end(),
                                  [](bool e) { return e; });
    return res;
}

DetectionResult zf_sic_detect(const ChannelMatrix& ch, const CVec& r,
                              OrderingStrategy strategy, Modulation mod,
                              const NoiseModel& noise, std::span<const int> tx_bits) {
    return sic_detect_with_plan(make_sic_plan(ch, strategy), ch, r, mod, noise, tx_bits);
}

DetectionResult linear_detect(const ChannelMatrix& ch, const CVec& r, ReceiverKind kind,
                              Modulation mod, const NoiseModel& noise,
                              std::span<const int> tx_bits) {
    require_bpsk(mod, "linear_detect");
    noise.validate();
    if (kind != ReceiverKind::LinearZf && kind != ReceiverKind::LinearMmse)
        throw std::invalid_argument("linear_detect: kind must be Linear-ZF or Linear-MMSE");
    const int m = ch.dims.m_tx;
    if (r.size() != ch.dims.n_rx)
        throw std::invalid_argument("linear_detect: r length mismatch");
    if (static_cast<int>(tx_bits.size()) != m)
        throw std::invalid_argument("linear_detect: tx_bits length mismatch");

    const CMat gram = ch.h.adjoint() * ch.h;
    CMat a = gram;
    if (kind == ReceiverKind::LinearMmse)
        for (int i = 0; i < m; ++i) a(i, i) += noise.sigma0_sq;

    Eigen::FullPivLU<CMat> lu(a);
    if (kind == ReceiverKind::LinearZf && !lu.isInvertible())
        throw std::domain_error("linear_detect: singular H^+ H");
    const CMat a_inv = lu.inverse();
    const CVec decision = a_inv * (ch.h.adjoint() * r);

    DetectionResult res;
    res.order.resize(m);
    std::iota(res.order.begin(), res.order.end(), 0);
    res.step_snr.resize(m);
    res.step_norm.resize(m);
    res.detected_bits.assign(m, 0);
    res.step_errors.assign(m, false);

    if (kind == ReceiverKind::LinearZf) {
        const CMat gram_inv = a_inv;
        for (int i = 0; i < m; ++i) {
            const double diag = gram_inv(i, i).real();
            res.step_norm[i] = 1.0 / diag;
            res.step_snr[i] = noise.gamma0() / diag;
        }
    } else {
        // post-MMSE SINR diagnostic: 1/[(I + H^+H/sigma0^2)^{-1}]_ii - 1
        CMat b = gram / noise.sigma0_sq;
        for (int i = 0; i < m; ++i) b(i, i) += 1.0;
        const CMat b_inv = b.inverse();
        for (int i = 0; i < m; ++i) {
            const double sinr = 1.0 / b_inv(i, i).real() - 1.0;
            res.step_snr[i] = sinr;
            res.step_norm[i] = sinr * noise.sigma0_sq;
        }
    }

    for (int i = 0; i < m; ++i) {
        const int bit = bpsk_demap(decision(i).real());
        res.detected_bits[i] = bit;
        res.step_errors[i] = bit != tx_bits[i];
    }
    res.block_error = std::any_of(res.step_errors.begin(), res.step_errors.end(),
                                  [](bool e) { return e; });
    return res;
}

ChannelMatrix dblast_effective_channel(const ChannelMatrix& ch, int use_index) {
    const int m = ch.dims.m_tx;
    const int rot = ((use_index % m) + m) % m;
    ChannelMatrix eff{ch.dims, CMat(ch.dims.n_rx, m)};
    for (int i = 0; i < m; ++i) eff.h.col(i) = ch.h.col((i + rot) % m);
    return eff;
}

std::vector<DetectionResult> dblast_cycle_detect(
    const ChannelMatrix& ch, std::span<const CVec> r_sequence, OrderingStrategy strategy,
    Modulation mod, const NoiseModel& noise,
    std::span<const std::vector<int>> tx_bits_sequence) {
    if (r_sequence.size() != tx_bits_sequence.size())
        throw std::invalid_argument("dblast_cycle_detect: sequence length mismatch");
    std::vector<DetectionResult> out;
    out.reserve(r_sequence.size());
    for (size_t t = 0; t < r_sequence.size(); ++t) {
        const ChannelMatrix eff = dblast_effective_channel(ch, static_cast<int>(t));
        out.push_back(zf_sic_detect(eff, r_sequence[t], strategy, mod, noise,
                                    tx_bits_sequence[t]));
    }
    return out;
}

}  // namespace vblast
