#include "vblast/projection.hpp"

#include <stdexcept>
#include <string>

namespace vblast {

CMat orthonormal_basis(const CMat& cols) {
    const Eigen::Index n = cols.rows();
    const Eigen::Index k = cols.cols();
    CMat q(n, k);
    Eigen::Index r = 0;

    double max_norm = 0.0;
    for (Eigen::Index j = 0; j < k; ++j)
        max_norm = std::max(max_norm, cols.col(j).norm());
    const double drop = kRankDropTol * max_norm;

    for (Eigen::Index j = 0; j < k; ++j) {
        CVec v = cols.col(j);
        // MGS sweep plus one re-orthogonalization pass.
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < r; ++i)
                v -= q.col(i).dot(v) * q.col(i);
        const double nv = v.norm();
        if (nv <= drop) continue;  // linearly dependent
        q.col(r) = v / nv;
        ++r;
    }
    q.conservativeResize(n, r);
    return q;
}

CVec project_orthogonal(const CVec& v, const CMat& span_cols) {
    if (span_cols.cols() > 0 && span_cols.rows() != v.size())
        throw std::invalid_argument("project_orthogonal: span column length " +
                                    std::to_string(span_cols.rows()) +
                                    " != vector length " + std::to_string(v.size()));
    if (span_cols.cols() == 0) return v;
    const CMat q = orthonormal_basis(span_cols);
    CVec out = v;
    for (Eigen::Index i = 0; i < q.cols(); ++i)
        out -= q.col(i).dot(out) * q.col(i);
    // second pass keeps orthogonality at the 1e-10*||v|| contract
    for (Eigen::Index i = 0; i < q.cols(); ++i)
        out -= q.col(i).dot(out) * q.col(i);
    return out;
}

double after_projection_norm2(const CMat& h, int col, std::span<const int> excluded) {
    if (col < 0 || col >= h.cols())
        throw std::out_of_range("after_projection_norm2: column index " +
                                std::to_string(col));
    CMat span(h.rows(), static_cast<Eigen::Index>(excluded.size()));
    Eigen::Index k = 0;
    for (int idx : excluded) {
        if (idx < 0 || idx >= h.cols())
            throw std::out_of_range("after_projection_norm2: excluded index " +
                                    std::to_string(idx));
        if (idx == col)
            throw std::invalid_argument("after_projection_norm2: column " +
                                        std::to_string(col) + " in excluded set");
        span.col(k++) = h.col(idx);
    }
    const CVec v = h.col(col);
    return project_orthogonal(v, span).squaredNorm();
}

AfterProjectionSnr after_projection_snr(const ChannelMatrix& ch, int col,
                                        std::span<const int> excluded,
                                        const NoiseModel& noise) {
    noise.validate();
    const double x = after_projection_norm2(ch.h, col, excluded);
    return {x * noise.gamma0(), x};
}

}  // namespace vblast
