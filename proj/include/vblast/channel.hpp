#pragma once

#include "vblast/rng.hpp"
#include "vblast/types.hpp"

namespace vblast {

/// One i.i.d. Rayleigh fading realization: entries i.i.d. CN(0, 1).
struct ChannelMatrix {
    SystemDims dims;
    CMat h;  // n_rx x m_tx
};

inline ChannelMatrix sample_channel(const SystemDims& dims, RandomStream& rng) {
    dims.validate();
    ChannelMatrix ch{dims, CMat(dims.n_rx, dims.m_tx)};
    // Column-major fill order is part of the determinism contract.
    for (int j = 0; j < dims.m_tx; ++j)
        for (int i = 0; i < dims.n_rx; ++i)
            ch.h(i, j) = rng.next_cgauss();
    return ch;
}

}  // namespace vblast
