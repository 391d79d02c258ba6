#pragma once

#include <cstddef>
#include <vector>

#include "sigabc/streams.hpp"

namespace sigabc {

/// Signature of a piecewise-linear path truncated at `depth`.  Level m holds
/// d^m coefficients indexed lexicographically by (i_1, ..., i_m).  Only used
/// as an independent check on the PDE kernel.
struct TruncatedSignature {
    std::size_t dim = 0;
    std::size_t depth = 0;
    std::vector<std::vector<double>> levels;  ///< depth + 1 entries, levels[0] == {1}
};

/// Chen product of per-segment tensor exponentials exp(delta) truncated at depth.
TruncatedSignature truncated_signature(const TimeSeries& x, std::size_t depth);

/// sum_{m <= depth} <Sig(x)_m, Sig(y)_m>.  Depth 0 returns 1.
double truncated_sig_inner(const TimeSeries& x, const TimeSeries& y, std::size_t depth);

}  // namespace sigabc
