#include "sigabc/truncated_signature.hpp"

#include "sigabc/error.hpp"

namespace sigabc {

using detail::require;

namespace {

// Levels of exp(delta): level m = delta^{(x) m} / m!.
std::vector<std::vector<double>> tensor_exp(const std::vector<double>& delta, std::size_t depth) {
    std::vector<std::vector<double>> lv(depth + 1);
    lv[0] = {1.0};
    const std::size_t d = delta.size();
    for (std::size_t m = 1; m <= depth; ++m) {
        const auto& prev = lv[m - 1];
        auto& cur = lv[m];
        cur.resize(prev.size() * d);
        for (std::size_t a = 0; a < prev.size(); ++a)
            for (std::size_t b = 0; b < d; ++b) cur[a * d + b] = prev[a] * delta[b] / static_cast<double>(m);
    }
    return lv;
}

}  // namespace

TruncatedSignature truncated_signature(const TimeSeries& x, std::size_t depth) {
    require(x.size() >= 2, "truncated signature needs at least two samples");
    require(depth >= 1, "truncated signature depth must be at least 1");
    const std::size_t d = x.dim();
    TruncatedSignature sig{d, depth, std::vector<std::vector<double>>(depth + 1)};
    sig.levels[0] = {1.0};
    std::size_t width = 1;
    for (std::size_t m = 1; m <= depth; ++m) {
        width *= d;
        sig.levels[m].assign(width, 0.0);
    }

    std::vector<double> delta(d);
    for (std::size_t s = 0; s + 1 < x.size(); ++s) {
        for (std::size_t c = 0; c < d; ++c) delta[c] = x.value(s + 1, c) - x.value(s, c);
        const auto e = tensor_exp(delta, depth);
        // Chen: new_m = sum_k old_k (x) e_{m-k}; go top-down so lower levels stay "old".
        for (std::size_t m = depth; m >= 1; --m) {
            auto& out = sig.levels[m];
            for (std::size_t k = 0; k < m; ++k) {
                const auto& a = sig.levels[k];
                const auto& b = e[m - k];
                for (std::size_t ia = 0; ia < a.size(); ++ia) {
                    const double av = a[ia];
                    double* dst = out.data() + ia * b.size();
                    for (std::size_t ib = 0; ib < b.size(); ++ib) dst[ib] += av * b[ib];
                }
            }
        }
    }
    return sig;
}

double truncated_sig_inner(const TimeSeries& x, const TimeSeries& y, std::size_t depth) {
    require(x.dim() == y.dim(), "truncated signature inner product: dimension mismatch");
    if (depth == 0) return 1.0;
    if (x.size() < 2 || y.size() < 2) return 1.0;
    const auto a = truncated_signature(x, depth);
    const auto b = truncated_signature(y, depth);
    double s = 0.0;
    for (std::size_t m = 0; m <= depth; ++m)
        for (std::size_t i = 0; i < a.levels[m].size(); ++i) s += a.levels[m][i] * b.levels[m][i];
    return s;
}

}  // namespace sigabc
