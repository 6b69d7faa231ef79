#include "bsnn/binarize.hpp"

#include <cmath>
#include <stdexcept>

namespace bsnn {

BinarizedWeights binarize_weights(const Tensor& w) {
    if (!w.all_finite())
        throw std::invalid_argument("binarize_weights: non-finite weights");
    BinarizedWeights bw;
    bw.source_shape = w.shape;
    bw.filters = w.rank() >= 2 ? w.extent(0) : 1;
    bw.filter_len = w.size() / bw.filters;
    if (bw.filter_len == 0) throw std::invalid_argument("empty filter");
    bw.words_per_filter = (bw.filter_len + 63) / 64;
    bw.plus_mask.assign(bw.filters * bw.words_per_filter, 0);
    bw.minus_mask.assign(bw.filters * bw.words_per_filter, 0);
    bw.alpha.resize(bw.filters);

    for (std::size_t f = 0; f < bw.filters; ++f) {
        const float* row = w.data.data() + f * bw.filter_len;
        double l1 = 0.0;
        std::uint64_t* plus = bw.plus_mask.data() + f * bw.words_per_filter;
        std::uint64_t* minus = bw.minus_mask.data() + f * bw.words_per_filter;
        for (std::size_t i = 0; i < bw.filter_len; ++i) {
            l1 += std::abs(static_cast<double>(row[i]));
            // sign(0) = +1
            if (row[i] >= 0.0f)
                plus[i / 64] |= 1ull << (i % 64);
            else
                minus[i / 64] |= 1ull << (i % 64);
        }
        bw.alpha[f] =
            static_cast<float>(l1 / static_cast<double>(bw.filter_len));
    }
    return bw;
}

Tensor effective_weights(const BinarizedWeights& bw) {
    Tensor t(bw.source_shape);
    for (std::size_t f = 0; f < bw.filters; ++f) {
        float* row = t.data.data() + f * bw.filter_len;
        const float a = bw.alpha[f];
        for (std::size_t i = 0; i < bw.filter_len; ++i)
            row[i] = bw.sign_bit(f, i) ? a : -a;
    }
    return t;
}

Tensor binarize_effective(const Tensor& w) {
    if (!w.all_finite())
        throw std::invalid_argument("binarize_effective: non-finite weights");
    const std::size_t filters = w.rank() >= 2 ? w.extent(0) : 1;
    const std::size_t len = w.size() / filters;
    if (len == 0) throw std::invalid_argument("empty filter");
    Tensor out;
    out.shape = w.shape;
    out.data.resize(w.size());
    for (std::size_t f = 0; f < filters; ++f) {
        const float* row = w.data.data() + f * len;
        float* orow = out.data.data() + f * len;
        double l1 = 0.0;
        for (std::size_t i = 0; i < len; ++i)
            l1 += std::abs(static_cast<double>(row[i]));
        const float a = static_cast<float>(l1 / static_cast<double>(len));
        for (std::size_t i = 0; i < len; ++i)
            orow[i] = row[i] >= 0.0f ? a : -a;
    }
    return out;
}

Tensor ste_weight_grad(const Tensor& grad_effective, const Tensor& w) {
    if (!grad_effective.same_shape(w))
        throw std::invalid_argument("ste_weight_grad: shape mismatch");
    Tensor out;
    out.shape = w.shape;
    out.data.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        out.data[i] =
            std::abs(w.data[i]) <= 1.0f ? grad_effective.data[i] : 0.0f;
    return out;
}

Tensor binarize_activations_sign(const Tensor& x) {
    Tensor out;
    out.shape = x.shape;
    out.data.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out.data[i] = x.data[i] >= 0.0f ? 1.0f : -1.0f;
    return out;
}

Tensor sign_activation_backward(const Tensor& grad_out, const Tensor& x) {
    if (!grad_out.same_shape(x))
        throw std::invalid_argument("sign_activation_backward: shape mismatch");
    Tensor out;
    out.shape = x.shape;
    out.data.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out.data[i] = std::abs(x.data[i]) <= 1.0f ? grad_out.data[i] : 0.0f;
    return out;
}

}  // namespace bsnn
