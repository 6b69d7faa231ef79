#pragma once

#include <cstdint>
#include <vector>

#include "bsnn/tensor.hpp"

namespace bsnn {

// Per-filter sign bits packed into 64-bit words plus the per-filter scale.
// A weight maps to bit 1 when its sign is +1 (sign(0) = +1) and the scale is
// the mean absolute value of the filter's full-precision proxies, so
// unpacking reproduces alpha * sign(W) exactly.
struct BinarizedWeights {
    std::vector<std::size_t> source_shape;
    std::size_t filters = 0;
    std::size_t filter_len = 0;
    std::size_t words_per_filter = 0;
    std::vector<std::uint64_t> plus_mask;   // bit set where sign is +1
    std::vector<std::uint64_t> minus_mask;  // bit set where sign is -1
    std::vector<float> alpha;               // one scale per output filter

    const std::uint64_t* plus_row(std::size_t f) const {
        return plus_mask.data() + f * words_per_filter;
    }
    const std::uint64_t* minus_row(std::size_t f) const {
        return minus_mask.data() + f * words_per_filter;
    }
    // +1 -> true, -1 -> false
    bool sign_bit(std::size_t f, std::size_t i) const {
        return (plus_row(f)[i / 64] >> (i % 64)) & 1u;
    }
};

// Filters are rows of the leading extent ([Cout,...] weights, [oS,iS] linear
// weights); a rank-1 tensor is a single filter.
BinarizedWeights binarize_weights(const Tensor& w);

// alpha * sign(W) unpacked back to the source shape.
Tensor effective_weights(const BinarizedWeights& bw);

// alpha * sign(W) computed directly from the proxies; equals
// effective_weights(binarize_weights(w)) exactly.
Tensor binarize_effective(const Tensor& w);

// Straight-through estimator: gradient wrt the full-precision proxies passes
// where |w| <= 1 (boundary inclusive) and is clipped to zero outside; the
// scale is treated as a constant in backward.
Tensor ste_weight_grad(const Tensor& grad_effective, const Tensor& w);

// Elementwise sign with sign(0) = +1, for the XNOR-style baseline where
// activations are reduced to -1/+1 as well.
Tensor binarize_activations_sign(const Tensor& x);

// STE for the activation sign: passes where |x| <= 1, zero outside.
Tensor sign_activation_backward(const Tensor& grad_out, const Tensor& x);

}  // namespace bsnn
