#include "bsnn/tensor.hpp"

namespace bsnn {

std::size_t argmax_index(const float* v, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

Tensor flatten2(const Tensor& t) {
    Tensor r = t;
    std::size_t rest = t.size() / t.extent(0);
    r.shape = {t.extent(0), rest};
    return r;
}

}  // namespace bsnn
