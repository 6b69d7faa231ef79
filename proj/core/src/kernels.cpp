#include "bsnn/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace bsnn {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

struct ConvDims {
    std::size_t batch, cin, h, w, cout, kh, kw, oh, ow;
};

template <typename T>
ConvDims conv_dims(const TensorT<T>& input, const TensorT<T>& weight,
                   std::size_t stride, std::size_t pad) {
    require(input.rank() == 4, "conv2d: input must be 4-d [B,Cin,H,W]");
    require(weight.rank() == 4, "conv2d: weight must be 4-d [Cout,Cin,kH,kW]");
    require(stride >= 1, "conv2d: stride must be >= 1");
    ConvDims d{};
    d.batch = input.extent(0);
    d.cin = input.extent(1);
    d.h = input.extent(2);
    d.w = input.extent(3);
    d.cout = weight.extent(0);
    d.kh = weight.extent(2);
    d.kw = weight.extent(3);
    require(weight.extent(1) == d.cin, "conv2d: channel mismatch");
    require(d.kh <= d.h + 2 * pad && d.kw <= d.w + 2 * pad,
            "conv2d: kernel larger than padded input");
    std::size_t sh = d.h + 2 * pad - d.kh;
    std::size_t sw = d.w + 2 * pad - d.kw;
    require(sh % stride == 0 && sw % stride == 0,
            "conv2d: non-exact output extent");
    d.oh = sh / stride + 1;
    d.ow = sw / stride + 1;
    return d;
}

template <typename T, bool Count>
TensorT<T> conv2d_impl(const TensorT<T>& input, const TensorT<T>& weight,
                       std::size_t stride, std::size_t pad,
                       std::uint64_t* macs) {
    ConvDims d = conv_dims(input, weight, stride, pad);
    TensorT<T> out({d.batch, d.cout, d.oh, d.ow});
    std::uint64_t taps = 0;
    const std::ptrdiff_t ph = static_cast<std::ptrdiff_t>(pad);
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t co = 0; co < d.cout; ++co)
            for (std::size_t oy = 0; oy < d.oh; ++oy)
                for (std::size_t ox = 0; ox < d.ow; ++ox) {
                    T acc = T(0);
                    for (std::size_t ci = 0; ci < d.cin; ++ci)
                        for (std::size_t ky = 0; ky < d.kh; ++ky) {
                            std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(oy * stride + ky) - ph;
                            for (std::size_t kx = 0; kx < d.kw; ++kx) {
                                std::ptrdiff_t ix =
                                    static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                    ph;
                                if constexpr (Count) ++taps;
                                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h) ||
                                    ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w))
                                    continue;
                                acc += input.at4(b, ci, static_cast<std::size_t>(iy),
                                                 static_cast<std::size_t>(ix)) *
                                       weight.at4(co, ci, ky, kx);
                            }
                        }
                    out.at4(b, co, oy, ox) = acc;
                }
    if constexpr (Count) *macs += taps;
    return out;
}

}  // namespace

template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& weight,
                  std::size_t stride, std::size_t pad, std::uint64_t* macs) {
    return macs ? conv2d_impl<T, true>(input, weight, stride, pad, macs)
                : conv2d_impl<T, false>(input, weight, stride, pad, nullptr);
}

template <typename T>
std::pair<TensorT<T>, TensorT<T>> conv2d_backward(const TensorT<T>& grad_out,
                                                  const TensorT<T>& input,
                                                  const TensorT<T>& weight,
                                                  std::size_t stride,
                                                  std::size_t pad) {
    ConvDims d = conv_dims(input, weight, stride, pad);
    require(grad_out.rank() == 4 && grad_out.extent(0) == d.batch &&
                grad_out.extent(1) == d.cout && grad_out.extent(2) == d.oh &&
                grad_out.extent(3) == d.ow,
            "conv2d_backward: grad_out shape mismatch");
    TensorT<T> grad_in(input.shape, T(0));
    TensorT<T> grad_w(weight.shape, T(0));
    const std::ptrdiff_t ph = static_cast<std::ptrdiff_t>(pad);
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t co = 0; co < d.cout; ++co)
            for (std::size_t oy = 0; oy < d.oh; ++oy)
                for (std::size_t ox = 0; ox < d.ow; ++ox) {
                    const T g = grad_out.at4(b, co, oy, ox);
                    if (g == T(0)) continue;
                    for (std::size_t ci = 0; ci < d.cin; ++ci)
                        for (std::size_t ky = 0; ky < d.kh; ++ky) {
                            std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(oy * stride + ky) - ph;
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h))
                                continue;
                            for (std::size_t kx = 0; kx < d.kw; ++kx) {
                                std::ptrdiff_t ix =
                                    static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                    ph;
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w))
                                    continue;
                                grad_in.at4(b, ci, static_cast<std::size_t>(iy),
                                            static_cast<std::size_t>(ix)) +=
                                    g * weight.at4(co, ci, ky, kx);
                                grad_w.at4(co, ci, ky, kx) +=
                                    g * input.at4(b, ci, static_cast<std::size_t>(iy),
                                                  static_cast<std::size_t>(ix));
                            }
                        }
                }
    return {std::move(grad_in), std::move(grad_w)};
}

template <typename T>
TensorT<T> linear(const TensorT<T>& input, const TensorT<T>& weight,
                  std::uint64_t* macs) {
    require(input.rank() == 2, "linear: input must be 2-d [B,iS]");
    require(weight.rank() == 2, "linear: weight must be 2-d [oS,iS]");
    require(input.extent(1) == weight.extent(1), "linear: inner extent mismatch");
    const std::size_t batch = input.extent(0);
    const std::size_t is = input.extent(1);
    const std::size_t os = weight.extent(0);
    TensorT<T> out({batch, os});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < os; ++o) {
            T acc = T(0);
            const T* in_row = input.data.data() + b * is;
            const T* w_row = weight.data.data() + o * is;
            for (std::size_t i = 0; i < is; ++i) acc += in_row[i] * w_row[i];
            out.at2(b, o) = acc;
        }
    if (macs) *macs += static_cast<std::uint64_t>(batch) * os * is;
    return out;
}

template <typename T>
std::pair<TensorT<T>, TensorT<T>> linear_backward(const TensorT<T>& grad_out,
                                                  const TensorT<T>& input,
                                                  const TensorT<T>& weight) {
    require(grad_out.rank() == 2 && grad_out.extent(0) == input.extent(0) &&
                grad_out.extent(1) == weight.extent(0),
            "linear_backward: grad_out shape mismatch");
    require(input.extent(1) == weight.extent(1),
            "linear_backward: inner extent mismatch");
    const std::size_t batch = input.extent(0);
    const std::size_t is = input.extent(1);
    const std::size_t os = weight.extent(0);
    TensorT<T> grad_in(input.shape, T(0));
    TensorT<T> grad_w(weight.shape, T(0));
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < os; ++o) {
            const T g = grad_out.at2(b, o);
            if (g == T(0)) continue;
            T* gi_row = grad_in.data.data() + b * is;
            T* gw_row = grad_w.data.data() + o * is;
            const T* in_row = input.data.data() + b * is;
            const T* w_row = weight.data.data() + o * is;
            for (std::size_t i = 0; i < is; ++i) {
                gi_row[i] += g * w_row[i];
                gw_row[i] += g * in_row[i];
            }
        }
    return {std::move(grad_in), std::move(grad_w)};
}

template <typename T>
TensorT<T> relu(const TensorT<T>& input) {
    TensorT<T> out;
    out.shape = input.shape;
    out.data.resize(input.size());
    for (std::size_t i = 0; i < input.size(); ++i)
        out.data[i] = input.data[i] > T(0) ? input.data[i] : T(0);
    return out;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& input) {
    require(grad_out.same_shape(input), "relu_backward: shape mismatch");
    TensorT<T> out;
    out.shape = input.shape;
    out.data.resize(input.size());
    for (std::size_t i = 0; i < input.size(); ++i)
        out.data[i] = input.data[i] > T(0) ? grad_out.data[i] : T(0);
    return out;
}

namespace {

template <typename T>
void pool_dims(const TensorT<T>& input, std::size_t& bc, std::size_t& h,
               std::size_t& w) {
    require(input.rank() == 4, "pool: input must be 4-d");
    h = input.extent(2);
    w = input.extent(3);
    require(h % 2 == 0 && w % 2 == 0, "pool: odd pooling extent");
    bc = input.extent(0) * input.extent(1);
}

}  // namespace

template <typename T>
TensorT<T> avgpool2x2(const TensorT<T>& input) {
    std::size_t bc, h, w;
    pool_dims(input, bc, h, w);
    TensorT<T> out({input.extent(0), input.extent(1), h / 2, w / 2});
    for (std::size_t p = 0; p < bc; ++p) {
        const T* in = input.data.data() + p * h * w;
        T* o = out.data.data() + p * (h / 2) * (w / 2);
        for (std::size_t y = 0; y < h / 2; ++y)
            for (std::size_t x = 0; x < w / 2; ++x) {
                const T* r0 = in + (2 * y) * w + 2 * x;
                const T* r1 = r0 + w;
                o[y * (w / 2) + x] = (r0[0] + r0[1] + r1[0] + r1[1]) * T(0.25);
            }
    }
    return out;
}

template <typename T>
TensorT<T> avgpool2x2_backward(const TensorT<T>& grad_out,
                               const std::vector<std::size_t>& input_shape) {
    require(input_shape.size() == 4, "pool backward: input shape must be 4-d");
    const std::size_t h = input_shape[2], w = input_shape[3];
    require(h % 2 == 0 && w % 2 == 0, "pool backward: odd pooling extent");
    require(grad_out.rank() == 4 && grad_out.extent(2) == h / 2 &&
                grad_out.extent(3) == w / 2,
            "avgpool2x2_backward: shape mismatch");
    TensorT<T> grad_in(input_shape, T(0));
    const std::size_t bc = input_shape[0] * input_shape[1];
    for (std::size_t p = 0; p < bc; ++p) {
        const T* g = grad_out.data.data() + p * (h / 2) * (w / 2);
        T* gi = grad_in.data.data() + p * h * w;
        for (std::size_t y = 0; y < h / 2; ++y)
            for (std::size_t x = 0; x < w / 2; ++x) {
                const T v = g[y * (w / 2) + x] * T(0.25);
                gi[(2 * y) * w + 2 * x] += v;
                gi[(2 * y) * w + 2 * x + 1] += v;
                gi[(2 * y + 1) * w + 2 * x] += v;
                gi[(2 * y + 1) * w + 2 * x + 1] += v;
            }
    }
    return grad_in;
}

template <typename T>
TensorT<T> maxpool2x2(const TensorT<T>& input,
                      std::vector<std::uint32_t>* argmax) {
    std::size_t bc, h, w;
    pool_dims(input, bc, h, w);
    TensorT<T> out({input.extent(0), input.extent(1), h / 2, w / 2});
    if (argmax) argmax->assign(out.size(), 0);
    for (std::size_t p = 0; p < bc; ++p) {
        const T* in = input.data.data() + p * h * w;
        T* o = out.data.data() + p * (h / 2) * (w / 2);
        for (std::size_t y = 0; y < h / 2; ++y)
            for (std::size_t x = 0; x < w / 2; ++x) {
                // ties go to the first element in scan order
                T best = in[(2 * y) * w + 2 * x];
                std::uint32_t idx = 0;
                const T cands[4] = {best, in[(2 * y) * w + 2 * x + 1],
                                    in[(2 * y + 1) * w + 2 * x],
                                    in[(2 * y + 1) * w + 2 * x + 1]};
                for (std::uint32_t k = 1; k < 4; ++k)
                    if (cands[k] > best) {
                        best = cands[k];
                        idx = k;
                    }
                const std::size_t oi = p * (h / 2) * (w / 2) + y * (w / 2) + x;
                o[y * (w / 2) + x] = best;
                if (argmax) (*argmax)[oi] = idx;
            }
    }
    return out;
}

template <typename T>
TensorT<T> maxpool2x2_backward(const TensorT<T>& grad_out,
                               const std::vector<std::size_t>& input_shape,
                               const std::vector<std::uint32_t>& argmax) {
    require(input_shape.size() == 4, "pool backward: input shape must be 4-d");
    const std::size_t h = input_shape[2], w = input_shape[3];
    require(grad_out.size() == argmax.size(),
            "maxpool2x2_backward: argmax size mismatch");
    TensorT<T> grad_in(input_shape, T(0));
    const std::size_t bc = input_shape[0] * input_shape[1];
    for (std::size_t p = 0; p < bc; ++p) {
        const T* g = grad_out.data.data() + p * (h / 2) * (w / 2);
        T* gi = grad_in.data.data() + p * h * w;
        for (std::size_t y = 0; y < h / 2; ++y)
            for (std::size_t x = 0; x < w / 2; ++x) {
                const std::size_t oi = p * (h / 2) * (w / 2) + y * (w / 2) + x;
                const std::uint32_t k = argmax[oi];
                const std::size_t iy = 2 * y + k / 2, ix = 2 * x + k % 2;
                gi[iy * w + ix] += g[y * (w / 2) + x];
            }
    }
    return grad_in;
}

namespace {

inline bool dropout_keep(float rate, std::uint64_t seed, std::uint64_t layer_id,
                         std::uint64_t sample, std::uint64_t elem) {
    return rng::uniform(rng::key(seed, layer_id, sample, elem)) >= rate;
}

}  // namespace

template <typename T>
TensorT<T> dropout(const TensorT<T>& input, float rate, std::uint64_t seed,
                   std::uint64_t layer_id, std::uint64_t sample_index_base,
                   bool training) {
    require(rate >= 0.0f && rate < 1.0f, "dropout: rate must be in [0,1)");
    if (!training || rate == 0.0f) return input;
    const std::size_t batch = input.extent(0);
    const std::size_t per = input.size() / batch;
    const T scale = T(1) / (T(1) - T(rate));
    TensorT<T> out;
    out.shape = input.shape;
    out.data.resize(input.size());
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t e = 0; e < per; ++e) {
            const std::size_t i = b * per + e;
            out.data[i] = dropout_keep(rate, seed, layer_id,
                                       sample_index_base + b, e)
                              ? input.data[i] * scale
                              : T(0);
        }
    return out;
}

template <typename T>
TensorT<T> dropout_backward(const TensorT<T>& grad_out, float rate,
                            std::uint64_t seed, std::uint64_t layer_id,
                            std::uint64_t sample_index_base, bool training) {
    require(rate >= 0.0f && rate < 1.0f, "dropout: rate must be in [0,1)");
    if (!training || rate == 0.0f) return grad_out;
    const std::size_t batch = grad_out.extent(0);
    const std::size_t per = grad_out.size() / batch;
    const T scale = T(1) / (T(1) - T(rate));
    TensorT<T> out;
    out.shape = grad_out.shape;
    out.data.resize(grad_out.size());
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t e = 0; e < per; ++e) {
            const std::size_t i = b * per + e;
            out.data[i] = dropout_keep(rate, seed, layer_id,
                                       sample_index_base + b, e)
                              ? grad_out.data[i] * scale
                              : T(0);
        }
    return out;
}

template <typename T>
std::pair<T, TensorT<T>> softmax_xent(const TensorT<T>& logits,
                                      const std::vector<std::uint32_t>& labels) {
    require(logits.rank() == 2, "softmax_xent: logits must be 2-d [B,K]");
    const std::size_t batch = logits.extent(0);
    const std::size_t k = logits.extent(1);
    require(labels.size() == batch, "softmax_xent: label count mismatch");
    for (std::uint32_t l : labels)
        require(l < k, "softmax_xent: label out of range");
    TensorT<T> grad(logits.shape, T(0));
    double total = 0.0;
    const T inv_b = T(1) / T(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const T* row = logits.data.data() + b * k;
        T mx = row[0];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        T denom = T(0);
        for (std::size_t j = 0; j < k; ++j) denom += std::exp(row[j] - mx);
        const T log_denom = std::log(denom);
        total += static_cast<double>(log_denom - (row[labels[b]] - mx));
        T* grow = grad.data.data() + b * k;
        for (std::size_t j = 0; j < k; ++j) {
            T p = std::exp(row[j] - mx) / denom;
            grow[j] = (p - (j == labels[b] ? T(1) : T(0))) * inv_b;
        }
    }
    return {static_cast<T>(total / static_cast<double>(batch)), std::move(grad)};
}

template TensorT<float> conv2d<float>(const TensorT<float>&,
                                      const TensorT<float>&, std::size_t,
                                      std::size_t, std::uint64_t*);
template TensorT<double> conv2d<double>(const TensorT<double>&,
                                        const TensorT<double>&, std::size_t,
                                        std::size_t, std::uint64_t*);
template std::pair<TensorT<float>, TensorT<float>> conv2d_backward<float>(
    const TensorT<float>&, const TensorT<float>&, const TensorT<float>&,
    std::size_t, std::size_t);
template std::pair<TensorT<double>, TensorT<double>> conv2d_backward<double>(
    const TensorT<double>&, const TensorT<double>&, const TensorT<double>&,
    std::size_t, std::size_t);
template TensorT<float> linear<float>(const TensorT<float>&,
                                      const TensorT<float>&, std::uint64_t*);
template TensorT<double> linear<double>(const TensorT<double>&,
                                        const TensorT<double>&, std::uint64_t*);
template std::pair<TensorT<float>, TensorT<float>> linear_backward<float>(
    const TensorT<float>&, const TensorT<float>&, const TensorT<float>&);
template std::pair<TensorT<double>, TensorT<double>> linear_backward<double>(
    const TensorT<double>&, const TensorT<double>&, const TensorT<double>&);
template TensorT<float> relu<float>(const TensorT<float>&);
template TensorT<double> relu<double>(const TensorT<double>&);
template TensorT<float> relu_backward<float>(const TensorT<float>&,
                                             const TensorT<float>&);
template TensorT<double> relu_backward<double>(const TensorT<double>&,
                                               const TensorT<double>&);
template TensorT<float> avgpool2x2<float>(const TensorT<float>&);
template TensorT<double> avgpool2x2<double>(const TensorT<double>&);
template TensorT<float> avgpool2x2_backward<float>(
    const TensorT<float>&, const std::vector<std::size_t>&);
template TensorT<double> avgpool2x2_backward<double>(
    const TensorT<double>&, const std::vector<std::size_t>&);
template TensorT<float> maxpool2x2<float>(const TensorT<float>&,
                                          std::vector<std::uint32_t>*);
template TensorT<double> maxpool2x2<double>(const TensorT<double>&,
                                            std::vector<std::uint32_t>*);
template TensorT<float> maxpool2x2_backward<float>(
    const TensorT<float>&, const std::vector<std::size_t>&,
    const std::vector<std::uint32_t>&);
template TensorT<double> maxpool2x2_backward<double>(
    const TensorT<double>&, const std::vector<std::size_t>&,
    const std::vector<std::uint32_t>&);
template TensorT<float> dropout<float>(const TensorT<float>&, float,
                                       std::uint64_t, std::uint64_t,
                                       std::uint64_t, bool);
template TensorT<double> dropout<double>(const TensorT<double>&, float,
                                         std::uint64_t, std::uint64_t,
                                         std::uint64_t, bool);
template TensorT<float> dropout_backward<float>(const TensorT<float>&, float,
                                                std::uint64_t, std::uint64_t,
                                                std::uint64_t, bool);
template TensorT<double> dropout_backward<double>(const TensorT<double>&, float,
                                                  std::uint64_t, std::uint64_t,
                                                  std::uint64_t, bool);
template std::pair<float, TensorT<float>> softmax_xent<float>(
    const TensorT<float>&, const std::vector<std::uint32_t>&);
template std::pair<double, TensorT<double>> softmax_xent<double>(
    const TensorT<double>&, const std::vector<std::uint32_t>&);

}  // namespace bsnn
