#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>

#include "bsnn/rng.hpp"
#include "bsnn/tensor.hpp"

namespace bsnn {

// Layer kernels for the constrained VGG-style networks: bias-less conv and
// linear, ReLU, 2x2 stride-2 pooling, counter-keyed dropout, softmax
// cross-entropy. Pure functions over immutable inputs; safe to call
// concurrently on disjoint batch shards.
//
// When `macs` is non-null, conv2d/linear count one multiply-accumulate per
// kernel tap actually visited (padded taps included), giving an
// instrumentation oracle for the operation-count formulas.

template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& weight,
                  std::size_t stride, std::size_t pad,
                  std::uint64_t* macs = nullptr);

// Returns {gradInput, gradWeight}.
template <typename T>
std::pair<TensorT<T>, TensorT<T>> conv2d_backward(const TensorT<T>& grad_out,
                                                  const TensorT<T>& input,
                                                  const TensorT<T>& weight,
                                                  std::size_t stride,
                                                  std::size_t pad);

template <typename T>
TensorT<T> linear(const TensorT<T>& input, const TensorT<T>& weight,
                  std::uint64_t* macs = nullptr);

template <typename T>
std::pair<TensorT<T>, TensorT<T>> linear_backward(const TensorT<T>& grad_out,
                                                  const TensorT<T>& input,
                                                  const TensorT<T>& weight);

template <typename T>
TensorT<T> relu(const TensorT<T>& input);

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& input);

template <typename T>
TensorT<T> avgpool2x2(const TensorT<T>& input);

template <typename T>
TensorT<T> avgpool2x2_backward(const TensorT<T>& grad_out,
                               const std::vector<std::size_t>& input_shape);

template <typename T>
TensorT<T> maxpool2x2(const TensorT<T>& input,
                      std::vector<std::uint32_t>* argmax = nullptr);

template <typename T>
TensorT<T> maxpool2x2_backward(const TensorT<T>& grad_out,
                               const std::vector<std::size_t>& input_shape,
                               const std::vector<std::uint32_t>& argmax);

// Keep/drop decisions are a pure function of
// (seed, layer_id, sample_index_base + batch row, element index), so masks
// are reproducible under any batch split or thread count. Survivors are
// scaled by 1/(1-rate). Identity when training == false.
template <typename T>
TensorT<T> dropout(const TensorT<T>& input, float rate, std::uint64_t seed,
                   std::uint64_t layer_id, std::uint64_t sample_index_base,
                   bool training);

template <typename T>
TensorT<T> dropout_backward(const TensorT<T>& grad_out, float rate,
                            std::uint64_t seed, std::uint64_t layer_id,
                            std::uint64_t sample_index_base, bool training);

// Mean cross-entropy over the batch and its gradient wrt logits.
template <typename T>
std::pair<T, TensorT<T>> softmax_xent(const TensorT<T>& logits,
                                      const std::vector<std::uint32_t>& labels);

extern template TensorT<float> conv2d<float>(const TensorT<float>&,
                                             const TensorT<float>&,
                                             std::size_t, std::size_t,
                                             std::uint64_t*);
extern template TensorT<double> conv2d<double>(const TensorT<double>&,
                                               const TensorT<double>&,
                                               std::size_t, std::size_t,
                                               std::uint64_t*);
extern template std::pair<TensorT<float>, TensorT<float>>
conv2d_backward<float>(const TensorT<float>&, const TensorT<float>&,
                       const TensorT<float>&, std::size_t, std::size_t);
extern template std::pair<TensorT<double>, TensorT<double>>
conv2d_backward<double>(const TensorT<double>&, const TensorT<double>&,
                        const TensorT<double>&, std::size_t, std::size_t);
extern template TensorT<float> linear<float>(const TensorT<float>&,
                                             const TensorT<float>&,
                                             std::uint64_t*);
extern template TensorT<double> linear<double>(const TensorT<double>&,
                                               const TensorT<double>&,
                                               std::uint64_t*);
extern template std::pair<TensorT<float>, TensorT<float>>
linear_backward<float>(const TensorT<float>&, const TensorT<float>&,
                       const TensorT<float>&);
extern template std::pair<TensorT<double>, TensorT<double>>
linear_backward<double>(const TensorT<double>&, const TensorT<double>&,
                        const TensorT<double>&);
extern template TensorT<float> relu<float>(const TensorT<float>&);
extern template TensorT<double> relu<double>(const TensorT<double>&);
extern template TensorT<float> relu_backward<float>(const TensorT<float>&,
                                                    const TensorT<float>&);
extern template TensorT<double> relu_backward<double>(const TensorT<double>&,
                                                      const TensorT<double>&);
extern template TensorT<float> avgpool2x2<float>(const TensorT<float>&);
extern template TensorT<double> avgpool2x2<double>(const TensorT<double>&);
extern template TensorT<float> avgpool2x2_backward<float>(
    const TensorT<float>&, const std::vector<std::size_t>&);
extern template TensorT<double> avgpool2x2_backward<double>(
    const TensorT<double>&, const std::vector<std::size_t>&);
extern template TensorT<float> maxpool2x2<float>(const TensorT<float>&,
                                                 std::vector<std::uint32_t>*);
extern template TensorT<double> maxpool2x2<double>(const TensorT<double>&,
                                                   std::vector<std::uint32_t>*);
extern template TensorT<float> maxpool2x2_backward<float>(
    const TensorT<float>&, const std::vector<std::size_t>&,
    const std::vector<std::uint32_t>&);
extern template TensorT<double> maxpool2x2_backward<double>(
    const TensorT<double>&, const std::vector<std::size_t>&,
    const std::vector<std::uint32_t>&);
extern template TensorT<float> dropout<float>(const TensorT<float>&, float,
                                              std::uint64_t, std::uint64_t,
                                              std::uint64_t, bool);
extern template TensorT<double> dropout<double>(const TensorT<double>&, float,
                                                std::uint64_t, std::uint64_t,
                                                std::uint64_t, bool);
extern template TensorT<float> dropout_backward<float>(const TensorT<float>&,
                                                       float, std::uint64_t,
                                                       std::uint64_t,
                                                       std::uint64_t, bool);
extern template TensorT<double> dropout_backward<double>(
    const TensorT<double>&, float, std::uint64_t, std::uint64_t, std::uint64_t,
    bool);
extern template std::pair<float, TensorT<float>> softmax_xent<float>(
    const TensorT<float>&, const std::vector<std::uint32_t>&);
extern template std::pair<double, TensorT<double>> softmax_xent<double>(
    const TensorT<double>&, const std::vector<std::uint32_t>&);

}  // namespace bsnn
