#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bsnn/tensor.hpp"

namespace bsnn {

enum class LayerKind { Conv, Linear, ReLU, IF, AvgPool, MaxPool, Dropout, Flatten };
enum class ResetMode { SIF, RIF };
enum class GraphMode { ANN, SNN };
enum class ArchOption { AvgBefore, AvgAfter, MaxBefore, MaxAfter };

const char* to_string(LayerKind k);
const char* to_string(ResetMode m);
const char* to_string(GraphMode m);
const char* to_string(ArchOption o);
ArchOption arch_option_from_string(const std::string& s);

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;

    // Conv
    std::size_t in_planes = 0, out_planes = 0;
    std::size_t kh = 0, kw = 0, stride = 1, pad = 0;

    // Linear
    std::size_t in_size = 0, out_size = 0;

    // Dropout
    float rate = 0.0f;

    // IF
    ResetMode reset_mode = ResetMode::SIF;
    float v_th = 0.0f;

    bool binarized = false;
    bool is_first = false;
    bool is_last = false;

    bool has_weights() const {
        return kind == LayerKind::Conv || kind == LayerKind::Linear;
    }

    static LayerSpec conv(std::size_t cin, std::size_t cout, std::size_t k,
                          std::size_t stride, std::size_t pad);
    static LayerSpec dense(std::size_t in_size, std::size_t out_size);
    static LayerSpec relu();
    static LayerSpec ifnode(ResetMode mode, float v_th);
    static LayerSpec avgpool();
    static LayerSpec maxpool();
    static LayerSpec dropout(float rate);
    static LayerSpec flatten();
};

// Sequential layer IR. Immutable after construction by convention; the
// trainer mutates parameter tensors only.
struct ModelGraph {
    std::vector<LayerSpec> layers;
    // layer index -> parameter name -> tensor; bias entries are forbidden
    std::map<std::size_t, std::map<std::string, Tensor>> params;
    GraphMode mode = GraphMode::ANN;
    ArchOption arch_option = ArchOption::AvgBefore;
    // when set, layers flagged binarized run with alpha*sign(W) effective
    // weights; parameter tensors always hold the full-precision proxies
    bool binary_weights = false;
    std::size_t in_channels = 0, in_height = 0, in_width = 0;
    std::map<std::string, std::string> metadata;

    Tensor& weight(std::size_t layer);
    const Tensor& weight(std::size_t layer) const;

    // indices of Conv/Linear layers in order
    std::vector<std::size_t> weight_layers() const;
};

struct DepthConfig {
    std::size_t in_channels = 1;
    std::size_t image = 16;
    // channel widths per conv block; a pooling layer closes each block
    std::vector<std::vector<std::size_t>> conv_blocks;
    // classifier widths, last entry is the class count
    std::vector<std::size_t> linear_sizes;
    float dropout_rate = 0.1f;
    std::size_t kernel = 3;
    std::size_t pad = 1;

    static DepthConfig tiny(std::size_t classes = 4);
    static DepthConfig vgg15(std::size_t classes = 100, std::size_t image = 32,
                             std::size_t in_channels = 3);
};

// ANN-mode graph with the requested pooling/neuron ordering. Dropout follows
// every ReLU that is not directly followed by a pooling layer. Weight
// tensors are allocated zero-filled; see train::init_params.
ModelGraph build_network(ArchOption option, const DepthConfig& config);

// All ModelGraph invariant violations, empty when the graph is well formed.
std::vector<std::string> validate(const ModelGraph& graph);

// Per-layer output shapes (without the batch extent), input shape chained
// through every layer. Throws on an inconsistent chain.
std::vector<std::vector<std::size_t>> layer_output_shapes(const ModelGraph& graph);

}  // namespace bsnn
