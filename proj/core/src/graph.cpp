#include "bsnn/graph.hpp"

#include <stdexcept>

namespace bsnn {

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Conv: return "conv";
        case LayerKind::Linear: return "linear";
        case LayerKind::ReLU: return "relu";
        case LayerKind::IF: return "if";
        case LayerKind::AvgPool: return "avgpool";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::Flatten: return "flatten";
    }
    return "?";
}

const char* to_string(ResetMode m) {
    return m == ResetMode::SIF ? "sif" : "rif";
}

const char* to_string(GraphMode m) {
    return m == GraphMode::ANN ? "ann" : "snn";
}

const char* to_string(ArchOption o) {
    switch (o) {
        case ArchOption::AvgBefore: return "avg-before";
        case ArchOption::AvgAfter: return "avg-after";
        case ArchOption::MaxBefore: return "max-before";
        case ArchOption::MaxAfter: return "max-after";
    }
    return "?";
}

ArchOption arch_option_from_string(const std::string& s) {
    if (s == "avg-before") return ArchOption::AvgBefore;
    if (s == "avg-after") return ArchOption::AvgAfter;
    if (s == "max-before") return ArchOption::MaxBefore;
    if (s == "max-after") return ArchOption::MaxAfter;
    throw std::invalid_argument("unknown arch option: " + s);
}

LayerSpec LayerSpec::conv(std::size_t cin, std::size_t cout, std::size_t k,
                          std::size_t stride, std::size_t pad) {
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.in_planes = cin;
    l.out_planes = cout;
    l.kh = l.kw = k;
    l.stride = stride;
    l.pad = pad;
    return l;
}

LayerSpec LayerSpec::dense(std::size_t in_size, std::size_t out_size) {
    LayerSpec l;
    l.kind = LayerKind::Linear;
    l.in_size = in_size;
    l.out_size = out_size;
    return l;
}

LayerSpec LayerSpec::relu() {
    LayerSpec l;
    l.kind = LayerKind::ReLU;
    return l;
}

LayerSpec LayerSpec::ifnode(ResetMode mode, float v_th) {
    LayerSpec l;
    l.kind = LayerKind::IF;
    l.reset_mode = mode;
    l.v_th = v_th;
    return l;
}

LayerSpec LayerSpec::avgpool() {
    LayerSpec l;
    l.kind = LayerKind::AvgPool;
    return l;
}

LayerSpec LayerSpec::maxpool() {
    LayerSpec l;
    l.kind = LayerKind::MaxPool;
    return l;
}

LayerSpec LayerSpec::dropout(float rate) {
    LayerSpec l;
    l.kind = LayerKind::Dropout;
    l.rate = rate;
    return l;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec l;
    l.kind = LayerKind::Flatten;
    return l;
}

Tensor& ModelGraph::weight(std::size_t layer) {
    return params.at(layer).at("weight");
}

const Tensor& ModelGraph::weight(std::size_t layer) const {
    return params.at(layer).at("weight");
}

std::vector<std::size_t> ModelGraph::weight_layers() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].has_weights()) idx.push_back(i);
    return idx;
}

DepthConfig DepthConfig::tiny(std::size_t classes) {
    DepthConfig c;
    c.in_channels = 1;
    c.image = 16;
    c.conv_blocks = {{8}, {16}, {32}};
    c.linear_sizes = {64, classes};
    c.dropout_rate = 0.1f;
    return c;
}

DepthConfig DepthConfig::vgg15(std::size_t classes, std::size_t image,
                               std::size_t in_channels) {
    // VGG-16 convolution plan with one linear layer removed
    DepthConfig c;
    c.in_channels = in_channels;
    c.image = image;
    c.conv_blocks = {{64, 64},
                     {128, 128},
                     {256, 256, 256},
                     {512, 512, 512},
                     {512, 512, 512}};
    c.linear_sizes = {512, classes};
    c.dropout_rate = 0.5f;
    return c;
}

ModelGraph build_network(ArchOption option, const DepthConfig& config) {
    if (config.conv_blocks.empty() || config.linear_sizes.empty())
        throw std::invalid_argument("depth config needs conv blocks and linears");

    ModelGraph g;
    g.mode = GraphMode::ANN;
    g.arch_option = option;
    g.in_channels = config.in_channels;
    g.in_height = g.in_width = config.image;

    const bool pool_before =
        option == ArchOption::AvgBefore || option == ArchOption::MaxBefore;
    const bool avg =
        option == ArchOption::AvgBefore || option == ArchOption::AvgAfter;

    auto pool = [&] { return avg ? LayerSpec::avgpool() : LayerSpec::maxpool(); };

    std::size_t channels = config.in_channels;
    std::size_t image = config.image;
    for (const auto& block : config.conv_blocks) {
        for (std::size_t j = 0; j < block.size(); ++j) {
            g.layers.push_back(LayerSpec::conv(channels, block[j], config.kernel,
                                               1, config.pad));
            channels = block[j];
            const bool last_in_block = j + 1 == block.size();
            if (!last_in_block) {
                g.layers.push_back(LayerSpec::relu());
                g.layers.push_back(LayerSpec::dropout(config.dropout_rate));
                continue;
            }
            if (pool_before) {
                g.layers.push_back(pool());
                g.layers.push_back(LayerSpec::relu());
                g.layers.push_back(LayerSpec::dropout(config.dropout_rate));
            } else {
                g.layers.push_back(LayerSpec::relu());
                g.layers.push_back(pool());
            }
        }
        image /= 2;
    }

    g.layers.push_back(LayerSpec::flatten());
    std::size_t feat = channels * image * image;
    for (std::size_t j = 0; j < config.linear_sizes.size(); ++j) {
        g.layers.push_back(LayerSpec::dense(feat, config.linear_sizes[j]));
        feat = config.linear_sizes[j];
        if (j + 1 != config.linear_sizes.size()) {
            g.layers.push_back(LayerSpec::relu());
            g.layers.push_back(LayerSpec::dropout(config.dropout_rate));
        }
    }

    auto widx = g.weight_layers();
    for (std::size_t i : widx) {
        LayerSpec& l = g.layers[i];
        l.binarized = true;
        if (l.kind == LayerKind::Conv)
            g.params[i]["weight"] =
                Tensor({l.out_planes, l.in_planes, l.kh, l.kw});
        else
            g.params[i]["weight"] = Tensor({l.out_size, l.in_size});
    }
    g.layers[widx.front()].is_first = true;
    g.layers[widx.front()].binarized = false;
    g.layers[widx.back()].is_last = true;
    g.layers[widx.back()].binarized = false;

    auto errors = validate(g);
    if (!errors.empty())
        throw std::runtime_error("build_network produced invalid graph: " +
                                 errors.front());
    return g;
}

std::vector<std::vector<std::size_t>> layer_output_shapes(const ModelGraph& graph) {
    std::vector<std::vector<std::size_t>> shapes;
    shapes.reserve(graph.layers.size());
    bool flat = false;
    std::size_t c = graph.in_channels, h = graph.in_height, w = graph.in_width;
    std::size_t f = 0;
    for (std::size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const std::string at = " at layer " + std::to_string(i);
        switch (l.kind) {
            case LayerKind::Conv: {
                if (flat) throw std::runtime_error("conv after flatten" + at);
                if (l.in_planes != c)
                    throw std::runtime_error("conv input planes mismatch" + at);
                if (l.kh > h + 2 * l.pad || l.kw > w + 2 * l.pad)
                    throw std::runtime_error("conv kernel exceeds input" + at);
                std::size_t sh = h + 2 * l.pad - l.kh;
                std::size_t sw = w + 2 * l.pad - l.kw;
                if (l.stride < 1 || sh % l.stride || sw % l.stride)
                    throw std::runtime_error("conv non-exact output extent" + at);
                c = l.out_planes;
                h = sh / l.stride + 1;
                w = sw / l.stride + 1;
                break;
            }
            case LayerKind::Linear: {
                std::size_t cur = flat ? f : c * h * w;
                if (!flat && !(h == 1 && w == 1) && cur != l.in_size)
                    throw std::runtime_error("linear before flatten" + at);
                if (cur != l.in_size)
                    throw std::runtime_error("linear input size mismatch" + at);
                flat = true;
                f = l.out_size;
                break;
            }
            case LayerKind::AvgPool:
            case LayerKind::MaxPool: {
                if (flat) throw std::runtime_error("pool after flatten" + at);
                if (h % 2 || w % 2)
                    throw std::runtime_error("odd pooling extent" + at);
                h /= 2;
                w /= 2;
                break;
            }
            case LayerKind::Flatten: {
                if (!flat) {
                    f = c * h * w;
                    flat = true;
                }
                break;
            }
            case LayerKind::ReLU:
            case LayerKind::IF:
            case LayerKind::Dropout:
                break;
        }
        if (flat)
            shapes.push_back({f});
        else
            shapes.push_back({c, h, w});
    }
    return shapes;
}

std::vector<std::string> validate(const ModelGraph& graph) {
    std::vector<std::string> errors;
    auto fail = [&errors](const std::string& m) { errors.push_back(m); };

    if (graph.layers.empty()) {
        fail("graph has no layers");
        return errors;
    }
    if (graph.in_channels < 1 || graph.in_height < 1 || graph.in_width < 1)
        fail("input geometry unset");

    std::size_t firsts = 0, lasts = 0;
    for (std::size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const std::string at = " at layer " + std::to_string(i);
        if (l.is_first) {
            ++firsts;
            if (l.binarized) fail("first layer is binarized");
            if (!l.has_weights()) fail("is_first on layer without weights" + at);
        }
        if (l.is_last) {
            ++lasts;
            if (l.binarized) fail("last layer is binarized");
            if (!l.has_weights()) fail("is_last on layer without weights" + at);
        }
        if (l.kind == LayerKind::IF) {
            if (graph.mode == GraphMode::ANN) fail("IF layer in ANN-mode graph" + at);
            else if (!(l.v_th > 0.0f)) fail("missing threshold on IF layer" + at);
        }
        if (l.kind == LayerKind::ReLU && graph.mode == GraphMode::SNN)
            fail("ReLU in SNN-mode graph" + at);
        if (l.kind == LayerKind::Dropout && !(l.rate >= 0.0f && l.rate < 1.0f))
            fail("dropout rate out of range" + at);
    }
    if (firsts != 1) fail("expected exactly one is_first layer");
    if (lasts != 1) fail("expected exactly one is_last layer");

    auto widx = graph.weight_layers();
    if (!widx.empty()) {
        if (!graph.layers[widx.front()].is_first)
            fail("first weight layer lacks is_first");
        if (!graph.layers[widx.back()].is_last)
            fail("last weight layer lacks is_last");
    }

    for (const auto& [idx, named] : graph.params) {
        if (named.count("bias")) fail("bias present at layer " + std::to_string(idx));
        if (idx >= graph.layers.size()) {
            fail("parameters for out-of-range layer " + std::to_string(idx));
            continue;
        }
    }

    for (std::size_t i : widx) {
        const LayerSpec& l = graph.layers[i];
        auto it = graph.params.find(i);
        if (it == graph.params.end() || !it->second.count("weight")) {
            fail("missing weight tensor at layer " + std::to_string(i));
            continue;
        }
        const Tensor& w = it->second.at("weight");
        std::vector<std::size_t> want =
            l.kind == LayerKind::Conv
                ? std::vector<std::size_t>{l.out_planes, l.in_planes, l.kh, l.kw}
                : std::vector<std::size_t>{l.out_size, l.in_size};
        if (w.shape != want)
            fail("weight shape mismatch at layer " + std::to_string(i));
    }

    try {
        layer_output_shapes(graph);
    } catch (const std::exception& e) {
        fail(e.what());
    }
    return errors;
}

}  // namespace bsnn
