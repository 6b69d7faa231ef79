#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bsnn/graph.hpp"

using namespace bsnn;

namespace {

std::vector<LayerKind> kinds(const ModelGraph& g) {
    std::vector<LayerKind> k;
    for (const auto& l : g.layers) k.push_back(l.kind);
    return k;
}

// first index of the pattern within the layer kind sequence, or npos
std::size_t find_pattern(const std::vector<LayerKind>& seq,
                         const std::vector<LayerKind>& pat) {
    if (pat.size() > seq.size()) return static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i + pat.size() <= seq.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < pat.size(); ++j)
            if (seq[i + j] != pat[j]) {
                ok = false;
                break;
            }
        if (ok) return i;
    }
    return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("AvgBefore ordering: Conv AvgPool ReLU") {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::tiny());
    auto seq = kinds(g);
    CHECK(find_pattern(seq, {LayerKind::Conv, LayerKind::AvgPool,
                             LayerKind::ReLU}) != static_cast<std::size_t>(-1));
    CHECK(find_pattern(seq, {LayerKind::MaxPool}) == static_cast<std::size_t>(-1));
}

TEST_CASE("MaxAfter ordering: Conv ReLU MaxPool") {
    ModelGraph g = build_network(ArchOption::MaxAfter, DepthConfig::tiny());
    auto seq = kinds(g);
    CHECK(find_pattern(seq, {LayerKind::Conv, LayerKind::ReLU,
                             LayerKind::MaxPool}) != static_cast<std::size_t>(-1));
}

TEST_CASE("MaxBefore ordering: Conv MaxPool ReLU") {
    ModelGraph g = build_network(ArchOption::MaxBefore, DepthConfig::tiny());
    auto seq = kinds(g);
    CHECK(find_pattern(seq, {LayerKind::Conv, LayerKind::MaxPool,
                             LayerKind::ReLU}) != static_cast<std::size_t>(-1));
}

TEST_CASE("AvgAfter ordering: Conv ReLU AvgPool") {
    ModelGraph g = build_network(ArchOption::AvgAfter, DepthConfig::tiny());
    auto seq = kinds(g);
    CHECK(find_pattern(seq, {LayerKind::Conv, LayerKind::ReLU,
                             LayerKind::AvgPool}) != static_cast<std::size_t>(-1));
}

TEST_CASE("dropout follows ReLUs not followed by pooling") {
    ModelGraph g = build_network(ArchOption::AvgAfter,
                                 DepthConfig{.conv_blocks = {{8, 8}, {16}},
                                             .linear_sizes = {32, 4}});
    for (std::size_t i = 0; i + 1 < g.layers.size(); ++i) {
        if (g.layers[i].kind != LayerKind::ReLU) continue;
        LayerKind next = g.layers[i + 1].kind;
        if (next == LayerKind::AvgPool || next == LayerKind::MaxPool)
            continue;
        CHECK(next == LayerKind::Dropout);
    }
}

TEST_CASE("vgg15 preset has 13 conv and 2 linear layers") {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::vgg15());
    std::size_t convs = 0, linears = 0;
    for (const auto& l : g.layers) {
        if (l.kind == LayerKind::Conv) ++convs;
        if (l.kind == LayerKind::Linear) ++linears;
    }
    CHECK(convs == 13);
    CHECK(linears == 2);
    CHECK(validate(g).empty());
}

TEST_CASE("first and last weight layers are full precision") {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::tiny());
    auto widx = g.weight_layers();
    CHECK(g.layers[widx.front()].is_first);
    CHECK_FALSE(g.layers[widx.front()].binarized);
    CHECK(g.layers[widx.back()].is_last);
    CHECK_FALSE(g.layers[widx.back()].binarized);
    for (std::size_t i = 1; i + 1 < widx.size(); ++i)
        CHECK(g.layers[widx[i]].binarized);
}

TEST_CASE("validate(build_network) is ok for every arch option") {
    for (ArchOption opt : {ArchOption::AvgBefore, ArchOption::AvgAfter,
                           ArchOption::MaxBefore, ArchOption::MaxAfter}) {
        ModelGraph g = build_network(opt, DepthConfig::tiny());
        CHECK(validate(g).empty());
    }
}

TEST_CASE("validate flags a bias tensor") {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::tiny());
    std::size_t first_w = g.weight_layers().front();
    g.params[first_w]["bias"] = Tensor({8});
    auto errors = validate(g);
    REQUIRE_FALSE(errors.empty());
    bool found = false;
    for (const auto& e : errors)
        if (e.find("bias present") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validate flags IF in ANN-mode graph") {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::tiny());
    g.layers.insert(g.layers.begin() + 2, LayerSpec::ifnode(ResetMode::SIF, 1.0f));
    auto errors = validate(g);
    REQUIRE_FALSE(errors.empty());
    bool found = false;
    for (const auto& e : errors)
        if (e.find("IF layer in ANN-mode") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validate flags missing threshold in SNN mode") {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::tiny());
    g.mode = GraphMode::SNN;
    // replace ReLUs with thresholdless IF nodes
    for (auto& l : g.layers)
        if (l.kind == LayerKind::ReLU) l = LayerSpec::ifnode(ResetMode::SIF, 0.0f);
    auto errors = validate(g);
    REQUIRE_FALSE(errors.empty());
    bool found = false;
    for (const auto& e : errors)
        if (e.find("missing threshold") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validate flags broken shape chain") {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::tiny());
    std::size_t first_w = g.weight_layers().front();
    g.layers[first_w].out_planes += 1;  // weight tensor no longer matches
    CHECK_FALSE(validate(g).empty());
}

TEST_CASE("layer_output_shapes chains geometry") {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::tiny());
    auto shapes = layer_output_shapes(g);
    REQUIRE(shapes.size() == g.layers.size());
    // final layer emits the class count
    CHECK(shapes.back() == std::vector<std::size_t>{4});
    // first conv preserves 16x16 under pad 1
    CHECK(shapes.front() == std::vector<std::size_t>{8, 16, 16});
}
