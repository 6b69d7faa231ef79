#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "bsnn/container.hpp"
#include "bsnn/graph.hpp"
#include "testutil.hpp"

using namespace bsnn;

namespace {

std::string read_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelGraph sample_model() {
    ModelGraph g = build_network(ArchOption::AvgBefore, DepthConfig::tiny());
    std::uint64_t c = 0;
    for (std::size_t i : g.weight_layers())
        for (float& v : g.weight(i).data)
            v = bsnn::rng::uniform(bsnn::rng::key(99, c++)) - 0.5f;
    g.metadata["note"] = "fixture";
    return g;
}

Dataset sample_dataset() {
    Dataset ds;
    ds.images = testutil::random_tensor<float>({6, 1, 4, 4}, 1234);
    ds.labels = {0, 1, 2, 3, 0, 1};
    ds.num_classes = 4;
    return ds;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path(std::string("bsnn_test_") + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

// rewrite a container with a mutated manifest, keeping framing consistent
std::string with_manifest(const std::string& bytes, const nlohmann::json& m) {
    std::string manifest = m.dump();
    std::uint64_t old_len = 0;
    for (int i = 0; i < 8; ++i)
        old_len |= static_cast<std::uint64_t>(
                       static_cast<unsigned char>(bytes[8 + i]))
                   << (8 * i);
    std::string out = bytes.substr(0, 8);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((manifest.size() >> (8 * i)) & 0xff));
    out += manifest;
    out += bytes.substr(16 + static_cast<std::size_t>(old_len));
    return out;
}

}  // namespace

TEST_CASE("model save/load/save is byte identical") {
    TempFile a("model_a.bsnn"), b("model_b.bsnn");
    ModelGraph g = sample_model();
    save_model(g, a.path);
    ModelGraph loaded = load_model(a.path);
    save_model(loaded, b.path);
    CHECK(read_bytes(a.path) == read_bytes(b.path));

    CHECK(loaded.mode == g.mode);
    CHECK(loaded.arch_option == g.arch_option);
    CHECK(loaded.layers.size() == g.layers.size());
    CHECK(loaded.metadata.at("note") == "fixture");
    for (std::size_t i : g.weight_layers())
        CHECK(loaded.weight(i).data == g.weight(i).data);
    CHECK(validate(loaded).empty());
}

TEST_CASE("corrupt magic is rejected") {
    TempFile a("model_magic.bsnn");
    save_model(sample_model(), a.path);
    std::string bytes = read_bytes(a.path);
    bytes[0] = 'X';
    write_bytes(a.path, bytes);
    CHECK_THROWS_WITH_AS(load_model(a.path),
                         doctest::Contains("not a BSNN container"),
                         std::runtime_error);
}

TEST_CASE("unsupported version is rejected") {
    TempFile a("model_ver.bsnn");
    save_model(sample_model(), a.path);
    std::string bytes = read_bytes(a.path);
    bytes[4] = 77;
    write_bytes(a.path, bytes);
    CHECK_THROWS_WITH_AS(load_model(a.path),
                         doctest::Contains("unsupported container version"),
                         std::runtime_error);
}

TEST_CASE("overlapping manifest offsets are rejected") {
    TempFile a("model_overlap.bsnn");
    save_model(sample_model(), a.path);
    std::string bytes = read_bytes(a.path);
    std::uint64_t mlen = 0;
    for (int i = 0; i < 8; ++i)
        mlen |= static_cast<std::uint64_t>(
                    static_cast<unsigned char>(bytes[8 + i]))
                << (8 * i);
    nlohmann::json m =
        nlohmann::json::parse(bytes.substr(16, static_cast<std::size_t>(mlen)));
    REQUIRE(m.at("tensors").size() >= 2);
    m["tensors"][1]["offset"] = m["tensors"][0]["offset"];
    write_bytes(a.path, with_manifest(bytes, m));
    CHECK_THROWS_WITH_AS(load_model(a.path), doctest::Contains("overlap"),
                         std::runtime_error);
}

TEST_CASE("truncated payload is rejected") {
    TempFile a("model_trunc.bsnn");
    save_model(sample_model(), a.path);
    std::string bytes = read_bytes(a.path);
    write_bytes(a.path, bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS(load_model(a.path));
}

TEST_CASE("dataset round-trips bitwise") {
    TempFile a("set_a.bsnd"), b("set_b.bsnd");
    Dataset ds = sample_dataset();
    save_dataset(ds, a.path);
    Dataset loaded = load_dataset(a.path);
    save_dataset(loaded, b.path);
    CHECK(read_bytes(a.path) == read_bytes(b.path));
    CHECK(loaded.images.data == ds.images.data);
    CHECK(loaded.labels == ds.labels);
    CHECK(loaded.num_classes == 4);
}

TEST_CASE("label exceeding class count is rejected") {
    Dataset ds = sample_dataset();
    ds.labels[2] = 9;
    TempFile a("set_badlabel.bsnd");
    CHECK_THROWS_WITH_AS(save_dataset(ds, a.path),
                         doctest::Contains("label exceeds class count"),
                         std::invalid_argument);

    // also rejected when smuggled into the file itself
    ds.labels[2] = 3;
    save_dataset(ds, a.path);
    std::string bytes = read_bytes(a.path);
    bytes[bytes.size() - 4 * 4] = 9;  // label[2] low byte
    write_bytes(a.path, bytes);
    CHECK_THROWS_WITH_AS(load_dataset(a.path),
                         doctest::Contains("label exceeds class count"),
                         std::runtime_error);
}

TEST_CASE("empty dataset is rejected") {
    Dataset ds;
    ds.images = Tensor({1, 1, 2, 2});
    ds.labels = {};
    ds.num_classes = 4;
    TempFile a("set_empty.bsnd");
    CHECK_THROWS_WITH_AS(save_dataset(ds, a.path),
                         doctest::Contains("empty dataset"),
                         std::invalid_argument);
}

TEST_CASE("dataset magic differs from model magic") {
    TempFile a("set_magic.bsnd");
    save_dataset(sample_dataset(), a.path);
    CHECK_THROWS_WITH_AS(load_model(a.path),
                         doctest::Contains("not a BSNN container"),
                         std::runtime_error);
}
