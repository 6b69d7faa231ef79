#include "bsnn/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace bsnn {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed endian platforms unsupported");

template <typename U>
void put_le(std::string& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename U>
U get_le(const std::string& buf, std::size_t off) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
        v |= static_cast<U>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
    return v;
}

void append_f32(std::string& out, const float* p, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        out.append(reinterpret_cast<const char*>(p), n * 4);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            put_le(out, std::bit_cast<std::uint32_t>(p[i]));
    }
}

void append_u32(std::string& out, const std::uint32_t* p, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        out.append(reinterpret_cast<const char*>(p), n * 4);
    } else {
        for (std::size_t i = 0; i < n; ++i) put_le(out, p[i]);
    }
}

void read_f32(const std::string& buf, std::size_t off, float* p, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(p, buf.data() + off, n * 4);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            p[i] = std::bit_cast<float>(get_le<std::uint32_t>(buf, off + 4 * i));
    }
}

void read_u32(const std::string& buf, std::size_t off, std::uint32_t* p,
              std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(p, buf.data() + off, n * 4);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            p[i] = get_le<std::uint32_t>(buf, off + 4 * i);
    }
}

void write_container(const std::string& path, const char magic[4],
                     const std::string& manifest, const std::string& payload) {
    std::string out;
    out.reserve(16 + manifest.size() + payload.size());
    out.append(magic, 4);
    put_le<std::uint32_t>(out, kContainerVersion);
    put_le<std::uint64_t>(out, manifest.size());
    out += manifest;
    out += payload;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

struct RawContainer {
    json manifest;
    std::string payload;
};

RawContainer read_container(const std::string& path, const char magic[4],
                            const char* what) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for read: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    if (buf.size() < 16 || std::memcmp(buf.data(), magic, 4) != 0)
        throw std::runtime_error(std::string("not a ") + what + " container: " +
                                 path);
    std::uint32_t version = get_le<std::uint32_t>(buf, 4);
    if (version != kContainerVersion)
        throw std::runtime_error("unsupported container version " +
                                 std::to_string(version));
    std::uint64_t mlen = get_le<std::uint64_t>(buf, 8);
    if (16 + mlen > buf.size())
        throw std::runtime_error("truncated manifest: " + path);
    RawContainer rc;
    rc.manifest = json::parse(buf.substr(16, mlen));
    rc.payload = buf.substr(16 + static_cast<std::size_t>(mlen));
    return rc;
}

// offsets must tile the payload exactly: ascending, no overlap, no tail slack
void check_extents(std::vector<std::pair<std::uint64_t, std::uint64_t>> extents,
                   std::size_t payload_size) {
    std::sort(extents.begin(), extents.end());
    std::uint64_t cursor = 0;
    for (auto [off, bytes] : extents) {
        if (off < cursor) throw std::runtime_error("manifest offset overlap");
        if (off != cursor) throw std::runtime_error("payload gap in manifest");
        cursor = off + bytes;
    }
    if (cursor != payload_size)
        throw std::runtime_error("payload length mismatch (truncated container?)");
}

json layer_to_json(const LayerSpec& l) {
    json j;
    j["kind"] = to_string(l.kind);
    switch (l.kind) {
        case LayerKind::Conv:
            j["in_planes"] = l.in_planes;
            j["out_planes"] = l.out_planes;
            j["kh"] = l.kh;
            j["kw"] = l.kw;
            j["stride"] = l.stride;
            j["pad"] = l.pad;
            break;
        case LayerKind::Linear:
            j["in_size"] = l.in_size;
            j["out_size"] = l.out_size;
            break;
        case LayerKind::Dropout:
            j["rate"] = l.rate;
            break;
        case LayerKind::IF:
            j["reset_mode"] = to_string(l.reset_mode);
            j["v_th"] = l.v_th;
            break;
        default:
            break;
    }
    if (l.has_weights()) {
        j["binarized"] = l.binarized;
        j["is_first"] = l.is_first;
        j["is_last"] = l.is_last;
    }
    return j;
}

LayerSpec layer_from_json(const json& j) {
    LayerSpec l;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "conv") {
        l = LayerSpec::conv(j.at("in_planes"), j.at("out_planes"), 1,
                            j.at("stride"), j.at("pad"));
        l.kh = j.at("kh");
        l.kw = j.at("kw");
    } else if (kind == "linear") {
        l = LayerSpec::dense(j.at("in_size"), j.at("out_size"));
    } else if (kind == "relu") {
        l = LayerSpec::relu();
    } else if (kind == "if") {
        l = LayerSpec::ifnode(j.at("reset_mode") == "rif" ? ResetMode::RIF
                                                          : ResetMode::SIF,
                              j.at("v_th").get<float>());
    } else if (kind == "avgpool") {
        l = LayerSpec::avgpool();
    } else if (kind == "maxpool") {
        l = LayerSpec::maxpool();
    } else if (kind == "dropout") {
        l = LayerSpec::dropout(j.at("rate").get<float>());
    } else if (kind == "flatten") {
        l = LayerSpec::flatten();
    } else {
        throw std::runtime_error("unknown layer kind in manifest: " + kind);
    }
    if (l.has_weights()) {
        l.binarized = j.at("binarized").get<bool>();
        l.is_first = j.at("is_first").get<bool>();
        l.is_last = j.at("is_last").get<bool>();
    }
    return l;
}

}  // namespace

void save_model(const ModelGraph& graph, const std::string& path) {
    json manifest;
    manifest["mode"] = to_string(graph.mode);
    manifest["arch_option"] = to_string(graph.arch_option);
    manifest["input"] = {{"channels", graph.in_channels},
                         {"height", graph.in_height},
                         {"width", graph.in_width}};
    json layers = json::array();
    for (const LayerSpec& l : graph.layers) layers.push_back(layer_to_json(l));
    manifest["layers"] = layers;

    std::string payload;
    json tensors = json::array();
    for (const auto& [idx, named] : graph.params)
        for (const auto& [name, t] : named) {
            json entry;
            entry["layer"] = idx;
            entry["name"] = name;
            entry["shape"] = t.shape;
            entry["offset"] = payload.size();
            entry["bytes"] = t.size() * 4;
            tensors.push_back(entry);
            append_f32(payload, t.data.data(), t.size());
        }
    manifest["tensors"] = tensors;
    manifest["metadata"] = graph.metadata;

    write_container(path, "BSNN", manifest.dump(), payload);
}

ModelGraph load_model(const std::string& path) {
    RawContainer rc = read_container(path, "BSNN", "BSNN");
    const json& m = rc.manifest;

    ModelGraph g;
    g.mode = m.at("mode") == "snn" ? GraphMode::SNN : GraphMode::ANN;
    g.arch_option = arch_option_from_string(m.at("arch_option"));
    g.in_channels = m.at("input").at("channels");
    g.in_height = m.at("input").at("height");
    g.in_width = m.at("input").at("width");
    for (const json& jl : m.at("layers")) g.layers.push_back(layer_from_json(jl));
    if (m.contains("metadata"))
        g.metadata = m.at("metadata").get<std::map<std::string, std::string>>();

    std::vector<std::pair<std::uint64_t, std::uint64_t>> extents;
    for (const json& jt : m.at("tensors")) {
        std::size_t layer = jt.at("layer");
        std::string name = jt.at("name");
        std::vector<std::size_t> shape =
            jt.at("shape").get<std::vector<std::size_t>>();
        std::uint64_t offset = jt.at("offset");
        std::uint64_t bytes = jt.at("bytes");
        Tensor t(shape);
        if (bytes != t.size() * 4)
            throw std::runtime_error("tensor byte size mismatch in manifest");
        if (offset + bytes > rc.payload.size())
            throw std::runtime_error("tensor extends past payload (truncated?)");
        read_f32(rc.payload, static_cast<std::size_t>(offset), t.data.data(),
                 t.size());
        g.params[layer][name] = std::move(t);
        extents.emplace_back(offset, bytes);
    }
    check_extents(std::move(extents), rc.payload.size());
    return g;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    if (ds.images.rank() != 4)
        throw std::invalid_argument("dataset images must be [N,C,H,W]");
    const std::size_t n = ds.images.extent(0);
    if (n == 0 || ds.labels.empty()) throw std::invalid_argument("empty dataset");
    if (ds.labels.size() != n)
        throw std::invalid_argument("label count != image count");
    if (ds.num_classes < 2) throw std::invalid_argument("need >= 2 classes");
    for (std::uint32_t l : ds.labels)
        if (l >= ds.num_classes)
            throw std::invalid_argument("label exceeds class count");

    std::string payload;
    append_f32(payload, ds.images.data.data(), ds.images.size());
    const std::uint64_t labels_off = payload.size();
    append_u32(payload, ds.labels.data(), ds.labels.size());

    json manifest;
    manifest["classes"] = ds.num_classes;
    manifest["images"] = {{"shape", ds.images.shape},
                          {"offset", 0},
                          {"bytes", ds.images.size() * 4}};
    manifest["labels"] = {{"count", ds.labels.size()},
                          {"offset", labels_off},
                          {"bytes", ds.labels.size() * 4}};
    write_container(path, "BSND", manifest.dump(), payload);
}

Dataset load_dataset(const std::string& path) {
    RawContainer rc = read_container(path, "BSND", "BSND");
    const json& m = rc.manifest;

    Dataset ds;
    ds.num_classes = m.at("classes");
    std::vector<std::size_t> shape =
        m.at("images").at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 4) throw std::runtime_error("dataset images must be 4-d");
    std::uint64_t img_off = m.at("images").at("offset");
    std::uint64_t img_bytes = m.at("images").at("bytes");
    std::size_t count = m.at("labels").at("count");
    std::uint64_t lab_off = m.at("labels").at("offset");
    std::uint64_t lab_bytes = m.at("labels").at("bytes");

    if (count == 0 || shape[0] == 0) throw std::runtime_error("empty dataset");
    if (count != shape[0]) throw std::runtime_error("label count != image count");

    ds.images = Tensor(shape);
    if (img_bytes != ds.images.size() * 4 || lab_bytes != count * 4)
        throw std::runtime_error("dataset byte size mismatch in manifest");
    if (img_off + img_bytes > rc.payload.size() ||
        lab_off + lab_bytes > rc.payload.size())
        throw std::runtime_error("dataset extends past payload (truncated?)");
    check_extents({{img_off, img_bytes}, {lab_off, lab_bytes}},
                  rc.payload.size());

    read_f32(rc.payload, static_cast<std::size_t>(img_off),
             ds.images.data.data(), ds.images.size());
    ds.labels.resize(count);
    read_u32(rc.payload, static_cast<std::size_t>(lab_off), ds.labels.data(),
             count);
    for (std::uint32_t l : ds.labels)
        if (l >= ds.num_classes)
            throw std::runtime_error("label exceeds class count");
    return ds;
}

}  // namespace bsnn
