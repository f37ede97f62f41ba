#include "xtree/model_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "xtree/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "the model format stores little-endian numerics");

namespace xtree {

namespace {

constexpr char kMagic[] = "XTPLT";
constexpr int kVersion = 1;

template <typename T>
void put(std::string& buf, T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buf.append(raw, sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw std::runtime_error("model file truncated");
    T value;
    std::memcpy(&value, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

void put_node(std::string& buf, const NodeModel& node) {
    put<std::uint8_t>(buf, node.constant_positive ? 1 : 0);
    put<double>(buf, node.bias);
    put<std::uint64_t>(buf, node.updates);
    if (node.dense) {
        put<std::uint8_t>(buf, 1);
        put<std::uint32_t>(buf, static_cast<std::uint32_t>(node.w_dense.size()));
        for (double w : node.w_dense) put<double>(buf, w);
    } else {
        put<std::uint8_t>(buf, 0);
        std::vector<std::pair<std::uint32_t, double>> entries;
        entries.reserve(node.w_sparse.size());
        for (const auto& [idx, w] : node.w_sparse) {
            double value = node.scale * w;
            if (value != 0.0) entries.emplace_back(idx, value);
        }
        std::sort(entries.begin(), entries.end());
        put<std::uint32_t>(buf, static_cast<std::uint32_t>(entries.size()));
        for (const auto& [idx, value] : entries) {
            put<std::uint32_t>(buf, idx);
            put<double>(buf, value);
        }
    }
}

NodeModel get_node(const std::string& buf, std::size_t& pos) {
    NodeModel node;
    node.constant_positive = get<std::uint8_t>(buf, pos) != 0;
    node.bias = get<double>(buf, pos);
    node.updates = get<std::uint64_t>(buf, pos);
    node.dense = get<std::uint8_t>(buf, pos) != 0;
    auto count = get<std::uint32_t>(buf, pos);
    if (node.dense) {
        node.w_dense.resize(count);
        for (auto& w : node.w_dense) w = get<double>(buf, pos);
    } else {
        node.w_sparse.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            auto idx = get<std::uint32_t>(buf, pos);
            node.w_sparse[idx] = get<double>(buf, pos);
        }
    }
    return node;
}

}  // namespace

void save_model(std::ostream& out, const ModelBundle& bundle) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "algo " << (bundle.algo == Algo::Plt ? "plt" : "hsm") << '\n';
    out << "hyper " << bundle.hyper.size() << '\n';
    for (const auto& [key, value] : bundle.hyper) out << key << ' ' << value << '\n';
    bundle.tree.save(out);

    const Representation& r = bundle.repr;
    bool dense = r.kind == ReprKind::DenseEmbedding;
    bool tfidf = r.weighting == FeatureWeighting::Tfidf;
    out << "repr " << (dense ? "dense" : "sparse") << ' ' << r.input_dim << ' ' << r.dim << ' '
        << (tfidf ? "tfidf" : "uniform") << ' ' << (r.idf.empty() ? 0 : 1) << ' ' << r.updates
        << '\n';

    std::string blob;
    for (double v : r.idf) put<double>(blob, v);
    for (double v : r.embedding) put<double>(blob, v);
    for (const auto& node : bundle.nodes) put_node(blob, node);
    out << "binary " << blob.size() << '\n';
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

void save_model(const std::string& path, const ModelBundle& bundle) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    save_model(out, bundle);
}

ModelBundle load_model(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (!in || magic != kMagic) throw std::runtime_error("not an XTPLT model file");
    if (version != kVersion)
        throw std::runtime_error("unsupported model version " + std::to_string(version));

    ModelBundle bundle;
    std::string tag, value;
    in >> tag >> value;
    if (tag != "algo" || (value != "plt" && value != "hsm"))
        throw std::runtime_error("bad algo tag");
    bundle.algo = value == "plt" ? Algo::Plt : Algo::Hsm;

    std::size_t hyper_count = 0;
    in >> tag >> hyper_count;
    if (tag != "hyper") throw std::runtime_error("bad hyper block");
    for (std::size_t i = 0; i < hyper_count; ++i) {
        std::string k, v;
        in >> k >> v;
        bundle.hyper[k] = v;
    }

    bundle.tree = LabelTree::load(in);

    std::string kind, weighting;
    std::uint32_t input_dim = 0, dim = 0;
    int has_idf = 0;
    std::uint64_t repr_updates = 0;
    in >> tag >> kind >> input_dim >> dim >> weighting >> has_idf >> repr_updates;
    if (!in || tag != "repr") throw std::runtime_error("bad repr block");

    std::size_t blob_size = 0;
    in >> tag >> blob_size;
    if (!in || tag != "binary") throw std::runtime_error("bad binary block");
    in.get();  // consume the newline before the raw section
    std::string blob(blob_size, '\0');
    in.read(blob.data(), static_cast<std::streamsize>(blob_size));
    if (static_cast<std::size_t>(in.gcount()) != blob_size)
        throw std::runtime_error("model file truncated");

    std::size_t pos = 0;
    Representation repr;
    repr.kind = kind == "dense" ? ReprKind::DenseEmbedding : ReprKind::SparseDirect;
    repr.weighting = weighting == "tfidf" ? FeatureWeighting::Tfidf : FeatureWeighting::Uniform;
    repr.input_dim = input_dim;
    repr.dim = dim;
    repr.updates = repr_updates;
    if (has_idf) {
        repr.idf.resize(input_dim);
        for (auto& v : repr.idf) v = get<double>(blob, pos);
    }
    if (repr.kind == ReprKind::DenseEmbedding) {
        repr.embedding.resize(static_cast<std::size_t>(input_dim) * dim);
        for (auto& v : repr.embedding) v = get<double>(blob, pos);
    }
    bundle.repr = std::move(repr);

    bundle.nodes.reserve(bundle.tree.node_count());
    for (std::size_t i = 0; i < bundle.tree.node_count(); ++i)
        bundle.nodes.push_back(get_node(blob, pos));
    if (pos != blob.size()) throw std::runtime_error("trailing bytes in the binary section");
    return bundle;
}

ModelBundle load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_model(in);
}

ModelBundle bundle_plt(const PltModel& model, std::map<std::string, std::string> hyper) {
    return {Algo::Plt, model.tree, model.repr, model.nodes, std::move(hyper)};
}

ModelBundle bundle_hsm(const HsmModel& model, std::map<std::string, std::string> hyper) {
    return {Algo::Hsm, model.tree, model.repr, model.nodes, std::move(hyper)};
}

PltModel to_plt(ModelBundle bundle) {
    if (bundle.algo != Algo::Plt) throw std::runtime_error("model file holds an HSM model");
    PltModel m;
    m.tree = std::move(bundle.tree);
    m.repr = std::move(bundle.repr);
    m.nodes = std::move(bundle.nodes);
    return m;
}

HsmModel to_hsm(ModelBundle bundle) {
    if (bundle.algo != Algo::Hsm) throw std::runtime_error("model file holds a PLT model");
    HsmModel m;
    m.tree = std::move(bundle.tree);
    m.repr = std::move(bundle.repr);
    m.nodes = std::move(bundle.nodes);
    return m;
}

}  // namespace xtree
