#include "egir/gnn.hpp"

#include <cmath>
#include <type_traits>

namespace egir {

const char* activation_name(Activation act) {
    return act == Activation::Relu ? "relu" : "none";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "none") return Activation::None;
    throw Error("unknown activation '" + name + "' (expected relu|none)");
}

namespace {

void check_adjacency(const Tensor& a) {
    if (a.rank() != 2 || a.rows() != a.cols()) {
        throw TopologyError("adjacency must be square, got " + a.shape_str());
    }
    const int64_t n = a.rows();
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            double v = a.at(i, j);
            if (v != 0.0 && v != 1.0) {
                throw TopologyError("adjacency entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") is not binary");
            }
            if (i == j && v != 0.0) {
                throw TopologyError("adjacency diagonal must be zero (self-loops are added internally)");
            }
            if (a.at(i, j) != a.at(j, i)) {
                throw TopologyError("adjacency is not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
            }
        }
    }
}

} // namespace

NeighborSet NeighborSet::from_adjacency(const Tensor& adjacency) {
    check_adjacency(adjacency);
    const int64_t n = adjacency.rows();
    NeighborSet nb;
    nb.lists.resize(static_cast<size_t>(n));
    for (int64_t v = 0; v < n; ++v) {
        for (int64_t u = 0; u < n; ++u) {
            if (adjacency.at(v, u) == 1.0) nb.lists[static_cast<size_t>(v)].push_back(u);
        }
        // ascending u already; kept sorted for bit-exact determinism
    }
    return nb;
}

std::vector<int64_t> NeighborSet::csr_offsets() const {
    std::vector<int64_t> offsets;
    offsets.reserve(lists.size() + 1);
    int64_t acc = 0;
    offsets.push_back(0);
    for (const auto& l : lists) {
        acc += static_cast<int64_t>(l.size());
        offsets.push_back(acc);
    }
    return offsets;
}

std::vector<int64_t> NeighborSet::csr_indices() const {
    std::vector<int64_t> indices;
    for (const auto& l : lists) indices.insert(indices.end(), l.begin(), l.end());
    return indices;
}

NeighborSet NeighborSet::from_csr(const std::vector<int64_t>& offsets,
                                  const std::vector<int64_t>& indices) {
    if (offsets.empty() || offsets.front() != 0 ||
        offsets.back() != static_cast<int64_t>(indices.size())) {
        throw Error("malformed CSR neighbor encoding");
    }
    const int64_t n = static_cast<int64_t>(offsets.size()) - 1;
    NeighborSet nb;
    nb.lists.resize(static_cast<size_t>(n));
    for (int64_t v = 0; v < n; ++v) {
        int64_t begin = offsets[static_cast<size_t>(v)], end = offsets[static_cast<size_t>(v) + 1];
        if (begin > end) throw Error("malformed CSR neighbor encoding: offsets not monotone");
        for (int64_t i = begin; i < end; ++i) {
            int64_t u = indices[static_cast<size_t>(i)];
            if (u < 0 || u >= n) throw Error("CSR neighbor index out of range");
            if (u == v) throw Error("node " + std::to_string(v) + " lists itself as neighbor");
            nb.lists[static_cast<size_t>(v)].push_back(u);
        }
    }
    return nb;
}

GraphTopology GraphTopology::from_adjacency(const Tensor& adjacency) {
    GraphTopology t;
    t.adjacency = adjacency.dtype() == Dtype::F64 ? adjacency : adjacency.to(Dtype::F64);
    t.a_hat = gcn_normalize(t.adjacency);
    t.neighbors = NeighborSet::from_adjacency(t.adjacency);
    t.n_nodes = t.adjacency.rows();
    return t;
}

GraphTopology GraphTopology::fully_connected(int64_t n) {
    if (n < 1) throw TopologyError("topology needs at least one node");
    Tensor a = Tensor::zeros({n, n}, Dtype::F64);
    auto data = a.f64_mut();
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < n; ++j)
            if (i != j) data[static_cast<size_t>(i * n + j)] = 1.0;
    return from_adjacency(a);
}

Tensor gcn_normalize(const Tensor& adjacency) {
    check_adjacency(adjacency);
    const int64_t n = adjacency.rows();

    std::vector<double> degree(static_cast<size_t>(n), 0.0);
    for (int64_t i = 0; i < n; ++i) {
        double d = 1.0; // self-loop
        for (int64_t j = 0; j < n; ++j) d += adjacency.at(i, j);
        degree[static_cast<size_t>(i)] = d;
    }

    Tensor a_hat = Tensor::zeros({n, n}, Dtype::F64);
    auto out = a_hat.f64_mut();
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            double tilde = (i == j) ? 1.0 : adjacency.at(i, j);
            if (tilde != 0.0) {
                out[static_cast<size_t>(i * n + j)] =
                    tilde / std::sqrt(degree[static_cast<size_t>(i)] * degree[static_cast<size_t>(j)]);
            }
        }
    }
    return a_hat;
}

Tensor gcn_layer(const Tensor& a_hat, const Tensor& h, const Tensor& w, Activation act) {
    try {
        Tensor z = matmul(matmul(a_hat, h), w);
        return act == Activation::Relu ? relu(z) : z;
    } catch (const ShapeError& e) {
        throw ShapeError(std::string("gcn_layer: ") + e.what());
    }
}

Tensor aggregate_mean(const Tensor& h, const NeighborSet& neighbors) {
    if (h.rank() != 2) throw ShapeError("aggregate_mean expects rank-2 features, got " + h.shape_str());
    const int64_t n = h.rows(), d = h.cols();
    if (n != neighbors.n_nodes()) {
        throw ShapeError("aggregate_mean: " + std::to_string(n) + " feature rows vs " +
                         std::to_string(neighbors.n_nodes()) + " nodes");
    }
    Tensor out = Tensor::zeros({n, d}, h.dtype());
    // Sum neighbor rows in ascending index order, divide once: keeps the
    // kernel bit-identical to a per-node loop.
    auto run = [&](auto src, auto dst) {
        for (int64_t v = 0; v < n; ++v) {
            const auto& nbrs = neighbors.lists[static_cast<size_t>(v)];
            if (nbrs.empty()) {
                throw AggregationError("node " + std::to_string(v) + " has no neighbors to aggregate");
            }
            for (int64_t j = 0; j < d; ++j) {
                double acc = 0.0;
                for (int64_t u : nbrs) acc += static_cast<double>(src[static_cast<size_t>(u * d + j)]);
                using V = std::remove_reference_t<decltype(dst[0])>;
                dst[static_cast<size_t>(v * d + j)] = static_cast<V>(acc / static_cast<double>(nbrs.size()));
            }
        }
    };
    if (h.dtype() == Dtype::F32) {
        run(h.f32(), out.f32_mut());
    } else {
        run(h.f64(), out.f64_mut());
    }
    return out;
}

Tensor sage_round(const Tensor& h, const Tensor& w, const NeighborSet& neighbors, Activation act) {
    Tensor aggregated = aggregate_mean(h, neighbors);
    try {
        Tensor z = matmul(concat_cols(h, aggregated), w);
        return act == Activation::Relu ? relu(z) : z;
    } catch (const ShapeError& e) {
        throw ShapeError(std::string("sage_round: ") + e.what());
    }
}

OpKernel make_gcn_kernel() {
    return {kGcnOpType, 3, 3, 1, [](std::span<const Tensor> in, const AttrMap& attrs) {
                Activation act = activation_from_name(attr_string_or(attrs, "activation", "relu"));
                std::vector<Tensor> out;
                out.push_back(gcn_layer(in[1], in[0], in[2], act));
                return out;
            }};
}

OpKernel make_sage_kernel() {
    return {kSageOpType, 2, 2, 1, [](std::span<const Tensor> in, const AttrMap& attrs) {
                Activation act = activation_from_name(attr_string_or(attrs, "activation", "relu"));
                NeighborSet nb = NeighborSet::from_csr(attr_ints(attrs, "neighbor_offsets"),
                                                       attr_ints(attrs, "neighbor_indices"));
                std::vector<Tensor> out;
                out.push_back(sage_round(in[0], in[1], nb, act));
                return out;
            }};
}

void register_gnn_ops(OperatorRegistry& registry) {
    registry.register_op(make_gcn_kernel());
    registry.register_op(make_sage_kernel());
}

} // namespace egir
