#pragma once

#include <cstdint>
#include <vector>

#include "egir/registry.hpp"
#include "egir/tensor.hpp"

namespace egir {

enum class Activation { None, Relu };

const char* activation_name(Activation act);
Activation activation_from_name(const std::string& name);

/// Per-node sorted neighbor lists. Self is never its own neighbor; mean
/// aggregation runs over neighbors only, so every node must have at
/// least one once a SAGE model is built.
struct NeighborSet {
    std::vector<std::vector<int64_t>> lists;

    int64_t n_nodes() const { return static_cast<int64_t>(lists.size()); }

    /// From a symmetric binary zero-diagonal adjacency matrix.
    static NeighborSet from_adjacency(const Tensor& adjacency);

    /// CSR encoding used by the SageMeanOp attributes.
    std::vector<int64_t> csr_offsets() const;
    std::vector<int64_t> csr_indices() const;
    static NeighborSet from_csr(const std::vector<int64_t>& offsets,
                                const std::vector<int64_t>& indices);
};

/// Station graph plus the derived quantities both architectures need:
/// self-looped adjacency, degrees, the symmetric-normalized propagation
/// matrix, and neighbor lists.
struct GraphTopology {
    int64_t n_nodes = 0;
    Tensor adjacency;  // float64, {0,1}, zero diagonal
    Tensor a_hat;      // float64, normalized self-looped adjacency
    NeighborSet neighbors;

    static GraphTopology from_adjacency(const Tensor& adjacency);
    static GraphTopology fully_connected(int64_t n);
};

/// Symmetric normalization of a self-looped adjacency:
/// entry (i,j) of the result is A~_ij / sqrt(d_i * d_j) where A~ = A + I
/// and d is its row-sum degree vector. Computed in float64; exactly
/// symmetric by construction.
Tensor gcn_normalize(const Tensor& adjacency);

/// One graph-convolution layer: activation(a_hat * h * w), evaluated as
/// (a_hat * h) * w. Dtype follows the inputs (all three must agree).
Tensor gcn_layer(const Tensor& a_hat, const Tensor& h, const Tensor& w, Activation act);

/// Row v of the result is the mean of h's rows over v's neighbors,
/// accumulated in ascending neighbor order (sum first, divide once).
Tensor aggregate_mean(const Tensor& h, const NeighborSet& neighbors);

/// One mean-aggregate round: concat(self, neighbor-mean) through a
/// learned linear map and activation. w is [2D x D'].
Tensor sage_round(const Tensor& h, const Tensor& w, const NeighborSet& neighbors, Activation act);

/// Kernels for the two custom operators.
/// MyGcnOp:    inputs (X, A_hat, W), attr activation = "relu"|"none".
/// SageMeanOp: inputs (X, W), attrs activation, neighbor_offsets,
///             neighbor_indices (CSR int-lists).
OpKernel make_gcn_kernel();
OpKernel make_sage_kernel();
void register_gnn_ops(OperatorRegistry& registry);

inline constexpr const char* kGcnOpType = "MyGcnOp";
inline constexpr const char* kSageOpType = "SageMeanOp";

} // namespace egir
