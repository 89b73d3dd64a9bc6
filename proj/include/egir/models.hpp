#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "egir/gnn.hpp"
#include "egir/graph.hpp"

namespace egir {

enum class ArchKind { Gcn2, Sage2 };

const char* arch_name(ArchKind kind);
ArchKind arch_from_name(const std::string& name);

/// One of the two fixed forecasting architectures: n stations, a length-k
/// input window per station, prediction h steps ahead, hidden width d.
struct ArchSpec {
    ArchKind kind = ArchKind::Gcn2;
    int64_t n_stations = 3;
    int64_t input_window = 96;
    int64_t horizon = 96;
    int64_t hidden_dim = 64;
    GraphTopology topology;

    static ArchSpec make(ArchKind kind, int64_t n, int64_t k, int64_t h, int64_t d,
                         GraphTopology topology);
};

/// Learned tensors, float64. Layer shapes:
///   GCN2:  w1 [k x d],  w2 [d x d],  wm [(n*d) x n], bm [1 x n]
///   SAGE2: w1 [2k x d], w2 [2d x d], wm [(n*d) x n], bm [1 x n]
struct ModelParams {
    Tensor w1, w2, wm, bm;
};

/// Member-pointer table for iterating parameters by name (gradient
/// checks, optimizers, checkpoints).
const std::vector<std::pair<std::string, Tensor ModelParams::*>>& param_fields();

/// Per-station z-score statistics captured at training time.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> scale; // > 0
};

struct TrainedModel {
    ArchSpec spec;
    ModelParams params;
    NormStats norm;
    std::vector<double> capacities_kw;
    std::map<std::string, std::string> provenance;
    /// Bumped on every parameter update; forward caches pin it so a
    /// stale cache cannot feed backward().
    uint64_t revision = 0;
};

void check_params(const ArchSpec& spec, const ModelParams& params);

/// Lower to the portable IR: two MyGcnOp nodes over the baked A_hat
/// initializer, flatten, MLP head. Input X [n x k] declared batched.
ModelGraph build_gcn2(const ArchSpec& spec, const ModelParams& params);

/// Same head over two SageMeanOp rounds; neighbor lists travel as CSR
/// attributes. Rejects topologies with isolated nodes.
ModelGraph build_sage2(const ArchSpec& spec, const ModelParams& params);

/// Full export: dispatches on spec.kind and attaches normalization,
/// capacity and provenance metadata for the evaluation pipeline.
ModelGraph to_model_graph(const TrainedModel& model);

/// Float64 training checkpoint (JSON). The .egir export is float32; this
/// keeps full precision between `train` and `export`.
void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

/// Metadata keys the evaluation pipeline consumes.
NormStats norm_from_metadata(const std::map<std::string, std::string>& metadata, int64_t n);
std::vector<double> capacities_from_metadata(const std::map<std::string, std::string>& metadata,
                                             int64_t n);

} // namespace egir
