#pragma once

#include <map>
#include <string>
#include <vector>

#include "egir/graph.hpp"
#include "egir/registry.hpp"

namespace egir {

/// Batched: one pass over the node list; each node consumes the whole
/// batch (the executor maps batched values through the per-sample kernel
/// slice by slice before moving to the next node).
/// Serialized: the whole graph runs once per sample and the per-sample
/// outputs are concatenated along the batch dim in input batch order.
enum class ExecMode { Batched, Serialized };

const char* exec_mode_name(ExecMode mode);

/// Operator types the graph references but the registry lacks, sorted
/// and deduplicated. Loading tolerates these; execution does not.
std::vector<std::string> missing_operators(const ModelGraph& model,
                                           const OperatorRegistry& registry);

/// Runs the graph. `feeds` must cover every declared input; fed tensors
/// are converted to the declared input dtype at the boundary. Inputs
/// declared `batched` must carry one extra leading dimension B >= 1,
/// identical across all batched inputs. Returns one tensor per declared
/// graph output (batched outputs keep the leading B).
///
/// Throws UnknownOperatorError before evaluating anything if any node's
/// op_type is unregistered; shape errors during evaluation name the node
/// and its op_type.
std::map<std::string, Tensor> execute(const ModelGraph& model,
                                      const OperatorRegistry& registry,
                                      const std::map<std::string, Tensor>& feeds,
                                      ExecMode mode = ExecMode::Batched);

} // namespace egir
